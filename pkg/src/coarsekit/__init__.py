"""Finite coarse geometry on weighted box spaces.

Relations and labels, finite-propagation operators, localization ratios,
boundary ratios of weighted weak expanders, Følner certificates from level
sets and property A vector families, all with brute-force checkable output.
"""

__version__ = "0.1.0"

from .boxspace import (
    BoxSpace,
    Point,
    Relation,
    WeightedComponent,
    ball,
    compose,
    diagonal,
    empty_relation,
    full_relation,
    inverse,
    is_bounded,
    max_degree,
    power,
    widen,
)
from .folner import PairFunction, extract_folner, folner_search, invariance_defect, measure_cs, measure_ct
from .label import Label, build_label, verify_label
from .onlp import extract_weights, localization_ratio, verify_witness_inequality, witness_pipeline
from .propa import VectorFamily, ball_average_family, certificate_quality, heat_family
from .roeop import PropagationOperator, compressed_norm, markov_operator, operator_norm
from .wwexpander import min_boundary_ratio, ww_scan, ww_verdict
