"""Command line entry point.

Exit codes: 0 when a verdict or certificate was produced, 2 when the search
ran cleanly but found no certificate, 1 on any error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

from .. import __version__
from ..boxspace import Relation, diagonal, distance_layers, max_degree, widen
from ..errors import CoarseKitError
from ..folner import folner_search
from ..label import build_label, greedy_bound, verify_label
from ..onlp import DEFAULT_CONSTANT, localization_ratio, witness_pipeline
from ..propa import ball_average_family, certificate_quality, heat_family
from ..roeop import PropagationOperator, from_relation, markov_operator, multiply, operator_norm
from ..wwexpander import tail_window, ww_scan, ww_verdict
from . import generators, spacefile
from .report import build_report, dumps, file_digest, tagged

EXIT_OK, EXIT_ERROR, EXIT_NO_CERTIFICATE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser, radius_default: int | None = None, f_depth_default: int = 1) -> None:
    p.add_argument("spacefile", help="path to a space file")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--c", type=float, default=0.1)
    p.add_argument("--radius", type=int, default=radius_default)
    p.add_argument("--cap", type=int, default=22, help="largest ball enumerated in exact mode")
    p.add_argument("--mode", choices=("exact", "heuristic", "flow"), default="exact")
    p.add_argument("--f-depth", type=int, default=f_depth_default, dest="f_depth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kernel", choices=("tent", "heat"), default="tent")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-ball", type=float, default=0.5, dest="max_ball",
                   help="folner: largest admissible weight of a certificate ball (<= 0 disables)")
    p.add_argument("--out", help="write the report here instead of standard output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coarsekit", description="Finite coarse-geometry certificates on box spaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a space file for a built-in family")
    gen.add_argument("family", choices=("cycles", "torus", "margulis", "random-regular"))
    gen.add_argument("sizes", type=int, nargs="+", help="component sizes (sides for torus and margulis)")
    gen.add_argument("--degree", type=int, default=3)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out")

    for name, radius, helptext in (
        ("label", None, "label the generator relation"),
        ("norms", 1, "operator norms of adjacency and Markov powers"),
        ("onlp", 2, "localization ratios of a Markov power"),
        ("wwexpander", None, "boundary ratios over widened F"),
        ("folner", 16, "search Følner certificates (radius = largest kernel radius)"),
        ("propa", 4, "property A vector families"),
        ("pipeline", 2, "localization, witness weights, expansion check"),
    ):
        _add_common(sub.add_parser(name, help=helptext), radius, {"wwexpander": 3, "pipeline": 0}.get(name, 1))
    return parser


def _bounding(T: Relation, depth: int) -> Relation:
    return widen(T, depth) if depth >= 1 else diagonal(T.space)


def _markov_power(T: Relation, k: int) -> PropagationOperator:
    if k < 1:
        raise ValueError("--radius must be at least 1")
    base = markov_operator(T)
    a = base
    for _ in range(k - 1):
        a = multiply(a, base)
    return a


def _map(fn, items, jobs):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _cmd_label(args, sf, T, W):
    L = build_label(T)
    results = []
    for m in range(T.space.n_components):
        Tm = T.restrict([m])
        used = sum(1 for c in L.classes[1:] if c.count(m))
        results.append({"component": m, "classes": tagged(used, "exact"),
                        "max_degree": tagged(max_degree(Tm), "exact"),
                        "bound": tagged(greedy_bound(Tm), "exact")})
    ok = verify_label(L)
    return results, ("certified" if ok else "refuted"), EXIT_OK if ok else EXIT_ERROR, {"label_classes": L.k}


def _cmd_norms(args, sf, T, W):
    adj = operator_norm(from_relation(T))
    mk = operator_norm(_markov_power(T, args.radius))
    results = [{"component": m, "adjacency_norm": tagged(adj[m], "numeric"),
                "markov_power_norm": tagged(mk[m], "numeric")} for m in range(T.space.n_components)]
    return results, "evidence-only", EXIT_OK, {}


def _cmd_onlp(args, sf, T, W):
    a = _markov_power(T, args.radius)
    F = _bounding(T, args.f_depth)

    def job(m):
        rep = localization_ratio(a, F, component=m)
        return {"component": m, "operator_norm": tagged(rep.operator_norm, "numeric"),
                "ratio": tagged(rep.best_ratio, "numeric"), "best_center": rep.best_ball_center.index,
                "below_constant": rep.best_ratio < DEFAULT_CONSTANT}

    return _map(job, range(T.space.n_components), args.jobs), "evidence-only", EXIT_OK, {"constant": DEFAULT_CONSTANT}


def _cmd_wwexpander(args, sf, T, W):
    depths = range(1, args.f_depth + 1) if args.f_depth >= 1 else [0]
    reports = ww_scan(T.space, W, T, [_bounding(T, d) for d in depths], args.c,
                      mode=args.mode, cap=args.cap, jobs=args.jobs)
    results = []
    for d, rep in zip(depths, reports):
        results.append({
            "f_depth": d,
            "per_component": [{"component": m, "min_ratio": tagged(r, rep.mode), "argmin": list(Y)}
                              for m, r, Y in rep.per_component],
            "tail_min": tagged(rep.tail_min, rep.mode),
            "consistent": rep.consistent,
        })
    verdict = ww_verdict(reports)
    return results, verdict, EXIT_OK, {"ww_condition": verdict != "refuted",
                                       "tail_window": list(tail_window(T.space.n_components))}


def _band_depth(T: Relation, F: Relation, radius: int):
    for s, layer in enumerate(distance_layers(T, radius)):
        if F <= layer:
            return s
    return None


def _cmd_folner(args, sf, T, W):
    max_ball = args.max_ball if args.max_ball > 0 else None
    radii = range(1, args.radius + 1)

    def job(m):
        return folner_search(m, T, None, args.eps, W[m], kernel=args.kernel, radii=radii, max_ball_mass=max_ball)

    outcomes = _map(job, range(T.space.n_components), args.jobs)
    results, ok = [], True
    for m, (res, radius) in enumerate(outcomes):
        if res.success:
            _, thr, mass_F, mass_TF = res.per_component[0]
            results.append({"component": m, "success": True, "radius": radius,
                            "threshold": tagged(thr, "exact"), "mass_F": tagged(mass_F, "exact"),
                            "mass_TF": tagged(mass_TF, "exact"), "ratio": tagged(mass_TF / mass_F, "exact"),
                            "pairs": res.F.count(m), "band_depth": _band_depth(T.restrict([m]), res.F, radius)})
        else:
            ok = False
            results.append({"component": m, "success": False, "radius": radius,
                            "best_ratio": tagged(res.best_ratio, "exact")})
    verdict = "certified" if ok else "evidence-only"
    return results, verdict, EXIT_OK if ok else EXIT_NO_CERTIFICATE, {"max_ball_mass": max_ball}


def _cmd_propa(args, sf, T, W):
    L = build_label(T) if args.kernel == "heat" else None
    results, ok = [], True
    for m in range(T.space.n_components):
        fam = heat_family(m, L, args.radius) if L is not None else ball_average_family(m, T, args.radius)
        eps, support = certificate_quality(fam, T)
        passed = eps < args.eps
        ok &= passed
        results.append({"component": m, "epsilon": tagged(eps, "exact"), "passed": passed,
                        "support_pairs": support.count(m),
                        "support_max_ball": int(fam.rows.getnnz(axis=1).max())})
    return results, ("certified" if ok else "evidence-only"), EXIT_OK if ok else EXIT_NO_CERTIFICATE, {}


def _cmd_pipeline(args, sf, T, W):
    a = _markov_power(T, args.radius)
    F = _bounding(T, args.f_depth)

    def job(m):
        return witness_pipeline(a, F, m, mode=args.mode, cap=args.cap)

    runs = _map(job, range(T.space.n_components), args.jobs)
    results, witness_min = [], {}
    for run in runs:
        row = {"component": run.component, "ratio": tagged(run.localization.best_ratio, "numeric"),
               "triggered": run.triggered}
        if run.triggered:
            rep = run.witness
            row.update({"eigenvalue": tagged(run.weights.source_eigenvalue, "numeric"),
                        "support": len(run.weights.support),
                        "witness_min_ratio": tagged(rep.min_ratio, rep.mode),
                        "witness_argmin": list(rep.argmin), "threshold": rep.threshold, "holds": rep.holds})
            witness_min[run.component] = rep.min_ratio
        results.append(row)
    if not witness_min:
        return results, "evidence-only", EXIT_NO_CERTIFICATE, {}
    tail = [m for m in tail_window(T.space.n_components) if m in witness_min]
    tail_min = min(witness_min[m] for m in tail) if tail else None
    extra = {"ww": {"c": args.c, "tail_min": None if tail_min is None else tagged(tail_min, args.mode),
                    "consistent": None if tail_min is None else tail_min > 1 + args.c}}
    if any(not r["holds"] for r in results if r["triggered"]):
        verdict = "refuted"
    elif len(witness_min) == len(runs) and args.mode != "heuristic":
        verdict = "certified"
    else:
        verdict = "evidence-only"
    return results, verdict, EXIT_OK, extra



_COMMANDS = {
    "label": _cmd_label,
    "norms": _cmd_norms,
    "onlp": _cmd_onlp,
    "wwexpander": _cmd_wwexpander,
    "folner": _cmd_folner,
    "propa": _cmd_propa,
    "pipeline": _cmd_pipeline,
}


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _generate(args) -> int:
    if args.family == "cycles":
        sf = generators.gen_cycles(args.sizes)
    elif args.family == "torus":
        sf = generators.gen_torus(args.sizes)
    elif args.family == "margulis":
        sf = generators.gen_margulis(args.sizes)
    else:
        sf = generators.gen_random_regular(args.degree, args.sizes, args.seed)
    _emit(spacefile.serialize(sf), args.out)
    return EXIT_OK


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            return _generate(args)
        sf = spacefile.load(args.spacefile)
        T = sf.relation() | diagonal(sf.space)
        W = sf.weights()
        results, verdict, code, extra = _COMMANDS[args.command](args, sf, T, W)
        params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "out", "spacefile")}
        provenance = {"input": args.spacefile, "input_sha256": file_digest(args.spacefile),
                      "header": list(sf.header), "generators": [c.generator for c in sf.components],
                      "sizes": list(sf.space.sizes), "version": __version__, **extra}
        report = build_report(args.command, params, results, verdict, provenance)
        _emit(dumps(report), args.out)
        return code
    except (CoarseKitError, ValueError, OSError) as exc:
        print(f"coarsekit: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main(argv=None) -> None:
    sys.exit(run(argv))
