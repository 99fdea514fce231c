# %% [markdown]
# # Unit-vector families with controlled support
#
# Each point x gets a unit vector η_x. The family is good when neighbouring
# points have close vectors. Normalized ball indicators on a cycle give
# ε = sqrt(2 / (2R + 1)).

# %%
import numpy as np

from coarsekit.label import build_label
from coarsekit.propa import ball_average_family, certificate_quality, heat_family
from coarsekit.workbench.generators import gen_cycles, gen_margulis

sf = gen_cycles([60])
T = sf.relation()
for R in range(1, 7):
    eps, support = certificate_quality(ball_average_family(0, T, R), T)
    print(f"R={R}: eps={eps:.6f} closed form={np.sqrt(2 / (2 * R + 1)):.6f} support pairs={len(support)}")

# %% [markdown]
# Heat-kernel families mix along the label. On expanders ε stays large at any
# fixed number of steps as the component grows.

# %%
for side in (8, 12, 16, 20):
    m = gen_margulis([side])
    Tm = m.relation()
    eps, _ = certificate_quality(heat_family(0, build_label(Tm), 3), Tm)
    print(f"margulis {side}: eps after 3 steps {eps:.4f}")
