# %% [markdown]
# # Følner certificates from kernels
#
# A kernel η on pairs is turned into a controlled set by thresholding. A level
# set F passes when w∘c^t(T∘F) < (1+ε) w∘c^t(F). All thresholds are scanned
# in one pass from cumulative masses.

# %%
from coarsekit.boxspace import widen
from coarsekit.folner import extract_folner, folner_search, invariance_defect, tent_kernel, verify_certificate
from coarsekit.label import build_label
from coarsekit.workbench.generators import gen_cycles, gen_margulis

sf = gen_cycles([100])
T = sf.relation()
w = sf.weights()[0]
eta = tent_kernel(T, 4)
print("defect of the radius-4 tent:", round(invariance_defect(eta, build_label(T), w), 4))
print("eps 0.3 at radius 4:", extract_folner(eta, T, 0.3, w).success)

# %%
cert, radius = folner_search(0, T, None, 0.1, w)
print("search radius", radius, "F == widen(T, 10):", cert.F == widen(T, 10), "ratio", cert.ratios[0])
print("re-verified:", verify_certificate(cert, T, w))

# %% [markdown]
# Without a size limit, expanders admit vacuous certificates: a level set
# whose balls cover almost everything has a tiny boundary. Bounding each ball
# to half the mass rules those out, and then no certificate exists.

# %%
m = gen_margulis([16])
Tm = m.relation()
wm = m.weights()[0]
loose, r = folner_search(0, Tm, None, 0.1, wm, radii=range(1, 5))
print("unbounded: success", loose.success, "at radius", r)
tight, r = folner_search(0, Tm, None, 0.1, wm, radii=range(1, 5), max_ball_mass=0.5)
print("half-mass balls: success", tight.success, "best ratio", round(tight.best_ratio, 3), "at radius", r)
