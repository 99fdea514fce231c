# %% [markdown]
# # Amenable versus expanding sequences
#
# Cycles and tori admit Følner certificates at modest radius and fail the
# weighted weak-expander condition. Margulis graphs do the opposite: no
# certificate at small radius, and boundary ratios stay above 1 + c.

# %%
import time

from coarsekit.boxspace import widen
from coarsekit.folner import folner_search
from coarsekit.wwexpander import ww_scan, ww_verdict
from coarsekit.workbench.generators import gen_cycles, gen_margulis, gen_torus

CASES = [
    ("cycles", gen_cycles([48, 64, 100]), range(1, 17), [10], "heuristic"),
    ("torus", gen_torus([42, 44]), range(1, 25), [20], "heuristic"),
    ("margulis", gen_margulis([8, 12, 16, 20, 24]), range(1, 5), [1, 2], "flow"),
]

for name, sf, radii, depths, mode in CASES:
    t = time.perf_counter()
    T = sf.relation()
    W = sf.weights()
    found = []
    for m in range(sf.space.n_components):
        res, r = folner_search(m, T, None, 0.1, W[m], radii=radii, max_ball_mass=0.5)
        found.append((res.success, r, round(res.ratios[0] if res.success else res.best_ratio, 4)))
    reps = ww_scan(sf.space, W, T, [widen(T, d) for d in depths], 0.1, mode=mode)
    print(f"{name}: folner {found}")
    print(f"{name}: tail_min {[round(r.tail_min, 4) for r in reps]} verdict {ww_verdict(reps)} ({time.perf_counter() - t:.1f}s)")
