# %% [markdown]
# # Relations on a box space and their labels
#
# A box space is a list of finite components. Relations are stored per
# component as sorted pair keys, and composition is a sparse matrix product.

# %%
from coarsekit.boxspace import BoxSpace, Relation, ball, compose, distance_layers, max_degree, widen
from coarsekit.label import build_label, greedy_bound, signed_classes, verify_label

space = BoxSpace((6, 10))
edges = [[(x, (x + 1) % n) for x in range(n)] for n in space.sizes]
T = Relation(space, edges)
print(T)

# %% [markdown]
# `widen(T, n)` is the n-step neighbourhood relation. On a cycle its balls are
# arcs of length 2n+1.

# %%
for n in (1, 2, 3):
    W = widen(T, n)
    print(n, len(ball(W, [0], component=1)), "points in the ball around 0 of C_10")

layers = distance_layers(T, 3)
print("layer sizes on C_10:", [L.count(1) for L in layers])
print("T∘T is the shift by two:", compose(T, T) == Relation(space, [[(x, (x + 2) % n) for x in range(n)] for n in space.sizes]))

# %% [markdown]
# A label splits a relation containing the diagonal into partial bijections.
# Greedy first-fit never needs more than 2d-1 non-diagonal classes.

# %%
U = widen(T, 1)
L = build_label(U)
print("max degree", max_degree(U), "classes", L.k, "bound", greedy_bound(U), "valid", verify_label(L))
print("signed classes:", len(signed_classes(L)))
