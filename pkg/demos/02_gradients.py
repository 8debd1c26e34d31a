"""From a topological loss to a pixel gradient.

The loss sums lifetimes of dim-0 dots that live longer than 10. Its gradient
lives on at most two pixels per dot: the one that creates the component and
the one that merges it away.

Run: python demos/02_gradients.py
"""

import numpy as np

from topsmear import FunctionalSpec, RegionSpec, topological_gradient

rng = np.random.default_rng(1)
f = rng.permutation(64).reshape(8, 8).astype(float)
spec = FunctionalSpec(p=1, region=RegionSpec(life_min=10), hom_dim=0, sign="minimize", endpoint_mask="both")
res = topological_gradient(f, spec)
print(f"loss {res.value:.0f}")
print("gradient (nonzero entries only):")
for idx in map(tuple, np.argwhere(res.grad).tolist()):
    print(f"  pixel {idx}: value {f[idx]:.0f}, d loss / d pixel = {res.grad[idx]:+.0f}")

# Finite differences agree: nudging a pixel moves the loss by gradient * h.
h = 1e-3
r, c = map(int, np.argwhere(res.grad)[0])
bumped = f.copy()
bumped[r, c] += h
print(f"difference quotient at ({r}, {c}): {(topological_gradient(bumped, spec).value - res.value) / h:+.3f}")
