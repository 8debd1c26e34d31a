"""How alike are smeared gradients drawn around the same image?

Draw 100 smeared gradients at the blobs start image, form their Gram matrix
and find the convex combination of smallest norm. Nearly orthogonal gradients
would give weights close to 1/100 and a Gram matrix dominated by its diagonal.

Run: python demos/06_gradient_sampling.py
"""

import numpy as np

from topsmear.generators import gen_blobs
from topsmear.presets import get_preset
from topsmear.smear import SmearConfig, gram_matrix, min_norm_weights, offdiag_ratio, sample_gradients

pre = get_preset("blobs")
field = gen_blobs()
for label, down in (("preset pooling", pre.downsample), ("no pooling", pre.downsample.__class__(1))):
    config = SmearConfig(pre.spec, pre.superlevel, None, "mse", 50.0, down)
    grads = sample_gradients(field, config, 100, np.random.default_rng(0))
    G = gram_matrix(grads)
    res = min_norm_weights(grads)
    print(f"{label:15s}: weights mean {res.weights.mean():.4f}, std {res.weights.std():.4f}, "
          f"off-diagonal / diagonal Gram mass {offdiag_ratio(G):.2f}, "
          f"pixels touched per gradient {np.mean([np.count_nonzero(g) for g in grads]):.0f}")
