"""Fast, noise-robust optimisation of topological losses on 2D images.

Persistence diagrams of pixel grids with critical-vertex pairings, gradients
of thresholded Wasserstein norms pulled back to pixels, and the smeared
descent loop (noise, stochastic pooling, Adam) that makes them cheap.
"""

from .backprop import TopoResult, compose_downsample_gradient, pullback_gradient, topological_gradient
from .cubical import CubicalFiltration, build_filtration, ordinal_field
from .field import load_field, make_generic, save_field
from .functional import DiagramGradient, FunctionalSpec, RegionSpec, count_dots, wasserstein_norm
from .generators import gen_blobs, gen_circle, gen_double_well
from .persistence import PersistenceDiagram, brute_force_oracle, compute_persistence, persistence_of_field
from .presets import PRESETS, get_preset
from .smear import (AdamState, DownsampleSpec, SmearConfig, downsample, min_norm_weights, run,
                    sample_weighting, stump_step, vanilla_step)
from .transfer import DiagramMatching, SmearHeatmap, critical_smear, sliced_matching, transfer_gradient

__version__ = "0.1.0"
