"""Task presets for the synthetic experiments and the segmentation use case.

Each preset bundles a functional, the sublevel/superlevel orientation, the
noise level, the downsampling spec and a data term. Bright structures
(circle, blobs) are read through superlevel sets.
"""

from __future__ import annotations

from dataclasses import dataclass

from .functional import FunctionalSpec, RegionSpec
from .smear import DownsampleSpec


@dataclass(frozen=True)
class Preset:
    spec: FunctionalSpec
    superlevel: bool
    eps: float
    downsample: DownsampleSpec
    data_term: str = "mse"
    generator: str | None = None
    generator_params: tuple = ()
    # dots counted when judging the outcome: (dimension, lifetime threshold)
    count_dim: int = 0
    count_life: float = 50.0


PRESETS = {
    # raise a wall between the two wells: push the merge value of the younger well up
    "wells": Preset(
        FunctionalSpec(1, RegionSpec(life_min=50), 0, "maximize", "deaths_only", "exclude"),
        superlevel=False, eps=50.0, downsample=DownsampleSpec(5, shift=True),
        generator="wells", count_dim=0),
    # make the ring appear earlier: lower the birth of the dim-1 dot in the superlevel filtration
    "circle": Preset(
        FunctionalSpec(1, RegionSpec(life_min=50), 1, "maximize", "births_only", "exclude"),
        superlevel=True, eps=100.0, downsample=DownsampleSpec(5, shift=True),
        generator="circle", generator_params=(("seed", 3),), count_dim=1),
    # deepen the bridges: pull the merge values of the non-essential components towards their births
    "blobs": Preset(
        FunctionalSpec(1, RegionSpec(life_min=50), 0, "minimize", "deaths_only", "exclude"),
        superlevel=True, eps=50.0, downsample=DownsampleSpec(3, shift=True),
        generator="blobs", count_dim=0),
    # heatmap setting for smearvis: both endpoints of the ring, fixed 5x5 grid
    "circle_smear": Preset(
        FunctionalSpec(1, RegionSpec(life_min=30), 1, "maximize", "both", "exclude"),
        superlevel=True, eps=50.0, downsample=DownsampleSpec(5, shift=False),
        generator="circle", generator_params=(("seed", 3),), count_dim=1, count_life=30.0),
    # close the membranes around cells in a probability map
    "segmentation": Preset(
        FunctionalSpec(1, RegionSpec(life_min=70), 1, "maximize", "births_only", "exclude"),
        superlevel=False, eps=20.0, downsample=DownsampleSpec(4, shift=True),
        data_term="bce", count_dim=1, count_life=70.0),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
