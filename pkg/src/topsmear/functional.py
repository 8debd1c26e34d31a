"""Thresholded p-Wasserstein norms of persistence diagrams and their gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .persistence import PersistenceDiagram

Sign = Literal["minimize", "maximize"]
EndpointMask = Literal["births_only", "deaths_only", "both"]
EssentialPolicy = Literal["exclude", "clamp_to_max"]

INF = float("inf")


@dataclass(frozen=True)
class RegionSpec:
    """Open box in birth-lifetime coordinates. Membership uses strict inequalities."""

    birth_min: float = -INF
    birth_max: float = INF
    life_min: float = 0.0
    life_max: float = INF

    def __post_init__(self):
        if not self.birth_min <= self.birth_max:
            raise ValueError("birth_min must not exceed birth_max")
        if not self.life_min <= self.life_max:
            raise ValueError("life_min must not exceed life_max")
        if self.life_min < 0:
            raise ValueError("life_min must be non-negative")

    @classmethod
    def from_list(cls, bounds) -> "RegionSpec":
        """Build from ``[birth_min, birth_max, life_min, life_max]``."""
        return cls(*(float(b) for b in bounds))

    def contains(self, birth: np.ndarray, life: np.ndarray) -> np.ndarray:
        return ((birth > self.birth_min) & (birth < self.birth_max)
                & (life > self.life_min) & (life < self.life_max))


@dataclass(frozen=True)
class FunctionalSpec:
    p: float = 1.0
    region: RegionSpec = field(default_factory=RegionSpec)
    hom_dim: int = 0
    sign: Sign = "minimize"
    endpoint_mask: EndpointMask = "both"
    essential_policy: EssentialPolicy | None = None

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.hom_dim not in (0, 1):
            raise ValueError(f"hom_dim must be 0 or 1, got {self.hom_dim}")
        if self.sign not in ("minimize", "maximize"):
            raise ValueError(f"unknown sign {self.sign!r}")
        if self.endpoint_mask not in ("births_only", "deaths_only", "both"):
            raise ValueError(f"unknown endpoint mask {self.endpoint_mask!r}")
        if self.essential_policy not in (None, "exclude", "clamp_to_max"):
            raise ValueError(f"unknown essential policy {self.essential_policy!r}")

    @property
    def essential(self) -> EssentialPolicy:
        if self.essential_policy is not None:
            return self.essential_policy
        return "clamp_to_max" if self.hom_dim == 0 else "exclude"

    @property
    def sign_factor(self) -> float:
        return -1.0 if self.sign == "maximize" else 1.0


@dataclass(frozen=True, eq=False)
class DiagramGradient:
    """Partial derivatives of a functional w.r.t. each dot's birth and death.

    Arrays are aligned with the dots of the diagram they were computed on.
    Essential dots under ``clamp_to_max`` carry their death partial in ``ddeath``;
    it belongs to the field's global-maximum pixel.
    """

    dbirth: np.ndarray
    ddeath: np.ndarray

    def __len__(self) -> int:
        return len(self.dbirth)

    @classmethod
    def zeros(cls, n: int) -> "DiagramGradient":
        return cls(np.zeros(n), np.zeros(n))

    def masked(self, endpoint: EndpointMask) -> "DiagramGradient":
        if endpoint == "births_only":
            return DiagramGradient(self.dbirth.copy(), np.zeros_like(self.ddeath))
        if endpoint == "deaths_only":
            return DiagramGradient(np.zeros_like(self.dbirth), self.ddeath.copy())
        return DiagramGradient(self.dbirth.copy(), self.ddeath.copy())


def effective_deaths(diag: PersistenceDiagram, spec: FunctionalSpec) -> np.ndarray:
    """Deaths with essential dots clamped to the field maximum under the clamp_to_max policy (else inf)."""
    death = diag.death.astype(np.float64, copy=True)
    if spec.essential == "clamp_to_max":
        death[~np.isfinite(death)] = diag.max_value
    return death


def selected(diag: PersistenceDiagram, spec: FunctionalSpec) -> np.ndarray:
    """Boolean mask of the dots that enter the functional."""
    death = effective_deaths(diag, spec)
    finite = np.isfinite(death)
    life = np.where(finite, death - diag.birth, INF)
    return (diag.dim == spec.hom_dim) & finite & spec.region.contains(diag.birth, life)


def wasserstein_norm(diag: PersistenceDiagram, spec: FunctionalSpec) -> float:
    """Sum of lifetime**p over selected dots; negated for ``maximize``."""
    mask = selected(diag, spec)
    life = effective_deaths(diag, spec)[mask] - diag.birth[mask]
    return spec.sign_factor * float(np.sum(life ** spec.p))


def diagram_gradient(diag: PersistenceDiagram, spec: FunctionalSpec) -> DiagramGradient:
    mask = selected(diag, spec)
    life = effective_deaths(diag, spec)[mask] - diag.birth[mask]
    slope = spec.sign_factor * spec.p * life ** (spec.p - 1)
    dbirth = np.zeros(len(diag))
    ddeath = np.zeros(len(diag))
    dbirth[mask] = -slope
    ddeath[mask] = slope
    return DiagramGradient(dbirth, ddeath).masked(spec.endpoint_mask)


def mixed_loss(topo: float, data: float, alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * topo + (1.0 - alpha) * data


def default_alpha(n_pixels: int) -> float:
    """Mixing weight 1 - 1/P that balances a sparse topological gradient against a dense data term."""
    return 1.0 - 1.0 / n_pixels


def count_dots(diag: PersistenceDiagram, dim: int, min_life: float) -> int:
    """Dots of ``dim`` with lifetime above ``min_life``; essential dots count as infinitely long-lived."""
    d = diag.in_dim(dim)
    return int(np.sum(d.lifetime > min_life))
