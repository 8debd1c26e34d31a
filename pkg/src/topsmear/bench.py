"""STUMP against vanilla topological descent on one input, loss reduction over time.

Each arm owns a monotonic clock that only runs during its descent steps; the
full-resolution loss evaluations that produce the curve are not billed to it.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .backprop import topological_gradient
from .field import DATA_TERMS, as_field
from .functional import mixed_loss
from .smear import SmearConfig, stump_step, vanilla_step

BENCH_HEADER = ("arm", "step", "elapsed_s", "loss", "reduction_pct")


@dataclass(frozen=True)
class BenchPoint:
    arm: str
    step: int
    elapsed_s: float
    loss: float
    reduction_pct: float


def full_loss(field, f0, config: SmearConfig) -> float:
    """The arm's objective evaluated on the clean full-resolution field."""
    topo = topological_gradient(field, config.spec, config.superlevel).value
    data = DATA_TERMS[config.data_term][0](field, f0)
    return mixed_loss(topo, data, config.alpha_for(np.shape(field)))


def reduction_pct(initial: float, current: float) -> float:
    if initial == 0:
        return 0.0
    return 100.0 * (initial - current) / abs(initial)


def run_arm(arm: str, field, config: SmearConfig, seed: int, steps: int | None = None,
            budget_s: float | None = None, eval_every: int = 50) -> list[BenchPoint]:
    """Descend until ``steps`` or ``budget_s`` of billed time runs out, sampling the loss every ``eval_every`` steps."""
    if steps is None and budget_s is None:
        raise ValueError("give a step budget, a time budget, or both")
    if eval_every < 1:
        raise ValueError("eval_every must be at least 1")
    f0 = as_field(field)
    f = f0.copy()
    rng = np.random.default_rng(seed)
    adam = config.adam(f.shape)
    loss0 = full_loss(f, f0, config)
    points = [BenchPoint(arm, 0, 0.0, loss0, 0.0)]
    elapsed = 0.0
    step = 0
    while (steps is None or step < steps) and (budget_s is None or elapsed < budget_s):
        t0 = time.perf_counter()
        if arm == "stump":
            f, adam, _ = stump_step(f, f0, config, adam, rng)
        else:
            f, adam, _ = vanilla_step(f, f0, config, adam)
        elapsed += time.perf_counter() - t0
        step += 1
        done = (steps is not None and step >= steps) or (budget_s is not None and elapsed >= budget_s)
        if step % eval_every == 0 or done:
            loss = full_loss(f, f0, config)
            points.append(BenchPoint(arm, step, elapsed, loss, reduction_pct(loss0, loss)))
    return points


def bench(field, stump_config: SmearConfig, seed: int, steps: int | None = None,
          budget_s: float | None = None, eval_every: int = 50, vanilla_p: float = 2.0) -> list[BenchPoint]:
    """Run both arms sequentially; vanilla uses ``vanilla_p`` and no noise or pooling."""
    vanilla_config = replace(stump_config.vanilla(), spec=replace(stump_config.spec, p=vanilla_p))
    return (run_arm("stump", field, stump_config, seed, steps, budget_s, eval_every)
            + run_arm("vanilla", field, vanilla_config, seed, steps, budget_s, eval_every))


def value_at(points: list[BenchPoint], arm: str, t: float) -> BenchPoint:
    """Latest sample of ``arm`` taken at or before billed time ``t``."""
    mine = [p for p in points if p.arm == arm and p.elapsed_s <= t]
    return mine[-1]


def final_common_time(points: list[BenchPoint]) -> float:
    return min(max(p.elapsed_s for p in points if p.arm == arm) for arm in ("stump", "vanilla"))


def write_bench(points: list[BenchPoint], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_HEADER)
        for p in points:
            w.writerow([p.arm, p.step, f"{p.elapsed_s:.6f}", repr(p.loss), repr(p.reduction_pct)])
