"""The three synthetic tasks, optimised with the smeared descent loop.

Each task is a preset. The script reports how many dots with lifetime above 50
the field has before and after, and writes before/after images to demos/out/.
Pass a smaller step count for a quick look, e.g. ``python demos/03_three_tasks.py 2000``.
"""

import sys
import time
from pathlib import Path

from topsmear import count_dots, make_generic, persistence_of_field, run, save_field
from topsmear.config import RunConfig
from topsmear.presets import get_preset

steps = int(sys.argv[1]) if len(sys.argv) > 1 else 10000
out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

for name, goal in [("wells", "raise a wall between the wells"),
                   ("circle", "make the ring appear earlier"),
                   ("blobs", "deepen the bridges so the blobs separate")]:
    rc = RunConfig(preset=name)
    field = rc.load_input()
    config = rc.smear_config()
    pre = get_preset(name)
    sign = -1 if config.superlevel else 1

    def dots(x):
        return count_dots(persistence_of_field(make_generic(sign * x)), pre.count_dim, pre.count_life)

    t0 = time.perf_counter()
    final, log = run(field, config, steps, seed=1)
    print(f"{name:7s} ({goal}): {dots(field)} -> {dots(final)} dots, "
          f"{steps} steps in {time.perf_counter() - t0:.1f}s")
    save_field(field, out / f"{name}_start.png", "png8")
    save_field(final, out / f"{name}_final.png", "png8")
