"""Command line entry point: ``run``, ``bench``, ``smearvis``, ``gen``, ``diagram``.

Every subcommand that reads a run configuration accepts ``--config FILE``
plus one flag per configuration key; flags win over the file.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import bench as bench_mod
from .config import ConfigError, RunConfig, make_generated
from .cubical import build_filtration
from .field import FORMATS_IN, FORMATS_OUT, load_field, make_generic, save_field
from .persistence import compute_persistence, diagram_to_csv, save_diagram
from .smear import run as run_descent, write_loss_log
from .transfer import critical_smear


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI-style key/value file")
    p.add_argument("--out", required=True, help="output directory")
    for name in RunConfig.field_types():
        p.add_argument("--" + name.replace("_", "-"), dest=name, default=None, metavar="VALUE")


def _resolve(args) -> RunConfig:
    base = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {name: getattr(args, name) for name in RunConfig.field_types()}
    return RunConfig.from_mapping(overrides, base)


def _outdir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _diagram(field, superlevel: bool):
    f = -field if superlevel else field
    return compute_persistence(build_filtration(make_generic(f)))


def cmd_run(args) -> None:
    cfg = _resolve(args)
    seed = cfg.require_seed()
    field = cfg.load_input()
    smear = cfg.smear_config()
    out = _outdir(args.out)
    final, log = run_descent(field, smear, cfg.steps, seed, mode=cfg.mode)
    save_field(final, out / "final.csv", "csv")
    save_field(final, out / "final.png", "png8")
    write_loss_log(log, out / "loss_log.csv")
    save_diagram(_diagram(final, smear.superlevel), out / "diagram.csv")


def cmd_bench(args) -> None:
    cfg = _resolve(args)
    seed = cfg.require_seed()
    field = cfg.load_input()
    smear = cfg.smear_config()
    out = _outdir(args.out)
    # a time budget replaces the step budget
    steps = None if cfg.budget_s is not None else cfg.steps
    points = bench_mod.bench(field, smear, seed, steps=steps, budget_s=cfg.budget_s,
                             eval_every=cfg.eval_every, vanilla_p=cfg.vanilla_p)
    bench_mod.write_bench(points, out / "bench.csv")
    t = bench_mod.final_common_time(points)
    for arm in ("stump", "vanilla"):
        p = bench_mod.value_at(points, arm, t)
        print(f"{arm}: {p.reduction_pct:.1f}% loss reduced at t={t:.1f}s (step {p.step})")


def cmd_smearvis(args) -> None:
    cfg = _resolve(args)
    seed = cfg.require_seed()
    field = cfg.load_input()
    smear = cfg.smear_config()
    out = _outdir(args.out)
    heat = critical_smear(field, smear.spec, smear.downsample, smear.eps, cfg.n_samples,
                          cfg.n_proj, np.random.default_rng(seed), smear.superlevel)
    heat.save(out / "heat_birth.csv", out / "heat_death.csv")
    Image.fromarray(heat.composite_png8(), mode="RGB").save(out / "heat.png")


def cmd_gen(args) -> None:
    field = make_generated(args.name, args.rows, args.cols, args.seed)
    path = Path(args.out)
    if not path.parent.exists():
        raise ConfigError(f"output directory does not exist: {path.parent}")
    fmt = args.format or ("png8" if path.suffix.lower() == ".png" else "csv")
    save_field(field, path, fmt)


def cmd_diagram(args) -> None:
    path = Path(args.field)
    if not path.is_file():
        raise ConfigError(f"input file not found: {path}")
    try:
        field = load_field(path, args.format)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    text = diagram_to_csv(_diagram(field, args.superlevel))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topsmear", description="Smeared topological optimisation of images.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="optimise a field and write final field, loss log and diagram")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="STUMP against vanilla descent, loss reduction against time")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("smearvis", help="critical-smear heatmaps of the selected dots")
    _add_config_flags(p)
    p.set_defaults(func=cmd_smearvis)

    p = sub.add_parser("gen", help="write a synthetic test field")
    p.add_argument("name", help="wells, circle or blobs")
    p.add_argument("--rows", type=int, default=64)
    p.add_argument("--cols", type=int, default=64)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=FORMATS_OUT, default=None)
    p.add_argument("--out", required=True, help="output file (.csv or .png)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("diagram", help="print the persistence diagram of a field as CSV")
    p.add_argument("field")
    p.add_argument("--format", choices=FORMATS_IN, default="csv")
    p.add_argument("--superlevel", action="store_true", help="use superlevel sets (diagram of the negated field)")
    p.add_argument("--out", default=None, help="write to a file instead of stdout")
    p.set_defaults(func=cmd_diagram)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"topsmear {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
