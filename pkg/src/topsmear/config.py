"""Run configuration: a flat INI-style key/value file, overridable by CLI flags.

A section header is optional; keys outside any section are read as if under
``[run]``. Unknown keys are an error so that typos do not silently fall back
to defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .field import load_field
from .functional import FunctionalSpec, RegionSpec
from .generators import GENERATORS
from .presets import get_preset
from .smear import DownsampleSpec, SmearConfig


class ConfigError(ValueError):
    pass


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def parse_bool(text: str) -> bool:
    try:
        return _BOOL[str(text).strip().lower()]
    except KeyError:
        raise ConfigError(f"not a boolean: {text!r}") from None


def _opt_float(text):
    return None if text is None or str(text).strip().lower() in ("", "none", "default") else float(text)


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a run. ``None`` means "take it from the preset or the built-in default"."""

    seed: int | None = None
    input: str | None = None            # a file path, or gen:<wells|circle|blobs>
    input_format: str = "csv"
    rows: int = 64
    cols: int = 64
    gen_seed: int | None = None
    preset: str | None = None
    mode: str = "stump"
    # functional
    p: float | None = None
    hom_dim: int | None = None
    sign: str | None = None
    endpoint_mask: str | None = None
    essential_policy: str | None = None
    region: str | None = None           # "birth_min, birth_max, life_min, life_max"
    superlevel: bool | None = None
    # descent
    alpha: float | None = None
    data_term: str | None = None
    eps: float | None = None
    k: int | None = None
    measure: str | None = None
    shift: bool | None = None
    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    steps: int = 10000
    # bench
    budget_s: float | None = None
    eval_every: int = 50
    vanilla_p: float = 2.0
    # smearvis
    n_samples: int = 1000
    n_proj: int = 20

    def __post_init__(self):
        if self.mode not in ("stump", "vanilla"):
            raise ConfigError(f"mode must be stump or vanilla, got {self.mode!r}")
        if self.steps < 0:
            raise ConfigError("steps must be non-negative")

    # -- construction -----------------------------------------------------

    @classmethod
    def field_types(cls) -> dict[str, type]:
        conv = {}
        for f in fields(cls):
            t = str(f.type)
            if t.startswith("int"):
                conv[f.name] = int
            elif t.startswith("float"):
                conv[f.name] = float
            elif t.startswith("bool"):
                conv[f.name] = parse_bool
            else:
                conv[f.name] = str
        return conv

    @classmethod
    def from_mapping(cls, values: dict, base: "RunConfig | None" = None) -> "RunConfig":
        conv = cls.field_types()
        out = {}
        for key, raw in values.items():
            name = key.strip().replace("-", "_")
            if name not in conv:
                raise ConfigError(f"unknown config key {key!r}")
            if raw is None:
                continue
            if isinstance(raw, str) and raw.strip().lower() == "none":
                out[name] = None
                continue
            try:
                out[name] = conv[name](raw) if isinstance(raw, str) else raw
            except ValueError as exc:
                raise ConfigError(f"bad value for {name}: {raw!r} ({exc})") from None
        return replace(base or cls(), **out)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text()
        if not text.lstrip().startswith("["):
            text = "[run]\n" + text
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}".splitlines()[0]) from None
        values = {}
        for section in parser.sections():
            values.update(parser[section])
        return cls.from_mapping(values)

    # -- resolution -------------------------------------------------------

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("a seed is required (set seed in the config or pass --seed)")
        return self.seed

    def functional(self) -> FunctionalSpec:
        base = get_preset(self.preset).spec if self.preset else FunctionalSpec()
        region = base.region
        if self.region is not None:
            parts = [s for s in self.region.replace(",", " ").split() if s]
            if len(parts) != 4:
                raise ConfigError("region needs four numbers: birth_min birth_max life_min life_max")
            region = RegionSpec.from_list(parts)
        try:
            return FunctionalSpec(
                p=base.p if self.p is None else self.p,
                region=region,
                hom_dim=base.hom_dim if self.hom_dim is None else self.hom_dim,
                sign=base.sign if self.sign is None else self.sign,
                endpoint_mask=base.endpoint_mask if self.endpoint_mask is None else self.endpoint_mask,
                essential_policy=(base.essential_policy if self.essential_policy is None
                                  else self.essential_policy),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def downsample_spec(self) -> DownsampleSpec:
        base = get_preset(self.preset).downsample if self.preset else DownsampleSpec()
        try:
            return DownsampleSpec(
                k=base.k if self.k is None else self.k,
                measure=base.measure if self.measure is None else self.measure,
                shift=base.shift if self.shift is None else self.shift,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def smear_config(self) -> SmearConfig:
        pre = get_preset(self.preset) if self.preset else None
        try:
            return SmearConfig(
                spec=self.functional(),
                superlevel=(pre.superlevel if pre else False) if self.superlevel is None else self.superlevel,
                alpha=self.alpha,
                data_term=(pre.data_term if pre else "mse") if self.data_term is None else self.data_term,
                eps=(pre.eps if pre else 0.0) if self.eps is None else self.eps,
                downsample=self.downsample_spec(),
                lr=self.lr, beta1=self.beta1, beta2=self.beta2,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def load_input(self) -> np.ndarray:
        src = self.input
        if src is None and self.preset and get_preset(self.preset).generator:
            src = "gen:" + get_preset(self.preset).generator
        if src is None:
            raise ConfigError("no input given (set input to a file path or gen:<name>)")
        if src.startswith("gen:"):
            return make_generated(src[4:], self.rows, self.cols, self.gen_seed, self.preset)
        path = Path(src)
        if not path.is_file():
            raise ConfigError(f"input file not found: {path}")
        try:
            return load_field(path, self.input_format)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None


def make_generated(name: str, rows: int, cols: int, seed: int | None = None,
                   preset: str | None = None) -> np.ndarray:
    if name not in GENERATORS:
        raise ConfigError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    params = {}
    if preset:
        pre = get_preset(preset)
        if pre.generator == name:
            params.update(dict(pre.generator_params))
    if seed is not None and name != "wells":
        params["seed"] = seed
    try:
        return GENERATORS[name](rows, cols, **params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
