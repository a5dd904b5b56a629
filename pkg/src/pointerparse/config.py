"""Run configuration: model dimensions, optimizer settings and decode options.

Values resolve in three layers: dataclass defaults, then a flat ``key=value``
config file, then command-line flags.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass
class RunConfig:
    mode: str = "l2r"              # l2r | topdown
    beam_size: int = 1
    cycle_policy: str = "forbid"   # forbid | post_fix
    seed: int = 1

    # model dimensions (desk scale)
    word_dim: int = 64
    pos_dim: int = 32
    enc_hidden: int = 64
    dec_hidden: int = 64

    # vocabulary / training
    min_freq: int = 1
    epochs: int = 100
    batch_size: int = 8
    learning_rate: float = 2e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    dropout: float = 0.0

    punct_mode: str = "ud"         # ptb | ud | none

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError(f"beam_size must be >= 1, got {self.beam_size}")
        if self.mode not in ("l2r", "topdown"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.cycle_policy not in ("forbid", "post_fix"):
            raise ValueError(f"unknown cycle_policy {self.cycle_policy!r}")
        if self.punct_mode not in ("ptb", "ud", "none"):
            raise ValueError(f"unknown punct_mode {self.punct_mode!r}")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, value: str):
    if name not in _FIELD_TYPES:
        raise ValueError(f"unknown config key {name!r}")
    kind = _FIELD_TYPES[name]
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    return value


def load_config(path: str) -> RunConfig:
    """Parse a flat key=value file ('#' starts a comment)."""
    overrides = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, _, value = line.partition("=")
            overrides[key.strip()] = _coerce(key.strip(), value.strip())
    return RunConfig(**overrides)


def apply_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Return a copy with non-None overrides applied (CLI flags win)."""
    given = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **given) if given else config


def config_from_dict(data: dict) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in data.items() if k in known})
