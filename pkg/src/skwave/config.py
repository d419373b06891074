"""Run configuration read from plain ``key = value`` text."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from typing import Optional

DEFAULT_OUT = "skwave_out"

DATA_FAMILIES = ("stereographic", "soliton", "soliton-perturbed", "pulse", "shatah", "zero")
MODELS = ("wavemap", "adkins-nappi")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: str = "adkins-nappi"
    data: str = "pulse"
    # initial data parameters
    lam: float = 1.0
    amplitude: float = 1.0
    r0: float = 4.0
    width: float = 1.0
    bump: float = 0.2           # soliton-perturbed: bump amplitude
    tau: float = 1.0            # shatah: cone time of the data
    # grid and stepping
    r_max: float = 20.0
    n_cells: int = 1024
    cfl: float = 0.4
    t_end: float = 5.0
    record_every: int = 1
    snapshot_stride: int = 1
    threshold_energy: float = 1e8
    threshold_gradient: float = 1e6
    # diagnostics
    vertex: Optional[float] = None   # simulation time of the cone vertex; default t_end
    t0: Optional[float] = None
    t1: Optional[float] = None
    n_points: int = 12
    samples: int = 100_000
    levels: int = 3
    # static solver
    a_lo: float = 0.5
    a_hi: float = 4.0
    tol_a: float = 1e-12
    out: str = DEFAULT_OUT
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.data not in DATA_FAMILIES:
            raise ConfigError(f"data must be one of {DATA_FAMILIES}, got {self.data!r}")
        if not self.r_max > 0:
            raise ConfigError("r_max must be positive")
        if self.n_cells < 8:
            raise ConfigError("n_cells must be >= 8")
        if not 0 < self.cfl <= 0.9:
            raise ConfigError("cfl must lie in (0, 0.9]")
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if self.record_every < 1 or self.snapshot_stride < 1:
            raise ConfigError("record_every and snapshot_stride must be >= 1")
        if self.levels < 2:
            raise ConfigError("levels must be >= 2")

    @property
    def vertex_time(self) -> float:
        return self.t_end if self.vertex is None else self.vertex

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        """Canonical key = value text (sorted keys); round-trips through :func:`parse_config`."""
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {'none' if v is None else v!r}".replace("'", ""))
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    text = raw.strip()
    if "Optional" in str(kind):
        if text.lower() in ("", "none"):
            return None
        kind = "float"
    try:
        if kind in (int, "int"):
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
        if kind in (float, "float"):
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None
    return text.strip("\"'")


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Apply ``key = value`` lines on top of ``base`` (defaults if None).

    Blank lines and ``#`` comments are ignored; unknown keys are errors.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    base = base or RunConfig()
    return base.replace(**values)


def load_config(path=None, overrides: dict | None = None, env=None) -> RunConfig:
    """Defaults, then $SKWV_OUT, then the file, then explicit overrides."""
    env = os.environ if env is None else env
    cfg = RunConfig()
    if env.get("SKWV_OUT"):
        cfg = cfg.replace(out=env["SKWV_OUT"])
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        cfg = parse_config(text, cfg)
    if overrides:
        unknown = set(overrides) - set(_TYPES)
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}")
        cfg = cfg.replace(**{k: v for k, v in overrides.items() if v is not None})
    return cfg
