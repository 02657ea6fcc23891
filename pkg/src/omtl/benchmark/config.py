"""Run configuration: defaults, file loading, overrides and validation."""
from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from ..errors import InvalidInputError
from ..feature_maps import DEFAULT_LAG
from ..mt_oslssvr import DEFAULT_CAPACITY
from .methods import DEFAULT_GRIDS, METHODS


class ConfigError(InvalidInputError):
    """Configuration is incomplete or inconsistent (a usage error)."""


@dataclass
class RunConfig:
    """Fully resolved settings for ``run`` and ``compare``.

    Data comes from ``data`` (CSV paths, one column per task) and/or
    ``synth`` (``tasks``, ``len``, ``coupling``, ``seeds``).  ``windows``
    optionally cuts each CSV into seeded contiguous windows.
    """

    data: list = field(default_factory=list)
    synth: dict | None = None
    windows: dict | None = None
    lag: int = DEFAULT_LAG
    mu: float = 0.275
    methods: list = field(default_factory=lambda: ["mt-wrls"])
    elm: dict | None = None
    gamma: float = 1.0
    capacity: int = DEFAULT_CAPACITY
    similarity_source: str = "differenced"
    grids: dict = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_GRIDS.items()})
    jobs: int = 1
    out: str = "omtl-out"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def resolve(cls, raw: dict | None = None, overrides: dict | None = None) -> "RunConfig":
        """Merge defaults, a config mapping and non-``None`` overrides, then validate."""
        merged = cls().to_dict()
        for src in (raw or {}), {k: v for k, v in (overrides or {}).items() if v is not None}:
            unknown = set(src) - set(merged)
            if unknown:
                raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
            for k, v in src.items():
                if k == "grids":
                    merged["grids"] = dict(merged["grids"], **{g: list(vals) for g, vals in v.items()})
                else:
                    merged[k] = copy.deepcopy(v)
        cfg = cls(**merged)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        # YAML 1.1 reads "1e-10" as a string, so numbers are coerced here
        try:
            self.mu = float(self.mu)
            self.gamma = float(self.gamma)
            self.lag, self.jobs, self.capacity = int(self.lag), int(self.jobs), int(self.capacity)
            self.grids = {k: [float(v) for v in vals] for k, vals in self.grids.items()}
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"non-numeric config value: {exc}") from None
        if isinstance(self.data, str):
            self.data = [self.data]
        self.data = [str(p) for p in self.data]
        if not self.data and not self.synth:
            raise ConfigError("no data source: give data files or synth parameters")
        if self.synth:
            need = {"tasks", "len", "coupling", "seeds"}
            missing = need - set(self.synth)
            if missing:
                raise ConfigError(f"synth section lacks {', '.join(sorted(missing))}")
            if int(self.synth["tasks"]) < 2:
                raise ConfigError("synth needs at least 2 tasks")
            if isinstance(self.synth["seeds"], int):
                self.synth["seeds"] = [self.synth["seeds"]]
        if self.windows and not {"n_subsets", "length", "seed"} <= set(self.windows):
            raise ConfigError("windows section needs n_subsets, length and seed")
        if not 0 < float(self.mu) < 1:
            raise ConfigError(f"mu must lie in (0, 1), got {self.mu}")
        if int(self.lag) < 1:
            raise ConfigError("lag must be a positive integer")
        if isinstance(self.methods, str):
            self.methods = [self.methods]
        if not self.methods:
            raise ConfigError("no methods selected")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
        if self.elm is not None:
            self.elm = dict({"hidden": 20, "seed": 0, "standardize": True}, **self.elm)
        for name, vals in self.grids.items():
            if name not in DEFAULT_GRIDS:
                raise ConfigError(f"unknown grid {name!r}")
            if not vals:
                raise ConfigError(f"grid {name!r} is empty")
        if self.similarity_source not in ("differenced", "raw"):
            raise ConfigError("similarity_source must be 'differenced' or 'raw'")
        if int(self.jobs) < 1 or int(self.capacity) < 1 or not float(self.gamma) > 0:
            raise ConfigError("jobs and capacity must be >= 1 and gamma > 0")


def load_config(path) -> dict:
    """Read a YAML or JSON mapping.  A report file is accepted too: its
    embedded ``config`` section is returned so the run can be repeated."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a mapping")
    if "config" in raw and "datasets" in raw:
        raw = raw["config"]
    return raw

