"""Scenario configuration: JSON file and command-line flags, validated before any allocation."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigurationError

SCENARIOS = ("kolmogorov", "fp-exact", "fp-numeric", "landau-homogeneous", "landau-model", "lemma-verify")

# per-scenario defaults: grid_n, half_width, t_end, initial data
_DEFAULTS = {
    "kolmogorov": {1: (64, 10.0, 0.5, "cosine-modulated"), 2: (32, 6.0, 0.25, "cosine-modulated")},
    "fp-exact": {1: (64, 10.0, 1.0, "cosine-modulated"), 2: (32, 6.0, 1.0, "cosine-modulated")},
    "fp-numeric": {1: (64, 10.0, 0.5, "cosine-modulated"), 2: (32, 6.0, 0.25, "cosine-modulated")},
    "landau-homogeneous": {2: (64, 7.0, 0.5, "gaussian-mix"), 3: (32, 6.0, 0.25, "gaussian-mix")},
    "landau-model": {2: (32, 6.0, 0.25, "poisson-modulated(0.5)")},
    "lemma-verify": {1: (0, 0.0, 0.0, ""), 2: (0, 0.0, 0.0, "")},
}
_ALLOWED_DIMS = {name: tuple(sorted(v)) for name, v in _DEFAULTS.items()}
MAX_POINTS = 1 << 24


@dataclass(frozen=True)
class PhaseConfig:
    """Weight parameters; ``None`` entries are filled by the scenario's admissibility rule."""

    c0: float | None = None
    delta: float = 0.0
    alpha: float | None = None
    horizon: float | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "lemma-verify"
    dim: int = 2
    grid_n: int | None = None
    half_width: float | None = None
    t_end: float | None = None
    dt: float | str = "auto"
    phase_params: PhaseConfig = field(default_factory=PhaseConfig)
    initial_data: str | None = None
    seed: int = 0
    output_dir: str = "kinsmooth-out"
    n_records: int = 10
    tail_tol: float = 1e-2
    plots: bool = True

    # -- construction -----------------------------------------------------------
    @classmethod
    def from_mapping(cls, data: dict) -> ScenarioConfig:
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        pp = data.pop("phase_params", None) or {}
        if isinstance(pp, dict):
            bad = set(pp) - {f.name for f in fields(PhaseConfig)}
            if bad:
                raise ConfigurationError(f"unknown phase_params keys: {sorted(bad)}")
            pp = PhaseConfig(**pp)
        return cls(phase_params=pp, **data)

    @classmethod
    def from_file(cls, path) -> ScenarioConfig:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object")
        return cls.from_mapping(data)

    def override(self, **changes) -> ScenarioConfig:
        """Copy with non-None entries replaced; phase keys go into ``phase_params``."""
        phase_keys = {f.name for f in fields(PhaseConfig)}
        phase = {k: v for k, v in changes.items() if k in phase_keys and v is not None}
        top = {k: v for k, v in changes.items() if k not in phase_keys and v is not None}
        out = replace(self, **top)
        if phase:
            out = replace(out, phase_params=replace(out.phase_params, **phase))
        return out

    # -- validation -------------------------------------------------------------
    def resolved(self) -> ScenarioConfig:
        """Validate and fill scenario defaults; raises :class:`ConfigurationError`."""
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        dims = _ALLOWED_DIMS[self.scenario]
        if self.scenario == "landau-model" and self.dim != 2:
            raise ConfigurationError("landau-model requires dim = 2")
        if self.dim not in dims:
            raise ConfigurationError(f"scenario {self.scenario} supports dim in {dims}, got {self.dim}")
        n0, L0, t0, data0 = _DEFAULTS[self.scenario][self.dim]
        cfg = replace(
            self,
            grid_n=self.grid_n if self.grid_n is not None else n0,
            half_width=self.half_width if self.half_width is not None else L0,
            t_end=self.t_end if self.t_end is not None else t0,
            initial_data=self.initial_data if self.initial_data is not None else data0,
        )
        if cfg.scenario == "lemma-verify":
            alpha = cfg.phase_params.alpha if cfg.phase_params.alpha is not None else 2.0
            if not alpha > 0:
                raise ConfigurationError(f"alpha must be positive, got {alpha}")
            return replace(cfg, phase_params=replace(cfg.phase_params, alpha=alpha))
        n = cfg.grid_n
        if n < 4 or n & (n - 1):
            raise ConfigurationError(f"grid_n must be a power of two >= 4, got {n}")
        ndim = cfg.dim if cfg.scenario == "landau-homogeneous" else 2 * cfg.dim
        if n**ndim > MAX_POINTS:
            raise ConfigurationError(f"{n}^{ndim} grid points exceed the budget of {MAX_POINTS}")
        if not cfg.half_width > 0:
            raise ConfigurationError(f"half_width must be positive, got {cfg.half_width}")
        if not (cfg.t_end > 0 and math.isfinite(cfg.t_end)):
            raise ConfigurationError(f"t_end must be positive, got {cfg.t_end}")
        if cfg.dt != "auto" and not (isinstance(cfg.dt, (int, float)) and cfg.dt > 0):
            raise ConfigurationError(f"dt must be 'auto' or a positive number, got {cfg.dt!r}")
        pp = cfg.phase_params
        if pp.c0 is not None and not pp.c0 > 0:
            raise ConfigurationError(f"c0 must be positive, got {pp.c0}")
        if not 0.0 <= pp.delta <= 1.0:
            raise ConfigurationError(f"delta must lie in [0, 1], got {pp.delta}")
        if pp.horizon is not None and not pp.horizon > 0:
            raise ConfigurationError(f"horizon must be positive, got {pp.horizon}")
        if cfg.n_records < 1:
            raise ConfigurationError("n_records must be >= 1")
        if not 0 < cfg.tail_tol < 1:
            raise ConfigurationError("tail_tol must lie in (0, 1)")
        alpha = pp.alpha if pp.alpha is not None else 1.0
        if not alpha > 0:
            raise ConfigurationError(f"alpha must be positive, got {alpha}")
        return replace(cfg, phase_params=replace(pp, alpha=alpha))

    def to_dict(self) -> dict:
        return asdict(self)
