"""Experiment configuration: dataclasses, YAML loading and validation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml


class ConfigError(ValueError):
    """Raised for malformed or invalid configuration files."""


@dataclass(frozen=True)
class AtmosphereModel:
    """Atmospheric absorption.

    ``model="zenith"`` scales ``zenith_loss_db`` by 1/sin(ground elevation);
    ``model="constant"`` applies ``loss_db`` to every link.
    """
    model: str = "zenith"
    zenith_loss_db: float = 0.5
    loss_db: float = 0.0


@dataclass(frozen=True)
class ScintillationModel:
    """Tropospheric scintillation: constant dB or per-link normal-in-dB draw."""
    model: str = "constant"
    loss_db: float = 0.0
    sigma_db: float = 0.0


@dataclass(frozen=True)
class SolverParams:
    wmmse_tol: float = 1e-4
    wmmse_max_iters: int = 100
    bcd_sweeps: int = 3
    bisect_tol: float = 1e-10


@dataclass(frozen=True)
class PddParams:
    rho0: float = 1.0
    delta: float = 2.0
    q: float = 0.9
    tol: float = 1e-6
    max_iters: int = 200


@dataclass(frozen=True)
class SystemConfig:
    """Physical and numerical parameters of one simulation setup.

    Defaults reproduce the reference scenario (Ku band, 4 satellites,
    16 terminals, 8 RF chains, 16x16 panels, 50 dBm per satellite).
    """
    carrier_freq_hz: float = 12.7e9
    subcarrier_spacing_hz: float = 120e3
    num_subcarriers: int = 1024
    power_budget_dbm: float = 50.0
    noise_psd_dbm_hz: float = -173.855
    noise_figure_db: float = 10.0
    num_sats: int = 4
    num_uts: int = 16
    num_rfc: int = 8
    panel_dims: tuple[int, int] = (16, 16)
    earth_radius_m: float = 6.4e6
    orbit_height_m: float = 5e5
    service_area_radius_m: float = 2e5
    sat_area_radius_m: float = 2e5
    rician_range_db: tuple[float, float] = (15.0, 20.0)
    atmosphere: AtmosphereModel = field(default_factory=AtmosphereModel)
    scintillation: ScintillationModel = field(default_factory=ScintillationModel)
    flat_gamma: bool = False
    num_eval_subcarriers: int = 1
    rng_seed: int = 0
    solver: SolverParams = field(default_factory=SolverParams)
    pdd: PddParams = field(default_factory=PddParams)

    def __post_init__(self):
        validate(self)

    @property
    def num_antennas(self) -> int:
        return self.panel_dims[0] * self.panel_dims[1]

    @property
    def num_served(self) -> int:
        """Terminals served per satellite, ``min(U, N_RF)``."""
        return min(self.num_uts, self.num_rfc)

    @property
    def wavelength_m(self) -> float:
        return 299_792_458.0 / self.carrier_freq_hz

    @property
    def power_per_subcarrier_w(self) -> float:
        return 10 ** (self.power_budget_dbm / 10 - 3) / self.num_subcarriers

    @property
    def noise_power_w(self) -> float:
        return 10 ** ((self.noise_psd_dbm_hz + self.noise_figure_db) / 10 - 3) * self.subcarrier_spacing_hz

    def eval_subcarriers(self) -> np.ndarray:
        """Indices of the evaluated subcarriers, evenly strided over ``[0, K)``."""
        k_eval = self.num_eval_subcarriers
        return (np.arange(k_eval) * self.num_subcarriers) // k_eval

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


def validate(cfg: SystemConfig) -> None:
    def need(cond, key, msg):
        if not cond:
            raise ConfigError(f"{key}: {msg}")

    for key in ("num_subcarriers", "num_sats", "num_uts", "num_rfc", "num_eval_subcarriers"):
        need(int(getattr(cfg, key)) >= 1, key, "must be >= 1")
    need(len(cfg.panel_dims) == 2 and min(cfg.panel_dims) >= 1, "panel_dims", "needs two entries >= 1")
    need(cfg.num_eval_subcarriers <= cfg.num_subcarriers, "num_eval_subcarriers", "cannot exceed num_subcarriers")
    for key in ("carrier_freq_hz", "subcarrier_spacing_hz", "earth_radius_m", "orbit_height_m",
                "service_area_radius_m"):
        need(getattr(cfg, key) > 0, key, "must be strictly positive")
    need(cfg.sat_area_radius_m >= 0, "sat_area_radius_m", "must be non-negative")
    lo, hi = cfg.rician_range_db
    need(lo <= hi, "rician_range_db", "lower bound exceeds upper bound")
    need(cfg.atmosphere.model in ("zenith", "constant"), "atmosphere.model", "expected 'zenith' or 'constant'")
    need(cfg.scintillation.model in ("constant", "lognormal"), "scintillation.model",
         "expected 'constant' or 'lognormal'")
    need(cfg.scintillation.sigma_db >= 0, "scintillation.sigma_db", "must be non-negative")
    need(cfg.solver.wmmse_tol > 0, "solver.wmmse_tol", "must be positive")
    need(cfg.solver.wmmse_max_iters >= 0, "solver.wmmse_max_iters", "must be >= 0")
    need(cfg.solver.bcd_sweeps >= 1, "solver.bcd_sweeps", "must be >= 1")
    need(cfg.solver.bisect_tol > 0, "solver.bisect_tol", "must be positive")
    need(cfg.pdd.rho0 > 0, "pdd.rho0", "must be positive")
    need(cfg.pdd.delta > 1, "pdd.delta", "must exceed 1")
    need(0 < cfg.pdd.q < 1, "pdd.q", "must lie in (0, 1)")
    need(cfg.pdd.tol > 0, "pdd.tol", "must be positive")
    need(cfg.pdd.max_iters >= 1, "pdd.max_iters", "must be >= 1")


_NESTED = {
    "atmosphere": AtmosphereModel,
    "scintillation": ScintillationModel,
    "solver": SolverParams,
    "pdd": PddParams,
}


def _coerce(cls, data: dict, prefix: str = ""):
    """Build dataclass ``cls`` from ``data``; unknown keys are rejected."""
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix or 'config'}: expected a mapping, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if key not in fields:
            raise ConfigError(f"{name}: unknown key")
        default = getattr(cls(), key) if cls is not SystemConfig else fields[key].default
        if key in _NESTED and cls is SystemConfig:
            kwargs[key] = _coerce(_NESTED[key], value, prefix=f"{key}.")
            continue
        try:
            kwargs[key] = _convert(value, default)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: {exc}") from None
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{prefix or 'config'}: {exc}") from None


def _convert(value, default):
    # PyYAML reads "1e-4" as a string, so numeric fields are converted explicitly
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise TypeError(f"expected a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        as_float = float(value)
        if as_float != int(as_float):
            raise ValueError(f"expected an integer, got {value!r}")
        return int(as_float)
    if isinstance(default, float):
        return float(value)
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)) or len(value) != len(default):
            raise ValueError(f"expected a list of {len(default)} values, got {value!r}")
        return tuple(_convert(v, d) for v, d in zip(value, default))
    if isinstance(default, str):
        return str(value)
    return value


def config_from_dict(data: dict) -> SystemConfig:
    return _coerce(SystemConfig, data)


def config_to_dict(cfg: SystemConfig) -> dict:
    out = dataclasses.asdict(cfg)
    for key in ("panel_dims", "rician_range_db"):
        out[key] = list(out[key])
    return out


def load_config(path) -> SystemConfig:
    """Read a YAML configuration file.

    Missing keys take the dataclass defaults. Unknown keys raise
    :class:`ConfigError` naming the offending key.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from None
    return config_from_dict(data or {})


def save_config(cfg: SystemConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(config_to_dict(cfg), sort_keys=False))
