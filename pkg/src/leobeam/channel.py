"""Statistical CSI: large-scale gain, Rician moments, UPA steering vectors.

The composite gain of each satellite-terminal link is Rician. Its real and
imaginary parts are i.i.d. Gaussian with mean ``alpha_bar`` and variance
``beta`` each, so ``E[alpha] = alpha_bar (1 + 1j)`` and
``E|alpha|^2 = 2 alpha_bar^2 + 2 beta = gamma``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .geometry import STREAM_RICIAN, STREAM_SCINT, Scenario, all_link_geometry, substream

PEAK_GAIN = np.sqrt(3 / (4 * np.pi))


def noise_power(cfg: SystemConfig) -> float:
    """Per-subcarrier noise power ``N0 * F * delta_f`` in W."""
    return cfg.noise_power_w


def free_space_loss_db(distance_m, freq_hz):
    return 20 * np.log10(distance_m) + 20 * np.log10(freq_hz) - 147.55


def atmosphere_loss_db(cfg: SystemConfig, ground_elevation):
    ground_elevation = np.asarray(ground_elevation, dtype=float)
    atm = cfg.atmosphere
    if atm.model == "constant":
        return np.full_like(ground_elevation, atm.loss_db)
    return atm.zenith_loss_db / np.sin(np.clip(ground_elevation, 1e-3, None))


def scintillation_loss_db(cfg: SystemConfig, seed: int, num_sats: int, num_uts: int) -> np.ndarray:
    sc = cfg.scintillation
    if sc.model == "constant":
        return np.full((num_sats, num_uts), sc.loss_db)
    out = np.empty((num_sats, num_uts))
    for s in range(num_sats):
        for u in range(num_uts):
            out[s, u] = substream(seed, STREAM_SCINT, s, u).normal(0.0, sc.sigma_db)
    return out


def path_loss_db(cfg: SystemConfig, scn: Scenario, subcarriers) -> np.ndarray:
    """Total loss in dB, shape (K_eval, S, U). Shadowing and clutter are omitted."""
    geo = all_link_geometry(scn)
    subcarriers = np.atleast_1d(subcarriers)
    if cfg.flat_gamma:
        freqs = np.full(subcarriers.shape, cfg.carrier_freq_hz)
    else:
        freqs = cfg.carrier_freq_hz + subcarriers * cfg.subcarrier_spacing_hz
    fs = free_space_loss_db(geo["distance"][None], freqs[:, None, None])
    extra = atmosphere_loss_db(cfg, geo["ground_elevation"])
    extra = extra + scintillation_loss_db(cfg, scn.rng_seed, scn.num_sats, scn.num_uts)
    return fs + extra[None]


def path_loss_gamma(cfg: SystemConfig, scn: Scenario, s: int, u: int, k: int) -> float:
    return float(10 ** (-path_loss_db(cfg, scn, [k])[0, s, u] / 10))


def rician_factor(cfg: SystemConfig, seed: int, s: int, u: int) -> float:
    """Linear Rician factor, dB-uniform over ``cfg.rician_range_db``, one per link."""
    lo, hi = cfg.rician_range_db
    kappa_db = substream(seed, STREAM_RICIAN, s, u).uniform(lo, hi)
    return 10 ** (kappa_db / 10)


def rician_moments(gamma, kappa):
    """Per-component mean and variance of the composite gain.

    ``kappa=np.inf`` gives the pure line-of-sight limit.
    """
    gamma = np.asarray(gamma, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    with np.errstate(invalid="ignore"):
        los_frac = np.where(np.isinf(kappa), 1.0, kappa / (1 + kappa))
    alpha_bar = np.sqrt(los_frac * gamma / 2)
    beta = (1 - los_frac) * gamma / 2
    return alpha_bar, beta


def rician_stats(cfg: SystemConfig, seed: int, gamma, s: int, u: int):
    kappa = rician_factor(cfg, seed, s, u)
    alpha_bar, beta = rician_moments(gamma, kappa)
    return kappa, alpha_bar, beta


def radiation_gain(aod_elevation):
    """Element pattern ``sqrt(3/4pi) cos(off-boresight angle)``.

    ``aod_elevation`` is measured from the panel plane, so the off-boresight
    angle is ``pi/2 - aod_elevation``. Directions behind the panel get 0.
    """
    return PEAK_GAIN * np.clip(np.sin(aod_elevation), 0.0, None)


def array_phases(panel_dims, aod_azimuth, aod_elevation, spacing_wl: float = 0.5) -> np.ndarray:
    """Unit-modulus UPA response, horizontal index major (Kronecker order).

    Broadcasts over leading angle dimensions; the trailing axis has length
    ``N_h * N_v``.
    """
    n_h, n_v = panel_dims
    az = np.asarray(aod_azimuth, dtype=float)[..., None]
    el = np.asarray(aod_elevation, dtype=float)[..., None]
    phi_h = spacing_wl * np.cos(az) * np.cos(el)
    phi_v = spacing_wl * np.sin(az) * np.cos(el)
    a_h = np.exp(-2j * np.pi * phi_h * np.arange(n_h))
    a_v = np.exp(-2j * np.pi * phi_v * np.arange(n_v))
    return (a_h[..., :, None] * a_v[..., None, :]).reshape(*az.shape[:-1], n_h * n_v)


def steering_vector(cfg: SystemConfig, aod) -> np.ndarray:
    """Gain-weighted steering vector for ``aod = (azimuth, elevation)``."""
    az, el = aod
    return radiation_gain(el) * array_phases(cfg.panel_dims, az, el)


def sample_alpha(alpha_bar, beta, rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw composite gains with independent N(alpha_bar, beta) real/imag parts."""
    alpha_bar = np.asarray(alpha_bar, dtype=float)
    std = np.sqrt(np.asarray(beta, dtype=float))
    shape = np.broadcast_shapes(alpha_bar.shape, std.shape) if size is None else size
    re = alpha_bar + std * rng.standard_normal(shape)
    im = alpha_bar + std * rng.standard_normal(shape)
    return re + 1j * im


@dataclass(frozen=True)
class ChannelStats:
    """Statistical CSI for the evaluated subcarriers.

    Arrays indexed ``[k, s, u]`` carry a subcarrier axis; ``kappa``, ``gain``
    and ``phases`` do not (the array response is evaluated at the carrier).
    ``g_eff`` is filled by :func:`leobeam.beams.effective_channels`.
    """
    subcarriers: np.ndarray     # (K_eval,)
    gamma: np.ndarray           # (K_eval, S, U)
    kappa: np.ndarray           # (S, U)
    alpha_bar: np.ndarray       # (K_eval, S, U)
    beta: np.ndarray            # (K_eval, S, U)
    gain: np.ndarray            # (S, U) radiation gain G
    phases: np.ndarray          # (S, U, N) unit modulus
    g_eff: np.ndarray | None = None   # (S, U, T)

    @property
    def num_sats(self) -> int:
        return self.kappa.shape[0]

    @property
    def num_uts(self) -> int:
        return self.kappa.shape[1]

    @property
    def num_eval(self) -> int:
        return self.subcarriers.shape[0]

    @property
    def steering(self) -> np.ndarray:
        return self.gain[..., None] * self.phases

    @property
    def mean_gain(self) -> np.ndarray:
        """``|E[alpha]| = sqrt(2) alpha_bar``."""
        return np.sqrt(2.0) * self.alpha_bar

    @property
    def var_gain(self) -> np.ndarray:
        """``E|alpha - E[alpha]|^2 = 2 beta``."""
        return 2.0 * self.beta

    def at(self, k: int) -> "LinkStats":
        if self.g_eff is None:
            raise ValueError("effective channels not built yet")
        return LinkStats(mean=self.mean_gain[k], var=self.var_gain[k], gamma=self.gamma[k], g=self.g_eff)

    def subset(self, sats=None, uts=None) -> "ChannelStats":
        sats = np.arange(self.num_sats) if sats is None else np.asarray(sats)
        uts = np.arange(self.num_uts) if uts is None else np.asarray(uts)
        ix = np.ix_(sats, uts)
        return dataclasses.replace(
            self,
            gamma=self.gamma[:, ix[0], ix[1]],
            kappa=self.kappa[ix],
            alpha_bar=self.alpha_bar[:, ix[0], ix[1]],
            beta=self.beta[:, ix[0], ix[1]],
            gain=self.gain[ix],
            phases=self.phases[ix],
            g_eff=None if self.g_eff is None else self.g_eff[ix],
        )


@dataclass(frozen=True)
class LinkStats:
    """Single-subcarrier view used by the rate and optimisation kernels.

    ``mean`` is ``|E[alpha]|``, ``var`` the complex variance; ``gamma = mean**2 + var``.
    """
    mean: np.ndarray    # (S, U)
    var: np.ndarray     # (S, U)
    gamma: np.ndarray   # (S, U)
    g: np.ndarray       # (S, U, T)

    @property
    def num_sats(self) -> int:
        return self.g.shape[0]

    @property
    def num_uts(self) -> int:
        return self.g.shape[1]


def build_channel_stats(cfg: SystemConfig, scn: Scenario, subcarriers=None) -> ChannelStats:
    subcarriers = cfg.eval_subcarriers() if subcarriers is None else np.atleast_1d(subcarriers)
    gamma = 10 ** (-path_loss_db(cfg, scn, subcarriers) / 10)
    kappa = np.array([[rician_factor(cfg, scn.rng_seed, s, u) for u in range(scn.num_uts)]
                      for s in range(scn.num_sats)])
    alpha_bar, beta = rician_moments(gamma, kappa[None])
    geo = all_link_geometry(scn)
    gain = radiation_gain(geo["aod_elevation"])
    phases = array_phases(cfg.panel_dims, geo["aod_azimuth"], geo["aod_elevation"])
    return ChannelStats(
        subcarriers=np.asarray(subcarriers),
        gamma=gamma,
        kappa=kappa,
        alpha_bar=alpha_bar,
        beta=beta,
        gain=gain,
        phases=phases,
    )
