"""Heuristic networked beamformers and single-satellite-service (S3) baselines."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .beams import AnalogBeamformer, BeamformerSet, Schedule, build_analog_beamformer, effective_channels, nearest_users
from .channel import ChannelStats
from .rates import RateReport, sum_rate

log = logging.getLogger(__name__)

ZF_RANK_RTOL = 1e-12
ZF_REG_EPS = 1e-9


def _scale_to_budget(weights: np.ndarray, gram: np.ndarray, budget: float) -> np.ndarray:
    """Common real factor per (k, s) so each satellite spends exactly ``budget``."""
    power = np.einsum("kstu,str,ksru->ks", weights.conj(), gram, weights).real
    factor = np.divide(np.sqrt(budget), np.sqrt(power), out=np.zeros_like(power), where=power > 0)
    return weights * factor[:, :, None, None]


def mrt_beamformers(stats: ChannelStats, sched: Schedule, analog: AnalogBeamformer, budget: float) -> BeamformerSet:
    """``w_{s,u} = zeta_s conj(g_{s,u})`` for served pairs, full budget per satellite."""
    g = stats.g_eff
    base = np.where(sched.mask[:, :, None], g.conj(), 0.0).transpose(0, 2, 1)    # (S, T, U)
    weights = np.broadcast_to(base, (stats.num_eval,) + base.shape).copy()
    return BeamformerSet(_scale_to_budget(weights, analog.gram, budget), sched.mask.copy())


def zf_directions(g_served: np.ndarray):
    """Right pseudo-inverse of the stacked rows ``g_{s,j}^T``.

    Returns ``(W, regularized)``; ``W`` has shape (T, |served|). A numerically
    rank-deficient stack falls back to ``G^H (G G^H + eps ||G||^2 I)^-1``.
    """
    sv = np.linalg.svd(g_served, compute_uv=False)
    if sv.size and sv[-1] > ZF_RANK_RTOL * sv[0]:
        return np.linalg.pinv(g_served), False
    gram = g_served @ g_served.conj().T
    eps = ZF_REG_EPS * (sv[0] ** 2 if sv.size else 1.0)
    reg = np.linalg.solve(gram + eps * np.eye(gram.shape[0]), np.eye(gram.shape[0]))
    return g_served.conj().T @ reg, True


def zf_beamformers_info(stats: ChannelStats, sched: Schedule, analog: AnalogBeamformer, budget: float):
    g = stats.g_eff
    base = np.zeros((sched.num_sats, g.shape[2], sched.num_uts), dtype=complex)
    flagged = []
    for s, users in enumerate(sched.served):
        if len(users) == 0:
            continue
        w, reg = zf_directions(g[s, users])
        base[s][:, users] = w
        if reg:
            flagged.append(s)
            log.warning("ZF stack of satellite %d is rank deficient; using regularised inverse", s)
    weights = np.broadcast_to(base, (stats.num_eval,) + base.shape).copy()
    return BeamformerSet(_scale_to_budget(weights, analog.gram, budget), sched.mask.copy()), flagged


def zf_beamformers(stats: ChannelStats, sched: Schedule, analog: AnalogBeamformer, budget: float) -> BeamformerSet:
    """Per-satellite zero forcing among its served terminals, full budget per satellite."""
    return zf_beamformers_info(stats, sched, analog, budget)[0]


@dataclass(frozen=True)
class S3Assignment:
    """Nearest-satellite association; ``schedule`` caps each set at ``N_RF`` nearest members."""
    serving: np.ndarray         # (U,) nearest satellite of every terminal
    schedule: Schedule

    @classmethod
    def from_distances(cls, distances: np.ndarray, num_rfc: int) -> "S3Assignment":
        num_sats, num_uts = distances.shape
        serving = np.argmin(distances, axis=0)
        served = []
        for s in range(num_sats):
            members = np.flatnonzero(serving == s)
            keep = members[nearest_users(distances[s, members], num_rfc)] if members.size else members
            served.append(keep)
        return cls(serving=serving, schedule=Schedule.from_sets(served, num_uts))


S3_SCHEMES = ("wmmse", "mrt", "zf")


def s3_run(stats: ChannelStats, distances: np.ndarray, num_rfc: int, sigma2: float, budget: float,
           scheme: str, num_subcarriers: int, spacing_hz: float, tol: float = 1e-4,
           max_iters: int = 100, sweeps: int = 3):
    """Each satellite designs beams for its own terminals only, ignoring the others.

    The analog beamformer is rebuilt from the S3 served sets. Rates are then
    evaluated with the full multi-satellite model, so interference from the
    other satellites is present even though no optimiser accounted for it.

    Returns
    -------
    bf : BeamformerSet
    report : RateReport
    info : dict
        ``iterations`` (max over satellites) and the ``schedule``/``analog`` used.
    """
    if scheme not in S3_SCHEMES:
        raise ValueError(f"unknown S3 scheme {scheme!r}; choose from {S3_SCHEMES}")
    from .wmmse import run_central

    sched = S3Assignment.from_distances(distances, num_rfc).schedule
    analog = build_analog_beamformer(stats, sched)
    full = effective_channels(stats, analog)
    width = analog.gram.shape[1]
    weights = np.zeros((full.num_eval, full.num_sats, width, full.num_uts), dtype=complex)
    iterations = 0
    for s, users in enumerate(sched.served):
        if len(users) == 0:
            continue
        sub = full.subset([s], users)
        sub_sched = Schedule.from_sets([np.arange(len(users))], len(users))
        sub_analog = AnalogBeamformer(analog.matrices[[s]], analog.gram[[s]])
        if scheme == "mrt":
            bf_s = mrt_beamformers(sub, sub_sched, sub_analog, budget)
        elif scheme == "zf":
            bf_s = zf_beamformers(sub, sub_sched, sub_analog, budget)
        else:
            res = run_central(sub, sub_sched, sub_analog, sigma2, budget, tol=tol, max_iters=max_iters,
                              sweeps=sweeps)
            bf_s = res.bf
            iterations = max(iterations, res.iterations)
        weights[:, s][:, :, users] = bf_s.weights[:, 0]
    bf = BeamformerSet(weights, sched.mask.copy())
    report = sum_rate(full, bf, sigma2, num_subcarriers, spacing_hz)
    return bf, report, {"iterations": iterations, "schedule": sched, "analog": analog, "stats": full}
