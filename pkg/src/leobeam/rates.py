"""Hardening-bound rates, the decentralisable approximation and a Monte-Carlo oracle.

Notation for one subcarrier: ``X[s, u, l] = g_{s,u}^T w_{s,l}`` is the gain
that beam ``l`` of satellite ``s`` has towards terminal ``u``. The exact bound
is

    SINR_u = |sum_s m_su X_suu|^2 / (sum_l sum_s v_su |X_sul|^2
                                     + sum_{l != u} |sum_s m_su X_sul|^2 + sigma2)

with ``m = |E alpha|`` and ``v = Var alpha``. The approximation drops the
cross-satellite coherent terms of the interference, i.e. replaces
``|sum_s m X|^2 + sum_s v |X|^2`` by ``sum_s gamma |X|^2`` for ``l != u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beams import BeamformerSet
from .channel import ChannelStats, LinkStats, sample_alpha


def cross_gains(ls: LinkStats, weights: np.ndarray) -> np.ndarray:
    """``X[s, u, l] = g_{s,u}^T w_{s,l}`` for weights of shape (S, T, U)."""
    if weights.shape[:2] != (ls.num_sats, ls.g.shape[2]) or weights.shape[2] != ls.num_uts:
        raise ValueError(f"beamformer shape {weights.shape} does not match channel "
                         f"(S={ls.num_sats}, T={ls.g.shape[2]}, U={ls.num_uts})")
    return np.einsum("sut,stl->sul", ls.g, weights)


def _signal_and_self(ls: LinkStats, x: np.ndarray):
    diag = np.einsum("suu->su", x)
    signal = np.abs(np.sum(ls.mean * diag, axis=0)) ** 2
    self_var = np.sum(ls.var * np.abs(diag) ** 2, axis=0)
    return signal, self_var


def sinr_exact(ls: LinkStats, weights: np.ndarray, sigma2: float) -> np.ndarray:
    x = cross_gains(ls, weights)
    signal, self_var = _signal_and_self(ls, x)
    coherent = np.abs(np.einsum("su,sul->ul", ls.mean, x)) ** 2
    incoherent = np.einsum("su,sul->ul", ls.var, np.abs(x) ** 2)
    iui = coherent + incoherent
    np.fill_diagonal(iui, 0.0)
    return signal / (self_var + iui.sum(axis=1) + sigma2)


def sinr_approx(ls: LinkStats, weights: np.ndarray, sigma2: float) -> np.ndarray:
    x = cross_gains(ls, weights)
    signal, self_var = _signal_and_self(ls, x)
    iui = np.einsum("su,sul->ul", ls.gamma, np.abs(x) ** 2)
    np.fill_diagonal(iui, 0.0)
    return signal / (self_var + iui.sum(axis=1) + sigma2)


def rates_exact(ls: LinkStats, weights: np.ndarray, sigma2: float) -> np.ndarray:
    return np.log2(1 + sinr_exact(ls, weights, sigma2))


def rates_approx(ls: LinkStats, weights: np.ndarray, sigma2: float) -> np.ndarray:
    return np.log2(1 + sinr_approx(ls, weights, sigma2))


def hardening_bound_exact(stats: ChannelStats, bf: BeamformerSet, sigma2: float, u: int, k: int) -> float:
    return float(rates_exact(stats.at(k), bf.at(k), sigma2)[u])


def hardening_bound_approx(stats: ChannelStats, bf: BeamformerSet, sigma2: float, u: int, k: int) -> float:
    return float(rates_approx(stats.at(k), bf.at(k), sigma2)[u])


def tu_matrix(ls: LinkStats, u: int) -> np.ndarray:
    """Interference coupling matrix of terminal ``u`` over stacked beams.

    Block ``(i, j)`` is ``m_i m_j conj(g_i) g_j^T`` off the diagonal and
    ``gamma_i conj(g_i) g_i^T`` on it, so that ``w_l^H T_u w_l`` is the mean
    interference power of beam ``l`` at ``u`` (stacking ``w_l`` over satellites).
    """
    g = ls.g[:, u, :]
    m = ls.mean[:, u]
    num_sats, width = g.shape
    vec = (m[:, None] * g).reshape(-1)
    out = np.outer(vec.conj(), vec)
    for s in range(num_sats):
        sl = slice(s * width, (s + 1) * width)
        out[sl, sl] = ls.gamma[s, u] * np.outer(g[s].conj(), g[s])
    return out


def mc_ergodic_rate(stats: ChannelStats, bf: BeamformerSet, sigma2: float, u: int, k: int,
                    draws: int, rng: np.random.Generator):
    """Monte-Carlo ``E[log2(1 + SINR)]`` with genie-aided instantaneous gains.

    Returns ``(mean_rate, std_err)``.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    ls = stats.at(k)
    x = cross_gains(ls, bf.at(k))[:, u, :]                       # (S, U)
    alpha = sample_alpha(stats.alpha_bar[k, :, u], stats.beta[k, :, u], rng, size=(draws, ls.num_sats))
    rx = alpha @ x                                                # (draws, U)
    power = np.abs(rx) ** 2
    signal = power[:, u]
    interference = power.sum(axis=1) - signal
    rate = np.log2(1 + signal / (interference + sigma2))
    if draws == 1:
        return float(rate[0]), 0.0
    return float(rate.mean()), float(rate.std(ddof=1) / np.sqrt(draws))


@dataclass(frozen=True)
class RateReport:
    per_user: np.ndarray            # (K_sel, U) exact bound, bit/s/Hz
    per_user_approx: np.ndarray     # (K_sel, U)
    objective: float                # mean over subcarriers of the per-subcarrier sum
    objective_approx: float
    sum_rate_bps: float
    subcarriers: np.ndarray


def sum_rate(stats: ChannelStats, bf: BeamformerSet, sigma2: float, num_subcarriers: int,
             spacing_hz: float, subcarriers=None) -> RateReport:
    """Aggregate rates over a subset of the evaluated subcarriers.

    ``subcarriers`` indexes the evaluated set (default: all of it). The
    bit rate is extrapolated to all ``num_subcarriers`` by ``K / K_sel``.
    """
    sel = np.arange(stats.num_eval) if subcarriers is None else np.atleast_1d(subcarriers)
    if sel.size == 0:
        raise ValueError("empty subcarrier set")
    exact = np.stack([rates_exact(stats.at(k), bf.at(k), sigma2) for k in sel])
    approx = np.stack([rates_approx(stats.at(k), bf.at(k), sigma2) for k in sel])
    objective = float(exact.sum(axis=1).mean())
    total = spacing_hz * exact.sum() * num_subcarriers / sel.size
    return RateReport(
        per_user=exact,
        per_user_approx=approx,
        objective=objective,
        objective_approx=float(approx.sum(axis=1).mean()),
        sum_rate_bps=float(total),
        subcarriers=stats.subcarriers[sel],
    )
