"""Centralised WMMSE beamforming over the networked satellites.

Each iteration updates the receive scalars ``mu`` and weights ``nu`` in
closed form and then solves the coupled beamformer QCQP over all satellites
by block coordinate descent. Subcarriers are independent problems that are
iterated in lockstep with a joint stopping rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beams import AnalogBeamformer, BeamformerSet, Schedule
from .channel import ChannelStats, LinkStats
from .qcqp import solve_multiblock_qcqp
from .rates import cross_gains, rates_exact


@dataclass
class AuxiliaryState:
    """Receive scalars and MSE weights, shape (K_eval, U)."""
    mu: np.ndarray
    nu: np.ndarray
    upsilon: np.ndarray


@dataclass
class RunResult:
    """Outcome of one iterative scheme.

    ``trace[i]`` is the objective after ``i`` iterations (``trace[0]`` is the
    initial point), averaged over the evaluated subcarriers.
    """
    bf: BeamformerSet
    trace: list
    iterations: int
    converged: bool
    ledger: object = None
    extra: dict = field(default_factory=dict)


def signal_and_interference(ls: LinkStats, weights: np.ndarray, sigma2: float):
    """``F_u`` (complex) and ``Psi_u`` (interference-plus-noise of the exact bound)."""
    x = cross_gains(ls, weights)
    f = np.einsum("su,suu->u", ls.mean, x)
    coherent = np.abs(np.einsum("su,sul->ul", ls.mean, x)) ** 2
    np.fill_diagonal(coherent, 0.0)
    incoherent = np.einsum("su,sul->u", ls.var, np.abs(x) ** 2)
    return f, coherent.sum(axis=1) + incoherent + sigma2


def update_mu(f: np.ndarray, psi: np.ndarray) -> np.ndarray:
    return f.conj() / (np.abs(f) ** 2 + psi)


def mse(mu: np.ndarray, f: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """``Upsilon = |1 - mu F|^2 + |mu|^2 Psi``."""
    return np.abs(1 - mu * f) ** 2 + np.abs(mu) ** 2 * psi


def update_nu(upsilon: np.ndarray) -> np.ndarray:
    if np.any(upsilon <= 0):
        raise FloatingPointError("non-positive MSE")
    return 1.0 / upsilon


def wmmse_utility(nu: np.ndarray, upsilon: np.ndarray) -> float:
    """``sum_u ln(nu_u) - nu_u Upsilon_u`` (nats, shifted by -U at the optimum)."""
    return float(np.sum(np.log(nu) - nu * upsilon))


def auxiliary_update(ls: LinkStats, weights: np.ndarray, sigma2: float):
    f, psi = signal_and_interference(ls, weights, sigma2)
    mu = update_mu(f, psi)
    ups = mse(mu, f, psi)
    return mu, update_nu(ups), ups


def central_quadratic(ls: LinkStats, mu: np.ndarray, nu: np.ndarray):
    """Quadratic ``A`` (shared by all beams) and linear terms of ``sum_u nu_u Upsilon_u``.

    Returns ``A`` of shape (S*T, S*T) and ``B`` of shape (U, S*T); beam
    ``l`` stacked over satellites costs ``w^H A w - 2 Re(B[l]^H w)``.
    """
    num_sats, num_uts, width = ls.g.shape
    c = nu * np.abs(mu) ** 2
    h = (ls.mean[:, :, None] * ls.g).transpose(1, 0, 2).reshape(num_uts, num_sats * width)
    a = np.einsum("u,ui,uj->ij", c, h.conj(), h)
    diag = np.einsum("u,su,sui,suj->sij", c, ls.var, ls.g.conj(), ls.g)
    for s in range(num_sats):
        blk = slice(s * width, (s + 1) * width)
        a[blk, blk] += diag[s]
    a = 0.5 * (a + a.conj().T)
    b = (nu * mu.conj())[:, None] * h.conj()
    return a, b


def central_beamformer_update(ls: LinkStats, weights: np.ndarray, mu, nu, gram: np.ndarray,
                              mask: np.ndarray, budget: float, sweeps: int = 3,
                              bisect_tol: float = 1e-10) -> np.ndarray:
    """Minimise ``sum_u nu_u Upsilon_u`` over all satellites, warm-started at ``weights``."""
    a, b = central_quadratic(ls, mu, nu)
    w, _ = solve_multiblock_qcqp(a, b, gram, budget, mask, w0=weights, tol=0.0,
                                 max_rounds=sweeps, bisect_tol=bisect_tol)
    return w


def relative_change(new: np.ndarray, old: np.ndarray) -> float:
    """Largest relative change across subcarriers."""
    new, old = np.atleast_1d(new), np.atleast_1d(old)
    return float(np.max(np.abs(new - old) / np.maximum(np.abs(old), 1e-300)))


def per_subcarrier_objective(stats: ChannelStats, weights: np.ndarray, sigma2: float, rate_fn=rates_exact):
    return np.array([rate_fn(stats.at(k), weights[k], sigma2).sum() for k in range(stats.num_eval)])


def run_central(stats: ChannelStats, sched: Schedule, analog: AnalogBeamformer, sigma2: float,
                budget: float, init: BeamformerSet | None = None, tol: float = 1e-4,
                max_iters: int = 100, sweeps: int = 3, bisect_tol: float = 1e-10) -> RunResult:
    """Iterate the centralised WMMSE updates until the relative objective change drops below ``tol``.

    The objective is ``sum_u log2(1 + SINR_u)`` under the exact hardening
    bound, averaged over the evaluated subcarriers. ``init`` defaults to MRT.
    """
    if init is None:
        from .baselines import mrt_beamformers
        init = mrt_beamformers(stats, sched, analog, budget)
    weights = init.weights.copy()
    obj = per_subcarrier_objective(stats, weights, sigma2)
    trace = [float(obj.mean())]
    utility = []
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        util_k = 0.0
        for k in range(stats.num_eval):
            ls = stats.at(k)
            mu, nu, ups = auxiliary_update(ls, weights[k], sigma2)
            util_k += wmmse_utility(nu, ups)
            weights[k] = central_beamformer_update(ls, weights[k], mu, nu, analog.gram, sched.mask,
                                                   budget, sweeps, bisect_tol)
        utility.append(util_k / stats.num_eval)
        new_obj = per_subcarrier_objective(stats, weights, sigma2)
        trace.append(float(new_obj.mean()))
        done = relative_change(new_obj, obj) < tol
        obj = new_obj
        if done:
            converged = True
            break
    return RunResult(bf=init.with_weights(weights), trace=trace, iterations=it, converged=converged,
                     extra={"utility": utility})
