"""Decentralised WMMSE over a star of inter-satellite links.

All satellites update in parallel against the same broadcast intermediates.
Edge satellites send their refreshed copies to the center, which merges
them with a penalty dual decomposition (PDD) consensus step and broadcasts
the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beams import AnalogBeamformer, BeamformerSet, Schedule
from .channel import ChannelStats
from .config import PddParams
from .isl import MessageLedger, Topology, record_message
from .qcqp import solve_separable_alp
from .rates import rates_approx
from .ring import Intermediates, approx_auxiliary, compute_intermediates, local_wmmse_step
from .wmmse import RunResult, per_subcarrier_objective, relative_change, wmmse_utility


@dataclass
class PddState:
    duals: np.ndarray           # (S, U+2, U) complex
    rho: float
    delta: float = 2.0
    q: float = 0.9
    h_prev: float = np.inf

    @classmethod
    def fresh(cls, num_sats: int, num_uts: int, params: PddParams = PddParams()) -> "PddState":
        return cls(np.zeros((num_sats, num_uts + 2, num_uts), dtype=complex), params.rho0,
                   params.delta, params.q)


def violation(gamma, gamma_locals, duals, rho) -> np.ndarray:
    """``h_s = ||Gamma - Gamma_s + Theta_s / rho||_inf`` for every satellite."""
    return np.abs(gamma[None] - gamma_locals + duals / rho).reshape(len(gamma_locals), -1).max(axis=1)


def pdd_consensus(nu, mu, sigma2, gamma_locals, state: PddState | None = None,
                  tol: float = 1e-6, max_iters: int = 200):
    """Consensus over the local intermediate copies.

    Each iteration minimises the augmented Lagrangian in closed form, then
    either updates the duals (violation ``h`` fell below ``q`` times its
    previous value) or multiplies the penalty by ``delta``. ``h`` is the
    minimum of the per-satellite violations. Stops when ``h < tol`` or
    after ``max_iters`` iterations.

    Returns
    -------
    gamma : ndarray, shape (U+2, U)
    state : PddState
    iterations : int
    h_trace : list of float
    """
    gamma_locals = np.asarray(gamma_locals, dtype=complex)
    num_sats, rows, num_uts = gamma_locals.shape
    if state is None:
        state = PddState.fresh(num_sats, num_uts)
    h_trace = []
    gamma = None
    it = 0
    while it < max_iters:
        it += 1
        gamma = solve_separable_alp(nu, mu, sigma2, gamma_locals, state.duals, state.rho)
        h = float(violation(gamma, gamma_locals, state.duals, state.rho).min())
        if not (np.all(np.isfinite(gamma)) and np.isfinite(h)):
            raise FloatingPointError("consensus produced non-finite values")
        h_trace.append(h)
        if h <= state.q * state.h_prev:
            state.duals = state.duals + state.rho * (gamma[None] - gamma_locals)
        else:
            state.rho *= state.delta
        state.h_prev = h
        if h < tol:
            break
    return gamma, state, it, h_trace


def run_star(stats: ChannelStats, sched: Schedule, analog: AnalogBeamformer, sigma2: float,
             budget: float, init: BeamformerSet | None = None, tol: float = 1e-4,
             max_iters: int = 100, central_sat: int = 0, pdd: PddParams = PddParams(),
             bisect_tol: float = 1e-10) -> RunResult:
    """Parallel local updates followed by consensus at ``central_sat``.

    The consensus runs in noise-normalised units (``F / sigma``,
    ``P / sigma^2``, ``Q / sigma^2``) so that the penalty and the violation
    threshold are independent of the absolute power level. ``mu``/``nu``
    entering the consensus objective are the center's values. The trace is
    the approximate-bound objective of the actual beamformers.
    """
    if init is None:
        from .baselines import mrt_beamformers
        init = mrt_beamformers(stats, sched, analog, budget)
    num_sats, num_uts, num_eval = stats.num_sats, stats.num_uts, stats.num_eval
    topo = Topology.star(num_sats, central_sat)
    ledger = MessageLedger(topo, num_uts)
    weights = init.weights.copy()
    shared = [compute_intermediates(stats.at(k), weights[k]) for k in range(num_eval)]
    row_scale = np.concatenate([[1.0 / np.sqrt(sigma2), 1.0 / sigma2], np.full(num_uts, 1.0 / sigma2)])

    obj = per_subcarrier_objective(stats, weights, sigma2, rates_approx)
    trace = [float(obj.mean())]
    exact = [float(per_subcarrier_objective(stats, weights, sigma2).mean())]
    pdd_iters, pdd_h, utility = [], [], []
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        util = np.zeros(num_eval)
        for k in range(num_eval):
            ls = stats.at(k)
            mu_c, nu_c, ups_c = approx_auxiliary(shared[k], sigma2)
            util[k] = wmmse_utility(nu_c, ups_c)
            locals_k = []
            new_w = np.empty_like(weights[k])
            for s in range(num_sats):
                new_w[s], _, _, _, inter_s = local_wmmse_step(
                    ls, shared[k], weights[k, s], s, sigma2, analog.gram[s], sched.mask[s], budget,
                    strict=False, bisect_tol=bisect_tol)
                locals_k.append(inter_s.to_matrix() * row_scale[:, None])
            weights[k] = new_w
            state = PddState.fresh(num_sats, num_uts, pdd)
            gamma, state, n_pdd, h_tr = pdd_consensus(nu_c, mu_c * np.sqrt(sigma2), 1.0, np.stack(locals_k),
                                                      state, tol=pdd.tol, max_iters=pdd.max_iters)
            shared[k] = Intermediates.from_matrix(gamma / row_scale[:, None])
            pdd_iters.append(n_pdd)
            pdd_h.append(h_tr[-1])
        for s in range(num_sats):
            if s != central_sat:
                record_message(ledger, it, s, central_sat, num_eval, slot=2 * it - 2)
        for s in range(num_sats):
            if s != central_sat:
                record_message(ledger, it, central_sat, s, num_eval, slot=2 * it - 1)
        utility.append(float(util.mean()))
        new_obj = per_subcarrier_objective(stats, weights, sigma2, rates_approx)
        trace.append(float(new_obj.mean()))
        exact.append(float(per_subcarrier_objective(stats, weights, sigma2).mean()))
        done = relative_change(new_obj, obj) < tol
        obj = new_obj
        if done:
            converged = True
            break
    return RunResult(bf=init.with_weights(weights), trace=trace, iterations=it, converged=converged,
                     ledger=ledger, extra={"exact_trace": exact, "utility": utility,
                                           "pdd_iterations": pdd_iters, "pdd_violation": pdd_h})
