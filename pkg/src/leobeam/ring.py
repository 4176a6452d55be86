"""Decentralised WMMSE over a ring of inter-satellite links.

Satellites optimise one after another. Each receives the network-wide
intermediates ``F_u``, ``P_u``, ``Q_{u,l}``, removes its own contribution,
updates ``mu``/``nu`` and its own beamformer against the frozen remainder,
adds the new contribution back and relays the result to its successor.

Interference is modelled with the decentralisable approximation, which
ignores coherent combining of interference across satellites.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beams import AnalogBeamformer, BeamformerSet, Schedule
from .channel import ChannelStats, LinkStats
from .isl import MessageLedger, Topology, record_message
from .qcqp import solve_single_constraint_qcqp
from .rates import rates_approx
from .wmmse import RunResult, mse, per_subcarrier_objective, relative_change, update_mu, update_nu, wmmse_utility

NEG_RTOL = 1e-9


@dataclass
class Intermediates:
    """``f`` (U,) complex, ``p`` (U,) and ``q`` (U, U) with a zero diagonal, for one subcarrier."""
    f: np.ndarray
    p: np.ndarray
    q: np.ndarray

    def to_matrix(self) -> np.ndarray:
        """Stack as ``[f; p; Q^T]`` of shape (U+2, U): column ``u`` holds terminal ``u``'s data."""
        return np.vstack([self.f[None], self.p[None].astype(complex), self.q.T.astype(complex)])

    @classmethod
    def from_matrix(cls, gamma: np.ndarray) -> "Intermediates":
        q = gamma[2:].real.T.copy()
        np.fill_diagonal(q, 0.0)
        return cls(gamma[0].copy(), gamma[1].real.copy(), q)

    def copy(self) -> "Intermediates":
        return Intermediates(self.f.copy(), self.p.copy(), self.q.copy())

    def __add__(self, other: "Intermediates") -> "Intermediates":
        return Intermediates(self.f + other.f, self.p + other.p, self.q + other.q)

    def __sub__(self, other: "Intermediates") -> "Intermediates":
        return Intermediates(self.f - other.f, self.p - other.p, self.q - other.q)


def contribution(ls: LinkStats, w_s: np.ndarray, s: int) -> Intermediates:
    """What satellite ``s`` adds to the intermediates with beamformer ``w_s`` (T, U)."""
    x = ls.g[s] @ w_s                                   # (U, U): x[u, l] = g_{s,u}^T w_{s,l}
    diag = np.diag(x)
    q = ls.gamma[s][:, None] * np.abs(x) ** 2
    np.fill_diagonal(q, 0.0)
    return Intermediates(ls.mean[s] * diag, ls.var[s] * np.abs(diag) ** 2, q)


def compute_intermediates(ls: LinkStats, weights: np.ndarray) -> Intermediates:
    total = contribution(ls, weights[0], 0)
    for s in range(1, ls.num_sats):
        total = total + contribution(ls, weights[s], s)
    return total


def extract_local(inter: Intermediates, ls: LinkStats, w_s: np.ndarray, s: int,
                  strict: bool = True) -> Intermediates:
    """Remove satellite ``s``'s own contribution from the network-wide intermediates.

    Negative powers within ``NEG_RTOL`` of the largest entry are rounding and
    are clamped. Larger negatives mean the intermediates were not produced by
    the current beamformers: ``strict`` raises, otherwise they are clamped
    (used after a consensus step, where exact consistency is not expected).
    """
    local = inter - contribution(ls, w_s, s)
    for name in ("p", "q"):
        arr = getattr(local, name)
        scale = max(np.abs(getattr(inter, name)).max(initial=0.0), 1e-300)
        if strict and arr.min(initial=0.0) < -NEG_RTOL * scale:
            raise ValueError(f"local {name.upper()} negative beyond tolerance ({arr.min():.3e}); "
                             "intermediates are stale")
        np.maximum(arr, 0.0, out=arr)
    return local


def approx_auxiliary(inter: Intermediates, sigma2: float):
    psi = inter.p + inter.q.sum(axis=1) + sigma2
    mu = update_mu(inter.f, psi)
    ups = mse(mu, inter.f, psi)
    return mu, update_nu(ups), ups


def local_quadratic(ls: LinkStats, s: int, mu, nu, local: Intermediates):
    """Quadratic (T, T) and linear terms (U, T) of satellite ``s``'s subproblem."""
    g = ls.g[s]
    c = nu * np.abs(mu) ** 2
    a = np.einsum("u,u,ui,uj->ij", c, ls.gamma[s], g.conj(), g)
    a = 0.5 * (a + a.conj().T)
    b = (ls.mean[s] * (nu * mu.conj() - c * local.f))[:, None] * g.conj()
    return a, b


def local_wmmse_step(ls: LinkStats, inter: Intermediates, w_s: np.ndarray, s: int, sigma2: float,
                     gram_s: np.ndarray, mask_s: np.ndarray, budget: float, strict: bool = True,
                     bisect_tol: float = 1e-10):
    """One satellite's update. Returns ``(new w_s, mu, nu, upsilon, new intermediates)``."""
    local = extract_local(inter, ls, w_s, s, strict=strict)
    mu, nu, ups = approx_auxiliary(inter, sigma2)
    a, b = local_quadratic(ls, s, mu, nu, local)
    cols = np.flatnonzero(mask_s)
    new = np.zeros_like(w_s)
    if cols.size:
        sol, _ = solve_single_constraint_qcqp(a, b[cols], gram_s, budget, tol=bisect_tol, check=False)
        new[:, cols] = sol.T
    return new, mu, nu, ups, local + contribution(ls, new, s)


def run_ring(stats: ChannelStats, sched: Schedule, analog: AnalogBeamformer, sigma2: float,
             budget: float, init: BeamformerSet | None = None, tol: float = 1e-4,
             max_iters: int = 100, bisect_tol: float = 1e-10) -> RunResult:
    """Sequential ring sweeps; one full loop over the satellites is one iteration.

    The trace holds the approximate-bound objective (the quantity being
    optimised); ``extra["exact_trace"]`` holds the exact bound of the same
    iterates. Every hop is logged in ``result.ledger``.
    """
    if init is None:
        from .baselines import mrt_beamformers
        init = mrt_beamformers(stats, sched, analog, budget)
    num_sats = stats.num_sats
    topo = Topology.ring(num_sats)
    ledger = MessageLedger(topo, stats.num_uts)
    weights = init.weights.copy()
    inters = [compute_intermediates(stats.at(k), weights[k]) for k in range(stats.num_eval)]

    obj = per_subcarrier_objective(stats, weights, sigma2, rates_approx)
    trace = [float(obj.mean())]
    exact = [float(per_subcarrier_objective(stats, weights, sigma2).mean())]
    utility = []
    converged = False
    loop = 0
    while loop < max_iters:
        loop += 1
        util = np.zeros(stats.num_eval)
        for s in range(num_sats):
            for k in range(stats.num_eval):
                weights[k, s], _, nu, ups, inters[k] = local_wmmse_step(
                    stats.at(k), inters[k], weights[k, s], s, sigma2, analog.gram[s], sched.mask[s],
                    budget, strict=True, bisect_tol=bisect_tol)
                if s == num_sats - 1:
                    util[k] = wmmse_utility(nu, ups)
            record_message(ledger, loop, s, topo.successor(s), stats.num_eval)
        utility.append(float(util.mean()))
        new_obj = per_subcarrier_objective(stats, weights, sigma2, rates_approx)
        trace.append(float(new_obj.mean()))
        exact.append(float(per_subcarrier_objective(stats, weights, sigma2).mean()))
        done = relative_change(new_obj, obj) < tol
        obj = new_obj
        if done:
            converged = True
            break
    return RunResult(bf=init.with_weights(weights), trace=trace, iterations=loop, converged=converged,
                     ledger=ledger, extra={"exact_trace": exact, "utility": utility,
                                           "intermediates": inters})
