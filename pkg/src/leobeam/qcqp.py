"""Convex QCQP kernels.

All problems here have column costs ``w^H A w - 2 Re(b^H w)`` with Hermitian
PSD ``A`` and a shared power constraint ``sum_l w_l^H G w_l <= budget``.
"""

from __future__ import annotations

import numpy as np

PINV_RTOL = 1e-12


class QcqpError(ValueError):
    pass


def _check_hermitian_psd(mat: np.ndarray, name: str) -> None:
    scale = max(np.abs(mat).max(initial=0.0), 1e-300)
    if np.abs(mat - np.swapaxes(mat, -1, -2).conj()).max(initial=0.0) > 1e-10 * scale:
        raise QcqpError(f"{name} is not Hermitian")
    lo = np.linalg.eigvalsh(mat).min()
    if lo < -1e-9 * scale:
        raise QcqpError(f"{name} is not positive semidefinite (min eigenvalue {lo:.3e})")


def column_objective(a_mats: np.ndarray, b_vecs: np.ndarray, w: np.ndarray) -> float:
    """``sum_l w_l^H A_l w_l - 2 Re(b_l^H w_l)`` for columns stored as rows of ``w``."""
    a_mats = np.broadcast_to(a_mats, (w.shape[0],) + a_mats.shape[-2:])
    quad = np.einsum("li,lij,lj->", w.conj(), a_mats, w).real
    return float(quad - 2 * np.vdot(b_vecs, w).real)


class _Whitened:
    """Columns expressed in coordinates where the constraint becomes ``||y||^2``."""

    def __init__(self, a_mats, b_vecs, gram):
        g_val, g_vec = np.linalg.eigh(gram)
        keep = g_val > PINV_RTOL * max(g_val.max(initial=0.0), 0.0)
        self.to_w = g_vec[:, keep] / np.sqrt(g_val[keep])     # w = to_w @ y
        rng = g_vec[:, keep]
        residual = b_vecs - (b_vecs @ rng.conj()) @ rng.T
        if np.abs(residual).max(initial=0.0) > 1e-9 * max(np.abs(b_vecs).max(initial=0.0), 1e-300):
            raise QcqpError("linear term has a component the power constraint does not limit")
        a_t = np.einsum("ir,lij,js->lrs", self.to_w.conj(), a_mats, self.to_w)
        a_t = 0.5 * (a_t + np.swapaxes(a_t, -1, -2).conj())
        self.theta, self.vecs = np.linalg.eigh(a_t)            # (L, r), (L, r, r)
        top = np.abs(self.theta).max(initial=0.0)
        self.theta = np.where(self.theta > PINV_RTOL * top, self.theta, 0.0)
        b_t = b_vecs @ self.to_w.conj()                         # (L, r)
        self.coef = np.einsum("lrs,lr->ls", self.vecs.conj(), b_t)
        self.coef2 = np.abs(self.coef) ** 2

    def power(self, lam: float) -> float:
        if lam == 0.0:
            zero = self.theta == 0.0
            if np.any(self.coef2[zero] > 0.0):
                return np.inf
            return float(np.sum(self.coef2[~zero] / self.theta[~zero] ** 2))
        return float(np.sum(self.coef2 / (self.theta + lam) ** 2))

    def columns(self, lam: float) -> np.ndarray:
        denom = self.theta + lam
        inv = np.divide(1.0, denom, out=np.zeros_like(denom), where=denom > 0)
        y = np.einsum("lrs,ls->lr", self.vecs, inv * self.coef)
        return y @ self.to_w.T


def solve_single_constraint_qcqp(a_mats, b_vecs, gram, budget: float, tol: float = 1e-10,
                                 check: bool = True):
    """Minimise ``sum_l w_l^H A_l w_l - 2 Re(b_l^H w_l)`` s.t. ``sum_l w_l^H G w_l <= budget``.

    KKT gives ``w_l(lam) = (A_l + lam G)^{-1} b_l``. If the ``lam = 0``
    solution (pseudo-inverse) fits the budget it is returned; otherwise
    ``lam`` is bisected on the monotone power curve until the power lies in
    ``[budget (1 - tol), budget]``.

    Parameters
    ----------
    a_mats : ndarray, shape (n, n) or (L, n, n)
        Quadratic terms; a single matrix is shared by all columns.
    b_vecs : ndarray, shape (L, n)
    gram : ndarray, shape (n, n)
    budget : float

    Returns
    -------
    w : ndarray, shape (L, n)
    lam : float
        Optimal multiplier of the power constraint.
    """
    b_vecs = np.atleast_2d(np.asarray(b_vecs, dtype=complex))
    num_cols, n = b_vecs.shape
    a_mats = np.asarray(a_mats, dtype=complex)
    if a_mats.ndim == 2:
        a_mats = a_mats[None]
    if a_mats.shape[-2:] != (n, n) or gram.shape != (n, n):
        raise QcqpError("dimension mismatch between A, b and G")
    if budget <= 0:
        raise QcqpError("budget must be positive")
    if check:
        _check_hermitian_psd(a_mats, "A")
        _check_hermitian_psd(gram, "G")
    if num_cols == 0:
        return np.zeros((0, n), dtype=complex), 0.0
    a_full = np.broadcast_to(a_mats, (num_cols, n, n))
    white = _Whitened(a_mats if a_mats.shape[0] == num_cols else a_full, b_vecs, gram)
    if white.to_w.shape[1] == 0:
        return np.zeros((num_cols, n), dtype=complex), 0.0

    if white.power(0.0) <= budget:
        return white.columns(0.0), 0.0

    lo, hi = 0.0, float(np.sqrt(white.coef2.sum() / budget))   # power(hi) <= budget always
    p_lo, p_hi = np.inf, white.power(hi)
    if not np.isfinite(hi) or hi <= 0 or p_hi > budget * (1 + 1e-12):
        raise QcqpError("could not bracket the power-constraint multiplier")
    for _ in range(400):
        if budget - p_hi <= tol * budget or hi - lo <= 1e-15 * hi:
            break
        mid = 0.5 * (lo + hi)
        p_mid = white.power(mid)
        if not (p_hi <= p_mid * (1 + 1e-12) and p_mid <= p_lo * (1 + 1e-12)):
            raise QcqpError("power is not monotone in the multiplier")
        if p_mid > budget:
            lo, p_lo = mid, p_mid
        else:
            hi, p_hi = mid, p_mid
    return white.columns(hi), hi


def solve_multiblock_qcqp(a_full, b_full, grams, budgets, active, w0=None, tol: float = 1e-9,
                          max_rounds: int = 3, bisect_tol: float = 1e-10):
    """Gauss-Seidel block coordinate descent over satellites.

    The variable is ``W[s, :, l]`` (S, T, L). Column ``l`` stacked over
    satellites, ``w_l`` (length S*T), has cost ``w_l^H A_l w_l - 2 Re(b_l^H w_l)``;
    each satellite ``s`` has its own constraint with ``grams[s]``,
    ``budgets[s]``. Inactive columns (``active[s, l] == False``) stay zero.

    Parameters
    ----------
    a_full : ndarray, shape (S*T, S*T) or (L, S*T, S*T)
    b_full : ndarray, shape (L, S*T)
    grams : ndarray, shape (S, T, T)
    budgets : array_like, shape (S,)
    active : ndarray of bool, shape (S, L)
    w0 : ndarray, shape (S, T, L), optional
        Starting point; must be feasible. Defaults to zero.

    Returns
    -------
    w : ndarray, shape (S, T, L)
    trace : list of float
        Objective after each full round (first entry is the starting point).
    """
    num_sats, width = grams.shape[:2]
    b_full = np.asarray(b_full, dtype=complex)
    num_cols = b_full.shape[0]
    a_full = np.asarray(a_full, dtype=complex)
    shared = a_full.ndim == 2
    budgets = np.broadcast_to(np.asarray(budgets, dtype=float), (num_sats,))
    w = np.zeros((num_sats, width, num_cols), dtype=complex) if w0 is None else np.array(w0, dtype=complex)
    w[~np.broadcast_to(active[:, None, :], w.shape)] = 0.0

    def total(wcur):
        stacked = wcur.transpose(2, 0, 1).reshape(num_cols, num_sats * width)
        return column_objective(a_full, b_full, stacked)

    trace = [total(w)]
    for _ in range(max_rounds):
        for s in range(num_sats):
            cols = np.flatnonzero(active[s])
            if cols.size == 0:
                continue
            blk = slice(s * width, (s + 1) * width)
            stacked = w.transpose(2, 0, 1).reshape(num_cols, num_sats * width)[cols]
            own = stacked[:, blk].copy()
            if shared:
                a_ss = a_full[blk, blk]
                cross = stacked @ a_full[blk, :].T - own @ a_ss.T
            else:
                a_ss = a_full[cols][:, blk, blk]
                cross = (np.einsum("lij,lj->li", a_full[cols][:, blk, :], stacked)
                         - np.einsum("lij,lj->li", a_ss, own))
            b_eff = b_full[cols, blk] - cross
            new, _ = solve_single_constraint_qcqp(a_ss, b_eff, grams[s], budgets[s], tol=bisect_tol,
                                                  check=False)
            w[s][:, cols] = new.T
        trace.append(total(w))
        slack = 1e-9 * max(1.0, abs(trace[-2]))
        if trace[-1] > trace[-2] + slack:
            raise QcqpError("block coordinate descent increased the objective")
        if abs(trace[-2] - trace[-1]) <= tol * max(abs(trace[-2]), 1e-300):
            break
    return w, trace


# --- separable augmented Lagrangian used by the star consensus --------------

def alp_objective(gamma, nu, mu, sigma2, gamma_locals, duals, rho) -> float:
    """Value of the consensus augmented Lagrangian for layout ``[f; p; Q^T]``."""
    f, p, qt = gamma[0], gamma[1].real, gamma[2:].real
    q_off = qt.sum(axis=0) - np.diag(qt)
    util = nu * (np.abs(1 - mu * f) ** 2 + np.abs(mu) ** 2 * (p + q_off + sigma2))
    pen = np.abs(gamma[None] - gamma_locals + duals / rho) ** 2
    return float(util.sum() + 0.5 * rho * pen.sum())


def solve_separable_alp(nu, mu, sigma2, gamma_locals, duals, rho):
    """Closed-form minimiser of the consensus augmented Lagrangian.

    The objective splits per entry of ``Gamma = [f; p; Q^T]`` (shape
    (U+2, U), column ``u`` holding ``F_u, P_u, Q_{u,1..U}``): ``F_u`` solves a
    scalar complex least-squares problem, every ``P_u`` and ``Q_{u,l}`` a
    scalar quadratic followed by projection onto ``>= 0``.

    ``sigma2`` enters the objective only as a constant and is accepted for
    signature symmetry with :func:`alp_objective`.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    gamma_locals = np.asarray(gamma_locals, dtype=complex)
    num_sats = gamma_locals.shape[0]
    if num_sats < 1:
        raise ValueError("need at least one local copy")
    nu = np.asarray(nu, dtype=float)
    mu = np.asarray(mu, dtype=complex)
    centre = (gamma_locals - np.asarray(duals) / rho).sum(axis=0)
    weight = nu * np.abs(mu) ** 2
    out = np.empty_like(centre)
    out[0] = (nu * mu.conj() + 0.5 * rho * centre[0]) / (weight + 0.5 * rho * num_sats)
    out[1] = np.maximum(0.0, (centre[1].real - weight / rho) / num_sats)
    qt = (centre[2:].real - weight[None, :] / rho) / num_sats
    diag = np.arange(qt.shape[0])
    qt[diag, diag] = centre[2:].real[diag, diag] / num_sats
    out[2:] = np.maximum(0.0, qt)
    return out
