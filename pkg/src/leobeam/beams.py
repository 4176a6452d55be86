"""Distance-based scheduling, steering-vector analog beamformers and effective channels."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .channel import ChannelStats


@dataclass(frozen=True)
class Schedule:
    """Per-satellite served sets (ascending terminal indices) and the S x U mask."""
    served: tuple[np.ndarray, ...]
    mask: np.ndarray

    @property
    def num_sats(self) -> int:
        return self.mask.shape[0]

    @property
    def num_uts(self) -> int:
        return self.mask.shape[1]

    @property
    def width(self) -> int:
        """Number of analog columns per satellite (largest served set, at least 1)."""
        return max(1, max(len(x) for x in self.served))

    @classmethod
    def from_sets(cls, served, num_uts: int) -> "Schedule":
        served = tuple(np.sort(np.asarray(x, dtype=int)) for x in served)
        mask = np.zeros((len(served), num_uts), dtype=bool)
        for s, users in enumerate(served):
            mask[s, users] = True
        return cls(served=served, mask=mask)


def nearest_users(distances: np.ndarray, count: int) -> np.ndarray:
    """Indices of the ``count`` smallest distances, ties to the lower index, ascending."""
    order = np.argsort(distances, kind="stable")
    return np.sort(order[:count])


def schedule_users(distances: np.ndarray, num_rfc: int) -> Schedule:
    """Each satellite serves its ``T = min(U, N_RF)`` nearest terminals.

    Parameters
    ----------
    distances : ndarray, shape (S, U)
        Satellite-terminal distances, e.g. ``Scenario.distances()``.
    num_rfc : int
        RF chains per satellite.
    """
    num_uts = distances.shape[1]
    t = min(num_uts, num_rfc)
    return Schedule.from_sets([nearest_users(row, t) for row in distances], num_uts)


@dataclass(frozen=True)
class AnalogBeamformer:
    matrices: np.ndarray    # (S, N, T) conjugated phase-only steering columns
    gram: np.ndarray        # (S, T, T) F^H F


def build_analog_beamformer(stats: ChannelStats, sched: Schedule) -> AnalogBeamformer:
    """Column ``t`` of ``F_s`` is ``conj(a)`` of the ``t``-th served terminal.

    Satellites serving fewer than ``Schedule.width`` terminals get zero
    padding columns, which carry no power and no signal.
    """
    num_sats = sched.num_sats
    n = stats.phases.shape[-1]
    width = sched.width
    mats = np.zeros((num_sats, n, width), dtype=complex)
    for s, users in enumerate(sched.served):
        mats[s, :, :len(users)] = np.conj(stats.phases[s, users]).T
    gram = np.einsum("snt,snr->str", mats.conj(), mats)
    return AnalogBeamformer(matrices=mats, gram=gram)


def effective_channels(stats: ChannelStats, analog: AnalogBeamformer) -> ChannelStats:
    """``g_{s,u} = F_s^T a(theta_{s,u}) G`` for every pair, scheduled or not."""
    g = np.einsum("snt,sun->sut", analog.matrices, stats.steering)
    return dataclasses.replace(stats, g_eff=g)


@dataclass(frozen=True)
class BeamformerSet:
    """Digital beamformers ``W[k, s, :, u]`` for each evaluated subcarrier.

    Columns of terminals a satellite does not serve are identically zero.
    """
    weights: np.ndarray     # (K_eval, S, T, U) complex
    mask: np.ndarray        # (S, U) bool

    @classmethod
    def zeros(cls, num_eval: int, mask: np.ndarray, width: int) -> "BeamformerSet":
        num_sats, num_uts = mask.shape
        return cls(np.zeros((num_eval, num_sats, width, num_uts), dtype=complex), mask.copy())

    @property
    def num_eval(self) -> int:
        return self.weights.shape[0]

    def at(self, k: int) -> np.ndarray:
        return self.weights[k]

    def power(self, gram: np.ndarray) -> np.ndarray:
        """Transmit power ``||F_s W_s||_F^2`` per (k, s)."""
        return np.einsum("kstu,str,ksru->ks", self.weights.conj(), gram, self.weights).real

    def mask_violation(self) -> float:
        off = ~self.mask
        return float(np.abs(self.weights * off[None, :, None, :]).max(initial=0.0))

    def is_feasible(self, gram: np.ndarray, budget: float, rtol: float = 1e-9) -> bool:
        return self.mask_violation() == 0.0 and bool(np.all(self.power(gram) <= budget * (1 + rtol)))

    def with_weights(self, weights: np.ndarray) -> "BeamformerSet":
        return BeamformerSet(weights, self.mask)
