"""Inter-satellite link topologies, message ledger and latency/overhead accounting.

One message carries a full set of intermediates ``(f, p, Q)`` for each of
``num_subcarriers`` subcarriers, i.e. ``num_subcarriers * (U^2 + 2U)``
dimensions (a complex ``F_u`` counts as one dimension). Every hop costs one
latency unit; messages sharing a ``slot`` travel in parallel.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

RING = "ring"
STAR = "star"


def intermediate_dims(num_uts: int) -> int:
    return num_uts * num_uts + 2 * num_uts


@dataclass(frozen=True)
class Topology:
    kind: str
    num_sats: int
    center: int = 0
    edges: frozenset = frozenset()

    @classmethod
    def ring(cls, num_sats: int) -> "Topology":
        edges = frozenset((s, (s + 1) % num_sats) for s in range(num_sats))
        return cls(RING, num_sats, 0, edges)

    @classmethod
    def star(cls, num_sats: int, center: int = 0) -> "Topology":
        if not 0 <= center < num_sats:
            raise ValueError(f"center {center} out of range for {num_sats} satellites")
        edges = set()
        for s in range(num_sats):
            if s != center:
                edges.add((s, center))
                edges.add((center, s))
        return cls(STAR, num_sats, center, frozenset(edges))

    def successor(self, s: int) -> int:
        return (s + 1) % self.num_sats


@dataclass(frozen=True)
class MessageRecord:
    iteration: int
    src: int
    dst: int
    dims: int
    latency_units: int
    slot: int


@dataclass
class MessageLedger:
    topology: Topology
    num_uts: int
    records: list = field(default_factory=list)

    @property
    def total_dims(self) -> int:
        return sum(r.dims for r in self.records)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iter", "from", "to", "dims", "latency_units"])
            for r in self.records:
                writer.writerow([r.iteration, r.src, r.dst, r.dims, r.latency_units])


def record_message(ledger: MessageLedger, iteration: int, src: int, dst: int,
                   num_subcarriers: int, slot: int | None = None) -> MessageRecord:
    """Append one intermediate-set message on an existing ISL.

    ``slot`` groups messages that are sent concurrently; by default each
    message gets a fresh slot (sequential relaying).
    """
    if (src, dst) not in ledger.topology.edges:
        raise ValueError(f"no ISL from {src} to {dst} in {ledger.topology.kind} topology")
    if slot is None:
        slot = 1 + max((r.slot for r in ledger.records), default=-1)
    rec = MessageRecord(iteration, src, dst, num_subcarriers * intermediate_dims(ledger.num_uts), 1, slot)
    ledger.records.append(rec)
    return rec


def latency_total(ledger: MessageLedger) -> int:
    """Measured latency: one unit per distinct sending slot."""
    return len({r.slot for r in ledger.records})


def expected_latency(kind: str, num_sats: int, loops: int) -> int:
    """Model latency: a ring loop is ``S`` hops, a star round is one hop in and one out."""
    if kind == RING:
        return loops * num_sats
    if kind == STAR:
        return 2 * loops
    raise ValueError(f"unknown topology kind {kind!r}")


def overhead_per_iteration(ledger: MessageLedger, role: str, iteration: int = 1) -> int:
    """Measured dimensions moved in one iteration.

    ``role`` is ``"ring"`` (one hop of the ring), ``"star-edge"`` (what one edge
    satellite sends) or ``"star-center"`` (what the center sends, one direction).
    """
    recs = [r for r in ledger.records if r.iteration == iteration]
    topo = ledger.topology
    if role == "ring":
        sender = 0
    elif role == "star-edge":
        sender = next((s for s in range(topo.num_sats) if s != topo.center), None)
    elif role == "star-center":
        sender = topo.center
    else:
        raise ValueError(f"unknown role {role!r}")
    return sum(r.dims for r in recs if r.src == sender)


def closed_form_overhead(role: str, num_subcarriers: int, num_uts: int, num_sats: int = 1) -> int:
    per_link = num_subcarriers * intermediate_dims(num_uts)
    if role in ("ring", "star-edge"):
        return per_link
    if role == "star-center":
        return (num_sats - 1) * per_link
    raise ValueError(f"unknown role {role!r}")


def payload_bytes(num_subcarriers: int, num_uts: int, bytes_per_real: int = 8) -> int:
    """Byte size of one message when ``F_u`` travels as two reals (extension of the dimension count)."""
    reals = 2 * num_uts + num_uts + num_uts * num_uts
    return num_subcarriers * reals * bytes_per_real
