"""Stateless source-routed multicast forwarding plane.

A delivery tree is encoded into a fixed-width forwarding identifier that
travels with the packet; each node forwards on exactly those outgoing arcs
whose label tests positive in the identifier, so the core keeps no
per-group state. Two encodings are provided: one exact bit per arc, and a
Bloom filter over per-arc signatures (smaller, but with false-positive
deliveries). Arc labels are unidirectional; reverse delivery needs its own
identifier.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

from .rendezvous import MulticastTree
from .topology import NetworkGraph

__all__ = [
    "ExactScheme",
    "BloomScheme",
    "ArcLabel",
    "ForwardingId",
    "label_arc",
    "encode_tree",
    "forward",
    "deliver",
    "fpr_theoretical",
]

DEFAULT_BLOOM_M = 256
DEFAULT_BLOOM_K = 4
DEFAULT_HASH_SEED = 0x51B0


@dataclass(frozen=True)
class ExactScheme:
    """One bit per arc; width must equal the graph's arc count."""

    width: int


@dataclass(frozen=True)
class BloomScheme:
    """Bloom filter of m bits, k hash positions per arc."""

    m: int = DEFAULT_BLOOM_M
    k: int = DEFAULT_BLOOM_K
    hash_seed: int = DEFAULT_HASH_SEED


Scheme = ExactScheme | BloomScheme


@dataclass(frozen=True)
class ArcLabel:
    arc_id: int
    positions: tuple[int, ...]


@dataclass(frozen=True)
class ForwardingId:
    """Fixed-width bit vector naming the arcs of one delivery tree."""

    bits: int
    scheme: Scheme

    @property
    def width(self) -> int:
        return self.scheme.width if isinstance(self.scheme, ExactScheme) else self.scheme.m

    @property
    def popcount(self) -> int:
        return self.bits.bit_count()

    def test(self, positions: tuple[int, ...]) -> bool:
        return all(self.bits >> p & 1 for p in positions)


def label_arc(scheme: Scheme, arc_id: int) -> ArcLabel:
    """Bit positions owned by ``arc_id`` under ``scheme``.

    Exact labels are the arc id itself; Bloom labels come from seeded
    double hashing, deterministic per (arc_id, m, k, hash seed).
    """
    if isinstance(scheme, ExactScheme):
        if not 0 <= arc_id < scheme.width:
            raise ValueError(f"arc {arc_id} outside exact width {scheme.width}")
        return ArcLabel(arc_id, (arc_id,))
    digest = hashlib.blake2b(
        arc_id.to_bytes(8, "little"),
        digest_size=16,
        salt=scheme.hash_seed.to_bytes(8, "little"),
    ).digest()
    h1 = int.from_bytes(digest[:8], "little")
    h2 = int.from_bytes(digest[8:], "little") | 1
    positions = tuple(sorted({(h1 + i * h2) % scheme.m for i in range(scheme.k)}))
    return ArcLabel(arc_id, positions)


def encode_tree(tree: MulticastTree, scheme: Scheme) -> ForwardingId:
    """OR together the labels of every tree arc."""
    bits = 0
    for arc_id in tree.arcs:
        for p in label_arc(scheme, arc_id).positions:
            bits |= 1 << p
    return ForwardingId(bits=bits, scheme=scheme)


def forward(fid: ForwardingId, node: int, graph: NetworkGraph) -> set[int]:
    """Out-arcs of ``node`` whose label tests positive in ``fid``.

    Stateless: the decision is a pure function of the identifier and the
    node's arc labels.
    """
    if isinstance(fid.scheme, ExactScheme) and fid.scheme.width != graph.n_arcs:
        raise ValueError(
            f"exact fid width {fid.scheme.width} does not label a "
            f"{graph.n_arcs}-arc graph"
        )
    return {
        arc_id
        for arc_id in graph.out_arcs[node]
        if fid.test(label_arc(fid.scheme, arc_id).positions)
    }


def deliver(fid: ForwardingId, root: int, graph: NetworkGraph) -> set[int]:
    """Nodes reached by repeatedly forwarding ``fid`` from ``root``.

    A visited-arc guard makes delivery terminate on any identifier,
    including an adversarial all-ones one.
    """
    reached = {root}
    used_arcs: set[int] = set()
    frontier = [root]
    while frontier:
        node = frontier.pop()
        for arc_id in forward(fid, node, graph):
            if arc_id in used_arcs:
                continue
            used_arcs.add(arc_id)
            dst = graph.arcs[arc_id].dst
            frontier.append(dst)
            reached.add(dst)
    return reached


def fpr_theoretical(m: int, k: int, n_inserted: int) -> float:
    """Expected Bloom false-positive rate after ``n_inserted`` arcs."""
    if m < 1 or k < 1 or n_inserted < 0:
        raise ValueError("m, k must be >= 1 and n_inserted >= 0")
    if n_inserted == 0:
        return 0.0
    return (1.0 - math.exp(-k * n_inserted / m)) ** k
