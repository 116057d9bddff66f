"""
Rate-K one-bit relay schemes built from independent path sets.

Each relay forwards the bit it hears on a path's receiving level out of the
same path's transmitting level; all other transmitting levels stay silent.
Every receiving level still hears the XOR of everything broadcast onto it,
so the end-to-end map is the GF(2) product of the per-layer adjacency
matrices and the relay permutations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from detrelay.gf2 import Gf2Matrix, rank, solve_row_membership
from detrelay.network import (
    Edge,
    LayeredNetwork,
    NodeId,
    NetworkParseError,
    adjacency,
    dumps_doc,
    load_json,
    network_doc,
    network_from_doc,
    parse_edge,
    tx,
)
from detrelay.oracle import verify_paths_independent


@dataclass(frozen=True)
class TransmissionScheme:
    """``inter_layer[i]`` lists the K used edges of layer cut ``i`` in path order;
    ``relay_maps[node]`` maps used receiving level -> used transmitting level."""

    k: int
    inter_layer: tuple[tuple[Edge, ...], ...]
    relay_maps: dict[str, dict[int, int]]

    @property
    def paths(self) -> list[tuple[Edge, ...]]:
        if self.k == 0:
            return []
        return [tuple(cut[p] for cut in self.inter_layer) for p in range(self.k)]


def extract_scheme(net: LayeredNetwork, paths: Sequence[Sequence[Edge]]) -> TransmissionScheme:
    paths = [tuple(p) for p in paths]
    if not verify_paths_independent(net, paths):
        raise ValueError("paths are not a linearly independent S-D path set")
    k = len(paths)
    n_cuts = net.layers - 1
    inter = tuple(tuple(p[i] for p in paths) for i in range(n_cuts)) if k else tuple(() for _ in range(n_cuts))
    relay_maps: dict[str, dict[int, int]] = {}
    for p in paths:
        for into, out in zip(p, p[1:]):
            relay_maps.setdefault(into.rx.node, {})[into.rx.level] = out.tx.level
    return TransmissionScheme(k, inter, {n: dict(sorted(m.items())) for n, m in sorted(relay_maps.items())})


def _check_scheme(s: TransmissionScheme) -> None:
    for i, cut in enumerate(s.inter_layer):
        if len(cut) != s.k:
            raise ValueError(f"layer cut {i} lists {len(cut)} edges, expected {s.k}")
    for node, m in s.relay_maps.items():
        if len(set(m.values())) != len(m):
            raise ValueError(f"relay map of {node} is not one-to-one")


def transfer_matrix(net: LayeredNetwork, s: TransmissionScheme) -> Gf2Matrix:
    """K x K map from the source's used levels to the destination's used levels.

    Rows are labelled by the source transmitting levels and columns by the
    destination receiving levels, both in path order.
    """
    _check_scheme(s)
    if s.k == 0:
        return Gf2Matrix((), 0)
    result = None
    for i, cut in enumerate(s.inter_layer):
        xs = [e.tx for e in cut]
        ys = [e.rx for e in cut]
        hop = adjacency(net, xs, ys)
        if result is None:
            result = hop
        else:
            result = result @ hop
        if i + 1 < len(s.inter_layer):
            nxt = [e.tx for e in s.inter_layer[i + 1]]
            col = {x: j for j, x in enumerate(nxt)}
            rows = []
            for y in ys:
                level = s.relay_maps[y.node][y.level]
                rows.append(1 << col[tx(y.node, level)])
            result = result @ Gf2Matrix(tuple(rows), len(nxt), tuple(ys), tuple(nxt))
    return result


def simulate(net: LayeredNetwork, s: TransmissionScheme, message: Sequence[int]) -> list[int]:
    """Push one message through the network bit by bit.

    Every receiving level XORs all its in-edges, so interference from other
    paths is real, not assumed away.
    """
    if len(message) != s.k:
        raise ValueError(f"message has {len(message)} bits, scheme rate is {s.k}")
    if s.k == 0:
        return []
    bits: dict[NodeId, int] = {}
    for e, b in zip(s.inter_layer[0], message):
        bits[e.tx] = int(b) & 1
    for i in range(len(s.inter_layer)):
        heard: dict[NodeId, int] = {}
        for x, b in bits.items():
            if b:
                for y in net.out_edges.get(x, ()):
                    heard[y] = heard.get(y, 0) ^ 1
        if i + 1 == len(s.inter_layer):
            return [heard.get(e.rx, 0) for e in s.inter_layer[i]]
        bits = {}
        for e in s.inter_layer[i]:
            y = e.rx
            bits[tx(y.node, s.relay_maps[y.node][y.level])] = heard.get(y, 0)
    raise AssertionError("unreachable")


def decode(s: TransmissionScheme, received: Sequence[int], tm: Gf2Matrix) -> list[int]:
    """Recover the message ``m`` from ``received = m @ tm``."""
    if len(received) != s.k or tm.shape != (s.k, s.k):
        raise ValueError("received word and transfer matrix must match the scheme rate")
    if rank(tm) != s.k:
        raise ValueError("transfer matrix is singular; the scheme cannot be decoded")
    sol = solve_row_membership(tm, list(received))
    return [1 if i in sol else 0 for i in range(s.k)]


def round_trip(net: LayeredNetwork, s: TransmissionScheme, messages, tm: Gf2Matrix | None = None) -> int:
    """Number of messages that survive simulate followed by decode."""
    if tm is None:
        tm = transfer_matrix(net, s)
    ok = 0
    for m in messages:
        m = [int(b) for b in m]
        ok += decode(s, simulate(net, s, m), tm) == m
    return ok


def all_messages(k: int) -> np.ndarray:
    """Every k-bit message, one per row."""
    idx = np.arange(1 << k, dtype=np.int64)[:, None]
    return ((idx >> np.arange(k)) & 1).astype(np.uint8)


# --- scheme file ----------------------------------------------------------


def scheme_doc(net: LayeredNetwork, s: TransmissionScheme) -> dict:
    doc = network_doc(net)
    doc["k"] = s.k
    doc["paths"] = [
        [{"from": [e.tx.node, e.tx.level], "to": [e.rx.node, e.rx.level]} for e in p]
        for p in s.paths
    ]
    doc["relay_maps"] = {node: [[r, t] for r, t in m.items()] for node, m in s.relay_maps.items()}
    return doc


def serialize_scheme(net: LayeredNetwork, s: TransmissionScheme) -> str:
    return dumps_doc(scheme_doc(net, s))


def parse_scheme(text: str) -> tuple[LayeredNetwork, TransmissionScheme]:
    """Read a scheme file back into its network and scheme."""
    doc = load_json(text)
    net = network_from_doc(doc)
    for key in ("k", "paths", "relay_maps"):
        if key not in doc:
            raise NetworkParseError(f"document: missing key {key!r}")
    known = set(net.by_id)
    if not isinstance(doc["paths"], list):
        raise NetworkParseError("paths: must be a list")
    paths = []
    for n, p in enumerate(doc["paths"]):
        if not isinstance(p, list):
            raise NetworkParseError(f"paths[{n}]: must be a list of edges")
        paths.append(tuple(parse_edge(e, f"paths[{n}][{m}]", known) for m, e in enumerate(p)))
    if doc["k"] != len(paths):
        raise NetworkParseError(f"k: says {doc['k']} but {len(paths)} paths are listed")
    relay_maps: dict[str, dict[int, int]] = {}
    if not isinstance(doc["relay_maps"], dict):
        raise NetworkParseError("relay_maps: must be an object")
    for node, pairs in doc["relay_maps"].items():
        if node not in known:
            raise NetworkParseError(f"relay_maps: unknown super node {node!r}")
        try:
            relay_maps[node] = {int(r): int(t) for r, t in pairs}
        except (TypeError, ValueError):
            raise NetworkParseError(f"relay_maps.{node}: expected [[rx, tx], ...]") from None
    n_cuts = net.layers - 1
    inter = tuple(tuple(p[i] for p in paths) for i in range(n_cuts)) if paths else tuple(() for _ in range(n_cuts))
    for p in paths:
        if len(p) != n_cuts:
            raise NetworkParseError(f"paths: every path needs {n_cuts} edges")
    return net, TransmissionScheme(len(paths), inter, relay_maps)


__all__ = [
    "TransmissionScheme", "extract_scheme", "transfer_matrix", "simulate", "decode",
    "round_trip", "all_messages", "scheme_doc", "serialize_scheme", "parse_scheme",
]
