"""
Layered linear deterministic relay networks.

A network is a set of super nodes arranged in layers.  Each super node owns
a number of transmitting and receiving signal levels; directed edges run
from a transmitting level in layer ``i`` to a receiving level in layer
``i + 1``.  Broadcast copies a transmitted bit onto every out-edge and a
receiving level observes the XOR of all bits arriving on its in-edges.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from detrelay.gf2 import Gf2Matrix

TX = "tx"
RX = "rx"


class NodeId(NamedTuple):
    """One signal level: ``(super node, kind, level)``."""

    node: str
    kind: str
    level: int

    def __str__(self) -> str:
        return f"{self.node}.{self.kind}{self.level}"


def tx(node: str, level: int) -> NodeId:
    return NodeId(node, TX, level)


def rx(node: str, level: int) -> NodeId:
    return NodeId(node, RX, level)


class Edge(NamedTuple):
    tx: NodeId
    rx: NodeId

    def __str__(self) -> str:
        return f"{self.tx}->{self.rx}"


@dataclass(frozen=True)
class SuperNode:
    id: str
    layer: int
    tx: int = 0
    rx: int = 0

    def tx_nodes(self) -> list[NodeId]:
        return [NodeId(self.id, TX, i) for i in range(self.tx)]

    def rx_nodes(self) -> list[NodeId]:
        return [NodeId(self.id, RX, i) for i in range(self.rx)]


class NetworkParseError(ValueError):
    """Malformed network or scheme document."""


class InvalidNetworkError(ValueError):
    """A network failed validation; ``violations`` lists every problem."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid network: " + "; ".join(self.violations))


@dataclass(frozen=True)
class LayeredNetwork:
    """Immutable layered network.

    Construction does not validate; call :func:`validate` (or let the solver
    do it) before relying on the layering invariants.
    """

    layers: int
    supernodes: tuple[SuperNode, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "supernodes", tuple(self.supernodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    def __eq__(self, other):
        if not isinstance(other, LayeredNetwork):
            return NotImplemented
        return (self.layers == other.layers
                and sorted(self.supernodes, key=_sn_key) == sorted(other.supernodes, key=_sn_key)
                and sorted(self.edges) == sorted(other.edges))

    def __hash__(self):
        return hash((self.layers, tuple(sorted(self.supernodes, key=_sn_key)),
                     tuple(sorted(self.edges))))

    @cached_property
    def by_id(self) -> dict[str, SuperNode]:
        return {sn.id: sn for sn in self.supernodes}

    @cached_property
    def source(self) -> str:
        ids = [sn.id for sn in self.supernodes if sn.layer == 0]
        if len(ids) != 1:
            raise InvalidNetworkError([f"expected one super node in layer 0, found {len(ids)}"])
        return ids[0]

    @cached_property
    def destination(self) -> str:
        ids = [sn.id for sn in self.supernodes if sn.layer == self.layers - 1]
        if len(ids) != 1:
            raise InvalidNetworkError(
                [f"expected one super node in layer {self.layers - 1}, found {len(ids)}"])
        return ids[0]

    def layer_of(self, node: str | NodeId) -> int:
        if isinstance(node, NodeId):
            node = node.node
        return self.by_id[node].layer

    @cached_property
    def layer_members(self) -> tuple[tuple[str, ...], ...]:
        members: list[list[str]] = [[] for _ in range(self.layers)]
        for sn in self.supernodes:
            if 0 <= sn.layer < self.layers:
                members[sn.layer].append(sn.id)
        return tuple(tuple(sorted(m)) for m in members)

    @cached_property
    def intermediates(self) -> tuple[str, ...]:
        return tuple(sid for layer in self.layer_members[1:-1] for sid in layer)

    @cached_property
    def out_edges(self) -> dict[NodeId, tuple[NodeId, ...]]:
        """Transmitting level -> sorted receiving levels it reaches."""
        out: dict[NodeId, list[NodeId]] = {}
        for e in self.edges:
            out.setdefault(e.tx, []).append(e.rx)
        return {k: tuple(sorted(v)) for k, v in out.items()}

    @cached_property
    def in_edges(self) -> dict[NodeId, tuple[NodeId, ...]]:
        """Receiving level -> sorted transmitting levels that reach it."""
        inc: dict[NodeId, list[NodeId]] = {}
        for e in self.edges:
            inc.setdefault(e.rx, []).append(e.tx)
        return {k: tuple(sorted(v)) for k, v in inc.items()}

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def has_edge(self, x: NodeId, y: NodeId) -> bool:
        return Edge(x, y) in self.edge_set

    @cached_property
    def active_tx(self) -> dict[str, tuple[NodeId, ...]]:
        """Per super node, the transmitting levels with at least one out-edge."""
        act: dict[str, list[NodeId]] = {sn.id: [] for sn in self.supernodes}
        for x in self.out_edges:
            act.setdefault(x.node, []).append(x)
        return {k: tuple(sorted(v)) for k, v in act.items()}

    @cached_property
    def transmitting_nodes(self) -> tuple[NodeId, ...]:
        """Transmitting levels that carry at least one edge."""
        return tuple(sorted(self.out_edges))

    def all_tx_nodes(self) -> list[NodeId]:
        return [x for sn in sorted(self.supernodes, key=_sn_key) for x in sn.tx_nodes()]

    def all_rx_nodes(self) -> list[NodeId]:
        return [y for sn in sorted(self.supernodes, key=_sn_key) for y in sn.rx_nodes()]

    def _has_node(self, v: NodeId) -> bool:
        sn = self.by_id.get(v.node)
        if sn is None or v.level < 0:
            return False
        if v.kind == TX:
            return v.level < sn.tx
        if v.kind == RX:
            return v.level < sn.rx
        return False


def _sn_key(sn: SuperNode):
    return (sn.layer, sn.id)


def validate(net: LayeredNetwork) -> list[str]:
    """Return every violated structural invariant; an empty list means ok."""
    problems: list[str] = []
    if net.layers < 2:
        problems.append(f"need at least 2 layers, got {net.layers}")

    seen: set[str] = set()
    for sn in net.supernodes:
        if sn.id in seen:
            problems.append(f"duplicate super node id {sn.id!r}")
        seen.add(sn.id)
        if not 0 <= sn.layer < net.layers:
            problems.append(f"super node {sn.id!r} has layer {sn.layer} outside 0..{net.layers - 1}")
        if sn.tx < 0 or sn.rx < 0:
            problems.append(f"super node {sn.id!r} has a negative level count")

    first = [sn for sn in net.supernodes if sn.layer == 0]
    last = [sn for sn in net.supernodes if sn.layer == net.layers - 1]
    if len(first) != 1:
        problems.append(f"layer 0 must hold exactly one super node (the source), found {len(first)}")
    elif first[0].rx != 0:
        problems.append(f"source {first[0].id!r} must have no receiving levels")
    if net.layers >= 2:
        if len(last) != 1:
            problems.append(
                f"layer {net.layers - 1} must hold exactly one super node (the destination), "
                f"found {len(last)}")
        elif last[0].tx != 0:
            problems.append(f"destination {last[0].id!r} must have no transmitting levels")

    seen_edges: set[Edge] = set()
    for e in net.edges:
        if e.tx.kind != TX or e.rx.kind != RX:
            problems.append(f"edge {e}: edge endpoints have wrong kinds")
            continue
        if not net._has_node(e.tx) or not net._has_node(e.rx):
            bad = e.tx if not net._has_node(e.tx) else e.rx
            problems.append(f"edge {e}: dangling node reference {bad}")
            continue
        if net.layer_of(e.rx) != net.layer_of(e.tx) + 1:
            problems.append(
                f"edge {e}: non-consecutive layers "
                f"({net.layer_of(e.tx)} -> {net.layer_of(e.rx)})")
        if e in seen_edges:
            problems.append(f"edge {e}: duplicate edge")
        seen_edges.add(e)
    return problems


def check_valid(net: LayeredNetwork) -> None:
    problems = validate(net)
    if problems:
        raise InvalidNetworkError(problems)


def adjacency(net: LayeredNetwork, tx_nodes: Sequence[NodeId], rx_nodes: Sequence[NodeId]) -> Gf2Matrix:
    """Binary adjacency matrix with rows ``tx_nodes`` and columns ``rx_nodes``."""
    for x in tx_nodes:
        if x.kind != TX or not net._has_node(x):
            raise ValueError(f"{x} is not a transmitting level of this network")
    col = {}
    for j, y in enumerate(rx_nodes):
        if y.kind != RX or not net._has_node(y):
            raise ValueError(f"{y} is not a receiving level of this network")
        col[y] = j
    rows = []
    out = net.out_edges
    for x in tx_nodes:
        v = 0
        for y in out.get(x, ()):
            j = col.get(y)
            if j is not None:
                v |= 1 << j
        rows.append(v)
    return Gf2Matrix(tuple(rows), len(rx_nodes), tuple(tx_nodes), tuple(rx_nodes))


def edge_adjacency(net: LayeredNetwork, edges: Iterable[Edge]) -> Gf2Matrix:
    """Adjacency matrix of an edge set: its transmitting ends by its receiving ends."""
    edges = list(edges)
    xs = list(dict.fromkeys(e.tx for e in edges))
    ys = list(dict.fromkeys(e.rx for e in edges))
    return adjacency(net, xs, ys)


def layer_cut_edges(net: LayeredNetwork, i: int) -> tuple[Edge, ...]:
    """Edges whose transmitting end lies in layer ``i``, sorted."""
    if not 0 <= i <= net.layers - 2:
        raise ValueError(f"layer cut {i} outside 0..{net.layers - 2}")
    return tuple(sorted(e for e in net.edges if net.layer_of(e.tx) == i))


def levels_from_snr(snr: float) -> int:
    """Number of signal levels above the noise floor, ``ceil(log2(snr) / 2)``."""
    if not snr > 1:
        raise ValueError(f"snr must exceed 1 for a usable link, got {snr}")
    return math.ceil(0.5 * math.log2(snr))


# --- builders -------------------------------------------------------------


def point_to_point(levels: int, gain: int, source: str = "S", destination: str = "D") -> LayeredNetwork:
    """Single link with ``levels`` levels at each end; the top ``gain`` levels get through.

    Level 0 is the most significant level.  ``point_to_point(5, 4)`` is the
    usual five-level example in which only four bits survive the noise.
    """
    if not 0 <= gain <= levels:
        raise ValueError(f"gain {gain} outside 0..{levels}")
    return LayeredNetwork(
        2,
        (SuperNode(source, 0, levels, 0), SuperNode(destination, 1, 0, levels)),
        tuple(Edge(tx(source, i), rx(destination, i)) for i in range(gain)),
    )


def point_to_point_snr(levels: int, snr: float) -> LayeredNetwork:
    return point_to_point(levels, min(levels, levels_from_snr(snr)))


def chain(matrices: Sequence, names: Sequence[str] | None = None) -> LayeredNetwork:
    """One super node per layer; ``matrices[i]`` is the 0/1 link matrix of layer cut ``i``."""
    mats = [np.atleast_2d(np.asarray(m, dtype=np.int64)) % 2 for m in matrices]
    n_layers = len(mats) + 1
    if names is None:
        names = ["S"] + [f"R{i}" for i in range(1, n_layers - 1)] + ["D"]
    if len(names) != n_layers:
        raise ValueError(f"{len(names)} names for {n_layers} layers")
    # relays may have unequal rx/tx counts
    supernodes = []
    for layer, name in enumerate(names):
        n_tx = mats[layer].shape[0] if layer < len(mats) else 0
        n_rx = mats[layer - 1].shape[1] if layer > 0 else 0
        supernodes.append(SuperNode(name, layer, n_tx, n_rx))
    edges = []
    for layer, m in enumerate(mats):
        for i, j in zip(*np.nonzero(m)):
            edges.append(Edge(tx(names[layer], int(i)), rx(names[layer + 1], int(j))))
    return LayeredNetwork(n_layers, tuple(supernodes), tuple(edges))


def gen_random(layers: int, max_supernodes_per_layer: int, max_levels: int,
               edge_density: float, seed: int) -> LayeredNetwork:
    """Seeded random layered network.

    Intermediate layers get 1..``max_supernodes_per_layer`` super nodes, each
    with 1..``max_levels`` transmitting and receiving levels; every possible
    inter-layer level pair becomes an edge with probability ``edge_density``.
    """
    if layers < 2:
        raise ValueError("layers must be at least 2")
    if max_supernodes_per_layer < 1 or max_levels < 1:
        raise ValueError("counts must be at least 1")
    if not 0.0 <= edge_density <= 1.0:
        raise ValueError(f"edge_density {edge_density} outside [0, 1]")
    rng = np.random.default_rng(seed)
    supernodes: list[SuperNode] = []
    per_layer: list[list[SuperNode]] = []
    for layer in range(layers):
        if layer == 0:
            group = [SuperNode("S", 0, int(rng.integers(1, max_levels + 1)), 0)]
        elif layer == layers - 1:
            group = [SuperNode("D", layer, 0, int(rng.integers(1, max_levels + 1)))]
        else:
            count = int(rng.integers(1, max_supernodes_per_layer + 1))
            group = [
                SuperNode(f"R{layer}{chr(ord('a') + j)}", layer,
                          int(rng.integers(1, max_levels + 1)),
                          int(rng.integers(1, max_levels + 1)))
                for j in range(count)
            ]
        per_layer.append(group)
        supernodes.extend(group)
    edges: list[Edge] = []
    for layer in range(layers - 1):
        xs = [x for sn in per_layer[layer] for x in sn.tx_nodes()]
        ys = [y for sn in per_layer[layer + 1] for y in sn.rx_nodes()]
        mask = rng.random((len(xs), len(ys))) < edge_density
        for i, j in zip(*np.nonzero(mask)):
            edges.append(Edge(xs[i], ys[j]))
    return LayeredNetwork(layers, tuple(supernodes), tuple(edges))


# --- JSON format ----------------------------------------------------------


def _edge_doc(e: Edge) -> dict:
    return {"from": [e.tx.node, e.tx.level], "to": [e.rx.node, e.rx.level]}


def network_doc(net: LayeredNetwork) -> dict:
    return {
        "layers": net.layers,
        "supernodes": [
            {"id": sn.id, "layer": sn.layer, "tx": sn.tx, "rx": sn.rx}
            for sn in sorted(net.supernodes, key=_sn_key)
        ],
        "edges": [_edge_doc(e) for e in sorted(net.edges)],
    }


def dumps_doc(doc: dict) -> str:
    """Byte-stable JSON: one list item per line, compact items."""
    lines = ["{"]
    keys = list(doc)
    for n, key in enumerate(keys):
        value = doc[key]
        tail = "," if n < len(keys) - 1 else ""
        if isinstance(value, list) and value:
            lines.append(f"  {json.dumps(key)}: [")
            for m, item in enumerate(value):
                sep = "," if m < len(value) - 1 else ""
                lines.append(f"    {json.dumps(item, separators=(', ', ': '))}{sep}")
            lines.append(f"  ]{tail}")
        else:
            lines.append(f"  {json.dumps(key)}: {json.dumps(value, separators=(', ', ': '))}{tail}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def serialize(net: LayeredNetwork) -> str:
    return dumps_doc(network_doc(net))


def load_json(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise NetworkParseError("line 1, column 1: top-level value must be an object")
    return doc


def _require(cond: bool, where: str, msg: str) -> None:
    if not cond:
        raise NetworkParseError(f"{where}: {msg}")


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def parse_endpoint(ref, where: str, known: set[str]) -> tuple[str, int]:
    _require(isinstance(ref, list) and len(ref) == 2, where, "expected [supernode, level]")
    node, level = ref
    _require(isinstance(node, str), where, "super node reference must be a string")
    _require(_is_int(level), where, "level must be an integer")
    _require(node in known, where, f"unknown super node {node!r}")
    return node, level


def parse_edge(item, where: str, known: set[str]) -> Edge:
    _require(isinstance(item, dict), where, "edge must be an object")
    _require("from" in item and "to" in item, where, "edge needs 'from' and 'to'")
    a = parse_endpoint(item["from"], where + ".from", known)
    b = parse_endpoint(item["to"], where + ".to", known)
    return Edge(tx(*a), rx(*b))


def network_from_doc(doc: dict) -> LayeredNetwork:
    for key in ("layers", "supernodes", "edges"):
        _require(key in doc, "document", f"missing key {key!r}")
    _require(_is_int(doc["layers"]), "layers", "must be an integer")
    _require(isinstance(doc["supernodes"], list), "supernodes", "must be a list")
    _require(isinstance(doc["edges"], list), "edges", "must be a list")
    supernodes = []
    for n, item in enumerate(doc["supernodes"]):
        where = f"supernodes[{n}]"
        _require(isinstance(item, dict), where, "must be an object")
        _require(isinstance(item.get("id"), str), where, "'id' must be a string")
        for key in ("layer", "tx", "rx"):
            _require(_is_int(item.get(key, 0)), where, f"{key!r} must be an integer")
        _require("layer" in item, where, "missing 'layer'")
        supernodes.append(SuperNode(item["id"], item["layer"], item.get("tx", 0), item.get("rx", 0)))
    known = {sn.id for sn in supernodes}
    edges = [parse_edge(item, f"edges[{n}]", known) for n, item in enumerate(doc["edges"])]
    return LayeredNetwork(doc["layers"], tuple(supernodes), tuple(edges))


def parse(text: str) -> LayeredNetwork:
    """Parse a network document.

    Syntax errors raise :class:`NetworkParseError` with a line/column or a
    JSON path.  Structural problems (layering, dangling levels) are left for
    :func:`validate`.
    """
    return network_from_doc(load_json(text))


def load(path) -> LayeredNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def save(net: LayeredNetwork, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(net))
