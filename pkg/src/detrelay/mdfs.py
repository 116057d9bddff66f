"""
Unicast capacity by path augmentation.

Each iteration runs a modified depth-first search over super nodes that
tries to add one S-D path while keeping the used edges of every layer cut
linearly independent over GF(2).  Three kinds of forwarding moves exist:

* type 1 -- extend the partial path along a new edge that raises the rank
  of the used edges in its layer cut;
* type 2 -- swap used edges inside one layer cut along an alternating path,
  handing the partial path's head to another transmitting level;
* type 3 -- step backwards through a used receiving level of a committed
  path, freeing it together with one used transmitting level of that cut.

Failed moves are undone from a journal, and the search itself runs on an
explicit stack of generator frames, so deep networks never hit the Python
recursion limit.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

from detrelay.gf2 import Gf2Matrix, inverse, rank, solve_row_membership
from detrelay.network import (Edge, LayeredNetwork, NodeId, adjacency, check_valid,
                              edge_adjacency)

log = logging.getLogger(__name__)

Path = tuple[Edge, ...]

# Type-3 rules.  ARRIVING_EDGE always drops the used edge into the released
# receiving level; on some networks that leaves a dependent edge set behind.
# RANK_SAFE keeps that choice when it is safe and otherwise releases another
# transmitting level of the same cut, re-pairing along an alternating path.
ARRIVING_EDGE = "arriving-edge"
RANK_SAFE = "rank-safe"


class InvariantViolation(AssertionError):
    """Raised by debug-mode shadow checks."""


@dataclass
class PathSet:
    """Complete S-D paths plus at most one partial path.

    Every path is a tuple of edges indexed by layer cut, so ``path[i]`` is
    the edge it uses in layer cut ``i``.
    """

    paths: list[Path] = field(default_factory=list)
    partial: Path | None = None

    def copy(self) -> "PathSet":
        return PathSet(list(self.paths), self.partial)

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    def dumps(self) -> str:
        def enc(p):
            return [[list(e.tx), list(e.rx)] for e in p]
        return json.dumps({"paths": [enc(p) for p in self.paths],
                           "partial": None if self.partial is None else enc(self.partial)},
                          sort_keys=True)


@dataclass
class IterationCounters:
    """Instrumentation for one search.

    ``k1``/``k2``/``k3`` count transmitting levels explored as type 1, moved
    to by type-2 moves, and released by type-3 moves.
    """

    iteration: int = 0
    k1: int = 0
    k2: int = 0
    k3: int = 0
    explorations: int = 0
    supernode_visits: int = 0
    rank_checks: int = 0
    span_computations: int = 0
    span_cache_hits: int = 0
    shadow_checks: int = 0
    mutations: int = 0
    restores: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)

    def bound_violations(self, n_tx: int) -> list[str]:
        out = []
        k = self.iteration
        if self.k1 > n_tx:
            out.append(f"iteration {k}: k1={self.k1} > |V_x|={n_tx}")
        if self.k3 > n_tx:
            out.append(f"iteration {k}: k3={self.k3} > |V_x|={n_tx}")
        if self.k2 > 2 * k * n_tx:
            out.append(f"iteration {k}: k2={self.k2} > 2*{k}*{n_tx}")
        return out


@dataclass
class SearchState:
    """Mutable state owned by one search iteration."""

    net: LayeredNetwork
    prev: PathSet
    pprime: PathSet
    used_edges: list[set[Edge]]
    prev_rx: frozenset[NodeId]
    explored_supernodes: set[str] = field(default_factory=set)
    explored_nodes: set[NodeId] = field(default_factory=set)
    node_types: dict[NodeId, int] = field(default_factory=dict)
    span_cache: dict[NodeId, frozenset[NodeId]] = field(default_factory=dict)
    counters: IterationCounters = field(default_factory=IterationCounters)
    debug: bool = False
    type3_rule: str = RANK_SAFE

    @property
    def k(self) -> int:
        """Number of complete paths currently held."""
        return len(self.pprime.paths)

    def node_type(self, x: NodeId) -> int:
        return self.node_types.get(x, 1)

    def used_tx(self, layer: int) -> set[NodeId]:
        return {e.tx for e in self.used_edges[layer]}

    def used_rx(self, layer: int) -> set[NodeId]:
        return {e.rx for e in self.used_edges[layer]}


def init_state(net: LayeredNetwork, prev: PathSet, debug: bool = False,
               type3_rule: str = RANK_SAFE) -> SearchState:
    """Fresh state for the iteration that tries to add path ``len(prev) + 1``."""
    if type3_rule not in (RANK_SAFE, ARRIVING_EDGE):
        raise ValueError(f"unknown type-3 rule {type3_rule!r}")
    if prev.partial is not None:
        raise ValueError("previous path set must not hold a partial path")
    used = [set() for _ in range(net.layers - 1)]
    for p in prev.paths:
        for i, e in enumerate(p):
            used[i].add(e)
    return SearchState(
        net=net,
        prev=prev.copy(),
        pprime=PathSet(list(prev.paths), ()),
        used_edges=used,
        prev_rx=frozenset(e.rx for p in prev.paths for e in p),
        counters=IterationCounters(iteration=len(prev) + 1),
        debug=debug,
        type3_rule=type3_rule,
    )


def _row(net: LayeredNetwork, x: NodeId, cols: dict[NodeId, int]) -> int:
    v = 0
    for y in net.out_edges.get(x, ()):
        j = cols.get(y)
        if j is not None:
            v |= 1 << j
    return v


def _used_basis(state: SearchState, layer: int):
    used = sorted(state.used_edges[layer])
    xs = [e.tx for e in used]
    ys = [e.rx for e in used]
    cols = {y: j for j, y in enumerate(ys)}
    return xs, ys, cols


def span(state: SearchState, x: NodeId) -> frozenset[NodeId]:
    """Used transmitting levels of ``x``'s layer whose rows XOR to ``x``'s row.

    Rows are restricted to the receiving levels currently used in that
    layer cut.  The used rows form a basis, so the subset is unique.
    """
    net = state.net
    layer = net.layer_of(x)
    xs, ys, cols = _used_basis(state, layer)
    if x in xs:
        raise ValueError(f"{x} is already used in layer cut {layer}")
    state.counters.span_computations += 1
    if not xs:
        return frozenset()
    m = Gf2Matrix(tuple(_row(net, u, cols) for u in xs), len(ys), tuple(xs), tuple(ys))
    sol = solve_row_membership(m, _row(net, x, cols))
    if sol is None:
        raise InvariantViolation(f"used edges of layer cut {layer} are not a basis")
    return frozenset(xs[i] for i in sol)


def fast_type1_check(state: SearchState, x: NodeId, span_set: frozenset[NodeId], y: NodeId) -> bool:
    """Would adding edge ``(x, y)`` keep the used edges of the layer cut independent?

    Compares ``T(x, y)`` with the XOR of ``T(s, y)`` over the span of ``x``,
    which costs O(k) instead of a full rank computation.
    """
    net = state.net
    state.counters.rank_checks += 1
    acc = net.has_edge(x, y)
    for s in span_set:
        acc ^= net.has_edge(s, y)
    result = bool(acc)
    if state.debug:
        state.counters.shadow_checks += 1
        layer = net.layer_of(x)
        xs, ys, _ = _used_basis(state, layer)
        full = rank(adjacency(net, xs + [x], ys + [y])) == len(xs) + 1
        if full != result:
            raise InvariantViolation(
                f"fast rank check disagrees with full rank for ({x}, {y}): {result} vs {full}")
    return result


def find_ind_paths(state: SearchState, x: NodeId, span_set: frozenset[NodeId]) -> dict[NodeId, list[Edge]]:
    """Alternating paths from ``x`` to every member of its span.

    Breadth-first search in the graph whose forward arcs are unused network
    edges into used receiving levels and whose backward arcs are the used
    edges of the layer cut.  Each path is returned as
    ``[(x, y1), (x1, y1), (x1, y2), ..., (xm, ym)]`` with ``xm`` the target;
    odd positions are used edges.
    """
    if not span_set:
        return {}
    net = state.net
    layer = net.layer_of(x)
    used = state.used_edges[layer]
    matched = {e.rx: e.tx for e in used}
    # parent pointers over tx levels: child tx -> (parent tx, rx in between)
    parent: dict[NodeId, tuple[NodeId, NodeId]] = {}
    seen_rx: set[NodeId] = set()
    queue = deque([x])
    visited = {x}
    while queue:
        u = queue.popleft()
        for y in net.out_edges.get(u, ()):
            if y in seen_rx or y not in matched:
                continue
            if matched[y] == u:
                continue
            seen_rx.add(y)
            w = matched[y]
            if w not in visited:
                visited.add(w)
                parent[w] = (u, y)
                queue.append(w)
    out: dict[NodeId, list[Edge]] = {}
    for target in sorted(span_set):
        if target not in parent:
            raise InvariantViolation(f"no alternating path from {x} to span member {target}")
        chain = []
        w = target
        while w != x:
            u, y = parent[w]
            chain.append((u, y, w))
            w = u
        chain.reverse()
        edges: list[Edge] = []
        for u, y, w in chain:
            edges.append(Edge(u, y))
            edges.append(Edge(w, y))
        out[target] = edges
    return out


# --- moves and undo -------------------------------------------------------


class _Undo(NamedTuple):
    edge_ops: list[tuple[int, Edge, bool]]
    old_paths: dict[int, Path]
    old_partial: Path | None
    snapshot: str | None


def _owner(state: SearchState, layer: int, e: Edge) -> int:
    """Index of the complete path using ``e`` in ``layer``; -1 for the partial path."""
    for idx, p in enumerate(state.pprime.paths):
        if p[layer] == e:
            return idx
    part = state.pprime.partial
    if part is not None and len(part) > layer and part[layer] == e:
        return -1
    raise InvariantViolation(f"used edge {e} belongs to no path")


def _apply(state: SearchState, edge_ops, new_paths: dict[int, Path], new_partial: Path) -> _Undo:
    snap = state.pprime.dumps() if state.debug else None
    old = {idx: state.pprime.paths[idx] for idx in new_paths}
    undo = _Undo(edge_ops, old, state.pprime.partial, snap)
    state.counters.mutations += 1
    for layer, e, add in edge_ops:
        if add:
            state.used_edges[layer].add(e)
        else:
            state.used_edges[layer].remove(e)
    for idx, p in new_paths.items():
        state.pprime.paths[idx] = p
    state.pprime.partial = new_partial
    if state.debug:
        check_invariants(state)
    return undo


def _undo(state: SearchState, undo: _Undo) -> None:
    state.counters.restores += 1
    for layer, e, add in reversed(undo.edge_ops):
        if add:
            state.used_edges[layer].remove(e)
        else:
            state.used_edges[layer].add(e)
    for idx, p in undo.old_paths.items():
        state.pprime.paths[idx] = p
    state.pprime.partial = undo.old_partial
    if state.debug:
        if state.pprime.dumps() != undo.snapshot:
            raise InvariantViolation("restore left the path set changed")
        check_invariants(state)


def _move_type1(state: SearchState, layer: int, e: Edge) -> _Undo:
    return _apply(state, [(layer, e, True)], {}, state.pprime.partial + (e,))


def _move_type2(state: SearchState, layer: int, alt: list[Edge]) -> _Undo:
    added = alt[0::2]
    removed = alt[1::2]
    owners = [_owner(state, layer, e) for e in removed]
    paths = state.pprime.paths
    head = state.pprime.partial
    new_paths: dict[int, Path] = {}
    prefix = head
    for e_new, idx in zip(added, owners):
        new_paths[idx] = prefix + (e_new,) + paths[idx][layer + 1:]
        prefix = paths[idx][:layer]
    ops = []
    for a, r in zip(added, removed):
        ops.append((layer, a, True))
        ops.append((layer, r, False))
    return _apply(state, ops, new_paths, prefix)


def release_set(state: SearchState, layer: int, y: NodeId) -> frozenset[NodeId]:
    """Used transmitting levels of ``layer`` that can leave together with ``y``.

    ``x'`` qualifies iff the used levels minus ``x'`` and minus ``y`` still
    give a nonsingular adjacency matrix, i.e. iff entry ``(y, x')`` of the
    inverse of the used adjacency matrix is 1.
    """
    used = sorted(state.used_edges[layer])
    xs = [e.tx for e in used]
    ys = [e.rx for e in used]
    inv = inverse(adjacency(state.net, xs, ys))
    row = inv.rows[ys.index(y)]
    return frozenset(x for j, x in enumerate(xs) if (row >> j) & 1)


def _release_path(state: SearchState, layer: int, y: NodeId, target: NodeId) -> list[Edge]:
    """Alternating path re-pairing the used levels once ``y`` and ``target`` leave.

    Starts at the current partner of ``y`` and ends at the current partner
    of ``target``; even positions are new edges, odd positions are used
    edges to drop.  Empty when ``target`` is already ``y``'s partner.
    """
    net = state.net
    used = state.used_edges[layer]
    partner_of_rx = {e.rx: e.tx for e in used}
    partner_of_tx = {e.tx: e.rx for e in used}
    start = partner_of_rx[y]
    if start == target:
        return []
    goal = partner_of_tx[target]
    via: dict[NodeId, NodeId] = {}  # receiving level -> transmitting level it was reached from
    queue = deque([start])
    seen_tx = {start}
    while queue:
        a = queue.popleft()
        for b in net.out_edges.get(a, ()):
            if b == y or b in via or b not in partner_of_rx or partner_of_rx[b] == a:
                continue
            via[b] = a
            if b == goal:
                chain: list[Edge] = []
                while True:
                    a = via[b]
                    chain.append(Edge(a, b))
                    if a == start:
                        break
                    b = partner_of_tx[a]
                    chain.append(Edge(a, b))
                chain.reverse()
                return chain
            w = partner_of_rx[b]
            if w != target and w not in seen_tx:
                seen_tx.add(w)
                queue.append(w)
    raise InvariantViolation(f"no re-pairing path from {start} to {target}")


def _move_type3(state: SearchState, layer: int, y: NodeId, target: NodeId) -> _Undo:
    """Step back across ``layer`` through receiving level ``y``.

    ``target`` (a member of the release set of ``y``) becomes the free
    transmitting level at which the partial path now ends.
    """
    head = state.pprime.partial
    paths = state.pprime.paths
    used = state.used_edges[layer]
    prefix: dict[NodeId, Path] = {}
    suffix: dict[NodeId, tuple[int, Path]] = {}
    for idx, p in enumerate(paths):
        e = p[layer]
        prefix[e.tx] = p[:layer]
        suffix[e.rx] = (idx, p[layer + 1:])
    head_edge = head[layer]
    prefix[head_edge.tx] = head[:layer]
    partner = next(e for e in used if e.rx == y)
    if head_edge.rx != y:
        # the suffix leaving y's super node now hangs off the partial path's arrival level
        suffix[head_edge.rx] = suffix.pop(y)
    else:
        suffix.pop(y, None)

    alt = _release_path(state, layer, y, target)
    ops = [(layer, partner, False)]
    ops += [(layer, e, i % 2 == 0) for i, e in enumerate(alt)]
    if target != partner.tx:
        ops.append((layer, next(e for e in used if e.tx == target), False))
    new_used = set(used)
    for _, e, add in ops:
        if add:
            new_used.add(e)
        else:
            new_used.discard(e)
    new_paths: dict[int, Path] = {}
    for e in new_used:
        idx, tail = suffix[e.rx]
        new_paths[idx] = prefix[e.tx] + (e,) + tail
    return _apply(state, ops, new_paths, prefix[target])


# --- debug checks ---------------------------------------------------------


def check_invariants(state: SearchState) -> None:
    """Every used edge set is independent and matches the paths in ``pprime``."""
    net = state.net
    derived = [set() for _ in range(net.layers - 1)]
    for p in state.pprime.paths:
        if len(p) != net.layers - 1:
            raise InvariantViolation(f"complete path has {len(p)} edges")
        for i, e in enumerate(p):
            derived[i].add(e)
    for i, e in enumerate(state.pprime.partial or ()):
        derived[i].add(e)
    for i, used in enumerate(state.used_edges):
        if used != derived[i]:
            raise InvariantViolation(f"used edges of layer cut {i} disagree with the path set")
        if used and rank(edge_adjacency(net, used)) != len(used):
            raise InvariantViolation(f"used edges of layer cut {i} are dependent")
    for p in list(state.pprime.paths) + ([state.pprime.partial] if state.pprime.partial else []):
        if p[0].tx.node != net.source:
            raise InvariantViolation("path does not start at the source")
        for a, b in zip(p, p[1:]):
            if a.rx.node != b.tx.node:
                raise InvariantViolation(f"path broken between {a} and {b}")


def _check_layer_counts(state: SearchState, node: str) -> None:
    layer = state.net.layer_of(node)
    k = state.k
    for j, used in enumerate(state.used_edges):
        want = k + 1 if j < layer else k
        if len(used) != want:
            raise InvariantViolation(
                f"exploring {node}: layer cut {j} holds {len(used)} edges, expected {want}")
    part = state.pprime.partial
    end = part[-1].rx.node if part else state.net.source
    if end != node:
        raise InvariantViolation(f"exploring {node} but the partial path ends at {end}")


# --- the search -----------------------------------------------------------


def _explore(state: SearchState, node: str) -> Iterator[str]:
    """One frame of the search rooted at super node ``node``.

    Yields the super node to descend into and receives the child's result.
    Returns True once the destination is reached.
    """
    net = state.net
    c = state.counters
    state.explored_supernodes.add(node)
    c.supernode_visits += 1
    if state.debug:
        _check_layer_counts(state, node)
    layer = net.layer_of(node)
    dest = net.destination

    if layer < net.layers - 1:
        candidates = net.active_tx.get(node, ())
        for phase in (2, 3, 1):
            for x in candidates:
                if (x in state.explored_nodes or state.node_type(x) != phase
                        or x in state.used_tx(layer)):
                    continue
                state.explored_nodes.add(x)
                c.explorations += 1
                if phase == 2:
                    sp = state.span_cache[x]
                    c.span_cache_hits += 1
                    if state.debug and sp != span(state, x):
                        raise InvariantViolation(f"cached span of {x} is stale")
                else:
                    if phase == 1:
                        c.k1 += 1
                    sp = span(state, x)
                    state.span_cache[x] = sp

                for y in net.out_edges.get(x, ()):
                    if y.node in state.explored_supernodes or y in state.used_rx(layer):
                        continue
                    if not fast_type1_check(state, x, sp, y):
                        continue
                    undo = _move_type1(state, layer, Edge(x, y))
                    if y.node == dest:
                        return True
                    if (yield y.node):
                        return True
                    _undo(state, undo)

                if phase == 2:
                    continue
                for x2, alt in find_ind_paths(state, x, sp).items():
                    state.explored_nodes.discard(x2)
                    state.node_types[x2] = 2
                    state.span_cache[x2] = (sp - {x2}) | {x}
                    c.k2 += 1
                    undo = _move_type2(state, layer, alt)
                    if (yield x2.node):
                        return True
                    _undo(state, undo)

    if layer > 0:
        sn = net.by_id[node]
        cut = layer - 1
        for y in sn.rx_nodes():
            if y not in state.prev_rx or y in state.explored_nodes:
                continue
            e = next((u for u in state.used_edges[cut] if u.rx == y), None)
            if e is None:
                continue
            if state.type3_rule == ARRIVING_EDGE:
                target = e.tx
            else:
                releasable = release_set(state, cut, y)
                target = e.tx if e.tx in releasable else min(releasable)
            state.explored_nodes.add(y)
            state.explored_nodes.discard(target)
            state.node_types[target] = 3
            c.k3 += 1
            undo = _move_type3(state, cut, y, target)
            if (yield target.node):
                return True
            _undo(state, undo)
    return False


def mdfs(net: LayeredNetwork, prev: PathSet, state: SearchState, start: str | None = None
         ) -> tuple[bool, SearchState]:
    """Search for one more independent path, starting at ``start`` (the source by default).

    On success ``state.pprime`` holds ``len(prev) + 1`` complete paths; on
    failure it equals ``prev``.
    """
    if start is None:
        start = net.source
    stack = [_explore(state, start)]
    result: bool | None = None
    while stack:
        try:
            child = stack[-1].send(result)
        except StopIteration as stop:
            stack.pop()
            result = bool(stop.value)
            continue
        result = None
        stack.append(_explore(state, child))
    found = bool(result)
    if found:
        state.pprime.paths.append(state.pprime.partial)
        state.pprime.partial = None
        if state.debug:
            check_invariants(state)
    else:
        state.pprime.partial = None
        if state.debug and state.pprime.paths != prev.paths:
            raise InvariantViolation("failed search did not restore the previous paths")
    return found, state


class CapacityResult(NamedTuple):
    capacity: int
    paths: PathSet
    counters: list[IterationCounters]


def unicast_capacity(net: LayeredNetwork, debug: bool = False,
                     type3_rule: str = RANK_SAFE) -> CapacityResult:
    """Maximum number of linearly independent S-D paths, with the paths themselves.

    Iterates the search until it fails; ``counters`` has one entry per
    iteration, including the final unsuccessful one.
    """
    check_valid(net)
    paths = PathSet()
    history: list[IterationCounters] = []
    while True:
        state = init_state(net, paths, debug=debug, type3_rule=type3_rule)
        found, state = mdfs(net, paths, state)
        history.append(state.counters)
        log.debug("iteration %d: found=%s counters=%s", state.counters.iteration, found,
                  state.counters.as_dict())
        if not found:
            return CapacityResult(len(paths), paths, history)
        paths = PathSet(list(state.pprime.paths))
