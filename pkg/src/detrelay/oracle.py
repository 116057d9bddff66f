"""
Exhaustive ground truth for small networks.

``min_cut_capacity`` enumerates every S-D cut and takes the minimum GF(2)
cut rank.  ``max_independent_paths_bruteforce`` enumerates S-D paths and
searches subsets directly.  Neither shares code with the search in
:mod:`detrelay.mdfs` beyond the rank primitive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from detrelay.gf2 import Gf2Matrix, rank
from detrelay.network import Edge, LayeredNetwork, adjacency, check_valid

DEFAULT_CUT_BOUND = 20
DEFAULT_PATH_BOUND = 24


class OracleSizeError(ValueError):
    """The instance is too large for exhaustive enumeration."""


@dataclass(frozen=True)
class Cut:
    """Source side of an S-D cut."""

    omega: frozenset[str]

    def __init__(self, omega: Iterable[str]):
        object.__setattr__(self, "omega", frozenset(omega))


def _check_cut(net: LayeredNetwork, cut: Cut) -> None:
    if net.source not in cut.omega:
        raise ValueError("cut must contain the source")
    if net.destination in cut.omega:
        raise ValueError("cut must not contain the destination")
    unknown = cut.omega - set(net.by_id)
    if unknown:
        raise ValueError(f"cut names unknown super nodes {sorted(unknown)}")


def _crossing(net: LayeredNetwork, omega: frozenset[str], layer: int) -> list[Edge]:
    return [e for e in net.edges
            if net.layer_of(e.tx) == layer and e.tx.node in omega and e.rx.node not in omega]


def cut_rank(net: LayeredNetwork, cut: Cut) -> int:
    """Sum over layer cuts of the rank of the crossing edges' adjacency matrix."""
    _check_cut(net, cut)
    total = 0
    for layer in range(net.layers - 1):
        edges = _crossing(net, cut.omega, layer)
        if edges:
            xs = sorted({e.tx for e in edges})
            ys = sorted({e.rx for e in edges})
            total += rank(adjacency(net, xs, ys))
    return total


def cut_matrix(net: LayeredNetwork, cut: Cut) -> Gf2Matrix:
    """The whole crossing adjacency as one matrix (block diagonal by layer)."""
    _check_cut(net, cut)
    edges = [e for e in net.edges if e.tx.node in cut.omega and e.rx.node not in cut.omega]
    xs = sorted({e.tx for e in edges})
    ys = sorted({e.rx for e in edges})
    return adjacency(net, xs, ys)


def min_cut_capacity(net: LayeredNetwork, bound: int = DEFAULT_CUT_BOUND) -> tuple[int, Cut]:
    """Minimum cut rank over all ``2**m`` cuts, ``m`` the number of relays.

    Per-layer ranks depend only on which relays of two adjacent layers are
    on the source side, so they are memoised on that pair of subsets.
    """
    check_valid(net)
    relays = net.intermediates
    if len(relays) > bound:
        raise OracleSizeError(
            f"{len(relays)} relays exceed the enumeration bound {bound}; "
            "use unicast_capacity alone for instances this size")
    members = net.layer_members
    position = {sid: n for n, sid in enumerate(relays)}
    layer_masks = []
    for layer in range(net.layers):
        mask = 0
        for sid in members[layer]:
            if sid in position:
                mask |= 1 << position[sid]
        layer_masks.append(mask)

    memo: dict[tuple[int, int, int], int] = {}
    by_layer = [[e for e in net.edges if net.layer_of(e.tx) == i] for i in range(net.layers - 1)]

    def layer_rank(layer: int, omega_bits: int) -> int:
        key = (layer, omega_bits & layer_masks[layer], omega_bits & layer_masks[layer + 1])
        hit = memo.get(key)
        if hit is not None:
            return hit
        edges = [e for e in by_layer[layer] if _in(e.tx.node, omega_bits) and not _in(e.rx.node, omega_bits)]
        value = 0
        if edges:
            xs = sorted({e.tx for e in edges})
            ys = sorted({e.rx for e in edges})
            value = rank(adjacency(net, xs, ys))
        memo[key] = value
        return value

    src, dst = net.source, net.destination

    def _in(sid: str, omega_bits: int) -> bool:
        if sid == src:
            return True
        if sid == dst:
            return False
        return bool((omega_bits >> position[sid]) & 1)

    best = None
    best_bits = 0
    for bits in range(1 << len(relays)):
        value = sum(layer_rank(layer, bits) for layer in range(net.layers - 1))
        if best is None or value < best:
            best, best_bits = value, bits
            if best == 0:
                break
    omega = {src} | {sid for sid in relays if (best_bits >> position[sid]) & 1}
    return best, Cut(omega)


def verify_paths_independent(net: LayeredNetwork, paths: Sequence[Sequence[Edge]]) -> bool:
    """True iff the paths are complete S-D paths whose edges in every layer cut
    have distinct endpoints and a full-rank adjacency matrix."""
    edge_set = net.edge_set
    for p in paths:
        for e in p:
            if e not in edge_set:
                raise ValueError(f"edge {e} is not in the network")
    if not paths:
        return True
    for p in paths:
        if len(p) != net.layers - 1:
            return False
        if p[0].tx.node != net.source or p[-1].rx.node != net.destination:
            return False
        for a, b in zip(p, p[1:]):
            if a.rx.node != b.tx.node:
                return False
    k = len(paths)
    for layer in range(net.layers - 1):
        edges = [p[layer] for p in paths]
        xs = [e.tx for e in edges]
        ys = [e.rx for e in edges]
        if len(set(xs)) != k or len(set(ys)) != k:
            return False
        if rank(adjacency(net, xs, ys)) != k:
            return False
    return True


def enumerate_paths(net: LayeredNetwork, limit: int | None = None) -> list[tuple[Edge, ...]]:
    """All S-D paths in lexicographic order; raises once more than ``limit`` exist."""
    check_valid(net)
    out: list[tuple[Edge, ...]] = []
    by_node: dict[str, list[Edge]] = {}
    for e in sorted(net.edges):
        by_node.setdefault(e.tx.node, []).append(e)
    dst = net.destination
    stack: list[tuple[str, tuple[Edge, ...]]] = [(net.source, ())]
    while stack:
        node, prefix = stack.pop()
        if node == dst:
            out.append(prefix)
            if limit is not None and len(out) > limit:
                raise OracleSizeError(f"more than {limit} S-D paths")
            continue
        for e in reversed(by_node.get(node, [])):
            stack.append((e.rx.node, prefix + (e,)))
    return out


def max_independent_paths_bruteforce(net: LayeredNetwork, bound: int = DEFAULT_PATH_BOUND) -> int:
    """Largest independent subset of all S-D paths, by exhaustive subset search."""
    paths = enumerate_paths(net, limit=bound)
    best = 0

    def independent_with(chosen: list[tuple[Edge, ...]], p) -> bool:
        return verify_paths_independent(net, chosen + [p])

    # depth-first over subsets in index order, pruning dependent prefixes
    def grow(start: int, chosen: list) -> None:
        nonlocal best
        if len(chosen) > best:
            best = len(chosen)
        if len(chosen) + (len(paths) - start) <= best:
            return
        for n in range(start, len(paths)):
            p = paths[n]
            if independent_with(chosen, p):
                chosen.append(p)
                grow(n + 1, chosen)
                chosen.pop()

    grow(0, [])
    return best
