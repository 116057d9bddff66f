"""Unicast capacity of layered linear deterministic relay networks."""

from detrelay.gf2 import Gf2Matrix, inverse, rank, row_sum, solve_row_membership
from detrelay.mdfs import CapacityResult, PathSet, unicast_capacity
from detrelay.network import (
    Edge,
    LayeredNetwork,
    NodeId,
    SuperNode,
    adjacency,
    chain,
    gen_random,
    layer_cut_edges,
    levels_from_snr,
    load,
    parse,
    point_to_point,
    save,
    serialize,
    validate,
)
from detrelay.oracle import (
    Cut,
    cut_rank,
    max_independent_paths_bruteforce,
    min_cut_capacity,
    verify_paths_independent,
)
from detrelay.scheme import (
    TransmissionScheme,
    decode,
    extract_scheme,
    simulate,
    transfer_matrix,
)

__version__ = "0.1.0"
