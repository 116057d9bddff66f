import json

import pytest
from hypothesis import given

from detrelay.gf2 import rank
from detrelay.network import (
    Edge,
    InvalidNetworkError,
    LayeredNetwork,
    NetworkParseError,
    SuperNode,
    adjacency,
    chain,
    check_valid,
    edge_adjacency,
    gen_random,
    layer_cut_edges,
    levels_from_snr,
    parse,
    point_to_point,
    point_to_point_snr,
    rx,
    serialize,
    tx,
    validate,
)

from conftest import random_networks


def diamond():
    # S -> {A, B} -> D, one level each
    return LayeredNetwork(3, (
        SuperNode("S", 0, 2, 0), SuperNode("A", 1, 1, 1),
        SuperNode("B", 1, 1, 1), SuperNode("D", 2, 0, 2),
    ), (
        Edge(tx("S", 0), rx("A", 0)), Edge(tx("S", 1), rx("B", 0)),
        Edge(tx("A", 0), rx("D", 0)), Edge(tx("B", 0), rx("D", 1)),
    ))


def test_valid_networks_have_no_violations():
    assert validate(point_to_point(5, 4)) == []
    assert validate(diamond()) == []
    assert validate(chain([[[1, 0], [0, 1]], [[1, 1], [0, 1]]])) == []


def test_non_consecutive_edge_reported():
    net = diamond()
    bad = LayeredNetwork(3, net.supernodes, net.edges + (Edge(tx("S", 0), rx("D", 0)),))
    assert any("non-consecutive" in v for v in validate(bad))


def test_dangling_level_reported():
    net = point_to_point(2, 2)
    bad = LayeredNetwork(2, net.supernodes, net.edges + (Edge(tx("S", 5), rx("D", 0)),))
    assert any("dangling" in v for v in validate(bad))
    with pytest.raises(InvalidNetworkError) as info:
        check_valid(bad)
    assert info.value.violations


def test_wrong_kind_and_duplicate_reported():
    net = point_to_point(2, 1)
    swapped = LayeredNetwork(2, net.supernodes, (Edge(rx("D", 0), tx("S", 0)),))
    assert any("wrong kinds" in v for v in validate(swapped))
    dup = LayeredNetwork(2, net.supernodes, net.edges * 2)
    assert any("duplicate edge" in v for v in validate(dup))


def test_two_sources_reported():
    bad = LayeredNetwork(2, (SuperNode("S", 0, 1, 0), SuperNode("T", 0, 1, 0),
                             SuperNode("D", 1, 0, 1)), ())
    assert any("layer 0" in v for v in validate(bad))


def test_point_to_point_adjacency_rank():
    net = point_to_point(5, 4)
    xs = [tx("S", i) for i in range(5)]
    ys = [rx("D", i) for i in range(5)]
    m = adjacency(net, xs, ys)
    assert m.to_array().tolist() == [[int(i == j and i < 4) for j in range(5)] for i in range(5)]
    assert rank(m) == 4


def test_adjacency_rejects_unknown_nodes():
    net = point_to_point(2, 2)
    with pytest.raises(ValueError):
        adjacency(net, [tx("S", 9)], [rx("D", 0)])
    with pytest.raises(ValueError):
        adjacency(net, [rx("D", 0)], [rx("D", 0)])


def test_edge_adjacency_uses_edge_endpoints():
    net = diamond()
    m = edge_adjacency(net, layer_cut_edges(net, 1))
    assert m.shape == (2, 2)
    assert rank(m) == 2


def test_layer_cut_edges():
    net = diamond()
    assert layer_cut_edges(net, 0) == (Edge(tx("S", 0), rx("A", 0)), Edge(tx("S", 1), rx("B", 0)))
    assert len(layer_cut_edges(net, 1)) == 2
    with pytest.raises(ValueError):
        layer_cut_edges(net, 2)


@pytest.mark.parametrize("snr, levels", [(256, 4), (2, 1), (100, 4), (4, 1), (16, 2)])
def test_levels_from_snr(snr, levels):
    assert levels_from_snr(snr) == levels


def test_levels_from_snr_rejects_noise_floor():
    with pytest.raises(ValueError):
        levels_from_snr(1)


def test_point_to_point_snr_caps_at_levels():
    assert len(point_to_point_snr(3, 1e9).edges) == 3
    assert len(point_to_point_snr(5, 256).edges) == 4


def test_round_trip_example():
    net = diamond()
    text = serialize(net)
    assert parse(text) == net
    assert serialize(parse(text)) == text


def test_unknown_supernode_reference():
    doc = json.loads(serialize(point_to_point(1, 1)))
    doc["edges"][0]["to"] = ["Z", 0]
    with pytest.raises(NetworkParseError, match="unknown super node 'Z'"):
        parse(json.dumps(doc))


def test_syntax_error_has_position():
    with pytest.raises(NetworkParseError, match=r"line 2, column \d+"):
        parse('{"layers": 2,\n  oops}')


@pytest.mark.parametrize("doc", [
    "[]",
    '{"layers": 2, "supernodes": []}',
    '{"layers": "2", "supernodes": [], "edges": []}',
    '{"layers": 2, "supernodes": [{"id": 1, "layer": 0}], "edges": []}',
    '{"layers": 2, "supernodes": [{"id": "S", "layer": 0}], "edges": [{"from": ["S", 0]}]}',
])
def test_malformed_documents(doc):
    with pytest.raises(NetworkParseError):
        parse(doc)


def test_gen_is_deterministic():
    a = serialize(gen_random(4, 3, 3, 0.5, 7))
    b = serialize(gen_random(4, 3, 3, 0.5, 7))
    assert a == b
    assert validate(gen_random(4, 3, 3, 0.5, 7)) == []


def test_gen_density_extremes():
    assert gen_random(4, 3, 3, 0.0, 1).edges == ()
    full = gen_random(3, 2, 2, 1.0, 1)
    for layer in range(2):
        xs = [x for sid in full.layer_members[layer] for x in full.by_id[sid].tx_nodes()]
        ys = [y for sid in full.layer_members[layer + 1] for y in full.by_id[sid].rx_nodes()]
        assert len(layer_cut_edges(full, layer)) == len(xs) * len(ys)


@pytest.mark.parametrize("args", [(1, 3, 3, 0.5), (3, 0, 3, 0.5), (3, 3, 3, 1.5)])
def test_gen_rejects_bad_arguments(args):
    with pytest.raises(ValueError):
        gen_random(*args, seed=0)


@given(random_networks())
def test_generated_networks_validate_and_round_trip(net):
    assert validate(net) == []
    text = serialize(net)
    assert parse(text) == net
    assert serialize(parse(text)) == text


def test_equality_ignores_order():
    net = diamond()
    shuffled = LayeredNetwork(3, tuple(reversed(net.supernodes)), tuple(reversed(net.edges)))
    assert shuffled == net
    assert hash(shuffled) == hash(net)
