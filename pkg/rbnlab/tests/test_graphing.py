import networkx as nx
import numpy as np
import pytest

from rbnlab.exceptions import StateSpaceTooLarge
from rbnlab.graphing import (
    TransitionDiagram,
    adjacency_matrix,
    as_networkx,
    build_transition_diagram,
    decode_state,
    encode_state,
    find_attractors,
    in_degrees,
    prestige_centrality,
)
from rbnlab.tests import utils as test_utils


def test_state_encoding_is_big_endian():
    assert encode_state([1, 0, 0, 0]) == 8
    assert decode_state(6, 4).tolist() == [0, 1, 1, 0]


def test_fixture_transition_diagram():
    diagram = build_transition_diagram(test_utils.fixture_network())
    assert diagram.successor.tolist() == test_utils.FIXTURE_SUCCESSORS


def test_fixture_attractors():
    attractors = find_attractors(TransitionDiagram(4, test_utils.FIXTURE_SUCCESSORS))
    assert attractors.cycles == test_utils.FIXTURE_CYCLES
    assert attractors.basin_size.tolist() == test_utils.FIXTURE_BASINS
    assert attractors.transient_length.tolist() == test_utils.FIXTURE_TRANSIENTS
    assert attractors.fixed_points() == [5, 14]
    assert attractors.attractor_of[10] == 0


def test_bias_zero_network():
    net, _ = test_utils.seeded_network(8, 3, 0.0, seed=2)
    diagram = build_transition_diagram(net)
    assert (diagram.successor == 0).all()
    attractors = find_attractors(diagram)
    assert attractors.cycles == [[0]]
    assert attractors.basin_size.tolist() == [256]
    assert attractors.transient_length.max() <= 1
    matrix = adjacency_matrix(diagram)
    assert matrix[:, 0].sum() == 256
    assert matrix.sum() == 256


def test_identity_diagram():
    attractors = find_attractors(TransitionDiagram(3, np.arange(8)))
    assert attractors.cycles == [[v] for v in range(8)]
    assert attractors.basin_size.tolist() == [1] * 8


def test_cycles_start_at_their_smallest_state():
    attractors = find_attractors(TransitionDiagram(2, [2, 3, 3, 1]))
    assert attractors.cycles == [[1, 3]]
    assert attractors.transient_length.tolist() == [2, 0, 1, 0]


def test_state_space_cap():
    net, _ = test_utils.seeded_network(12, 2, 0.5, seed=1)
    with pytest.raises(StateSpaceTooLarge):
        build_transition_diagram(net, max_nodes=10)


def test_threaded_build_gives_the_same_diagram(monkeypatch):
    from rbnlab import graphing

    net, _ = test_utils.seeded_network(10, 3, 0.5, seed=5)
    reference = build_transition_diagram(net)
    monkeypatch.setattr(graphing, "STATE_CHUNK", 100)
    assert build_transition_diagram(net, workers=3) == reference


def test_random_networks_have_consistent_basins():
    for seed in range(100):
        net, _ = test_utils.seeded_network(10, 5, 0.5, seed=seed)
        diagram = build_transition_diagram(net)
        assert diagram.successor.size == 1024
        assert diagram.successor.max() < 1024
        assert adjacency_matrix(diagram, sparse=True).sum(axis=1).min() == 1
        attractors = find_attractors(diagram)
        assert attractors.basin_size.sum() == 1024
        on_cycle = attractors.on_cycle()
        assert on_cycle.sum() == sum(len(c) for c in attractors.cycles)
        # following the transient leads onto the cycle of the attractor
        for state in (0, 511, 1023):
            for _ in range(attractors.transient_length[state]):
                state = diagram.successor[state]
            assert on_cycle[state]
        cycle_lengths = np.array([len(c) for c in attractors.cycles])
        longest = (attractors.transient_length + cycle_lengths[attractors.attractor_of]).max()
        assert longest <= 1024


def test_attractors_match_networkx():
    net, _ = test_utils.seeded_network(8, 2, 0.5, seed=6)
    diagram = build_transition_diagram(net)
    components = sorted(sorted(c) for c in nx.attracting_components(as_networkx(diagram)))
    assert components == sorted(sorted(c) for c in find_attractors(diagram).cycles)


def test_fixed_point_networks_with_low_bias():
    single = 0
    for seed in range(10):
        net, _ = test_utils.seeded_network(10, 5, 0.1, seed=seed)
        attractors = find_attractors(build_transition_diagram(net))
        if attractors.n_attractors == 1 and attractors.transient_length.max() <= 10:
            single += 1
    # most low-bias networks fall into a single attractor within a few steps
    assert single >= 7


def test_prestige_of_a_star():
    diagram = TransitionDiagram(3, np.zeros(8, dtype=int))
    prestige = prestige_centrality(diagram)
    assert prestige.converged
    assert prestige.scores.tolist() == [1, 0, 0, 0, 0, 0, 0, 0]
    assert prestige.iterations_used <= 2


def test_prestige_of_a_fed_two_cycle():
    # 0 <-> 1 is the cycle, 2 -> 0 and 3 -> 2 feed it
    prestige = prestige_centrality(TransitionDiagram(2, [1, 0, 0, 2]))
    assert prestige.converged
    assert prestige.scores[2] == 0 and prestige.scores[3] == 0
    assert prestige.scores[0] == pytest.approx(prestige.scores[1])
    assert np.linalg.norm(prestige.scores) == pytest.approx(1)


def test_prestige_of_fixture():
    prestige = prestige_centrality(TransitionDiagram(4, test_utils.FIXTURE_SUCCESSORS))
    expected = np.zeros(16)
    expected[[5, 6, 11, 14]] = [13, 1, 1, 1]
    assert prestige.converged
    assert np.allclose(prestige.scores, expected / np.linalg.norm(expected))
    assert prestige.ranking()[0] == 5
    assert prestige.ranking()[1:4].tolist() == [6, 11, 14]


def test_prestige_on_a_rotating_cycle(caplog):
    # mass starts uneven on the 3-cycle, so it keeps rotating
    diagram = TransitionDiagram(2, [1, 2, 0, 0])
    prestige = prestige_centrality(diagram, max_iter=50)
    assert not prestige.converged
    assert "did not converge" in caplog.text
    averaged = prestige_centrality(diagram, tol=1e-3, max_iter=5000, averaging=True)
    assert averaged.converged
    assert np.allclose(averaged.scores[:3], averaged.scores[0], atol=1e-2)


@pytest.mark.parametrize("bias", [0.1, 0.9])
def test_prestige_peaks_on_an_attractor(bias):
    for seed in range(100):
        net, _ = test_utils.seeded_network(10, 5, bias, seed=seed)
        diagram = build_transition_diagram(net)
        prestige = prestige_centrality(diagram)
        assert find_attractors(diagram).on_cycle()[int(np.argmax(prestige.scores))]


def test_zero_in_degree_states_have_no_prestige():
    net, _ = test_utils.seeded_network(8, 3, 0.5, seed=9)
    diagram = build_transition_diagram(net)
    prestige = prestige_centrality(diagram, max_iter=50)
    assert (prestige.scores[in_degrees(diagram) == 0] == 0).all()


def test_dense_adjacency_cap():
    with pytest.raises(StateSpaceTooLarge):
        adjacency_matrix(TransitionDiagram(15, np.zeros(2 ** 15, dtype=int)))
