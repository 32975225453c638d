import math

import numpy as np
import pytest

from rbnlab.exceptions import IncompatibleSpecs
from rbnlab.graphing import (
    TransitionDiagram,
    adjacency_matrix,
    build_transition_diagram,
    in_degrees,
    prestige_centrality,
)
from rbnlab.measuring import RandomnessReport, randomness_report, shannon_entropy
from rbnlab.perturbing import (
    PERTURBATION_COLUMNS,
    AidClassification,
    PerturbationMode,
    classify_aid,
    disconnect_node,
    perturbation_series,
    relative_randomness_change,
    restore_node,
)
from rbnlab.tests import utils as test_utils


@pytest.mark.parametrize(
    "aid, classification, sign",
    [
        (-5, AidClassification.CONTAINED_IN_DESCRIPTION, -1),
        (10, AidClassification.CAUSAL_NEUTRAL, 1),
        (9, AidClassification.CAUSAL_NEUTRAL, 1),
        (-11, AidClassification.CAUSAL_NEUTRAL, -1),
        (500, AidClassification.INFORMATION_LOSS, 1),
        (-2000, AidClassification.FUNDAMENTAL_OR_NOISE, -1),
        (0, AidClassification.CONTAINED_IN_DESCRIPTION, 0),
    ],
)
def test_classify_aid(aid, classification, sign):
    result = classify_aid(aid, 1024)
    assert result.classification is classification
    assert result.sign == sign


def test_classify_aid_validation():
    with pytest.raises(IncompatibleSpecs):
        classify_aid(1, 1)
    with pytest.raises(IncompatibleSpecs):
        classify_aid(1, 16, band_tolerance=1.5)


def test_disconnect_only_self_loop():
    matrix = np.zeros((4, 4), dtype=np.uint8)
    matrix[2, 2] = 1
    disconnected = disconnect_node(matrix, 2)
    assert disconnected.sum() == 0
    assert matrix[2, 2] == 1


def test_disconnect_isolated_node():
    matrix = np.zeros((4, 4), dtype=np.uint8)
    matrix[0, 1] = matrix[1, 0] = 1
    assert np.array_equal(disconnect_node(matrix, 3), matrix)


def test_disconnect_out_of_range():
    with pytest.raises(IncompatibleSpecs):
        disconnect_node(np.zeros((4, 4)), 4)


def test_disconnect_counting_identity():
    rng = np.random.RandomState(3)
    for _ in range(20):
        diagram = TransitionDiagram(6, rng.randint(0, 64, size=64))
        matrix = adjacency_matrix(diagram)
        node = rng.randint(64)
        expected = (
            matrix.sum()
            - in_degrees(diagram)[node]
            - 1
            + int(diagram.successor[node] == node)
        )
        assert disconnect_node(matrix, node).sum() == expected


def test_restore_node():
    matrix = adjacency_matrix(TransitionDiagram(4, test_utils.FIXTURE_SUCCESSORS))
    working = disconnect_node(matrix, 5)
    restore_node(working, matrix, 5)
    assert np.array_equal(working, matrix)


def test_relative_change():
    before = RandomnessReport(0.5, 0.8, 100.0)
    unchanged = relative_randomness_change(before, before)
    assert unchanged.as_dict() == {"entropy": 0, "lzw_rate": 0, "bdm": 0}
    change = relative_randomness_change(before, RandomnessReport(0.5, 0.8, 90.0))
    assert change.bdm == pytest.approx(0.1)
    assert change.undefined == []


def test_relative_change_with_zero_baseline(caplog):
    change = relative_randomness_change(
        RandomnessReport(0.0, 0.5, 10.0), RandomnessReport(0.1, 0.5, 10.0)
    )
    assert math.isnan(change.entropy)
    assert change.undefined == ["entropy"]
    assert change.bdm == 0
    assert "Zero baseline for entropy" in caplog.text


def test_disconnecting_isolated_state_changes_nothing():
    matrix = np.zeros((8, 8), dtype=np.uint8)
    matrix[0, 1] = matrix[1, 0] = 1
    table = test_utils.square_table()
    before = randomness_report(matrix, table)
    after = randomness_report(disconnect_node(matrix, 5), table)
    assert relative_randomness_change(before, after).as_dict() == {
        "entropy": 0,
        "lzw_rate": 0,
        "bdm": 0,
    }


def perturbed_network_diagram(seed: int = 1) -> TransitionDiagram:
    net, _ = test_utils.seeded_network(8, 5, 0.5, seed=seed)
    return build_transition_diagram(net)


def test_empty_series():
    series = perturbation_series(perturbed_network_diagram(), test_utils.square_table(), count=0)
    assert series.n_perturbed == 0
    assert series.baseline.bdm > 0
    assert list(series.as_frame().columns) == PERTURBATION_COLUMNS


def test_series_count_validation():
    with pytest.raises(IncompatibleSpecs):
        perturbation_series(perturbed_network_diagram(), test_utils.square_table(), count=257)


@pytest.mark.parametrize("mode", ["most", "least"])
def test_series_follows_prestige(mode):
    diagram = perturbed_network_diagram()
    prestige = prestige_centrality(diagram)
    series = perturbation_series(diagram, test_utils.square_table(), mode=mode, count=20)
    assert series.mode is PerturbationMode(mode)
    assert series.n_perturbed == 20
    scores = [r.prestige for r in series.records]
    states = [r.node for r in series.records]
    if mode == "most":
        assert scores == sorted(scores, reverse=True)
        assert states[0] == int(np.argmax(prestige.scores))
    else:
        assert scores == sorted(scores)
    for a, b in zip(series.records, series.records[1:]):
        if a.prestige == b.prestige:
            assert a.node < b.node
    assert [r.rank for r in series.records] == list(range(1, 21))


def test_series_measures_against_the_pristine_diagram():
    diagram = perturbed_network_diagram()
    table = test_utils.square_table()
    series = perturbation_series(diagram, table, count=10)
    for record in series.records:
        assert record.measure_before == series.baseline
        assert record.aid == series.baseline.bdm - record.measure_after.bdm
        # a state that makes the diagram simpler to describe when removed has positive AID
        assert np.sign(record.aid) == np.sign(record.relative_change.bdm)
        assert record.classification.sign == np.sign(record.aid)
    again = perturbation_series(diagram, table, count=10)
    assert [r.measure_after for r in again.records] == [r.measure_after for r in series.records]


def test_entropy_only_sees_how_many_ones_are_removed():
    diagram = perturbed_network_diagram(seed=2)
    pristine = adjacency_matrix(diagram)
    series = perturbation_series(
        diagram, test_utils.square_table(), mode=PerturbationMode.LEAST_RELEVANT, count=40
    )
    changes_by_removed = {}
    for record in series.records:
        node = record.node
        removed = int(pristine[node, :].sum() + pristine[:, node].sum() - pristine[node, node])
        changes_by_removed.setdefault(removed, []).append(record.relative_change)
        # entropy after removal follows from the count of ones alone
        bits = np.zeros(pristine.size, dtype=np.uint8)
        bits[: int(pristine.sum()) - removed] = 1
        assert record.measure_after.entropy == pytest.approx(shannon_entropy(bits))
    for changes in changes_by_removed.values():
        assert len({c.entropy for c in changes}) == 1
    # but BDM also sees where they were
    assert any(len({c.bdm for c in changes}) > 1 for changes in changes_by_removed.values())



@pytest.mark.xfail(
    reason="with the 4x4 table derived from 2-state machines, seeds 0, 1 and 2 gave 13, 7 and 25 "
    "records with |entropy change| < 1e-3 against 38, 36 and 36 with |BDM change| < 1e-3: "
    "a removed state mostly takes one one out of a block that repeats all over the matrix, "
    "which moves BDM by a fraction of a bit",
    strict=False,
)
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_entropy_is_blind_to_more_perturbations_than_bdm(seed):
    net, _ = test_utils.seeded_network(10, 5, 0.5, seed=seed)
    diagram = build_transition_diagram(net)
    table = test_utils.square_table()
    records = []
    for mode in ("most", "least"):
        records += perturbation_series(diagram, table, mode=mode, count=20).records
    assert len(records) == 40
    entropy_unmoved = sum(abs(r.relative_change.entropy) < 1e-3 for r in records)
    bdm_unmoved = sum(abs(r.relative_change.bdm) < 1e-3 for r in records)
    assert entropy_unmoved > bdm_unmoved


def test_series_on_ten_nodes():
    net, _ = test_utils.seeded_network(10, 5, 0.5, seed=3)
    diagram = build_transition_diagram(net)
    series = perturbation_series(diagram, test_utils.square_table(), count=3)
    assert series.n_perturbed == 3
    assert series.baseline.entropy == shannon_entropy(adjacency_matrix(diagram))
    frame = series.as_frame()
    assert frame["state"].tolist() == [r.node for r in series.records]
