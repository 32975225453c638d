import logging
import math
from enum import Enum
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from rbnlab.exceptions import IncompatibleSpecs, ShapeMismatch
from rbnlab.graphing import (
    PrestigeVector,
    TransitionDiagram,
    adjacency_matrix,
    prestige_centrality,
)
from rbnlab.measuring import CtmTable, RandomnessReport, randomness_report
from rbnlab.speccing import DEFAULT_BLOCK_SIDE, Boundary

"""
Perturbation analysis of transition diagrams: take states out of the diagram one at a time,
see how each randomness measure of the adjacency matrix responds, and read the causal role of
the state from the algorithmic information it carried (AID = K(G) - K(G without the state),
with K estimated by BDM).
"""

PERTURBATION_COLUMNS = [
    "rank",
    "state",
    "prestige",
    "entropy_rel",
    "lzw_rel",
    "bdm_rel",
    "aid",
    "classification",
]

logger = logging.getLogger(__name__)


class PerturbationMode(Enum):
    MOST_RELEVANT = "most"
    LEAST_RELEVANT = "least"


class AidClassification(Enum):
    # |aid| well below log2|V|: the state is accounted for by the rest of the description
    CONTAINED_IN_DESCRIPTION = "contained"
    # |aid| about log2|V|: costs no more than naming the state
    CAUSAL_NEUTRAL = "neutral"
    # |aid| above log2|V| but at most |V|
    INFORMATION_LOSS = "information_loss"
    # |aid| above |V|
    FUNDAMENTAL_OR_NOISE = "fundamental_or_noise"


class AidClass(object):
    """An AID classification and the sign of the AID it was made from.

    A negative sign means removing the element made the object more random (the element is
    a causal contributor), a positive one that it made the object simpler (likely noise)."""

    classification: AidClassification
    sign: int

    def __init__(self, classification: AidClassification, sign: int):
        self.classification = classification
        self.sign = sign

    def label(self) -> str:
        return "%s%s" % (self.classification.value, {-1: "-", 0: "", 1: "+"}[self.sign])

    def __eq__(self, other):
        return isinstance(other, AidClass) and vars(self) == vars(other)

    def __repr__(self):
        return "AidClass(%s, sign %+d)" % (self.classification.name, self.sign)


def causal_sign(aid: float) -> int:
    return int(np.sign(aid))


def classify_aid(aid: float, n_vertices: int, band_tolerance: float = 0.1) -> AidClass:
    """Compare |aid| to L = log2(n_vertices) and to n_vertices:
    below (1 - tol) L, inside [(1 - tol) L, (1 + tol) L], up to n_vertices, or beyond."""
    if n_vertices < 2:
        raise IncompatibleSpecs(
            "AID classification needs at least 2 vertices, not %s" % n_vertices
        )
    if not 0 <= band_tolerance < 1:
        raise IncompatibleSpecs(
            "band_tolerance needs to lie in [0, 1), not %s" % band_tolerance,
            key="band_tolerance",
        )
    magnitude = abs(aid)
    log_size = math.log2(n_vertices)
    if magnitude < (1 - band_tolerance) * log_size:
        classification = AidClassification.CONTAINED_IN_DESCRIPTION
    elif magnitude <= (1 + band_tolerance) * log_size:
        classification = AidClassification.CAUSAL_NEUTRAL
    elif magnitude <= n_vertices:
        classification = AidClassification.INFORMATION_LOSS
    else:
        classification = AidClassification.FUNDAMENTAL_OR_NOISE
    return AidClass(classification, causal_sign(aid))


def _check_node(adjacency: np.ndarray, node: int):
    if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
        raise ShapeMismatch("An adjacency matrix is square, got shape %s" % (adjacency.shape,))
    if not 0 <= node < adjacency.shape[0]:
        raise IncompatibleSpecs(
            "State %s is not in a diagram of %d states" % (node, adjacency.shape[0])
        )


def disconnect_node(adjacency: np.ndarray, node: int, in_place: bool = False) -> np.ndarray:
    """Zero the row and the column of a state. The state keeps its place, so the matrix shape
    (and with it the block grid BDM works on) stays the same."""
    adjacency = np.asarray(adjacency)
    _check_node(adjacency, node)
    result = adjacency if in_place else adjacency.copy()
    result[node, :] = 0
    result[:, node] = 0
    return result


def restore_node(adjacency: np.ndarray, pristine: np.ndarray, node: int) -> np.ndarray:
    """Put the pristine row and column of a state back, in place."""
    _check_node(adjacency, node)
    if adjacency.shape != pristine.shape:
        raise ShapeMismatch(
            "Cannot restore from a matrix of shape %s into one of shape %s"
            % (pristine.shape, adjacency.shape)
        )
    adjacency[node, :] = pristine[node, :]
    adjacency[:, node] = pristine[:, node]
    return adjacency


class RelativeChange(object):
    """(before - after) / before for every measure. A measure with a zero baseline has no
    relative change; it is NaN here and listed in `undefined`."""

    entropy: float
    lzw_rate: float
    bdm: float
    undefined: List[str]

    def __init__(self, ratios: Dict[str, float], undefined: List[str]):
        for measure in RandomnessReport.MEASURES:
            setattr(self, measure, ratios[measure])
        self.undefined = undefined

    def as_dict(self) -> Dict[str, float]:
        return {m: getattr(self, m) for m in RandomnessReport.MEASURES}

    def __repr__(self):
        return "RelativeChange: <%s>" % self.as_dict()


def relative_randomness_change(
    before: RandomnessReport, after: RandomnessReport
) -> RelativeChange:
    ratios = {}
    undefined = []
    for measure in RandomnessReport.MEASURES:
        baseline = getattr(before, measure)
        if baseline == 0:
            ratios[measure] = float("nan")
            undefined.append(measure)
        else:
            ratios[measure] = (baseline - getattr(after, measure)) / baseline
    if undefined:
        logger.warning(
            "Zero baseline for %s, so no relative change for %s"
            % (", ".join(undefined), "it" if len(undefined) == 1 else "them")
        )
    return RelativeChange(ratios, undefined)


class PerturbationRecord(object):
    """What taking one state out of the diagram did to it."""

    rank: int
    node: int
    prestige: float
    measure_before: RandomnessReport
    measure_after: RandomnessReport
    relative_change: RelativeChange
    # bits, bdm before minus bdm after
    aid: float
    classification: AidClass

    def __init__(
        self,
        rank: int,
        node: int,
        prestige: float,
        measure_before: RandomnessReport,
        measure_after: RandomnessReport,
        n_vertices: int,
        band_tolerance: float = 0.1,
    ):
        self.rank = rank
        self.node = node
        self.prestige = prestige
        self.measure_before = measure_before
        self.measure_after = measure_after
        self.relative_change = relative_randomness_change(measure_before, measure_after)
        self.aid = measure_before.bdm - measure_after.bdm
        self.classification = classify_aid(self.aid, n_vertices, band_tolerance)

    def as_row(self) -> list:
        change = self.relative_change
        return [
            self.rank,
            self.node,
            self.prestige,
            change.entropy,
            change.lzw_rate,
            change.bdm,
            self.aid,
            self.classification.label(),
        ]

    def __repr__(self):
        return "PerturbationRecord: <rank %d, state %d, aid %.4f, %r>" % (
            self.rank,
            self.node,
            self.aid,
            self.classification,
        )


class PerturbationSeries(object):
    """Perturbation records in prestige order, all measured against the same pristine baseline."""

    mode: PerturbationMode
    baseline: RandomnessReport
    records: List[PerturbationRecord]

    def __init__(
        self,
        mode: PerturbationMode,
        baseline: RandomnessReport,
        records: List[PerturbationRecord],
    ):
        self.mode = mode
        self.baseline = baseline
        self.records = records

    @property
    def n_perturbed(self) -> int:
        return len(self.records)

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.as_row() for r in self.records], columns=PERTURBATION_COLUMNS)

    def __repr__(self):
        return "PerturbationSeries: <%s, %d records, baseline %r>" % (
            self.mode.value,
            self.n_perturbed,
            self.baseline,
        )


def perturbation_series(
    diagram: TransitionDiagram,
    table: CtmTable,
    mode: Union[PerturbationMode, str] = PerturbationMode.MOST_RELEVANT,
    count: int = 20,
    block_side: int = DEFAULT_BLOCK_SIDE,
    boundary: Boundary = Boundary.IGNORE,
    band_tolerance: float = 0.1,
    prestige: Optional[PrestigeVector] = None,
) -> PerturbationSeries:
    """Measure the pristine adjacency matrix, rank the states by prestige, then for each of the
    `count` most (or least) prestigious states: disconnect it, measure, record, and restore it."""
    mode = PerturbationMode(mode)
    if not 0 <= count <= diagram.n_states:
        raise IncompatibleSpecs(
            "count needs to lie in [0, %d], not %s" % (diagram.n_states, count), key="count"
        )
    pristine = adjacency_matrix(diagram)
    baseline = randomness_report(pristine, table, block_side, boundary)
    if prestige is None:
        prestige = prestige_centrality(diagram)
    ranking = prestige.ranking(descending=mode is PerturbationMode.MOST_RELEVANT)

    working = pristine.copy()
    records = []
    for rank, node in enumerate(ranking[:count].tolist(), start=1):
        disconnect_node(working, node, in_place=True)
        after = randomness_report(working, table, block_side, boundary)
        restore_node(working, pristine, node)
        records.append(
            PerturbationRecord(
                rank,
                node,
                float(prestige.scores[node]),
                baseline,
                after,
                diagram.n_states,
                band_tolerance,
            )
        )
        logger.debug("Perturbed %r" % records[-1])
    if not np.array_equal(working, pristine):
        raise ShapeMismatch("The adjacency matrix was not restored after the series.")
    series = PerturbationSeries(mode, baseline, records)
    logger.info("Finished %s" % series)
    return series
