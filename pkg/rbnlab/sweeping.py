import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from statsmodels.api import OLS, add_constant

from rbnlab.enumerating import square_table
from rbnlab.exceptions import DegenerateSeries, IncompatibleSpecs
from rbnlab.measuring import CtmTable, RandomnessReport, randomness_report
from rbnlab.simulating import (
    BooleanNetwork,
    classify_regime,
    evolve,
    generate_truth_tables,
    generate_wiring,
    random_initial_state,
    theoretical_critical_p,
)
from rbnlab.speccing import DEFAULT_BLOCK_SIDE, Boundary, SweepConfig
from rbnlab.transforming import (
    LogScale,
    MovingAverage,
    ReversibleTransformation,
    Transformation,
)
from rbnlab.utils.rng_utils import derive_stream, stream_id_for

"""
Sweeps of the bias p: how randomness of the truth tables and of the time evolution diagrams
changes with p, per in-degree k, and where the diagram BDM starts its sudden growth.
"""

SWEEP_COLUMNS = [
    "k",
    "p",
    "sample",
    "entropy_tt",
    "lzw_tt",
    "bdm_tt",
    "entropy_diag",
    "lzw_diag",
    "bdm_diag",
]
MEASURE_COLUMNS = SWEEP_COLUMNS[3:]
CRITICALITY_COLUMNS = ["k", "detected_p", "theoretical_p"]
DETECTION_METHOD = "log2-trailing-ma3-max-growth"
RAW_DETECTION_METHOD = "trailing-ma3-max-growth"

# stream tags, folded with the task keys into stream ids
WIRING_STREAM = 0
INITIAL_STREAM = 1
TABLES_STREAM = 2

logger = logging.getLogger(__name__)


class SweepSeries(object):
    """The measurements of one in-degree over the p grid.

    `frame` holds one row per (p, sample), with the columns of SWEEP_COLUMNS."""

    in_degree: int
    frame: pd.DataFrame

    def __init__(self, in_degree: int, frame: pd.DataFrame):
        self.in_degree = in_degree
        self.frame = frame.sort_values(["p", "sample"]).reset_index(drop=True)

    @property
    def p_values(self) -> np.ndarray:
        return np.unique(self.frame["p"].values)

    @property
    def samples(self) -> int:
        return self.frame["sample"].nunique()

    def means(self) -> pd.DataFrame:
        """One row per grid point, the measures averaged over the samples."""
        means = self.frame.groupby("p", sort=True)[MEASURE_COLUMNS].mean().reset_index()
        means.insert(0, "k", self.in_degree)
        return means

    def column(self, name: str) -> pd.Series:
        """A measure, averaged over the samples, indexed by p."""
        if name not in MEASURE_COLUMNS:
            raise IncompatibleSpecs(
                "Unknown measure column %r (one of %s)" % (name, MEASURE_COLUMNS)
            )
        return self.means().set_index("p")[name]

    def reports_at(self, p: float) -> Tuple[RandomnessReport, RandomnessReport]:
        """Mean reports (truth tables, evolution diagram) at one grid point."""
        row = self.means().set_index("p").loc[p]
        return (
            RandomnessReport(row["entropy_tt"], row["lzw_tt"], row["bdm_tt"]),
            RandomnessReport(row["entropy_diag"], row["lzw_diag"], row["bdm_diag"]),
        )

    def __repr__(self):
        return "SweepSeries: <k=%d, %d grid points, %d samples>" % (
            self.in_degree,
            len(self.p_values),
            self.samples,
        )


def _stream(config: SweepConfig, tag: int, k_index: int, p_index: int, sample: int):
    shared = {
        WIRING_STREAM: config.shared_wiring,
        INITIAL_STREAM: config.shared_initial_state,
        TABLES_STREAM: False,
    }[tag]
    if shared:
        return derive_stream(config.master_seed, stream_id_for(k_index, tag))
    return derive_stream(config.master_seed, stream_id_for(k_index, tag, p_index, sample))


def _measure_point(task: tuple) -> list:
    """Generate, evolve and measure the network of one (k, p, sample)."""
    config, table, block_side, boundary, k_index, p_index, sample = task
    k = config.in_degrees[k_index]
    p = float(config.p_grid[p_index])
    params = config.params_for(k, p)
    wiring = generate_wiring(params, _stream(config, WIRING_STREAM, k_index, p_index, sample))
    initial = random_initial_state(
        config.n_nodes, _stream(config, INITIAL_STREAM, k_index, p_index, sample)
    )
    tables = generate_truth_tables(
        params, _stream(config, TABLES_STREAM, k_index, p_index, sample)
    )
    net = BooleanNetwork(params, wiring, tables)
    diagram = evolve(net, initial, config.steps)

    # truth tables of small k are narrower than a block
    tt_boundary = boundary if tables.shape[1] >= block_side else Boundary.PAD_ZERO
    tt = randomness_report(tables, table, block_side, tt_boundary)
    diag = randomness_report(diagram, table, block_side, boundary)
    return [
        k,
        p,
        sample,
        tt.entropy,
        tt.lzw_rate,
        tt.bdm,
        diag.entropy,
        diag.lzw_rate,
        diag.bdm,
    ]


def _run(
    config: SweepConfig,
    k_indices: List[int],
    samples: int,
    table: Optional[CtmTable],
    block_side: int,
    boundary: Boundary,
    workers: int,
) -> Dict[int, SweepSeries]:
    if table is None:
        table = square_table(side=block_side)
    tasks = [
        (config, table, block_side, Boundary(boundary), k_index, p_index, sample)
        for k_index in k_indices
        for p_index in range(len(config.p_grid))
        for sample in range(samples)
    ]
    logger.info(
        "Sweeping %d grid points for k in %s, %d sample(s) each ..."
        % (len(config.p_grid), [config.in_degrees[i] for i in k_indices], samples)
    )
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_measure_point, tasks))
    else:
        rows = [_measure_point(task) for task in tasks]
    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    series = {}
    for k_index in k_indices:
        k = config.in_degrees[k_index]
        series[k] = SweepSeries(k, frame[frame["k"] == k])
        logger.info("Done with %s" % series[k])
    return series


def _k_index(config: SweepConfig, in_degree: Optional[int]) -> int:
    if in_degree is None:
        return 0
    if in_degree not in config.in_degrees:
        raise IncompatibleSpecs(
            "in_degree %s is not among the configured %s" % (in_degree, config.in_degrees),
            key="in_degrees",
        )
    return config.in_degrees.index(in_degree)


def sweep_p(
    config: SweepConfig,
    in_degree: int = None,
    table: CtmTable = None,
    block_side: int = DEFAULT_BLOCK_SIDE,
    boundary: Boundary = Boundary.IGNORE,
    workers: int = 1,
) -> SweepSeries:
    """One network per grid point (sample 0 only), for one in-degree (the first configured one
    by default). With the shared flags, all grid points use the same wiring and initial state;
    truth tables are drawn fresh from a stream of their own for every point."""
    k_index = _k_index(config, in_degree)
    return _run(config, [k_index], 1, table, block_side, boundary, workers)[
        config.in_degrees[k_index]
    ]


def averaged_sweep(
    config: SweepConfig,
    in_degree: int = None,
    table: CtmTable = None,
    block_side: int = DEFAULT_BLOCK_SIDE,
    boundary: Boundary = Boundary.IGNORE,
    workers: int = 1,
) -> SweepSeries:
    """sweep_p repeated for config.samples samples, each with fresh truth tables.
    Sample 0 is the network sweep_p measures."""
    k_index = _k_index(config, in_degree)
    return _run(config, [k_index], config.samples, table, block_side, boundary, workers)[
        config.in_degrees[k_index]
    ]


def sweep_per_k(
    config: SweepConfig,
    table: CtmTable = None,
    block_side: int = DEFAULT_BLOCK_SIDE,
    boundary: Boundary = Boundary.IGNORE,
    workers: int = 1,
) -> Dict[int, SweepSeries]:
    """An averaged sweep for every configured in-degree; each in-degree has its own shared wiring."""
    return _run(
        config,
        list(range(len(config.in_degrees))),
        config.samples,
        table,
        block_side,
        boundary,
        workers,
    )


def sweep_frame(series: Dict[int, SweepSeries]) -> pd.DataFrame:
    """All per-sample rows of several series, ordered by k, p and sample."""
    return pd.concat([series[k].frame for k in sorted(series)], ignore_index=True)


class CriticalityResult(object):
    """Where the diagram BDM of a sweep starts its sudden growth, next to where theory puts the
    edge of chaos (the lower root, None for k < 2)."""

    in_degree: int
    detected_p: float
    theoretical_p: Optional[float]
    method: str
    # the smoothed series at detected_p, in the units of the measure
    level: Optional[float]

    def __init__(
        self,
        in_degree: int,
        detected_p: float,
        theoretical_p: Optional[float],
        method: str,
        level: float = None,
    ):
        self.in_degree = in_degree
        self.detected_p = detected_p
        self.theoretical_p = theoretical_p
        self.method = method
        self.level = level

    def as_dict(self):
        return vars(self)

    def __repr__(self):
        return "CriticalityResult: <%s>" % self.as_dict()


def detect_critical_p(
    series: SweepSeries,
    column: str = "bdm_diag",
    smoothing: Transformation = None,
    scale: ReversibleTransformation = None,
) -> CriticalityResult:
    """Put the series on a log2 scale, smooth it with a trailing 3-point moving average, then take
    the grid point where the smoothed series grows most compared to the point before (ties go to
    the smaller p). Pass `scale=ReversibleTransformation()` to look for growth in raw bits."""
    values = series.column(column)
    if len(values) < 3:
        raise IncompatibleSpecs(
            "Critical p detection needs at least 3 grid points, not %d" % len(values)
        )
    if np.ptp(values.values) == 0:
        logger.warning("The %s series of k=%d is flat." % (column, series.in_degree))
        raise DegenerateSeries(
            "The %s series of k=%d is flat, there is no growth to detect."
            % (column, series.in_degree)
        )
    if scale is None:
        scale = LogScale()
    if smoothing is None:
        smoothing = MovingAverage(window=3)
    smoothed = smoothing.transform_series(scale.transform_series(values))
    growth = smoothed.diff().values[1:]
    # growths equal up to rounding count as ties
    best = growth.max()
    first = int(np.flatnonzero(growth >= best - 1e-9 * max(abs(best), 1.0))[0])
    detected_p = float(values.index[1 + first])
    theoretical_p = (
        theoretical_critical_p(series.in_degree)[0] if series.in_degree >= 2 else None
    )
    level = float(scale.back_transform_value(smoothed.values[1 + first]))
    method = DETECTION_METHOD if isinstance(scale, LogScale) else RAW_DETECTION_METHOD
    result = CriticalityResult(series.in_degree, detected_p, theoretical_p, method, level)
    logger.info("Detected %s" % result)
    return result


def criticality_frame(results: List[CriticalityResult]) -> pd.DataFrame:
    return pd.DataFrame(
        [[r.in_degree, r.detected_p, r.theoretical_p] for r in results],
        columns=CRITICALITY_COLUMNS,
    )


def jump_ratio(series: SweepSeries, column: str, critical_p: float) -> float:
    """Mean of the series on the chaotic side of critical_p (p in [critical_p, 1 - critical_p])
    divided by its mean below critical_p."""
    values = series.column(column)
    p = values.index.values
    before = values.values[p < critical_p]
    after = values.values[(p >= critical_p) & (p <= 1 - critical_p)]
    if before.size == 0 or after.size == 0:
        raise IncompatibleSpecs(
            "The grid needs points on both sides of p=%s to compare them" % critical_p
        )
    if before.mean() == 0:
        raise DegenerateSeries(
            "The %s series is zero below p=%s, so it has no jump ratio" % (column, critical_p)
        )
    return float(after.mean() / before.mean())


def bdm_trend_slope(series: SweepSeries, column: str = "bdm_tt") -> float:
    """Slope of a least-squares line through the series as a function of p."""
    values = series.column(column)
    fit = OLS(values.values, add_constant(values.index.values)).fit()
    return float(fit.params[1])


def regime_of_grid(series: SweepSeries) -> pd.Series:
    """The dynamical regime at every grid point of a series."""
    p_values = series.p_values
    return pd.Series(
        [classify_regime(series.in_degree, p) for p in p_values], index=p_values, name="regime"
    )
