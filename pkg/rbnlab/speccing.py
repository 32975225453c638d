import logging
from enum import Enum
from pprint import pformat
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from rbnlab.exceptions import IncompatibleSpecs, MalformedFile, UnknownConfigKey

"""
Specs for networks and experiments, and the flat key=value configuration they are read from.
"""

DEFAULT_STEPS = 250
DEFAULT_SAMPLES = 10
DEFAULT_BLOCK_SIDE = 4

logger = logging.getLogger(__name__)


class WiringKind(Enum):
    UNIFORM = "uniform"
    BINOMIAL = "binomial"


class Boundary(Enum):
    IGNORE = "ignore"
    PAD_ZERO = "pad_zero"


class WiringDistribution(object):
    """How the k inputs of every node are drawn.

    Uniform: each input uniformly on [0, N), with replacement.
    Binomial: each input is Binomial(N - 1, success_prob), i.e. node labels near
    (N - 1) * success_prob are chosen most often."""

    kind: WiringKind
    success_prob: Optional[float]

    def __init__(self, kind: Union[WiringKind, str], success_prob: float = None):
        self.kind = WiringKind(kind)
        if self.kind is WiringKind.BINOMIAL:
            if success_prob is None or not 0 <= success_prob <= 1:
                raise IncompatibleSpecs(
                    "Binomial wiring needs a success probability in [0, 1], not %s"
                    % success_prob,
                    key="wiring_success_prob",
                )
        else:
            success_prob = None
        self.success_prob = success_prob

    @classmethod
    def uniform(cls) -> "WiringDistribution":
        return cls(WiringKind.UNIFORM)

    @classmethod
    def binomial(cls, success_prob: float = 0.5) -> "WiringDistribution":
        return cls(WiringKind.BINOMIAL, success_prob)

    def __eq__(self, other):
        return (
            isinstance(other, WiringDistribution)
            and self.kind is other.kind
            and self.success_prob == other.success_prob
        )

    def __repr__(self):
        if self.kind is WiringKind.BINOMIAL:
            return "Binomial(%s)" % self.success_prob
        return "Uniform"


class RbnParams(object):
    """Describes a random Boolean network ensemble: N nodes, in-degree k, bias p and wiring."""

    n_nodes: int
    in_degree: int
    # probability that a truth table entry is 1
    bias: float
    wiring_dist: WiringDistribution

    def __init__(
        self,
        n_nodes: int,
        in_degree: int,
        bias: float,
        wiring_dist: WiringDistribution = None,
    ):
        if int(n_nodes) != n_nodes or n_nodes < 1:
            raise IncompatibleSpecs(
                "n_nodes needs to be a positive integer, not %s" % n_nodes,
                key="n_nodes",
            )
        if int(in_degree) != in_degree or in_degree < 1:
            raise IncompatibleSpecs(
                "in_degree needs to be a positive integer, not %s" % in_degree,
                key="in_degree",
            )
        if in_degree > n_nodes:
            raise IncompatibleSpecs(
                "in_degree (%d) cannot exceed n_nodes (%d)" % (in_degree, n_nodes),
                key="in_degree",
            )
        if not 0 <= bias <= 1:
            raise IncompatibleSpecs(
                "bias needs to lie in [0, 1], not %s" % bias, key="bias"
            )
        self.n_nodes = int(n_nodes)
        self.in_degree = int(in_degree)
        self.bias = float(bias)
        self.wiring_dist = (
            wiring_dist if wiring_dist is not None else WiringDistribution.uniform()
        )

    def with_bias(self, bias: float) -> "RbnParams":
        return RbnParams(self.n_nodes, self.in_degree, bias, self.wiring_dist)

    def as_dict(self):
        return vars(self)

    def __eq__(self, other):
        return isinstance(other, RbnParams) and vars(self) == vars(other)

    def __repr__(self):
        return "RbnParams: <%s>" % self.as_dict()


class SweepConfig(object):
    """Describes a sweep of the bias p, for one or more in-degrees."""

    n_nodes: int
    in_degrees: List[int]
    p_grid: np.ndarray
    # trajectory length T (rows of the evolution diagram, including the initial state)
    steps: int
    master_seed: int
    samples: int
    wiring_dist: WiringDistribution
    # RBNs of one in-degree share their wiring / their initial state
    shared_wiring: bool
    shared_initial_state: bool

    def __init__(
        self,
        n_nodes: int,
        in_degrees: Union[int, Sequence[int]],
        p_grid: Union[Sequence[float], Tuple[float, float, int]],
        steps: int = DEFAULT_STEPS,
        master_seed: int = 0,
        samples: int = DEFAULT_SAMPLES,
        wiring_dist: WiringDistribution = None,
        shared_wiring: bool = True,
        shared_initial_state: bool = True,
    ):
        """Create a SweepConfig. p_grid is an explicit list of p values, or a (min, max, points) tuple."""
        self.n_nodes = n_nodes
        self.in_degrees = (
            [in_degrees] if isinstance(in_degrees, int) else list(in_degrees)
        )
        if not self.in_degrees:
            raise IncompatibleSpecs("At least one in-degree is needed.", key="in_degrees")
        for k in self.in_degrees:
            RbnParams(n_nodes, k, 0.5)  # validates n_nodes and k
        self.p_grid = make_p_grid(p_grid)
        if int(steps) != steps or steps < 1:
            raise IncompatibleSpecs(
                "steps needs to be a positive integer, not %s" % steps, key="steps"
            )
        if int(samples) != samples or samples < 1:
            raise IncompatibleSpecs(
                "samples needs to be at least 1, not %s" % samples, key="samples"
            )
        self.steps = int(steps)
        self.master_seed = int(master_seed)
        self.samples = int(samples)
        self.wiring_dist = (
            wiring_dist if wiring_dist is not None else WiringDistribution.uniform()
        )
        self.shared_wiring = shared_wiring
        self.shared_initial_state = shared_initial_state

    def params_for(self, in_degree: int, bias: float) -> RbnParams:
        return RbnParams(self.n_nodes, in_degree, bias, self.wiring_dist)

    def with_samples(self, samples: int) -> "SweepConfig":
        return SweepConfig(
            self.n_nodes,
            self.in_degrees,
            list(self.p_grid),
            self.steps,
            self.master_seed,
            samples,
            self.wiring_dist,
            self.shared_wiring,
            self.shared_initial_state,
        )

    def as_dict(self):
        return vars(self)

    def __repr__(self):
        return "SweepConfig: <%s>" % pformat(vars(self))


def make_p_grid(p_grid: Union[Sequence[float], Tuple[float, float, int]]) -> np.ndarray:
    """An explicit grid, or evenly spaced points from a (min, max, points) tuple."""
    if (
        isinstance(p_grid, tuple)
        and len(p_grid) == 3
        and isinstance(p_grid[2], (int, np.integer))
        and not isinstance(p_grid[2], bool)
    ):
        p_min, p_max, points = p_grid
        if points < 2:
            raise IncompatibleSpecs(
                "A p grid needs at least 2 points, not %d" % points, key="p_points"
            )
        if p_min > p_max:
            raise IncompatibleSpecs(
                "p_min (%s) lies above p_max (%s)" % (p_min, p_max), key="p_min"
            )
        grid = np.linspace(p_min, p_max, points)
    else:
        grid = np.asarray(p_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise IncompatibleSpecs("The p grid is empty.", key="p_grid")
    if (grid < 0).any() or (grid > 1).any():
        raise IncompatibleSpecs(
            "p grid values need to lie in [0, 1], found %s" % grid[(grid < 0) | (grid > 1)],
            key="p_grid",
        )
    return grid


# ---------------------------------------------------------------------------------------
# Flat key=value configuration


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError("not a boolean: %r" % value)


def _parse_int_list(value: str) -> List[int]:
    items = [int(v) for v in value.split(",") if v.strip()]
    if not items:
        raise ValueError("empty list")
    return items


def _parse_float_list(value: str) -> List[float]:
    return [float(v) for v in value.split(",") if v.strip()]


def _choice(*options: str) -> Callable[[str], str]:
    def parse(value: str) -> str:
        value = value.strip().lower()
        if value not in options:
            raise ValueError("expected one of %s, not %r" % ("|".join(options), value))
        return value

    return parse


def _in_unit_interval(v: float) -> bool:
    return 0 <= v <= 1


def _positive(v: float) -> bool:
    return v > 0


def _non_negative(v: float) -> bool:
    return v >= 0


class ConfigKey(object):
    """A known configuration key: how to parse it, its default, and a range check."""

    def __init__(
        self,
        parse: Callable[[str], Any],
        default: Any,
        check: Optional[Callable[[Any], bool]] = None,
        expectation: str = "",
    ):
        self.parse = parse
        self.default = default
        self.check = check
        self.expectation = expectation


CONFIG_KEYS: Dict[str, ConfigKey] = {
    "n_nodes": ConfigKey(int, 500, _positive, "a positive integer"),
    "in_degrees": ConfigKey(
        _parse_int_list, [5], lambda ks: all(k >= 1 for k in ks), "positive integers"
    ),
    "bias": ConfigKey(float, 0.5, _in_unit_interval, "a value in [0, 1]"),
    "p_min": ConfigKey(float, 0.0, _in_unit_interval, "a value in [0, 1]"),
    "p_max": ConfigKey(float, 0.5, _in_unit_interval, "a value in [0, 1]"),
    "p_points": ConfigKey(int, 41, lambda v: v >= 2, "at least 2"),
    "p_grid": ConfigKey(
        _parse_float_list,
        [],
        lambda ps: all(0 <= p <= 1 for p in ps),
        "values in [0, 1]",
    ),
    "steps": ConfigKey(int, DEFAULT_STEPS, _positive, "a positive integer"),
    "samples": ConfigKey(int, DEFAULT_SAMPLES, _positive, "a positive integer"),
    "master_seed": ConfigKey(
        int, 0, lambda v: 0 <= v < 2 ** 64, "an unsigned 64-bit integer"
    ),
    "wiring": ConfigKey(_choice("uniform", "binomial"), "uniform"),
    "wiring_success_prob": ConfigKey(float, 0.5, _in_unit_interval, "a value in [0, 1]"),
    "shared_wiring": ConfigKey(_parse_bool, True),
    "shared_initial": ConfigKey(_parse_bool, True),
    "block_side": ConfigKey(int, DEFAULT_BLOCK_SIDE, _positive, "a positive integer"),
    "boundary": ConfigKey(_choice("ignore", "pad_zero"), "ignore"),
    "ctm_table": ConfigKey(str, ""),
    # ctm-gen writes a Square(block_side) table
    "ctm_square": ConfigKey(_parse_bool, False),
    # measure with the Square table derived from enumerated machines, not pybdm's
    "ctm_derived": ConfigKey(_parse_bool, False),
    # network fixture file, a seeded network is generated if empty
    "network": ConfigKey(str, ""),
    "ctm_states": ConfigKey(int, 2, lambda v: 1 <= v <= 3, "1, 2 or 3"),
    "ctm_step_cap": ConfigKey(int, 500, _positive, "a positive integer"),
    "max_nodes": ConfigKey(int, 20, _positive, "a positive integer"),
    "count": ConfigKey(int, 20, _non_negative, "a non-negative integer"),
    "mode": ConfigKey(_choice("most", "least"), "most"),
    "band_tolerance": ConfigKey(float, 0.1, lambda v: 0 <= v < 1, "a value in [0, 1)"),
    "prestige_tol": ConfigKey(float, 1e-10, _positive, "a positive number"),
    "prestige_max_iter": ConfigKey(int, 1000, _positive, "a positive integer"),
    "prestige_averaging": ConfigKey(_parse_bool, False),
    "workers": ConfigKey(int, 1, _positive, "a positive integer"),
}
# alternative spellings, read as the key they point to
CONFIG_ALIASES = {"in_degree": "in_degrees"}


class RunConfig(object):
    """A fully resolved configuration. Every known key is an attribute."""

    def __init__(self, values: Dict[str, Any]):
        for key in CONFIG_KEYS:
            setattr(self, key, values[key])

    def as_dict(self) -> Dict[str, Any]:
        return {key: getattr(self, key) for key in CONFIG_KEYS}

    def rbn_params(self, in_degree: int = None, bias: float = None) -> RbnParams:
        return RbnParams(
            self.n_nodes,
            self.in_degrees[0] if in_degree is None else in_degree,
            self.bias if bias is None else bias,
            self.wiring_dist(),
        )

    def wiring_dist(self) -> WiringDistribution:
        if self.wiring == "binomial":
            return WiringDistribution.binomial(self.wiring_success_prob)
        return WiringDistribution.uniform()

    def p_grid_spec(self) -> Union[List[float], Tuple[float, float, int]]:
        if self.p_grid:
            return list(self.p_grid)
        return self.p_min, self.p_max, self.p_points

    def sweep_config(self) -> SweepConfig:
        return SweepConfig(
            n_nodes=self.n_nodes,
            in_degrees=self.in_degrees,
            p_grid=self.p_grid_spec(),
            steps=self.steps,
            master_seed=self.master_seed,
            samples=self.samples,
            wiring_dist=self.wiring_dist(),
            shared_wiring=self.shared_wiring,
            shared_initial_state=self.shared_initial,
        )

    def boundary_kind(self) -> Boundary:
        return Boundary(self.boundary)

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.as_dict() == other.as_dict()

    def __repr__(self):
        return "RunConfig: <%s>" % pformat(self.as_dict())


def format_config_value(value: Any) -> str:
    """Write a config value back in the form parse_config reads."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(format_config_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(key: str, raw: str, line: Optional[int]) -> Any:
    if key not in CONFIG_KEYS:
        raise UnknownConfigKey("unknown key '%s'" % key, key=key, line=line)
    spec = CONFIG_KEYS[key]
    raw = raw.strip()
    if key == "p_grid" and raw == "":
        return []
    if key in ("ctm_table", "network"):
        return raw
    try:
        value = spec.parse(raw)
    except ValueError as e:
        raise IncompatibleSpecs(
            "cannot read value %r for key '%s' (%s)" % (raw, key, e), key=key, line=line
        )
    if spec.check is not None and not spec.check(value):
        raise IncompatibleSpecs(
            "value %r for key '%s' is out of range, expected %s"
            % (raw, key, spec.expectation),
            key=key,
            line=line,
        )
    return value


def parse_config(text: str = "", overrides: Sequence[str] = None) -> RunConfig:
    """Resolve a configuration: defaults < key=value lines of `text` < overrides.

    Lines may be blank or start with '#'; trailing '# comments' are dropped.
    Overrides are "key=value" strings (e.g. from the command line)."""
    values = {key: spec.default for key, spec in CONFIG_KEYS.items()}
    for line_number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise MalformedFile("expected key=value, got %r" % content, line=line_number)
        key, raw = content.split("=", 1)
        key = CONFIG_ALIASES.get(key.strip(), key.strip())
        values[key] = _parse_value(key, raw, line_number)
    for override in overrides or []:
        if "=" not in override:
            raise IncompatibleSpecs("override %r is not of the form key=value" % override)
        key, raw = override.split("=", 1)
        key = CONFIG_ALIASES.get(key.strip(), key.strip())
        values[key] = _parse_value(key, raw, None)
    if values["p_min"] > values["p_max"]:
        raise IncompatibleSpecs(
            "p_min (%s) lies above p_max (%s)" % (values["p_min"], values["p_max"]),
            key="p_min",
        )
    config = RunConfig(values)
    logger.debug("Resolved configuration: %s" % config)
    return config
