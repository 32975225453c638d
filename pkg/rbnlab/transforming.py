import logging

import numpy as np
import pandas as pd

from rbnlab.exceptions import IncompatibleSpecs

"""
Transforming measurement series (e.g. BDM as a function of p) before they are analysed.
"""

logger = logging.getLogger(__name__)


class Transformation(object):
    """Maps a measure series (indexed by p) to another one of the same index.
    The base class leaves the series as it is."""

    def transform_series(self, x: pd.Series) -> pd.Series:
        return x

    def transform_dataframe(self, x: pd.DataFrame) -> pd.DataFrame:
        """Column by column, e.g. for all measures of SweepSeries.means()."""
        return x.apply(self.transform_series)


class ParameterisedTransformation(Transformation):
    """A transformation with fixed settings, reachable as attributes of `params`:

        >>> MovingAverage(window=5).params.window
        5
    """

    def __init__(self, **kwargs):
        self.params = type("Params", (), dict(kwargs))


class ReversibleTransformation(ParameterisedTransformation):
    """Can map a single transformed value back to the scale of the measure."""

    def back_transform_value(self, y):
        return y


class MovingAverage(ParameterisedTransformation):
    """Trailing moving average: every point becomes the mean of itself and the window - 1 points
    before it. The first points average over what is there."""

    def __init__(self, window: int = 3):
        if window < 1:
            raise IncompatibleSpecs("A moving average window is at least 1, not %s" % window)
        super().__init__(window=window)

    def transform_series(self, x: pd.Series) -> pd.Series:
        return x.rolling(self.params.window, min_periods=1).mean()


class LogScale(ReversibleTransformation):
    """log2(offset + x). Measures that grow over orders of magnitude (BDM of evolution diagrams
    goes from hundreds of bits in the ordered regime to a few hundred thousand in the chaotic one)
    grow evenly on this scale, so their onset stands out."""

    def __init__(self, offset: float = 1.0):
        if offset <= 0:
            raise IncompatibleSpecs("The log scale offset needs to be positive, not %s" % offset)
        super().__init__(offset=offset)

    def transform_series(self, x: pd.Series) -> pd.Series:
        if (x + self.params.offset <= 0).any():
            raise IncompatibleSpecs(
                "%s has values at or below -%s, which have no logarithm"
                % (x.name, self.params.offset)
            )
        return np.log2(x + self.params.offset)

    def back_transform_value(self, y):
        return 2 ** y - self.params.offset
