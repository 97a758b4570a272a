"""The (lower, middle, upper) record every two-sided inequality returns."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SandwichResult:
    """Terms of ``lower <= middle <= upper``.

    Fields may be floats or equally shaped arrays.  ``log_scale`` is nonzero
    only when the terms would overflow a double: the true values are then
    ``term * exp(log_scale)``.  A common positive factor does not change the
    ordering, so slacks can be compared in scaled units.
    """

    lower: float
    middle: float
    upper: float
    log_scale: float = 0.0

    @property
    def lower_slack(self):
        return self.middle - self.lower

    @property
    def upper_slack(self):
        return self.upper - self.middle

    def as_tuple(self):
        return (self.lower, self.middle, self.upper)

    def unscaled(self):
        """Terms multiplied back by ``exp(log_scale)`` (may overflow to inf)."""
        f = np.exp(self.log_scale)
        with np.errstate(over="ignore"):
            return (self.lower * f, self.middle * f, self.upper * f)

    def is_finite(self):
        return bool(np.all(np.isfinite([self.lower, self.middle, self.upper])))
