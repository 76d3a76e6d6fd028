"""Rectangular study regions in one or two dimensions."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Domain1D:
    """Interval [lo, hi] with area = hi - lo."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError(f"empty domain: [{self.lo}, {self.hi}]")

    @property
    def ndim(self):
        return 1

    @property
    def bounds(self):
        return np.array([[self.lo, self.hi]])

    @property
    def area(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class Domain2D:
    """Axis-aligned rectangle [x_lo, x_hi] x [y_lo, y_hi]."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (self.x_hi > self.x_lo and self.y_hi > self.y_lo):
            raise ValueError("empty domain: each axis needs hi > lo")

    @property
    def ndim(self):
        return 2

    @property
    def bounds(self):
        return np.array([[self.x_lo, self.x_hi], [self.y_lo, self.y_hi]])

    @property
    def area(self):
        return (self.x_hi - self.x_lo) * (self.y_hi - self.y_lo)
