"""Convex coefficient penalties. The intercept is never penalized.

Conventions (r_j are the per-coefficient weights, all 1 by default):

    l1:      J(b) = lagrange * sum_j r_j |b_j|
    l2:      J(b) = lagrange / 2 * sum_j r_j b_j^2
    elastic: J(b) = lagrange * sum_j r_j (mix |b_j| + (1 - mix)/2 b_j^2)

Penalties are applied on the solver's internally standardized coefficient
scale (features centered/scaled by their background moments), matching how
penalized GLM software usually treats them.
"""

from dataclasses import dataclass

import numpy as np

KINDS = ("none", "l1", "l2", "elastic")


@dataclass(frozen=True)
class Penalty:
    kind: str = "none"
    lagrange: float = 0.0
    per_coef_weights: np.ndarray | None = None
    mix: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not (np.isfinite(self.lagrange) and self.lagrange >= 0):
            raise ValueError("lagrange must be finite and >= 0")
        if not 0.0 <= self.mix <= 1.0:
            raise ValueError("mix must lie in [0, 1]")
        if self.per_coef_weights is not None:
            r = np.asarray(self.per_coef_weights, dtype=float)
            if np.any(~np.isfinite(r)) or np.any(r < 0):
                raise ValueError("per-coefficient weights must be finite and >= 0")
            r.setflags(write=False)
            object.__setattr__(self, "per_coef_weights", r)

    @classmethod
    def none(cls):
        return cls()

    @classmethod
    def l1(cls, lagrange, per_coef_weights=None):
        return cls("l1", lagrange, per_coef_weights)

    @classmethod
    def l2(cls, lagrange, per_coef_weights=None):
        return cls("l2", lagrange, per_coef_weights)

    @classmethod
    def elastic(cls, lagrange, mix, per_coef_weights=None):
        return cls("elastic", lagrange, per_coef_weights, mix)

    def _r(self, p):
        if self.per_coef_weights is None:
            return np.ones(p)
        if self.per_coef_weights.shape != (p,):
            raise ValueError(
                f"per-coefficient weights have length "
                f"{self.per_coef_weights.shape[0]}, expected {p}"
            )
        return self.per_coef_weights

    def l1_weights(self, p):
        """Coefficient-wise weight of the |b_j| term."""
        if self.kind == "l1":
            return self.lagrange * self._r(p)
        if self.kind == "elastic":
            return self.lagrange * self.mix * self._r(p)
        return np.zeros(p)

    def l2_weights(self, p):
        """Coefficient-wise weight c_j of the (c_j / 2) b_j^2 term."""
        if self.kind == "l2":
            return self.lagrange * self._r(p)
        if self.kind == "elastic":
            return self.lagrange * (1.0 - self.mix) * self._r(p)
        return np.zeros(p)

    def value(self, beta):
        beta = np.asarray(beta, dtype=float)
        p = beta.shape[0]
        return float(self.l1_weights(p) @ np.abs(beta)
                     + 0.5 * self.l2_weights(p) @ beta**2)

    def scaled(self, c):
        """Same penalty with the Lagrange multiplier scaled by c."""
        return Penalty(self.kind, self.lagrange * c, self.per_coef_weights, self.mix)

    def describe(self):
        d = {"kind": self.kind}
        if self.kind != "none":
            d["lagrange"] = self.lagrange
            if self.kind == "elastic":
                d["mix"] = self.mix
            if self.per_coef_weights is not None:
                d["per_coef_weights"] = list(self.per_coef_weights)
        return d
