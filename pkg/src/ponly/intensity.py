"""Synthetic truth models: log-linear intensities, mixtures, and thinning."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelInvalidError


@dataclass(frozen=True)
class IntensityModel:
    """Intensity that is a mixture of log-linear components in the features:

        lambda(x) = sum_k exp(log_weight_k + alpha_k + beta_k' x)

    With a single component this is exactly the log-linear model
    e^{alpha + beta' x}; more components give a non-log-linear intensity
    (useful as a misspecified truth).
    """

    components: tuple  # of (log_weight, alpha, beta: (p,) array)

    def __post_init__(self):
        if len(self.components) < 1:
            raise ValueError("need at least one component")
        comps = []
        p = None
        for lw, a, b in self.components:
            b = np.atleast_1d(np.asarray(b, dtype=float))
            if p is None:
                p = b.shape[0]
            elif b.shape[0] != p:
                raise ValueError("components disagree on feature dimension")
            b.setflags(write=False)
            comps.append((float(lw), float(a), b))
        object.__setattr__(self, "components", tuple(comps))

    @classmethod
    def log_linear(cls, alpha, beta):
        return cls(components=((0.0, alpha, beta),))

    @property
    def kind(self):
        return "log_linear" if len(self.components) == 1 else "mixture"

    @property
    def p(self):
        return self.components[0][2].shape[0]

    def intensity(self, x):
        """Evaluate lambda at feature rows x, shape (n, p) -> (n,)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[0])
        with np.errstate(over="ignore"):
            for lw, a, b in self.components:
                out += np.exp(lw + a + x @ b)
        return out


@dataclass(frozen=True)
class ThinningModel:
    """Sightings = occurrences thinned by log-linear detection.

    The occurrence intensity depends on the feature subset ``x1_indices``
    and the detection probability s = e^{gamma + delta' x2} on the disjoint
    subset ``x2_indices``; the observed process then has intensity
    lambda = lambda_occurrence * s.
    """

    occurrence: IntensityModel
    x1_indices: tuple
    gamma: float
    delta: np.ndarray
    x2_indices: tuple

    def __post_init__(self):
        x1 = tuple(int(i) for i in self.x1_indices)
        x2 = tuple(int(i) for i in self.x2_indices)
        if set(x1) & set(x2):
            raise ValueError("occurrence and detection feature sets must be disjoint")
        d = np.atleast_1d(np.asarray(self.delta, dtype=float))
        if d.shape[0] != len(x2):
            raise ValueError("delta length must match x2_indices")
        if self.occurrence.p != len(x1):
            raise ValueError("occurrence model dimension must match x1_indices")
        d.setflags(write=False)
        object.__setattr__(self, "x1_indices", x1)
        object.__setattr__(self, "x2_indices", x2)
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "gamma", float(self.gamma))

    def detection_prob(self, x):
        """s(x) = e^{gamma + delta' x2}; must land in [0, 1] wherever used."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        s = np.exp(self.gamma + x[:, self.x2_indices] @ self.delta)
        if not np.all(np.isfinite(s)):
            raise ModelInvalidError("non-finite detection probability")
        if np.any(s > 1.0 + 1e-12) or np.any(s < 0.0):
            bad = float(np.max(s))
            raise ModelInvalidError(
                f"detection probability outside [0, 1] (max {bad:g}); "
                "adjust gamma/delta for the evaluated feature range"
            )
        return np.minimum(s, 1.0)

    def intensity(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.occurrence.intensity(x[:, self.x1_indices]) * self.detection_prob(x)
