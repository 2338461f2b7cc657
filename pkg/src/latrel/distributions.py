"""Parametric lifetime distributions: exponential, uniform, Weibull, constant.

Each spec exposes survival, cdf, density, quantile and mean; quantile is the
single sampling primitive (inverse transform), which keeps simulation
deterministic for a given uniform stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DistributionError(ValueError):
    pass


@dataclass(frozen=True)
class DistributionSpec:
    kind: str      # "exp" | "uniform" | "weibull" | "const"
    params: tuple

    def __post_init__(self):
        p = tuple(float(x) for x in self.params)
        object.__setattr__(self, "params", p)
        if self.kind == "exp":
            if len(p) != 1 or p[0] <= 0:
                raise DistributionError(f"exp needs one positive rate, got {p}")
        elif self.kind == "uniform":
            if len(p) != 2 or p[0] < 0 or p[1] <= p[0]:
                raise DistributionError(f"uniform needs 0 <= a < b, got {p}")
        elif self.kind == "weibull":
            if len(p) != 2 or p[0] <= 0 or p[1] <= 0:
                raise DistributionError(f"weibull needs positive shape and scale, got {p}")
        elif self.kind == "const":
            if len(p) != 1 or p[0] < 0:
                raise DistributionError(f"const needs one nonnegative value, got {p}")
        else:
            raise DistributionError(f"unknown distribution kind {self.kind!r}")

    # -- evaluators (accept scalars or numpy arrays) --

    def survival(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "exp":
            out = np.exp(-self.params[0] * np.maximum(t, 0.0))
        elif self.kind == "uniform":
            a, b = self.params
            out = np.clip((b - t) / (b - a), 0.0, 1.0)
        elif self.kind == "weibull":
            k, s = self.params
            out = np.exp(-np.power(np.maximum(t, 0.0) / s, k))
        else:
            out = (t < self.params[0]).astype(float)
        out = np.where(t < 0, 1.0, out)
        return float(out) if out.ndim == 0 else out

    def cdf(self, t):
        r = self.survival(t)
        return 1.0 - r

    def density(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "exp":
            lam = self.params[0]
            out = np.where(t >= 0, lam * np.exp(-lam * np.maximum(t, 0.0)), 0.0)
        elif self.kind == "uniform":
            a, b = self.params
            out = np.where((t >= a) & (t <= b), 1.0 / (b - a), 0.0)
        elif self.kind == "weibull":
            k, s = self.params
            tt = np.maximum(t, 1e-300)
            out = np.where(
                t >= 0, (k / s) * np.power(tt / s, k - 1) * np.exp(-np.power(tt / s, k)), 0.0
            )
        else:
            raise DistributionError("point mass has no density")
        return float(out) if out.ndim == 0 else out

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind == "exp":
            out = -np.log1p(-p) / self.params[0]
        elif self.kind == "uniform":
            a, b = self.params
            out = a + (b - a) * p
        elif self.kind == "weibull":
            k, s = self.params
            out = s * np.power(-np.log1p(-p), 1.0 / k)
        else:
            out = np.full_like(p, self.params[0])
        return float(out) if out.ndim == 0 else out

    def mean(self):
        if self.kind == "exp":
            return 1.0 / self.params[0]
        if self.kind == "uniform":
            a, b = self.params
            return 0.5 * (a + b)
        if self.kind == "weibull":
            k, s = self.params
            return s * math.gamma(1.0 + 1.0 / k)
        return self.params[0]

    def jump_points(self):
        """Discontinuities of the survival function (quadrature breakpoints)."""
        return (self.params[0],) if self.kind == "const" else ()

    # support of the distribution, [lo, hi] with hi possibly inf
    def support(self):
        if self.kind == "exp":
            return (0.0, math.inf)
        if self.kind == "uniform":
            return self.params
        if self.kind == "weibull":
            return (0.0, math.inf)
        return (self.params[0], self.params[0])

    def __str__(self):
        args = ",".join(format(x, "g") for x in self.params)
        return f"{self.kind}({args})"


def exponential(rate):
    return DistributionSpec("exp", (rate,))


def uniform(a, b):
    return DistributionSpec("uniform", (a, b))


def weibull(shape, scale):
    return DistributionSpec("weibull", (shape, scale))


def deterministic(c):
    return DistributionSpec("const", (c,))
