"""Numerical integration helpers for survival functions.

Mean time-to-failure integrals run over [0, inf) with a nonincreasing
integrand in [0, 1]; the tail is handled by doubling the upper limit until
the monotone bound on the remaining mass drops below tolerance, with a hard
cap that turns into a divergence flag instead of an exception.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy import integrate

DEFAULT_TOL = 1e-9
DEFAULT_CAP = 1e6


@dataclass(frozen=True)
class MttfResult:
    value: float
    abs_error: float
    diverged: bool

    def __iter__(self):
        return iter((self.value, self.abs_error, self.diverged))


def integrate_interval(f, lo, hi, tol=DEFAULT_TOL):
    """scipy adaptive quadrature on a finite or infinite interval.

    Returns (value, abs_error, converged); warnings are folded into the
    converged flag rather than surfaced.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = integrate.quad(f, lo, hi, epsabs=tol, epsrel=tol * 10, full_output=1, limit=200)
    value, err = out[0], out[1]
    converged = len(out) < 4 and math.isfinite(value)
    return value, err, converged


def integrate_survival(f, tol=DEFAULT_TOL, cap=DEFAULT_CAP, points=()):
    """Integrate a nonincreasing [0,1]-valued function over [0, inf).

    ``points`` lists known discontinuities (deterministic lifetimes); they
    become mandatory panel boundaries so steps are never straddled.
    """
    breaks = sorted({float(p) for p in points if 0.0 < p < cap})
    total = 0.0
    total_err = 0.0
    lo = 0.0
    for p in breaks:
        val, err, ok = integrate_interval(f, lo, p, tol)
        total += val
        total_err += err
        if not ok:
            return MttfResult(total, total_err, True)
        lo = p

    # geometric tail: double the limit until the monotone bound is negligible
    hi = max(1.0, lo * 2 or 1.0)
    while True:
        val, err, ok = integrate_interval(f, lo, hi, tol)
        total += val
        total_err += err
        if not ok or total > cap:
            return MttfResult(total, total_err, True)
        tail_bound = f(hi) * hi  # f nonincreasing; crude remaining-mass estimate
        if tail_bound < tol:
            return MttfResult(total, total_err + tail_bound, False)
        if hi >= cap:
            return MttfResult(total, total_err, True)
        lo, hi = hi, min(hi * 2, cap)
