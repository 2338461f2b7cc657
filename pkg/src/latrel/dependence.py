"""Dependence through shared random factors and through a common pre-phase.

Factor dependence: component lifetimes are conditionally independent given a
scalar factor u with known density; reliability is a signed sum of
one-dimensional integrals of conditional survival products.  The pre-phase
model is the special case where every component first survives a common
random period and then decays independently at rates that may depend on the
period's length; uniform pre-phase with constant rates has a three-branch
closed form.
"""

from __future__ import annotations

import math

import numpy as np

from .distributions import DistributionSpec
from .engine import MobiusVector
from .quadrature import DEFAULT_CAP, DEFAULT_TOL, MttfResult, integrate_interval

_POSITIVITY_SAMPLES = 33


def _interior_points(lo, hi):
    """Open-interval sample grid; endpoints are allowed to vanish."""
    if hi == lo:
        return np.array([lo])
    edge = (hi - lo) / (2 * _POSITIVITY_SAMPLES)
    return np.linspace(lo + edge, hi - edge, _POSITIVITY_SAMPLES)


class FactorModelError(ValueError):
    pass


class QuadratureError(RuntimeError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class FactorModel:
    """Scalar random factor plus per-component conditional survival.

    The factor law is either a DistributionSpec or a raw (pdf, lo, hi)
    triple (normalization is then checked numerically).  Conditionals are
    exponential with rate functions of u by default; fully general
    conditional survivals S_i(t, u) may be passed instead.
    """

    def __init__(self, factor, rates=None, survivals=None):
        if isinstance(factor, DistributionSpec):
            self.factor = factor
            self.lo, self.hi = factor.support()
            self.pdf = None if factor.kind == "const" else factor.density
        else:
            pdf, lo, hi = factor
            self.factor = None
            self.lo, self.hi = float(lo), float(hi)
            self.pdf = pdf
            mass, _, ok = integrate_interval(pdf, self.lo, self.hi, tol=1e-9)
            if not ok or abs(mass - 1.0) > 1e-6:
                raise FactorModelError(f"factor density integrates to {mass}, not 1")
        if (rates is None) == (survivals is None):
            raise FactorModelError("give exactly one of rates or survivals")
        self.rates = tuple(rates) if rates is not None else None
        self.survivals = tuple(survivals) if survivals is not None else None
        if self.rates is not None:
            self._check_rates_positive()

    @property
    def n(self):
        return len(self.rates or self.survivals)

    @property
    def point_mass(self):
        return self.factor is not None and self.factor.kind == "const"

    def _check_rates_positive(self):
        hi = self.hi if math.isfinite(self.hi) else self.lo + 50.0
        us = _interior_points(self.lo, hi)
        # sampled check only; positivity on the whole domain is not proven
        for i, rate in enumerate(self.rates):
            vals = np.asarray(rate(us), dtype=float)
            if not (vals > 0).all():
                u_bad = us[np.argmin(vals)]
                raise FactorModelError(f"rate function {i + 1} nonpositive at u={u_bad:g}")

    def conditional_survival(self, i, t, u):
        if self.rates is not None:
            return np.exp(-self.rates[i](u) * t)
        return self.survivals[i](t, u)

    def rate_sum(self, mask, u):
        return sum(self.rates[i](u) for i in range(self.n) if mask >> i & 1)


def _factor_integral(fm, inner, tol):
    """Integral of inner(u) against the factor density over its domain."""
    if fm.point_mass:
        return float(inner(fm.factor.params[0])), 0.0
    val, err, ok = integrate_interval(lambda u: fm.pdf(u) * inner(u), fm.lo, fm.hi, tol)
    if not ok:
        if not math.isfinite(val) or abs(val) > DEFAULT_CAP:
            return math.inf, math.inf
        raise QuadratureError(f"factor integral did not converge (error {err:g})", achieved=err)
    return val, err


def bayes_reliability(m: MobiusVector, fm: FactorModel, t, tol=DEFAULT_TOL):
    """R_S(t) under factor dependence: signed sum of integrated survival products."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    if fm.n != m.n:
        raise ValueError(f"factor model covers {fm.n} components, structure has {m.n}")
    total = 0.0
    for mask in np.nonzero(m.coeffs)[0]:
        mask = int(mask)

        def inner(u, mask=mask):
            out = 1.0
            for i in range(m.n):
                if mask >> i & 1:
                    out = out * fm.conditional_survival(i, t, u)
            return out

        val, _ = _factor_integral(fm, inner, tol)
        total += int(m.coeffs[mask]) * val
    return min(max(total, 0.0), 1.0)


def bayes_mttf(m: MobiusVector, fm: FactorModel, tol=DEFAULT_TOL):
    """System MTTF under factor dependence.

    Exponential conditionals use the closed inner integral 1 / rate-sum;
    general conditionals integrate the survival product over time first
    (inner tolerance 10x tighter).
    """
    if fm.n != m.n:
        raise ValueError(f"factor model covers {fm.n} components, structure has {m.n}")
    total = 0.0
    err_total = 0.0
    for mask in np.nonzero(m.coeffs)[0]:
        mask = int(mask)
        if mask == 0:
            return MttfResult(math.inf, math.inf, True)
        if fm.rates is not None:
            def inner(u, mask=mask):
                return 1.0 / fm.rate_sum(mask, u)
        else:
            def inner(u, mask=mask):
                def prod(t):
                    out = 1.0
                    for i in range(m.n):
                        if mask >> i & 1:
                            out = out * fm.survivals[i](t, u)
                    return out
                val, _, ok = integrate_interval(prod, 0.0, math.inf, tol / 10)
                if not ok:
                    raise QuadratureError("inner time integral did not converge")
                return val

        try:
            val, err = _factor_integral(fm, inner, tol)
        except QuadratureError:
            return MttfResult(math.inf, math.inf, True)
        if not math.isfinite(val):
            return MttfResult(math.inf, math.inf, True)
        total += int(m.coeffs[mask]) * val
        err_total += err
    if total > DEFAULT_CAP:
        return MttfResult(total, err_total, True)
    return MttfResult(total, err_total, False)


# ---------------------------------------------------------------------------
# Pre-phase models


class PrePhaseModel:
    """Common random pre-phase followed by independent decay.

    ``prephase`` is the distribution of the shared initial period; decay is
    exponential with per-component rate functions of the pre-phase length,
    or fully general conditional cdfs F_i(y, u).
    """

    def __init__(self, prephase: DistributionSpec, rates=None, decay_cdfs=None):
        self.prephase = prephase
        if (rates is None) == (decay_cdfs is None):
            raise FactorModelError("give exactly one of rates or decay_cdfs")
        self.rates = tuple(rates) if rates is not None else None
        self.decay_cdfs = tuple(decay_cdfs) if decay_cdfs is not None else None
        if self.rates is not None:
            lo, hi = prephase.support()
            fm_hi = hi if math.isfinite(hi) else lo + 50.0
            us = _interior_points(lo, fm_hi)
            for i, rate in enumerate(self.rates):
                vals = np.asarray(rate(us), dtype=float)
                if not (vals > 0).all():
                    raise FactorModelError(f"decay rate {i + 1} nonpositive on pre-phase support")

    @property
    def n(self):
        return len(self.rates or self.decay_cdfs)

    def decay_survival_product(self, mask, y, u):
        """Pr(all decay phases in the subset exceed y | pre-phase u)."""
        if self.rates is not None:
            lam = sum(self.rates[i](u) for i in range(self.n) if mask >> i & 1)
            return math.exp(-lam * y)
        out = 1.0
        for i in range(self.n):
            if mask >> i & 1:
                out *= 1.0 - self.decay_cdfs[i](y, u)
        return out


def _conditional_system_survival(m, pm, y, u):
    total = 0.0
    for mask in np.nonzero(m.coeffs)[0]:
        total += int(m.coeffs[mask]) * pm.decay_survival_product(int(mask), y, u)
    return total


def prephase_reliability(m: MobiusVector, pm: PrePhaseModel, t, tol=DEFAULT_TOL):
    """R_S(t) = 1 - G(t) + integral over u <= t of conditional system survival."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    lo, hi = pm.prephase.support()
    if t <= lo:
        return 1.0  # every component survives the whole pre-phase
    if pm.prephase.kind == "const":
        u0 = pm.prephase.params[0]
        return _conditional_system_survival(m, pm, t - u0, u0)
    upper = min(t, hi)
    val, err, ok = integrate_interval(
        lambda u: pm.prephase.density(u) * _conditional_system_survival(m, pm, t - u, u),
        lo,
        upper,
        tol,
    )
    if not ok:
        raise QuadratureError(f"pre-phase integral did not converge (error {err:g})", achieved=err)
    out = 1.0 - pm.prephase.cdf(t) + val
    return min(max(out, 0.0), 1.0)


def prephase_mttf(m: MobiusVector, pm: PrePhaseModel, tol=DEFAULT_TOL):
    """MTTF = mean pre-phase + averaged conditional decay MTTF."""
    def cond_mttf(u):
        if pm.rates is not None:
            total = 0.0
            for mask in np.nonzero(m.coeffs)[0]:
                mask = int(mask)
                lam = sum(pm.rates[i](u) for i in range(pm.n) if mask >> i & 1)
                if lam <= 0:
                    return math.inf
                total += int(m.coeffs[mask]) / lam
            return total
        val, _, ok = integrate_interval(
            lambda y: _conditional_system_survival(m, pm, y, u), 0.0, math.inf, tol / 10
        )
        if not ok:
            raise QuadratureError("decay MTTF integral did not converge")
        return val

    if pm.prephase.kind == "const":
        u0 = pm.prephase.params[0]
        inner = cond_mttf(u0)
        if not math.isfinite(inner):
            return MttfResult(math.inf, math.inf, True)
        return MttfResult(u0 + inner, 0.0, False)
    lo, hi = pm.prephase.support()
    val, err, ok = integrate_interval(lambda u: pm.prephase.density(u) * cond_mttf(u), lo, hi, tol)
    if not ok or not math.isfinite(val) or val > DEFAULT_CAP:
        return MttfResult(math.inf if not math.isfinite(val) else val, math.inf, True)
    return MttfResult(pm.prephase.mean() + val, err, False)


def prephase_uniform_exponential_closed(m: MobiusVector, a, b, rates, t):
    """Piecewise closed form: uniform pre-phase on [a, b], constant decay rates.

    Three branches: flat 1 before a, mixed within [a, b], pure decay after b.
    """
    if not 0 <= a < b:
        raise ValueError(f"need 0 <= a < b, got a={a}, b={b}")
    rates = [float(r) for r in rates]
    if len(rates) != m.n or any(r <= 0 for r in rates):
        raise ValueError("need one positive rate per component")
    if t < a:
        return 1.0
    masks = [int(x) for x in np.nonzero(m.coeffs)[0] if int(x) != 0]
    lam = {mask: sum(rates[i] for i in range(m.n) if mask >> i & 1) for mask in masks}
    width = b - a
    if t <= b:
        total = (b - t) / width
        for mask in masks:
            la = lam[mask]
            total += int(m.coeffs[mask]) * (1.0 - math.exp(la * (a - t))) / (la * width)
        return min(max(total, 0.0), 1.0)
    total = 0.0
    for mask in masks:
        la = lam[mask]
        total += (
            int(m.coeffs[mask])
            * math.exp(-la * t)
            * (math.exp(la * b) - math.exp(la * a))
            / (la * width)
        )
    return min(max(total, 0.0), 1.0)
