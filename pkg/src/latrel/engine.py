"""Exact system reliability and MTTF computation.

Covers the independent-lifetimes specialization (signed-coefficient sum over
subset survival products), the general dependent formulas driven by a joint
survival/failure oracle, the state-distribution route, the symmetric
(cardinality-only) shortcut, and closed-form MTTF for exponential marginals.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .lattice import (
    MobiusVector,
    SetFunction,
    dual,
    mobius,
    mobius_table,
)
from .quadrature import DEFAULT_CAP, DEFAULT_TOL, MttfResult, integrate_survival

CURVE_MONOTONE_TOL = 1e-9


class OracleError(ValueError):
    """A joint-distribution oracle broke its contract."""


class JointSurvivalOracle:
    """Contract for generally dependent lifetimes.

    Only two families of joint-law values are ever needed: the probability
    that every component of a subset survives past t, and the probability
    that every component of a subset has failed by t.  Implementations must
    be safe to call concurrently.
    """

    def survival_all(self, mask, t):
        """Pr(T_i > t for all i in the subset); 1.0 for the empty subset."""
        raise NotImplementedError

    def failure_all(self, mask, t):
        """Pr(T_i <= t for all i in the subset); 1.0 for the empty subset."""
        raise NotImplementedError


class IndependentOracle(JointSurvivalOracle):
    """Product-form oracle for independent lifetimes."""

    def __init__(self, dists):
        self.dists = tuple(dists)

    def survival_all(self, mask, t):
        out = 1.0
        for i, d in enumerate(self.dists):
            if mask >> i & 1:
                out *= d.survival(t)
        return out

    def failure_all(self, mask, t):
        out = 1.0
        for i, d in enumerate(self.dists):
            if mask >> i & 1:
                out *= 1.0 - d.survival(t)
        return out


def _checked(p, what):
    if p < -1e-12 or p > 1 + 1e-12:
        raise OracleError(f"{what} returned {p}, outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def _survival_products(survivals):
    """prod[mask] = product of survivals[i] over bits of mask (power-set doubling)."""
    prods = np.ones(1)
    for r in survivals:
        prods = np.concatenate([prods, prods * r])
    return prods


def reliability_polynomial_eval(m: MobiusVector, p):
    """Multilinear extension at p in [0,1]^n, via the signed-coefficient form."""
    p = np.asarray(p, dtype=float)
    if p.shape != (m.n,):
        raise ValueError(f"need {m.n} probabilities, got shape {p.shape}")
    if (p < 0).any() or (p > 1).any():
        raise ValueError("probabilities must lie in [0, 1]")
    return float(np.dot(m.coeffs, _survival_products(p)))


def multilinear_primal(v: SetFunction, p):
    """Multilinear extension by the primal sum; independent cross-check path."""
    p = np.asarray(p, dtype=float)
    full = (1 << v.n) - 1
    idx = np.arange(full + 1)
    p_in = _survival_products(p)
    p_out = _survival_products(1.0 - p)[full ^ idx]
    return float(np.dot(v.values, p_in * p_out))


def reliability_independent(m: MobiusVector, comps, t):
    """R_S(t) for independent lifetimes: multilinear extension at the marginals."""
    if len(comps) != m.n:
        raise ValueError(f"need {m.n} component distributions, got {len(comps)}")
    if t < 0:
        raise ValueError("time must be nonnegative")
    r = [d.survival(t) for d in comps]
    return float(np.dot(m.coeffs, _survival_products(r)))


def reliability_general(v: SetFunction, oracle: JointSurvivalOracle, t, form="primal"):
    """R_S(t) for generally dependent lifetimes, primal or dual signed sum."""
    if form == "primal":
        m = mobius(v)
        total = 0.0
        for mask in np.nonzero(m.coeffs)[0]:
            total += m.coeffs[mask] * _checked(
                oracle.survival_all(int(mask), t), "survival_all"
            )
        return total
    if form == "dual":
        ms = mobius(dual(v))
        total = 0.0
        for mask in np.nonzero(ms.coeffs)[0]:
            total += ms.coeffs[mask] * _checked(
                oracle.failure_all(int(mask), t), "failure_all"
            )
        return 1.0 - total
    raise ValueError(f"unknown form {form!r}")


def state_distribution(oracle: JointSurvivalOracle, n, t, mask):
    """Pr(exactly the components of the subset are up at time t)."""
    total = 0.0
    mask = int(mask)
    size = mask.bit_count()
    sub = mask
    full = (1 << n) - 1
    while True:
        sign = -1.0 if (size - sub.bit_count()) % 2 else 1.0
        total += sign * _checked(oracle.failure_all(full ^ sub, t), "failure_all")
        if sub == 0:
            break
        sub = (sub - 1) & mask
    if total < -1e-9:
        raise OracleError(f"state probability {total} below zero: inconsistent oracle")
    return total


def state_distribution_table(oracle: JointSurvivalOracle, n, t):
    """All 2^n state probabilities at once, via the signed subset transform."""
    full = (1 << n) - 1
    f = np.array([_checked(oracle.failure_all(full ^ b, t), "failure_all") for b in range(full + 1)])
    table = mobius_table(f)
    if table.min() < -1e-9:
        raise OracleError("negative state probability: inconsistent oracle")
    return table


def reliability_from_states(v: SetFunction, oracle, t, form="primal"):
    """R_S(t) through the state distribution (primal) or its dual variant."""
    states = state_distribution_table(oracle, v.n, t)
    if form == "primal":
        return float(np.dot(v.values, states))
    if form == "dual":
        full = (1 << v.n) - 1
        idx = np.arange(full + 1)
        vs = dual(v).values
        return 1.0 - float(np.dot(vs, states[full ^ idx]))
    raise ValueError(f"unknown form {form!r}")


def reliability_symmetric(mbar, survival_by_size, failure_by_size=None, form="primal"):
    """R_S(t) when subset reliability depends only on subset size.

    ``survival_by_size[k]`` is the survival probability of any k-subset
    (entry 0 must be 1); the dual variant takes the analogous joint-failure
    entries together with the cardinality sums of the dual's coefficients.
    """
    mbar = np.asarray(mbar, dtype=float)
    if form == "primal":
        r = np.asarray(survival_by_size, dtype=float)
        return float(np.dot(mbar, r))
    if form == "dual":
        f = np.asarray(failure_by_size, dtype=float)
        return 1.0 - float(np.dot(mbar, f))
    raise ValueError(f"unknown form {form!r}")


def mttf(survival, tol=DEFAULT_TOL, cap=DEFAULT_CAP, points=()):
    """MTTF as the integral of a system survival function over [0, inf)."""
    return integrate_survival(survival, tol=tol, cap=cap, points=points)


def mttf_exponential_closed(m: MobiusVector, rates):
    """MTTF for independent exponential marginals: sum of coeff / rate-sum.

    Exact in rationals when every rate is an int or Fraction; floating
    otherwise.  A contributing subset with zero total rate (in particular a
    nonzero empty-set coefficient) flags divergence.
    """
    if len(rates) != m.n:
        raise ValueError(f"need {m.n} rates, got {len(rates)}")
    exact = all(isinstance(r, (int, Fraction)) for r in rates)
    rates = [Fraction(r) if exact else float(r) for r in rates]
    total = Fraction(0) if exact else 0.0
    for mask in np.nonzero(m.coeffs)[0]:
        mask = int(mask)
        lam = sum(rates[i] for i in range(m.n) if mask >> i & 1)
        if lam <= 0:
            return MttfResult(math.inf, math.inf, True)
        total += int(m.coeffs[mask]) * (Fraction(1) if exact else 1.0) / lam
    value = total if exact else float(total)
    return MttfResult(value, 0.0, False)


@dataclass(frozen=True)
class ReliabilityCurve:
    """Sampled t -> R_S(t) with evaluation metadata."""

    grid: tuple
    values: tuple
    method: str = "exact"
    tol: float = DEFAULT_TOL
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = tuple(float(t) for t in self.grid)
        vals = tuple(float(x) for x in self.values)
        if len(grid) != len(vals):
            raise ValueError("grid and values length mismatch")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be strictly increasing")
        for x in vals:
            if not -CURVE_MONOTONE_TOL <= x <= 1 + CURVE_MONOTONE_TOL:
                raise ValueError(f"reliability value {x} outside [0, 1]")
        for a, b in zip(vals, vals[1:]):
            if b > a + CURVE_MONOTONE_TOL:
                raise ValueError(f"curve not nonincreasing: {a} -> {b}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)

    def write_csv(self, fh):
        writer = csv.writer(fh)
        writer.writerow(["t", "R_S"])
        for t, x in zip(self.grid, self.values):
            writer.writerow([format(t, ".12g"), format(x, ".12g")])
