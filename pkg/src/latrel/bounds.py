"""Collective lifetime bounds via an augmented system.

Each bound j is an extra unit with its own lifetime; a component covered by
lower bounds L and upper bounds U serves for min(max(own, L...), U...).
Substituting these into the structure yields one larger min/max expression
over n + m units whose reliability is computed with the ordinary machinery.
Bound units occupy variable indices n+1 .. n+m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import DistributionSpec
from .engine import (
    IndependentOracle,
    JointSurvivalOracle,
    MobiusVector,
    _checked,
    mttf_exponential_closed,
    multilinear_primal,
)
from .lattice import (
    MAX_COMPONENTS,
    Const,
    LatticeExpr,
    SetFunction,
    StructureError,
    Var,
    eval_expr,
    expr_to_setfunction,
    expr_vars,
    lmax,
    lmin,
    mobius,
    substitute,
)
from .quadrature import DEFAULT_CAP, DEFAULT_TOL, MttfResult, integrate_survival


@dataclass(frozen=True)
class BoundSpec:
    """One collective bound: its index, direction, covered components, lifetime."""

    index: int            # 1-based bound index j
    kind: str             # "upper" | "lower"
    scope: frozenset      # nonempty subset of [n]
    lifetime: DistributionSpec

    def __post_init__(self):
        object.__setattr__(self, "scope", frozenset(self.scope))
        if self.kind not in ("upper", "lower"):
            raise StructureError(f"bound kind must be upper or lower, got {self.kind!r}")
        if not self.scope:
            raise StructureError(f"bound {self.index} has empty scope")
        if self.index < 1:
            raise StructureError("bound index must be positive")

    @property
    def constant(self):
        return self.lifetime.kind == "const"


@dataclass(frozen=True)
class AugmentedSystem:
    """(n+m)-unit system: original components plus bound units."""

    n: int
    m: int
    expr: LatticeExpr
    v: SetFunction
    bounds: tuple

    @property
    def total(self):
        return self.n + self.m


def apply_bounds(structure, n, bounds, q_overrides=None):
    """Compose per-component bound interactions into the structure.

    Default service expression per component i: lower bounds act as backups
    inside the max, upper bounds as fuses outside the min.  ``q_overrides``
    maps component index to an explicit expression in the augmented index
    space (bound j as variable n+j) replacing the default.
    """
    bounds = tuple(bounds)
    m = len(bounds)
    if n + m > MAX_COMPONENTS:
        raise StructureError(f"augmented unit count {n + m} exceeds cap {MAX_COMPONENTS}")
    seen = set()
    for b in bounds:
        if b.index in seen:
            raise StructureError(f"duplicate bound index {b.index}")
        seen.add(b.index)
        if not b.scope <= set(range(1, n + 1)):
            raise StructureError(f"bound {b.index} scope {sorted(b.scope)} outside [1, {n}]")
    if seen and seen != set(range(1, m + 1)):
        raise StructureError("bound indices must be 1..m")
    used = expr_vars(structure)
    if used and max(used) > n:
        raise StructureError(f"structure references x{max(used)} but n={n}")

    q_overrides = dict(q_overrides or {})
    bindings = {}
    for i in range(1, n + 1):
        if i in q_overrides:
            bindings[i] = q_overrides[i]
            continue
        service = Var(i)
        lowers = [Var(n + b.index) for b in bounds if b.kind == "lower" and i in b.scope]
        uppers = [Var(n + b.index) for b in bounds if b.kind == "upper" and i in b.scope]
        if lowers:
            service = lmax(service, *lowers)
        if uppers:
            service = lmin(service, *uppers)
        bindings[i] = service
    aug_expr = substitute(structure, bindings)
    v = expr_to_setfunction(aug_expr, n + m)
    return AugmentedSystem(n=n, m=m, expr=aug_expr, v=v, bounds=bounds)


def project_to_intrinsic(aug: AugmentedSystem):
    """Pin upper bounds to +inf and lower bounds to 0; recovers the original v."""
    upper_mask = 0
    for b in aug.bounds:
        if b.kind == "upper":
            upper_mask |= 1 << (aug.n + b.index - 1)
    idx = np.arange(1 << aug.n)
    return SetFunction(aug.n, aug.v.values[idx | upper_mask])


def bounded_reliability(aug: AugmentedSystem, comp_dists, bound_oracle, t):
    """Double signed sum over component and bound subsets of the augmented system."""
    if len(comp_dists) != aug.n:
        raise ValueError(f"need {aug.n} component distributions, got {len(comp_dists)}")
    ma = mobius(aug.v)
    comp_prods = np.ones(1)
    for d in comp_dists:
        comp_prods = np.concatenate([comp_prods, comp_prods * d.survival(t)])
    bound_surv = {}
    total = 0.0
    comp_full = (1 << aug.n) - 1
    for mask in np.nonzero(ma.coeffs)[0]:
        mask = int(mask)
        a_part = mask & comp_full
        b_part = mask >> aug.n
        if b_part not in bound_surv:
            bound_surv[b_part] = _checked(bound_oracle.survival_all(b_part, t), "survival_all")
        total += int(ma.coeffs[mask]) * comp_prods[a_part] * bound_surv[b_part]
    return min(max(total, 0.0), 1.0)


def independent_bound_oracle(aug: AugmentedSystem) -> JointSurvivalOracle:
    """Product oracle over the bound units, in bound-index order."""
    return IndependentOracle([b.lifetime for b in sorted(aug.bounds, key=lambda b: b.index)])


def bounded_mttf(aug: AugmentedSystem, comp_dists, bound_oracle, tol=DEFAULT_TOL, cap=DEFAULT_CAP):
    """MTTF by time-integrating the double signed sum."""
    points = []
    for d in comp_dists:
        points.extend(d.jump_points())
    for b in aug.bounds:
        points.extend(b.lifetime.jump_points())
    return integrate_survival(
        lambda t: bounded_reliability(aug, comp_dists, bound_oracle, t),
        tol=tol,
        cap=cap,
        points=points,
    )


def bounded_mttf_exponential_closed(aug: AugmentedSystem, comp_rates, bound_rates):
    """Closed form when every unit (component and bound) is exponential."""
    rates = list(comp_rates) + list(bound_rates)
    if len(rates) != aug.total:
        raise ValueError(f"need {aug.total} rates, got {len(rates)}")
    return mttf_exponential_closed(mobius(aug.v), rates)


# ---------------------------------------------------------------------------
# Constant bounds as weighted min/max expressions


def constant_bounds_weighted(structure, n, bounds, q_overrides=None):
    """Fold constant-lifetime bounds into the structure as constant nodes.

    The result is a weighted expression over the n intrinsic lifetimes only;
    evaluating it equals evaluating the augmented expression with bound
    variables pinned to their constants.
    """
    bounds = tuple(bounds)
    for b in bounds:
        if not b.constant:
            raise StructureError(f"bound {b.index} is not constant")
    aug = apply_bounds(structure, n, bounds, q_overrides)
    pins = {n + b.index: Const(b.lifetime.params[0]) for b in bounds}
    return substitute(aug.expr, pins)


def constant_bound_reliability(aug: AugmentedSystem, comp_dists, t):
    """Reliability with all-constant bounds, via projection of the augmented table.

    At time t a constant bound is either surely alive or surely dead, so the
    augmented set function collapses to an n-variable one; this is an
    independent route against the step-survival path through
    bounded_reliability.
    """
    pin_mask = 0
    for b in aug.bounds:
        if not b.constant:
            raise StructureError(f"bound {b.index} is not constant")
        if b.lifetime.params[0] > t:
            pin_mask |= 1 << (aug.n + b.index - 1)
    idx = np.arange(1 << aug.n)
    projected = aug.v.values[idx | pin_mask]
    p = [d.survival(t) for d in comp_dists]
    v_t = SetFunction(aug.n, projected) if projected.any() else None
    if v_t is None:
        return 0.0
    return multilinear_primal(v_t, p)


def eval_weighted(expr, t_values):
    """Evaluate a weighted min/max expression at intrinsic lifetimes."""
    return eval_expr(expr, t_values)
