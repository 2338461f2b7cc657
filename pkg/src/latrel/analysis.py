"""Model-level dispatch: exact reliability and MTTF for any dependence regime."""

from __future__ import annotations

from . import bounds as bounds_mod
from . import dependence as dep_mod
from .dsl import (
    BayesFactorSpec,
    BoundsSpec,
    Independent,
    ParseError,
    PrePhaseSpec,
    SystemModel,
    parse_expr,
)
from .engine import (
    ReliabilityCurve,
    mttf,
    mttf_exponential_closed,
    reliability_independent,
)
from .lattice import mobius
from .quadrature import DEFAULT_CAP, DEFAULT_TOL
from .ratefn import parse_rate_expr


def factor_model(spec: BayesFactorSpec) -> dep_mod.FactorModel:
    return dep_mod.FactorModel(spec.factor, rates=[parse_rate_expr(s) for s in spec.rate_exprs])


def prephase_model(spec: PrePhaseSpec) -> dep_mod.PrePhaseModel:
    return dep_mod.PrePhaseModel(spec.prephase, rates=[parse_rate_expr(s) for s in spec.rate_exprs])


def augmented_system(model: SystemModel) -> bounds_mod.AugmentedSystem:
    dep = model.dependence
    q_overrides = {
        i: parse_expr(src, allow_bound_vars=True, n=model.n)
        for i, src in dep.q_exprs.items()
    }
    return bounds_mod.apply_bounds(model.structure_expr(), model.n, dep.bounds, q_overrides)


def reliability_at(model: SystemModel, t, tol=DEFAULT_TOL):
    """Exact R_S(t) for the model's dependence regime."""
    dep = model.dependence
    if isinstance(dep, Independent):
        return reliability_independent(mobius(model.set_function()), model.components, t)
    if isinstance(dep, BayesFactorSpec):
        return dep_mod.bayes_reliability(mobius(model.set_function()), factor_model(dep), t, tol)
    if isinstance(dep, PrePhaseSpec):
        return dep_mod.prephase_reliability(mobius(model.set_function()), prephase_model(dep), t, tol)
    if isinstance(dep, BoundsSpec):
        aug = augmented_system(model)
        return bounds_mod.bounded_reliability(
            aug, model.components, bounds_mod.independent_bound_oracle(aug), t
        )
    raise ParseError(f"unsupported dependence {dep!r}")


def reliability_curve(model: SystemModel, grid, tol=DEFAULT_TOL):
    values = [reliability_at(model, t, tol) for t in grid]
    return ReliabilityCurve(tuple(grid), tuple(values), method="exact", tol=tol)


def system_mttf(model: SystemModel, tol=DEFAULT_TOL, cap=DEFAULT_CAP):
    """Exact MTTF; exponential regimes use closed forms, the rest quadrature."""
    dep = model.dependence
    if isinstance(dep, Independent):
        if all(d.kind == "exp" for d in model.components):
            return mttf_exponential_closed(
                mobius(model.set_function()), [d.params[0] for d in model.components]
            )
        points = [p for d in model.components for p in d.jump_points()]
        return mttf(lambda t: reliability_at(model, t, tol), tol=tol, cap=cap, points=points)
    if isinstance(dep, BayesFactorSpec):
        return dep_mod.bayes_mttf(mobius(model.set_function()), factor_model(dep), tol)
    if isinstance(dep, PrePhaseSpec):
        return dep_mod.prephase_mttf(mobius(model.set_function()), prephase_model(dep), tol)
    if isinstance(dep, BoundsSpec):
        aug = augmented_system(model)
        if all(d.kind == "exp" for d in model.components) and all(
            b.lifetime.kind == "exp" for b in dep.bounds
        ):
            return bounds_mod.bounded_mttf_exponential_closed(
                aug,
                [d.params[0] for d in model.components],
                [b.lifetime.params[0] for b in aug.bounds],
            )
        return bounds_mod.bounded_mttf(
            aug, model.components, bounds_mod.independent_bound_oracle(aug), tol=tol, cap=cap
        )
    raise ParseError(f"unsupported dependence {dep!r}")
