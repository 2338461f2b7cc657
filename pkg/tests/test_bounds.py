import math
import random
from fractions import Fraction

import numpy as np
import pytest

from latrel.bounds import (
    AugmentedSystem,
    BoundSpec,
    apply_bounds,
    bounded_mttf,
    bounded_mttf_exponential_closed,
    bounded_reliability,
    constant_bound_reliability,
    constant_bounds_weighted,
    eval_weighted,
    independent_bound_oracle,
    project_to_intrinsic,
)
from latrel.distributions import deterministic, exponential, uniform
from latrel.lattice import (
    StructureError,
    Var,
    eval_expr,
    lmax,
    lmin,
    minimal_paths_cuts,
    mobius,
    setfunction_to_expr,
)

from conftest import random_structures

SERIES2 = lmin(Var(1), Var(2))
PARALLEL2 = lmax(Var(1), Var(2))


def upper(idx, scope, life):
    return BoundSpec(index=idx, kind="upper", scope=scope, lifetime=life)


def lower(idx, scope, life):
    return BoundSpec(index=idx, kind="lower", scope=scope, lifetime=life)


def test_upper_bound_over_series_is_series3():
    aug = apply_bounds(SERIES2, 2, [upper(1, {1, 2}, exponential(1.0))])
    assert aug.total == 3
    dists = [exponential(1.0), exponential(1.0)]
    oracle = independent_bound_oracle(aug)
    for t in (0.0, 0.4, 1.3, 2.7):
        assert bounded_reliability(aug, dists, oracle, t) == pytest.approx(
            math.exp(-3 * t), abs=1e-12
        )


def test_upper_bound_series3_mttf():
    aug = apply_bounds(SERIES2, 2, [upper(1, {1, 2}, exponential(1.0))])
    closed = bounded_mttf_exponential_closed(aug, [1, 1], [1])
    assert closed.value == Fraction(1, 3)
    dists = [exponential(1.0), exponential(1.0)]
    quad = bounded_mttf(aug, dists, independent_bound_oracle(aug))
    assert not quad.diverged
    assert quad.value == pytest.approx(1 / 3, abs=1e-8)


def test_lower_bound_acts_as_shared_backup():
    # min(max(x1, q), max(x2, q)) == max(min(x1, x2), q)
    aug = apply_bounds(SERIES2, 2, [lower(1, {1, 2}, exponential(1.0))])
    pc = minimal_paths_cuts(aug.v)
    assert {frozenset(p) for p in pc.paths} == {frozenset({1, 2}), frozenset({3})}
    closed = bounded_mttf_exponential_closed(aug, [1, 1], [1])
    assert closed.value == Fraction(7, 6)
    dists = [exponential(1.0), exponential(1.0)]
    for t in (0.3, 1.0, 2.4):
        expect = math.exp(-t) + math.exp(-2 * t) - math.exp(-3 * t)
        assert bounded_reliability(aug, dists, independent_bound_oracle(aug), t) == pytest.approx(
            expect, abs=1e-12
        )


def test_upper_bound_over_parallel_paths():
    aug = apply_bounds(PARALLEL2, 2, [upper(1, {1, 2}, exponential(2.0))])
    pc = minimal_paths_cuts(aug.v)
    assert {frozenset(p) for p in pc.paths} == {frozenset({1, 3}), frozenset({2, 3})}
    assert {frozenset(c) for c in pc.cuts} == {frozenset({1, 2}), frozenset({3})}


def test_scope_restricts_effect():
    aug = apply_bounds(SERIES2, 2, [upper(1, {2}, exponential(1.0))])
    # component 1 untouched: system = min(x1, min(x2, q1))
    assert eval_expr(aug.expr, [5.0, 3.0, 1.0]) == 1.0
    assert eval_expr(aug.expr, [0.5, 3.0, 1.0]) == 0.5


def test_q_override_replaces_default():
    aug = apply_bounds(
        SERIES2, 2, [upper(1, {1, 2}, exponential(1.0))], q_overrides={1: Var(1)}
    )
    # override removes the bound from component 1 only
    assert eval_expr(aug.expr, [5.0, 3.0, 1.0]) == 1.0
    assert eval_expr(aug.expr, [0.5, 3.0, 1.0]) == 0.5


def test_projection_recovers_intrinsic_structure():
    r = random.Random(77)
    checked = 0
    for n in (2, 3, 4, 5):
        for v in random_structures(n, 8, seed=n * 31):
            expr = setfunction_to_expr(v, "disjunctive")
            m = r.randint(1, min(3, 24 - n))
            bounds = []
            for j in range(1, m + 1):
                kind = r.choice(["upper", "lower"])
                scope = {i for i in range(1, n + 1) if r.random() < 0.6} or {1}
                bounds.append(BoundSpec(j, kind, scope, exponential(1.0)))
            aug = apply_bounds(expr, n, bounds)
            back = project_to_intrinsic(aug)
            assert back == v
            checked += 1
    assert checked == 32


def test_validation_errors():
    life = exponential(1.0)
    with pytest.raises(StructureError):
        BoundSpec(1, "sideways", {1}, life)
    with pytest.raises(StructureError):
        BoundSpec(1, "upper", set(), life)
    with pytest.raises(StructureError):
        apply_bounds(SERIES2, 2, [upper(1, {3}, life)])
    with pytest.raises(StructureError):
        apply_bounds(SERIES2, 2, [upper(2, {1}, life)])  # indices must be 1..m
    with pytest.raises(StructureError):
        apply_bounds(SERIES2, 2, [upper(1, {1}, life), upper(1, {2}, life)])
    with pytest.raises(StructureError):
        apply_bounds(
            SERIES2, 2, [upper(j, {1}, life) for j in range(1, 24)]
        )  # 2 + 23 > 24 units


# ---------------------------------------------------------------------------
# Constant bounds


def test_constant_upper_bound_step_reliability():
    c = 0.8
    aug = apply_bounds(SERIES2, 2, [upper(1, {1, 2}, deterministic(c))])
    dists = [exponential(1.0), exponential(1.0)]
    oracle = independent_bound_oracle(aug)
    for t in (0.0, 0.3, 0.79, 0.8, 1.5):
        expect = math.exp(-2 * t) if t < c else 0.0
        step = bounded_reliability(aug, dists, oracle, t)
        proj = constant_bound_reliability(aug, dists, t)
        assert step == pytest.approx(expect, abs=1e-12)
        assert proj == pytest.approx(expect, abs=1e-12)


def test_constant_upper_bound_mttf():
    c = 0.8
    aug = apply_bounds(SERIES2, 2, [upper(1, {1, 2}, deterministic(c))])
    dists = [exponential(1.0), exponential(1.0)]
    res = bounded_mttf(aug, dists, independent_bound_oracle(aug))
    assert not res.diverged
    assert res.value == pytest.approx((1 - math.exp(-1.6)) / 2, abs=1e-9)


def test_weighted_expression_matches_augmented_eval():
    r = random.Random(5)
    bounds = [upper(1, {1}, deterministic(1.5)), lower(2, {1, 2}, deterministic(0.4))]
    weighted = constant_bounds_weighted(SERIES2, 2, bounds)
    aug = apply_bounds(SERIES2, 2, bounds)
    for _ in range(200):
        x = [r.uniform(0, 3), r.uniform(0, 3)]
        assert eval_weighted(weighted, x) == eval_expr(aug.expr, x + [1.5, 0.4])


def test_weighted_requires_constant_bounds():
    with pytest.raises(StructureError):
        constant_bounds_weighted(SERIES2, 2, [upper(1, {1}, exponential(1.0))])
    with pytest.raises(StructureError):
        constant_bound_reliability(
            apply_bounds(SERIES2, 2, [upper(1, {1}, exponential(1.0))]),
            [exponential(1.0), exponential(1.0)],
            0.5,
        )


def test_constant_bound_routes_agree_on_random_systems():
    r = random.Random(41)
    for n in (2, 3, 4):
        for v in random_structures(n, 4, seed=n * 7):
            expr = setfunction_to_expr(v, "disjunctive")
            m = r.randint(1, 2)
            bounds = [
                BoundSpec(
                    j,
                    r.choice(["upper", "lower"]),
                    {i for i in range(1, n + 1) if r.random() < 0.5} or {1},
                    deterministic(r.uniform(0.2, 2.0)),
                )
                for j in range(1, m + 1)
            ]
            aug = apply_bounds(expr, n, bounds)
            dists = [exponential(r.uniform(0.5, 2.0)) for _ in range(n)]
            oracle = independent_bound_oracle(aug)
            for t in (0.1, 0.7, 1.4, 2.5):
                assert bounded_reliability(aug, dists, oracle, t) == pytest.approx(
                    constant_bound_reliability(aug, dists, t), abs=1e-12
                )


def test_mixed_random_bounds_mc_free_consistency():
    # reliability at t equals P(augmented expression value > t) computed by
    # direct enumeration over deterministic grids is infeasible; instead check
    # the double-sum against a full-table multilinear evaluation
    r = random.Random(99)
    for v in random_structures(3, 5, seed=13):
        expr = setfunction_to_expr(v, "disjunctive")
        bounds = [
            upper(1, {1, 2}, exponential(0.7)),
            lower(2, {2, 3}, exponential(1.3)),
        ]
        aug = apply_bounds(expr, 3, bounds)
        dists = [exponential(r.uniform(0.5, 2.0)) for _ in range(3)]
        oracle = independent_bound_oracle(aug)
        from latrel.engine import multilinear_primal

        for t in (0.2, 0.9, 1.8):
            p = [d.survival(t) for d in dists] + [math.exp(-0.7 * t), math.exp(-1.3 * t)]
            assert bounded_reliability(aug, dists, oracle, t) == pytest.approx(
                multilinear_primal(aug.v, p), abs=1e-12
            )
