import random

import pytest

from latrel.distributions import exponential, uniform, weibull, deterministic
from latrel.dsl import (
    BayesFactorSpec,
    BoundsSpec,
    Independent,
    ModelError,
    ParseError,
    PrePhaseSpec,
    SystemModel,
    format_expr,
    parse_distribution,
    parse_expr,
    parse_model,
    serialize_model,
)
from latrel.lattice import (
    expr_vars,
    Const,
    Var,
    bridge_system,
    expr_to_setfunction,
    lmax,
    lmin,
    random_semicoherent,
    setfunction_to_expr,
)

from conftest import load_model_text


def test_parse_simple_expressions():
    assert parse_expr("min(x1, x2)") == lmin(Var(1), Var(2))
    assert parse_expr("max(min(x1,x4), min(x2,x5))") == lmax(
        lmin(Var(1), Var(4)), lmin(Var(2), Var(5))
    )


def test_parse_flattens_nesting():
    assert parse_expr("min(x1, min(x2, x3))") == lmin(Var(1), Var(2), Var(3))


def test_parse_bound_and_const_gating():
    with pytest.raises(ParseError):
        parse_expr("min(x1, q1)")
    with pytest.raises(ParseError):
        parse_expr("min(x1, 2.5)")
    expr = parse_expr("min(x1, q1)", allow_bound_vars=True, n=3)
    assert expr == lmin(Var(1), Var(4))
    expr = parse_expr("min(x1, 2.5)", allow_const=True)
    assert expr == lmin(Var(1), Const(2.5))


def test_parse_errors_carry_offsets():
    cases = [
        "min(x1)",          # too few args
        "min(x1, x2",       # unterminated
        "min(x1 x2)",       # missing comma
        "x0",               # index below 1
        "foo(x1, x2)",      # unknown function
        "min(x1, x2) junk", # trailing input
        "",
    ]
    for text in cases:
        with pytest.raises(ParseError) as e:
            parse_expr(text)
        assert e.value.pos is not None or e.value.line is not None


def test_format_round_trip():
    r = random.Random(333)
    for n in (2, 3, 4, 5):
        for _ in range(20):
            v = random_semicoherent(n, r)
            expr = setfunction_to_expr(v, "disjunctive")
            again = parse_expr(format_expr(expr))
            assert expr_to_setfunction(again, n) == v


def test_format_renders_bound_vars():
    expr = lmin(Var(1), Var(4))
    assert format_expr(expr, n=3) == "min(x1, q1)"
    assert parse_expr(format_expr(expr, n=3), allow_bound_vars=True, n=3) == expr


def test_parse_distribution_forms():
    assert parse_distribution("exp(1.5)") == exponential(1.5)
    assert parse_distribution("uniform(1, 2)") == uniform(1, 2)
    assert parse_distribution("weibull(2, 0.5)") == weibull(2, 0.5)
    assert parse_distribution("const(3)") == deterministic(3)
    for bad in ("gamma(1)", "exp()", "exp(-1)", "uniform(2,1)", "exp(1"):
        with pytest.raises(ModelError):
            parse_distribution(bad)


# ---------------------------------------------------------------------------
# Model files


def test_bundled_models_parse():
    for name in (
        "series2",
        "parallel2",
        "bridge",
        "bayes_series2",
        "prephase_series2",
        "bounds_series2",
    ):
        model = parse_model(load_model_text(name))
        assert model.n >= 2
        assert len(model.components) == model.n


def test_bridge_model_structure():
    model = parse_model(load_model_text("bridge"))
    assert model.n == 5
    assert model.set_function() == bridge_system()
    assert isinstance(model.dependence, Independent)


def test_dependence_kinds_parsed():
    assert isinstance(
        parse_model(load_model_text("bayes_series2")).dependence, BayesFactorSpec
    )
    assert isinstance(
        parse_model(load_model_text("prephase_series2")).dependence, PrePhaseSpec
    )
    dep = parse_model(load_model_text("bounds_series2")).dependence
    assert isinstance(dep, BoundsSpec)
    assert dep.bounds[0].kind == "upper"
    assert dep.bounds[0].scope == frozenset({1, 2})


def test_table_structure_alternative():
    text = """
[system]
name = odd
n = 2
structure = table:0110

[components]
1 = exp(1)
2 = exp(1)

[dependence]
kind = independent
"""
    model = parse_model(text)
    assert model.structure is None
    v = model.set_function()
    assert list(v.values) == [0, 1, 1, 0]  # non-monotone, kept for diagnostics


MINIMAL = """
[system]
name = t
n = 2
structure = min(x1, x2)

[components]
1 = exp(1)
2 = exp(2)

[dependence]
kind = independent
"""


def _mutate(text, old, new):
    assert old in text
    return text.replace(old, new)


def test_model_schema_errors_carry_line_numbers():
    bad_cases = [
        _mutate(MINIMAL, "n = 2", "n = two"),
        _mutate(MINIMAL, "structure = min(x1, x2)", "structure = min(x1, x3)"),
        _mutate(MINIMAL, "structure = min(x1, x2)", "structure = min(x1)"),
        _mutate(MINIMAL, "2 = exp(2)", "3 = exp(2)"),
        _mutate(MINIMAL, "2 = exp(2)", "2 = exp(oops)"),
        _mutate(MINIMAL, "kind = independent", "kind = mystery"),
        _mutate(MINIMAL, "[dependence]", "[dependence]\nstray line no equals"),
        _mutate(MINIMAL, "[components]", "[components]\n[components]"),
    ]
    for text in bad_cases:
        with pytest.raises(ModelError):
            parse_model(text)


def test_missing_sections_and_keys():
    for cut in ("[system]", "[components]", "[dependence]"):
        head, _, tail = MINIMAL.partition(cut)
        trimmed = head + tail.split("\n\n", 1)[-1] if "\n\n" in tail else head
        with pytest.raises(ModelError):
            parse_model(trimmed)
    with pytest.raises(ModelError):
        parse_model(_mutate(MINIMAL, "2 = exp(2)\n", ""))


def test_bound_entry_errors():
    base = _mutate(
        MINIMAL,
        "kind = independent",
        "kind = bounds\nbound.1 = upper, scope={1,2}, life=exp(1)",
    )
    parse_model(base)  # sanity: valid as written
    for bad in (
        "bound.1 = sideways, scope={1}, life=exp(1)",
        "bound.1 = upper, scope={}, life=exp(1)",
        "bound.1 = upper, scope={9}, life=exp(1)",
        "bound.1 = upper, scope={1,2}",
        "bound.2 = upper, scope={1}, life=exp(1)",  # indices must start at 1
    ):
        text = _mutate(base, "bound.1 = upper, scope={1,2}, life=exp(1)", bad)
        with pytest.raises(ModelError):
            parse_model(text)


def test_q_override_validation():
    base = _mutate(
        MINIMAL,
        "kind = independent",
        "kind = bounds\nbound.1 = upper, scope={1,2}, life=exp(1)\nq.1 = min(x1, q1)",
    )
    dep = parse_model(base).dependence
    assert dep.q_exprs == {1: "min(x1, q1)"}
    with pytest.raises(ModelError):
        parse_model(_mutate(base, "q.1 = min(x1, q1)", "q.1 = min(x1, q2)"))
    with pytest.raises(ModelError):
        parse_model(_mutate(base, "q.1 = min(x1, q1)", "q.9 = min(x1, q1)"))


def test_comments_and_blank_lines_ignored():
    text = MINIMAL.replace("[system]", "# leading comment\n\n[system]")
    text = text.replace("1 = exp(1)", "1 = exp(1)  # inline comment")
    model = parse_model(text)
    assert model.components[0] == exponential(1)


def test_bytes_input_accepted():
    model = parse_model(MINIMAL.encode())
    assert model.name == "t"


# ---------------------------------------------------------------------------
# Round trips and fuzzing


def _random_model(r):
    n = r.randint(2, 5)
    while True:
        v = random_semicoherent(n, r)
        structure = setfunction_to_expr(v, r.choice(["disjunctive", "conjunctive"]))
        if expr_vars(structure) == set(range(1, n + 1)):
            break  # model files require every declared component to appear
    comps = []
    for _ in range(n):
        kind = r.choice(["exp", "uniform", "weibull", "const"])
        if kind == "exp":
            comps.append(exponential(round(r.uniform(0.5, 3.0), 3)))
        elif kind == "uniform":
            a = round(r.uniform(0.0, 1.0), 3)
            comps.append(uniform(a, round(a + r.uniform(0.5, 2.0), 3)))
        elif kind == "weibull":
            comps.append(weibull(round(r.uniform(0.5, 3.0), 3), round(r.uniform(0.5, 3.0), 3)))
        else:
            comps.append(deterministic(round(r.uniform(0.5, 3.0), 3)))
    which = r.random()
    if which < 0.4:
        dep = Independent()
    elif which < 0.6:
        dep = BayesFactorSpec(
            factor=uniform(0, 1), rate_exprs=tuple("1 + u" for _ in range(n))
        )
    elif which < 0.8:
        dep = PrePhaseSpec(
            prephase=uniform(1, 2), rate_exprs=tuple("2" for _ in range(n))
        )
    else:
        from latrel.bounds import BoundSpec

        scope = frozenset({i for i in range(1, n + 1) if r.random() < 0.5} or {1})
        dep = BoundsSpec(
            bounds=(BoundSpec(1, r.choice(["upper", "lower"]), scope, exponential(1.0)),)
        )
    return SystemModel(
        name=f"auto{r.randrange(10**6)}",
        n=n,
        structure=structure,
        structure_table=None,
        components=tuple(comps),
        dependence=dep,
    )


def test_serialize_parse_round_trip_1000_models():
    r = random.Random(2024)
    for _ in range(1000):
        model = _random_model(r)
        text = serialize_model(model)
        again = parse_model(text)
        assert again.name == model.name
        assert again.n == model.n
        assert again.components == model.components
        assert again.dependence == model.dependence
        assert again.set_function() == model.set_function()
        # canonical text is a fixed point
        assert serialize_model(again) == text


def test_parser_never_crashes_on_noise():
    r = random.Random(606)
    alphabet = "minmax()[]{}xq=.,0123456789 \n\t#abcdefu+-*/"
    for _ in range(400):
        junk = "".join(r.choice(alphabet) for _ in range(r.randrange(0, 120)))
        try:
            parse_model(junk)
        except ParseError:
            pass  # ModelError subclasses ParseError
        try:
            parse_expr(junk)
        except ParseError:
            pass


def test_parser_never_crashes_on_bytes_noise():
    r = random.Random(707)
    for _ in range(200):
        junk = bytes(r.randrange(256) for _ in range(r.randrange(0, 80)))
        try:
            parse_model(junk)
        except ParseError:
            pass


def test_mutated_real_models_fail_structured():
    r = random.Random(808)
    base = load_model_text("bridge")
    for _ in range(200):
        chars = list(base)
        for _ in range(r.randrange(1, 6)):
            idx = r.randrange(len(chars))
            op = r.random()
            if op < 0.4:
                del chars[idx]
            elif op < 0.8:
                chars[idx] = r.choice("xq(){}=,.0123456789abcdefu")
            else:
                chars.insert(idx, r.choice("xq(){}=,.0123456789"))
        try:
            parse_model("".join(chars))
        except ParseError:
            pass
