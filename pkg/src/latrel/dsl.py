"""Text front end: min/max expression grammar and the model-file format.

Expressions use function-call syntax, e.g. ``min(x1, max(x2, x3))``;
variables are ``x<k>``, bound variables ``q<k>`` (only where a bound context
supplies them), constants plain decimals (only where weighted expressions
are legal).

Model files are line-oriented UTF-8 with three sections::

    [system]
    name = bridge
    n = 5
    structure = max(min(x1,x4), min(x2,x5), min(x1,x3,x5), min(x2,x3,x4))

    [components]
    1 = exp(1.0)
    ...

    [dependence]
    kind = independent | bayes | prephase | bounds

``structure`` may alternatively be ``table:<2^n bits>`` (entry A at subset
index A, component i on bit i-1), which permits non-semicoherent tables for
diagnostic use.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundSpec
from .distributions import DistributionError, DistributionSpec
from .lattice import (
    Const,
    LatticeExpr,
    Max,
    Min,
    SetFunction,
    Var,
    expr_to_setfunction,
    expr_vars,
    lmax,
    lmin,
    setfunction_to_expr,
)
from .ratefn import RateExprError, parse_rate_expr


class ParseError(ValueError):
    """Lexical or syntactic error, carrying a byte offset or line number."""

    def __init__(self, message, pos=None, line=None):
        loc = ""
        if line is not None:
            loc = f" (line {line})"
        elif pos is not None:
            loc = f" (offset {pos})"
        super().__init__(message + loc)
        self.pos = pos
        self.line = line


class ModelError(ParseError):
    """Schema or consistency violation in a model file."""


# ---------------------------------------------------------------------------
# Expression grammar

_EXPR_TOKEN = re.compile(r"\s*(?:(min|max)\b|([xq])(\d+)|(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?|([(),]))")


def parse_expr(text, allow_const=False, allow_bound_vars=False, n=None):
    """Parse an expression string into a tree.

    Bound variables ``q<j>`` map to index n + j and need ``n``; constants
    are rejected unless ``allow_const``.
    """
    if not isinstance(text, str):
        raise ParseError("expression must be a string")
    tokens = _tokenize_expr(text)
    pos = [0]

    def peek():
        return tokens[pos[0]]

    def take():
        tok = tokens[pos[0]]
        pos[0] += 1
        return tok

    def parse_node():
        kind, value, at = peek()
        if kind == "end":
            raise ParseError("unexpected end of input", pos=at)
        if kind == "func":
            take()
            k2, v2, at2 = take()
            if (k2, v2) != ("punct", "("):
                raise ParseError(f"expected '(' after {value}", pos=at2)
            args = [parse_node()]
            while True:
                k3, v3, at3 = take()
                if (k3, v3) == ("punct", ","):
                    args.append(parse_node())
                elif (k3, v3) == ("punct", ")"):
                    break
                else:
                    raise ParseError(
                        "unexpected end of input" if k3 == "end" else f"expected ',' or ')', got {v3!r}",
                        pos=at3,
                    )
            if len(args) < 2:
                raise ParseError(f"{value} needs at least two arguments", pos=at)
            return lmin(*args) if value == "min" else lmax(*args)
        if kind == "var":
            take()
            prefix, idx = value
            if prefix == "q":
                if not allow_bound_vars:
                    raise ParseError("bound variable q outside a bound context", pos=at)
                if n is None:
                    raise ParseError("bound variable needs a known component count", pos=at)
                return Var(n + idx)
            return Var(idx)
        if kind == "num":
            take()
            if not allow_const:
                raise ParseError("constant not permitted here (weighted expressions only)", pos=at)
            return Const(value)
        raise ParseError(f"unexpected token {value!r}", pos=at)

    node = parse_node()
    kind, value, at = peek()
    if kind != "end":
        raise ParseError(f"trailing input {value!r}", pos=at)
    return node


def _tokenize_expr(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _EXPR_TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos=pos)
        if m.group(1):
            tokens.append(("func", m.group(1), pos))
        elif m.group(2):
            idx = int(m.group(3))
            if idx < 1:
                raise ParseError("variable indices start at 1", pos=pos)
            tokens.append(("var", (m.group(2), idx), pos))
        elif m.group(4):
            tokens.append(("num", float(m.group(4) + (m.group(5) or "")), pos))
        else:
            tokens.append(("punct", m.group(6), pos))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


def format_expr(expr, n=None):
    """Canonical text of an expression; indices above n render as q variables."""
    if isinstance(expr, Var):
        if n is not None and expr.index > n:
            return f"q{expr.index - n}"
        return f"x{expr.index}"
    if isinstance(expr, Const):
        return format(expr.value, "g")
    name = "min" if isinstance(expr, Min) else "max"
    return f"{name}({', '.join(format_expr(c, n) for c in expr.children)})"


# ---------------------------------------------------------------------------
# Dependence payloads


@dataclass(frozen=True)
class Independent:
    kind: str = "independent"


@dataclass(frozen=True)
class BayesFactorSpec:
    factor: DistributionSpec
    rate_exprs: tuple  # one source string per component
    kind: str = "bayes"


@dataclass(frozen=True)
class PrePhaseSpec:
    prephase: DistributionSpec
    rate_exprs: tuple
    kind: str = "prephase"


@dataclass(frozen=True)
class BoundsSpec:
    bounds: tuple                  # BoundSpec per bound
    q_exprs: dict = field(default_factory=dict)  # component -> source string
    kind: str = "bounds"


@dataclass(frozen=True)
class SystemModel:
    name: str
    n: int
    structure: LatticeExpr | None
    structure_table: SetFunction | None
    components: tuple
    dependence: object
    metadata: tuple = ()

    def set_function(self):
        if self.structure_table is not None:
            return self.structure_table
        return expr_to_setfunction(self.structure, self.n)

    def structure_expr(self):
        if self.structure is not None:
            return self.structure
        return setfunction_to_expr(self.structure_table)


# ---------------------------------------------------------------------------
# Distribution tokens

_DIST = re.compile(r"^(exp|uniform|weibull|const)\(([^)]*)\)$")


def parse_distribution(text, line=None):
    m = _DIST.match(text.strip())
    if not m:
        raise ModelError(f"bad distribution {text!r}", line=line)
    try:
        params = tuple(float(x) for x in m.group(2).split(","))
        return DistributionSpec(m.group(1), params)
    except (ValueError, DistributionError) as exc:
        raise ModelError(f"bad distribution {text!r}: {exc}", line=line) from None


# ---------------------------------------------------------------------------
# Model files

_SECTION = re.compile(r"^\[(\w+)\]$")
_SCOPE = re.compile(r"\{([\d\s,]*)\}")


def parse_model(text):
    """Parse a model file; every error carries the offending line number."""
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    sections = {}
    current = None
    order = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            current = m.group(1)
            if current in sections:
                raise ModelError(f"duplicate section [{current}]", line=lineno)
            sections[current] = []
            order.append(current)
            continue
        if current is None:
            raise ModelError("content before first section header", line=lineno)
        if "=" not in line:
            raise ModelError(f"expected key = value, got {line!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        sections[current].append((key, value, lineno))

    for required in ("system", "components", "dependence"):
        if required not in sections:
            raise ModelError(f"missing section [{required}]")

    sys_kv = {k: (v, ln) for k, v, ln in sections["system"]}
    name = sys_kv.get("name", ("unnamed", 0))[0]
    if "n" not in sys_kv:
        raise ModelError("system.n is required")
    try:
        n = int(sys_kv["n"][0])
    except ValueError:
        raise ModelError(f"system.n must be an integer, got {sys_kv['n'][0]!r}", line=sys_kv["n"][1]) from None
    if "structure" not in sys_kv:
        raise ModelError("system.structure is required")
    struct_text, struct_line = sys_kv["structure"]

    structure = None
    structure_table = None
    if struct_text.startswith("table:"):
        bits = struct_text[len("table:"):].strip()
        if not re.fullmatch(r"[01]+", bits) or len(bits) != 1 << n:
            raise ModelError(
                f"structure table needs {1 << n} bits of 0/1 for n={n}", line=struct_line
            )
        structure_table = SetFunction(n, np.array([int(b) for b in bits], dtype=np.int8))
    else:
        try:
            structure = parse_expr(struct_text)
        except ParseError as exc:
            raise ModelError(f"system.structure: {exc}", line=struct_line) from None
        used = expr_vars(structure)
        if used != set(range(1, n + 1)):
            missing = sorted(set(range(1, n + 1)) - used)
            extra = sorted(used - set(range(1, n + 1)))
            detail = []
            if missing:
                detail.append(f"unreferenced components {missing}")
            if extra:
                detail.append(f"undeclared components {extra}")
            raise ModelError("system.structure: " + "; ".join(detail), line=struct_line)

    comps = {}
    for key, value, lineno in sections["components"]:
        try:
            idx = int(key)
        except ValueError:
            raise ModelError(f"component key must be an index, got {key!r}", line=lineno) from None
        if idx in comps:
            raise ModelError(f"duplicate component {idx}", line=lineno)
        if not 1 <= idx <= n:
            raise ModelError(f"component {idx} outside [1, {n}]", line=lineno)
        comps[idx] = parse_distribution(value, line=lineno)
    if set(comps) != set(range(1, n + 1)):
        missing = sorted(set(range(1, n + 1)) - set(comps))
        raise ModelError(f"components missing distributions: {missing}")
    components = tuple(comps[i] for i in range(1, n + 1))

    dependence = _parse_dependence(sections["dependence"], n)
    metadata = tuple(
        (k, v) for k, v, _ in sections.get("metadata", [])
    )
    return SystemModel(
        name=name,
        n=n,
        structure=structure,
        structure_table=structure_table,
        components=components,
        dependence=dependence,
        metadata=metadata,
    )


def _parse_dependence(entries, n):
    kv = {}
    for key, value, lineno in entries:
        if key in kv:
            raise ModelError(f"duplicate dependence key {key!r}", line=lineno)
        kv[key] = (value, lineno)
    if "kind" not in kv:
        raise ModelError("dependence.kind is required")
    kind = kv.pop("kind")[0]

    if kind == "independent":
        if kv:
            raise ModelError(f"unexpected dependence keys {sorted(kv)} for kind=independent")
        return Independent()

    if kind in ("bayes", "prephase"):
        dist_key = "g" if kind == "bayes" else "G"
        if dist_key not in kv:
            raise ModelError(f"dependence.{dist_key} is required for kind={kind}")
        factor = parse_distribution(*kv.pop(dist_key))
        rate_exprs = [None] * n
        for key in list(kv):
            m = re.fullmatch(r"rate\.(\d+)", key)
            if not m:
                raise ModelError(f"unexpected dependence key {key!r}", line=kv[key][1])
            idx = int(m.group(1))
            if not 1 <= idx <= n:
                raise ModelError(f"rate.{idx} outside [1, {n}]", line=kv[key][1])
            value, lineno = kv.pop(key)
            try:
                parse_rate_expr(value)
            except RateExprError as exc:
                raise ModelError(f"rate.{idx}: {exc}", line=lineno) from None
            rate_exprs[idx - 1] = value
        missing = [i + 1 for i, r in enumerate(rate_exprs) if r is None]
        if missing:
            raise ModelError(f"missing rate expressions for components {missing}")
        if kind == "bayes":
            return BayesFactorSpec(factor=factor, rate_exprs=tuple(rate_exprs))
        return PrePhaseSpec(prephase=factor, rate_exprs=tuple(rate_exprs))

    if kind == "bounds":
        bound_specs = {}
        q_exprs = {}
        for key in sorted(kv):
            value, lineno = kv[key]
            bm = re.fullmatch(r"bound\.(\d+)", key)
            qm = re.fullmatch(r"q\.(\d+)", key)
            if bm:
                j = int(bm.group(1))
                if j in bound_specs:
                    raise ModelError(f"duplicate bound {j}", line=lineno)
                bound_specs[j] = _parse_bound(j, value, n, lineno)
            elif qm:
                i = int(qm.group(1))
                if not 1 <= i <= n:
                    raise ModelError(f"q.{i} outside [1, {n}]", line=lineno)
                q_exprs[i] = value
            else:
                raise ModelError(f"unexpected dependence key {key!r}", line=lineno)
        if not bound_specs:
            raise ModelError("kind=bounds needs at least one bound.<j> entry")
        if set(bound_specs) != set(range(1, len(bound_specs) + 1)):
            raise ModelError(f"bound indices must be 1..{len(bound_specs)}, got {sorted(bound_specs)}")
        mcount = len(bound_specs)
        for i, src in q_exprs.items():
            try:
                expr = parse_expr(src, allow_bound_vars=True, n=n)
            except ParseError as exc:
                raise ModelError(f"q.{i}: {exc}") from None
            bad = [k for k in expr_vars(expr) if k > n + mcount]
            if bad:
                raise ModelError(f"q.{i} references undeclared bound q{max(bad) - n}")
        bounds = tuple(bound_specs[j] for j in range(1, mcount + 1))
        return BoundsSpec(bounds=bounds, q_exprs=dict(q_exprs))

    raise ModelError(f"unknown dependence kind {kind!r}")


def _parse_bound(j, value, n, lineno):
    parts = [p.strip() for p in _split_bound(value)]
    if len(parts) != 3:
        raise ModelError(f"bound.{j} needs 'upper|lower, scope={{...}}, life=<dist>'", line=lineno)
    kind = parts[0]
    if kind not in ("upper", "lower"):
        raise ModelError(f"bound.{j} kind must be upper or lower, got {kind!r}", line=lineno)
    sm = re.fullmatch(r"scope\s*=\s*\{([\d\s,]*)\}", parts[1])
    if not sm:
        raise ModelError(f"bound.{j} bad scope {parts[1]!r}", line=lineno)
    try:
        scope = {int(x) for x in sm.group(1).split(",") if x.strip()}
    except ValueError:
        raise ModelError(f"bound.{j} bad scope {parts[1]!r}", line=lineno) from None
    if not scope:
        raise ModelError(f"bound.{j} has empty scope", line=lineno)
    if not scope <= set(range(1, n + 1)):
        raise ModelError(
            f"bound.{j} scope {sorted(scope)} names components outside [1, {n}]", line=lineno
        )
    lm = re.fullmatch(r"life\s*=\s*(.+)", parts[2])
    if not lm:
        raise ModelError(f"bound.{j} needs life=<distribution>", line=lineno)
    life = parse_distribution(lm.group(1), line=lineno)
    return BoundSpec(index=j, kind=kind, scope=frozenset(scope), lifetime=life)


def _split_bound(value):
    # commas inside {...} or (...) do not split fields
    parts = []
    depth = 0
    cur = []
    for ch in value:
        if ch in "{(":
            depth += 1
        elif ch in "})":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def serialize_model(model: SystemModel):
    """Canonical model-file text; parse(serialize(m)) is structurally equal to m."""
    lines = ["[system]", f"name = {model.name}", f"n = {model.n}"]
    if model.structure_table is not None:
        bits = "".join(str(int(b)) for b in model.structure_table.values)
        lines.append(f"structure = table:{bits}")
    else:
        lines.append(f"structure = {format_expr(model.structure)}")
    lines.append("")
    lines.append("[components]")
    for i, d in enumerate(model.components, start=1):
        lines.append(f"{i} = {d}")
    lines.append("")
    lines.append("[dependence]")
    dep = model.dependence
    if isinstance(dep, Independent):
        lines.append("kind = independent")
    elif isinstance(dep, BayesFactorSpec):
        lines.append("kind = bayes")
        lines.append(f"g = {dep.factor}")
        for i, src in enumerate(dep.rate_exprs, start=1):
            lines.append(f"rate.{i} = {src}")
    elif isinstance(dep, PrePhaseSpec):
        lines.append("kind = prephase")
        lines.append(f"G = {dep.prephase}")
        for i, src in enumerate(dep.rate_exprs, start=1):
            lines.append(f"rate.{i} = {src}")
    elif isinstance(dep, BoundsSpec):
        lines.append("kind = bounds")
        for b in dep.bounds:
            scope = "{" + ",".join(str(i) for i in sorted(b.scope)) + "}"
            lines.append(f"bound.{b.index} = {b.kind}, scope={scope}, life={b.lifetime}")
        for i in sorted(dep.q_exprs):
            lines.append(f"q.{i} = {dep.q_exprs[i]}")
    else:
        raise ModelError(f"cannot serialize dependence {dep!r}")
    if model.metadata:
        lines.append("")
        lines.append("[metadata]")
        for k, v in model.metadata:
            lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"
