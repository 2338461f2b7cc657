"""Set-function algebra and min/max expression trees.

A system structure is held in two interchangeable forms: a binary set
function v on the subset lattice of [n] (table of 2^n entries, component i
on bit i-1), and an expression tree over min/max of component lifetime
variables.  This module provides the transforms between the two, the Mobius
transform and its inverse, duals, minimal path/cut sets, and the six
classical evaluations of the structure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAX_COMPONENTS = 24

INF = math.inf


class StructureError(ValueError):
    """Malformed expression or set-function input."""


class SemicoherenceError(StructureError):
    """Set function fails a semicoherence requirement.

    For monotonicity violations ``subset_a`` and ``subset_b`` hold the
    offending pair of masks with subset_a < subset_b and v(a) > v(b).
    """

    def __init__(self, message, subset_a=None, subset_b=None):
        super().__init__(message)
        self.subset_a = subset_a
        self.subset_b = subset_b


# ---------------------------------------------------------------------------
# Expression trees


class LatticeExpr:
    __slots__ = ()


@dataclass(frozen=True)
class Var(LatticeExpr):
    index: int  # 1-based component index

    def __post_init__(self):
        if not isinstance(self.index, int) or self.index < 1:
            raise StructureError(f"variable index must be a positive integer, got {self.index!r}")


@dataclass(frozen=True)
class Const(LatticeExpr):
    value: float  # element of [0, +inf]

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v) or v < 0:
            raise StructureError(f"constant must lie in [0, +inf], got {self.value!r}")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Min(LatticeExpr):
    children: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise StructureError("min needs at least two operands")


@dataclass(frozen=True)
class Max(LatticeExpr):
    children: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise StructureError("max needs at least two operands")


def _flatten(kind, args):
    out = []
    for a in args:
        if isinstance(a, kind):
            out.extend(a.children)
        else:
            out.append(a)
    return tuple(out)


def lmin(*args):
    """Build a flattened Min node; a single operand passes through."""
    children = _flatten(Min, args)
    if not children:
        raise StructureError("min of nothing")
    if len(children) == 1:
        return children[0]
    return Min(children)


def lmax(*args):
    """Build a flattened Max node; a single operand passes through."""
    children = _flatten(Max, args)
    if not children:
        raise StructureError("max of nothing")
    if len(children) == 1:
        return children[0]
    return Max(children)


def expr_vars(expr):
    """Set of 1-based variable indices reachable in the expression."""
    if isinstance(expr, Var):
        return {expr.index}
    if isinstance(expr, Const):
        return set()
    out = set()
    for c in expr.children:
        out |= expr_vars(c)
    return out


def expr_has_const(expr):
    if isinstance(expr, Const):
        return True
    if isinstance(expr, Var):
        return False
    return any(expr_has_const(c) for c in expr.children)


def eval_expr(expr, t):
    """Evaluate a min/max expression at a point of [0, +inf]^n.

    ``t`` is indexed so component i reads t[i-1].  Raises StructureError when
    a variable index exceeds len(t).
    """
    if isinstance(expr, Var):
        if expr.index > len(t):
            raise StructureError(f"variable x{expr.index} out of range for {len(t)} components")
        val = t[expr.index - 1]
        if val < 0 or math.isnan(val):
            raise StructureError(f"lifetime value {val!r} outside [0, +inf]")
        return val
    if isinstance(expr, Const):
        return expr.value
    vals = [eval_expr(c, t) for c in expr.children]
    return min(vals) if isinstance(expr, Min) else max(vals)


def eval_expr_batch(expr, cols):
    """Vectorized evaluation; ``cols`` has shape (N, n), returns shape (N,)."""
    cols = np.asarray(cols, dtype=float)
    if isinstance(expr, Var):
        if expr.index > cols.shape[1]:
            raise StructureError(f"variable x{expr.index} out of range for {cols.shape[1]} components")
        return cols[:, expr.index - 1].copy()
    if isinstance(expr, Const):
        return np.full(cols.shape[0], expr.value)
    parts = [eval_expr_batch(c, cols) for c in expr.children]
    if isinstance(expr, Min):
        return np.minimum.reduce(parts)
    return np.maximum.reduce(parts)


def substitute(expr, bindings, strict=False):
    """Replace variables by expressions; composition of min/max expressions.

    ``bindings`` maps 1-based variable index to a replacement expression.
    Unbound variables pass through unless ``strict``.
    """
    if isinstance(expr, Var):
        if expr.index in bindings:
            return bindings[expr.index]
        if strict:
            raise StructureError(f"no binding for variable x{expr.index}")
        return expr
    if isinstance(expr, Const):
        return expr
    parts = [substitute(c, bindings, strict) for c in expr.children]
    return lmin(*parts) if isinstance(expr, Min) else lmax(*parts)


# ---------------------------------------------------------------------------
# Set functions


@dataclass(frozen=True)
class SetFunction:
    """Binary set function on 2^[n]; values[mask] = v(A) for bitmask A."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n <= MAX_COMPONENTS:
            raise StructureError(f"component count must lie in [1, {MAX_COMPONENTS}], got {self.n}")
        vals = np.asarray(self.values, dtype=np.int8)
        if vals.shape != (1 << self.n,):
            raise StructureError(f"need {1 << self.n} table entries for n={self.n}, got {vals.shape}")
        if not np.isin(vals, (0, 1)).all():
            raise StructureError("set-function values must be 0 or 1")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __call__(self, mask):
        return int(self.values[mask])

    def __eq__(self, other):
        return (
            isinstance(other, SetFunction)
            and self.n == other.n
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.n, self.values.tobytes()))


@dataclass(frozen=True)
class MobiusVector:
    """Signed integer Mobius coefficients indexed by subset bitmask."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n <= MAX_COMPONENTS:
            raise StructureError(f"component count must lie in [1, {MAX_COMPONENTS}], got {self.n}")
        c = np.asarray(self.coeffs, dtype=np.int64)
        if c.shape != (1 << self.n,):
            raise StructureError(f"need {1 << self.n} coefficients for n={self.n}, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True)
class PathCutSets:
    """Minimal path sets and minimal cut sets, as sorted tuples of indices."""

    paths: tuple
    cuts: tuple


def semicoherence_violation(v):
    """Return None if v is semicoherent, else a human-readable reason.

    Monotonicity violations also set .subset_a/.subset_b on the returned
    SemicoherenceError instance (not raised).
    """
    vals = v.values
    full = (1 << v.n) - 1
    if vals[0] != 0:
        return SemicoherenceError("v(empty set) must be 0")
    if vals[full] != 1:
        return SemicoherenceError("v(full set) must be 1")
    for bit in range(v.n):
        step = 1 << bit
        idx = np.nonzero((np.arange(full + 1) & step) == 0)[0]
        bad = np.nonzero(vals[idx] > vals[idx | step])[0]
        if bad.size:
            a = int(idx[bad[0]])
            return SemicoherenceError(
                f"not monotone: v({format_subset(a)}) > v({format_subset(a | step)})",
                subset_a=a,
                subset_b=a | step,
            )
    return None


def check_semicoherent(v):
    err = semicoherence_violation(v)
    if err is not None:
        raise err


def format_subset(mask):
    if mask == 0:
        return "{}"
    return "{" + ",".join(str(i + 1) for i in range(mask.bit_length()) if mask >> i & 1) + "}"


def dual(v):
    """Dual set function v*(A) = 1 - v([n] \\ A); an involution."""
    full = (1 << v.n) - 1
    idx = np.arange(full + 1)
    return SetFunction(v.n, 1 - v.values[full ^ idx])


def _transform_last_axis(table, invert):
    a = np.array(table, copy=True)
    size = a.shape[-1]
    n = size.bit_length() - 1
    idx = np.arange(size)
    for b in range(n):
        step = 1 << b
        hi = idx[(idx & step) != 0]
        if invert:
            a[..., hi] += a[..., hi ^ step]
        else:
            a[..., hi] -= a[..., hi ^ step]
    return a


def mobius_table(values):
    """Fast Mobius transform along the last axis (subset-indexed)."""
    arr = np.asarray(values)
    dtype = arr.dtype if np.issubdtype(arr.dtype, np.floating) else np.int64
    return _transform_last_axis(arr.astype(dtype), invert=False)


def zeta_table(coeffs):
    """Fast zeta transform along the last axis; inverse of mobius_table."""
    arr = np.asarray(coeffs)
    dtype = arr.dtype if np.issubdtype(arr.dtype, np.floating) else np.int64
    return _transform_last_axis(arr.astype(dtype), invert=True)


def mobius(v):
    return MobiusVector(v.n, mobius_table(v.values))


def zeta(m):
    table = zeta_table(m.coeffs)
    if not np.isin(table, (0, 1)).all():
        raise StructureError("zeta transform did not produce a binary set function")
    return SetFunction(m.n, table)


def symmetric_mobius(m):
    """Cardinality sums: entry k is the total coefficient over |A| = k."""
    sizes = popcount(np.arange(1 << m.n))
    return np.bincount(sizes, weights=m.coeffs, minlength=m.n + 1).astype(np.int64)


def popcount(idx):
    idx = np.asarray(idx)
    out = np.zeros(idx.shape, dtype=np.int64)
    work = idx.copy()
    while work.any():
        out += work & 1
        work >>= 1
    return out


def minimal_paths_cuts(v):
    """Minimal path sets of v and minimal cut sets (minimal paths of the dual)."""
    check_semicoherent(v)
    return PathCutSets(_minimal_true_sets(v), _minimal_true_sets(dual(v)))


def _minimal_true_sets(v):
    vals = v.values
    out = []
    for mask in range(1, 1 << v.n):
        if not vals[mask]:
            continue
        # monotone v: minimality needs only the immediate subsets
        if all(not vals[mask ^ (1 << b)] for b in range(v.n) if mask >> b & 1):
            out.append(_mask_to_tuple(mask))
    return tuple(out)


def _mask_to_tuple(mask):
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def _tuple_to_mask(subset):
    mask = 0
    for i in subset:
        mask |= 1 << (i - 1)
    return mask


def expr_to_setfunction(expr, n):
    """Set function of a constant-free expression, via evaluation on {0, inf}^n."""
    if expr_has_const(expr):
        raise StructureError("constants are not representable as a binary set function")
    used = expr_vars(expr)
    if used and max(used) > n:
        raise StructureError(f"expression references x{max(used)} but n={n}")
    size = 1 << n
    idx = np.arange(size)
    cols = np.where((idx[:, None] >> np.arange(n)[None, :]) & 1 == 1, INF, 0.0)
    vals = eval_expr_batch(expr, cols)
    return SetFunction(n, (vals == INF).astype(np.int8))


def setfunction_to_expr(v, form="disjunctive"):
    """Minimal-term normal form of v as an expression tree.

    "disjunctive": max over minimal paths of min over members.
    "conjunctive": min over minimal cuts of max over members.
    """
    pc = minimal_paths_cuts(v)
    if form == "disjunctive":
        terms = [lmin(*(Var(i) for i in p)) if len(p) > 1 else Var(p[0]) for p in pc.paths]
        return lmax(*terms)
    if form == "conjunctive":
        terms = [lmax(*(Var(i) for i in k)) if len(k) > 1 else Var(k[0]) for k in pc.cuts]
        return lmin(*terms)
    raise StructureError(f"unknown normal form {form!r}")


# ---------------------------------------------------------------------------
# Structure-function evaluation, six classical forms

STRUCTURE_FORMS = (
    "primal",
    "dual",
    "primal_mobius",
    "dual_mobius",
    "disjunctive",
    "conjunctive",
)


def _subset_products(x):
    """prod[mask] = product of x[i] over bits i of mask, by power-set doubling."""
    prods = np.ones(1)
    for xi in x:
        prods = np.concatenate([prods, prods * xi])
    return prods


def structure_eval(v, x, form="primal"):
    """Evaluate the structure function at a binary state vector.

    All six forms compute the same value from their defining sums; cross-form
    agreement is a correctness check on the whole transform stack.
    """
    if len(x) != v.n:
        raise StructureError(f"state vector has {len(x)} entries, expected {v.n}")
    x = [int(b) for b in x]
    if any(b not in (0, 1) for b in x):
        raise StructureError("state vector must be binary")
    full = (1 << v.n) - 1
    idx = np.arange(full + 1)
    p_in = _subset_products(x)                 # prod_{i in A} x_i
    q = _subset_products([1 - b for b in x])   # prod_{i in A} (1 - x_i)
    p_out = q[full ^ idx]                      # prod_{i not in A} (1 - x_i)

    if form == "primal":
        return int(round(float(np.dot(v.values, p_in * p_out))))
    if form == "dual":
        vs = dual(v).values
        return int(round(1.0 - float(np.dot(vs, p_in[full ^ idx] * q))))
    if form == "primal_mobius":
        return int(round(float(np.dot(mobius(v).coeffs, p_in))))
    if form == "dual_mobius":
        ms = mobius(dual(v)).coeffs
        return int(round(float(np.dot(ms, 1.0 - q))))
    if form == "disjunctive":
        return int((v.values * p_in).max())
    if form == "conjunctive":
        vs = dual(v).values
        terms = 1.0 - q[vs == 1]
        return int(round(float(terms.min()))) if terms.size else 1
    raise StructureError(f"unknown structure form {form!r}")


def structure_eval_table(v, form="primal"):
    """structure_eval at every binary state at once; entry B is phi(e_B)."""
    full = (1 << v.n) - 1
    idx = np.arange(full + 1)
    in_sub = (idx[None, :] & ~idx[:, None] & full) == 0   # [B, A]: A subset of B
    disjoint = (idx[:, None] & idx[None, :]) == 0         # [B, A]: A and B disjoint

    if form == "primal":
        # only A = B survives prod_{i in A} x_i * prod_{i not in A}(1 - x_i)
        term = in_sub & in_sub.T
        return (term @ v.values.astype(np.int64)).astype(np.int8)
    if form == "dual":
        vs = dual(v).values.astype(np.int64)
        # prod_{i not in A} x_i needs [n]\A subset of B; prod_{i in A}(1-x_i) needs A,B disjoint
        comp_in_b = ((full ^ idx[None, :]) & ~idx[:, None] & full) == 0
        term = comp_in_b & disjoint
        return (1 - term @ vs).astype(np.int8)
    if form == "primal_mobius":
        m = mobius(v).coeffs
        return (in_sub @ m).astype(np.int8)
    if form == "dual_mobius":
        ms = mobius(dual(v)).coeffs
        # coproduct over A of x_i = 1 - [A disjoint from B]
        return (int(ms.sum()) - disjoint @ ms).astype(np.int8)
    if form == "disjunctive":
        hit = in_sub & (v.values[None, :] == 1)
        return hit.any(axis=1).astype(np.int8)
    if form == "conjunctive":
        vs = dual(v).values
        # every A with v*(A)=1 must intersect B
        miss = disjoint & (vs[None, :] == 1)
        return (~miss.any(axis=1)).astype(np.int8)
    raise StructureError(f"unknown structure form {form!r}")


# ---------------------------------------------------------------------------
# Common structures, used by tests and bundled models


def series_system(n):
    return SetFunction(n, [1 if mask == (1 << n) - 1 else 0 for mask in range(1 << n)])


def parallel_system(n):
    return SetFunction(n, [1 if mask else 0 for mask in range(1 << n)])


def k_out_of_n_system(k, n):
    if not 1 <= k <= n:
        raise StructureError(f"need 1 <= k <= n, got k={k}, n={n}")
    sizes = popcount(np.arange(1 << n))
    return SetFunction(n, (sizes >= k).astype(np.int8))


def bridge_system():
    """Five-unit bridge: paths {1,4}, {2,5}, {1,3,5}, {2,3,4}."""
    expr = lmax(
        lmin(Var(1), Var(4)),
        lmin(Var(2), Var(5)),
        lmin(Var(1), Var(3), Var(5)),
        lmin(Var(2), Var(3), Var(4)),
    )
    return expr_to_setfunction(expr, 5)


def random_semicoherent(n, rng):
    """Random monotone nonconstant set function: up-closure of random seeds."""
    full = (1 << n) - 1
    vals = np.zeros(full + 1, dtype=np.int8)
    for _ in range(rng.randint(1, n + 2)):
        seed = rng.randint(1, full)
        idx = np.arange(full + 1)
        vals[(idx & seed) == seed] = 1
    vals[full] = 1
    return SetFunction(n, vals)
