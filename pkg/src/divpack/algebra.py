"""Exact arithmetic in an order O of a Q-division algebra with positive involution.

An order is described by integer structure constants in a Z-basis e_0..e_{N-1}
(the order basis doubles as the algebra basis), an involution matrix and the
coordinates of 1. Elements carry rational coordinates; they lie in O exactly
when every coordinate is an integer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _exact


class AlgebraError(ValueError):
    """Raised for malformed orders, mismatched operands and failed invariants."""


@dataclass(eq=False)
class OrderSpec:
    """Integer structure-constant description of an order.

    ``structure_constants[i, j, k]`` is the coefficient of e_k in e_i * e_j and
    ``involution @ coords(x) == coords(x*)``. For quaternion-type algebras
    (n = 2), ``canonical`` is the matrix of the standard involution over the
    centre, used for the closed-form reduced norm x * conj(x).
    """

    n: int
    m: int
    structure_constants: np.ndarray
    involution: np.ndarray
    unity: tuple[int, ...]
    canonical: np.ndarray | None = None
    name: str = "order"
    _sparse: list = field(default_factory=list, repr=False)
    _trace_vec: tuple = field(default=(), repr=False)

    def __post_init__(self):
        c = np.asarray(self.structure_constants, dtype=np.int64)
        self.structure_constants = c
        self.involution = np.asarray(self.involution, dtype=np.int64)
        if self.canonical is not None:
            self.canonical = np.asarray(self.canonical, dtype=np.int64)
        self.unity = tuple(int(u) for u in self.unity)
        dim = c.shape[0]
        if c.shape != (dim, dim, dim) or self.involution.shape != (dim, dim):
            raise AlgebraError("structure constants / involution have inconsistent shapes")
        if dim != self.m * self.n * self.n:
            raise AlgebraError(f"dimension {dim} != m*n^2 = {self.m * self.n ** 2}")
        self._sparse = [
            [[(k, int(c[i, j, k])) for k in np.nonzero(c[i, j])[0]] for j in range(dim)]
            for i in range(dim)
        ]
        self._trace_vec = tuple(int(np.trace(c[i].T)) for i in range(dim))

    @property
    def dim_total(self) -> int:
        return self.structure_constants.shape[0]

    def element(self, coords: Iterable) -> "AlgebraElement":
        return AlgebraElement(self, tuple(Fraction(v) for v in coords))

    def basis(self, i: int) -> "AlgebraElement":
        return self.element(int(k == i) for k in range(self.dim_total))

    def one(self) -> "AlgebraElement":
        return self.element(self.unity)

    def zero(self) -> "AlgebraElement":
        return self.element([0] * self.dim_total)

    def scalar(self, c) -> "AlgebraElement":
        return self.element(Fraction(c) * u for u in self.unity)

    def validate(self) -> None:
        """Check associativity, unity, involution axioms and positivity of the trace form."""
        c = self.structure_constants
        dim = self.dim_total
        # float BLAS products are exact while every partial sum stays below 2^53
        bound = float(np.abs(c).max()) ** 2 * dim
        if bound >= 2.0 ** 52:
            raise AlgebraError("structure constants too large for the associativity check")
        cf = c.astype(np.float64)
        left = (cf.reshape(dim * dim, dim) @ cf.reshape(dim, dim * dim)).reshape(dim, dim, dim, dim)
        # e_i (e_j e_k) = sum_l c[j,k,l] c[i,l,m]
        right = cf.reshape(dim * dim, dim) @ cf.transpose(1, 0, 2).reshape(dim, dim * dim)
        right = right.reshape(dim, dim, dim, dim).transpose(2, 0, 1, 3)
        if not np.array_equal(left, right):
            raise AlgebraError("structure constants are not associative")
        u = np.array(self.unity, dtype=np.int64)
        eye = np.eye(dim, dtype=np.int64)
        if not (np.array_equal(np.einsum("i,ijk->jk", u, c), eye)
                and np.array_equal(np.einsum("j,ijk->ik", u, c), eye)):
            raise AlgebraError("unity is not a two-sided identity")
        s = self.involution
        if not np.array_equal(s @ s, eye):
            raise AlgebraError("involution does not square to the identity")
        lhs = np.einsum("mk,ijk->ijm", s, c)
        rhs = np.einsum("aj,bi,abm->ijm", s, s, c, optimize=True)
        if not np.array_equal(lhs, rhs):
            raise AlgebraError("involution is not an anti-automorphism")
        if not np.array_equal(s @ u, u):
            raise AlgebraError("involution does not fix 1")
        if not _exact.is_positive_definite(trace_gram(self, self.one())):
            raise AlgebraError("involution is not positive: trace form not definite")

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "m": self.m,
            "name": self.name,
            "structure_constants": self.structure_constants.tolist(),
            "involution": self.involution.tolist(),
            "unity": list(self.unity),
        }
        if self.canonical is not None:
            out["canonical"] = self.canonical.tolist()
        return out

    @classmethod
    def from_json(cls, data: dict | str) -> "OrderSpec":
        if isinstance(data, str):
            data = json.loads(data)
        dim = len(data["structure_constants"])
        unity = data.get("unity", [1] + [0] * (dim - 1))
        return cls(
            n=data["n"],
            m=data["m"],
            structure_constants=np.array(data["structure_constants"]),
            involution=np.array(data["involution"]),
            unity=tuple(unity),
            canonical=np.array(data["canonical"]) if data.get("canonical") is not None else None,
            name=data.get("name", "order"),
        )


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    order: OrderSpec
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coords) != self.order.dim_total:
            raise AlgebraError("coordinate vector has the wrong length")

    def _check(self, other: "AlgebraElement") -> None:
        if other.order is not self.order:
            raise AlgebraError("operands belong to different orders")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.order, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.order, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return AlgebraElement(self.order, tuple(-a for a in self.coords))

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return mul(self, other)
        return AlgebraElement(self.order, tuple(a * Fraction(other) for a in self.coords))

    def __rmul__(self, other):
        return AlgebraElement(self.order, tuple(Fraction(other) * a for a in self.coords))

    def __eq__(self, other):
        return isinstance(other, AlgebraElement) and other.order is self.order and other.coords == self.coords

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return f"AlgebraElement({self.order.name}, {[str(c) for c in self.coords]})"

    @property
    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def int_coords(self) -> list[int]:
        if not self.is_integral:
            raise AlgebraError("element is not in the order")
        return [int(c) for c in self.coords]


def mul(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    x._check(y)
    out = [Fraction(0)] * x.order.dim_total
    sparse = x.order._sparse
    for i, xi in enumerate(x.coords):
        if not xi:
            continue
        row = sparse[i]
        for j, yj in enumerate(y.coords):
            if not yj:
                continue
            xy = xi * yj
            for k, c in row[j]:
                out[k] += c * xy
    return AlgebraElement(x.order, tuple(out))


def involute(x: AlgebraElement) -> AlgebraElement:
    s = x.order.involution
    return x.order.element(sum(int(s[r, c]) * x.coords[c] for c in range(len(x.coords)) if s[r, c])
                           for r in range(len(x.coords)))


def conjugate(x: AlgebraElement) -> AlgebraElement:
    """Standard involution over the centre (n = 2 only)."""
    k = x.order.canonical
    if k is None:
        raise AlgebraError("order has no standard involution recorded")
    return x.order.element(sum(int(k[r, c]) * x.coords[c] for c in range(len(x.coords)) if k[r, c])
                           for r in range(len(x.coords)))


def left_matrix(x: AlgebraElement) -> list[list[Fraction]]:
    """Matrix L with coords(x*y) = L @ coords(y)."""
    c = x.order.structure_constants
    dim = x.order.dim_total
    mat = [[Fraction(0)] * dim for _ in range(dim)]
    for i, xi in enumerate(x.coords):
        if not xi:
            continue
        ci = c[i]
        for j in range(dim):
            for k in np.nonzero(ci[j])[0]:
                mat[k][j] += xi * int(ci[j, k])
    return mat


def left_matrix_int(order: OrderSpec, coords: Sequence[int]) -> np.ndarray:
    return np.einsum("i,ijk->kj", np.asarray(coords, dtype=np.int64), order.structure_constants)


def trace_q(x: AlgebraElement) -> Fraction:
    return sum((t * c for t, c in zip(x.order._trace_vec, x.coords) if t and c), Fraction(0))


def norm_q(x: AlgebraElement) -> Fraction:
    if x.is_integral:
        return Fraction(_exact.bareiss_det(left_matrix_int(x.order, x.int_coords()).tolist()))
    return _exact.det(left_matrix(x))


def reduced_trace(x: AlgebraElement) -> Fraction:
    return trace_q(x) / x.order.n


def reduced_norm_center(x: AlgebraElement) -> AlgebraElement:
    """nrd_{A/K}(x) as an element of the centre K inside A."""
    if x.order.n == 1:
        return x
    if x.order.n == 2:
        return mul(x, conjugate(x))
    raise AlgebraError("no closed-form reduced norm for n > 2")


def reduced_norm(x: AlgebraElement) -> Fraction:
    """nrd_{A/Q}(x) = N_{K/Q}(nrd_{A/K}(x))."""
    order = x.order
    if order.n == 1:
        return norm_q(x)
    c = reduced_norm_center(x)
    one = order.unity
    lead = next(i for i, u in enumerate(one) if u)
    lam = c.coords[lead] / one[lead]
    if all(cv == lam * u for cv, u in zip(c.coords, one)):
        return lam ** order.m
    # N_{A/Q}(c) = N_{K/Q}(c)^{n^2}; N_{K/Q}(c) >= 0 in every supported family
    return _exact.integer_nth_root(norm_q(c), order.n ** 2)


def trace_gram(order: OrderSpec, a: AlgebraElement) -> list[list[Fraction]]:
    """G[i][j] = T(e_i* a e_j)."""
    dim = order.dim_total
    if a.is_integral:
        # coords(e_i* a e_j) = L(e_i*) L(a) e_j, so G = S^T-weighted traces of L(a) columns
        la = left_matrix_int(order, a.int_coords())
        tr = np.array(order._trace_vec, dtype=np.int64)
        # T(x y) as a bilinear form in coordinates
        pair = np.einsum("ijk,k->ij", order.structure_constants, tr)
        g = order.involution.T @ pair @ la
        return [[Fraction(int(v)) for v in row] for row in g]
    basis = [order.basis(i) for i in range(dim)]
    left = [mul(involute(e), a) for e in basis]
    return [[trace_q(mul(left[i], basis[j])) for j in range(dim)] for i in range(dim)]


@dataclass(frozen=True, eq=False)
class PositiveElement:
    value: AlgebraElement
    gram: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def from_element(cls, a: AlgebraElement) -> "PositiveElement":
        if involute(a) != a:
            raise AlgebraError("positive element must be symmetric")
        gram = trace_gram(a.order, a)
        if not _exact.is_positive_definite(gram):
            raise AlgebraError("quadratic form x -> T(x* a x) is not positive definite")
        return cls(a, tuple(tuple(r) for r in gram))

    def int_gram(self) -> np.ndarray:
        if any(v.denominator != 1 for r in self.gram for v in r):
            raise AlgebraError("form has non-integral Gram matrix")
        return np.array([[int(v) for v in r] for r in self.gram], dtype=np.int64)

    @property
    def is_central_scalar(self) -> bool:
        a = self.value
        lead = next(i for i, u in enumerate(a.order.unity) if u)
        return a == a.order.scalar(a.coords[lead] / a.order.unity[lead])


@dataclass(frozen=True, eq=False)
class FiniteUnitGroup:
    elements: tuple[AlgebraElement, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def validate(self) -> None:
        one = self.elements[0].order.one()
        if one not in set(self.elements):
            raise AlgebraError("group does not contain 1")
        for g in self.elements:
            if not g.is_integral:
                raise AlgebraError("group element outside the order")
        order = one.order
        coords = np.array([g.int_coords() for g in self.elements], dtype=np.int64)
        members = {tuple(r) for r in coords.tolist()}
        unit = tuple(order.unity)
        for g in coords:
            prods = [tuple(r) for r in (coords @ left_matrix_int(order, g).T).tolist()]  # g * h
            if any(r not in members for r in prods):
                raise AlgebraError("group is not closed")
            # an inverse inside the set makes g a unit of the order
            if unit not in prods:
                raise AlgebraError("group element has no inverse in the group")


def enumerate_group(generators: Sequence[AlgebraElement], cap: int = 10_000) -> FiniteUnitGroup:
    """Closure of ``generators`` under multiplication; fails past ``cap`` elements."""
    if not generators:
        raise AlgebraError("need at least one generator")
    one = generators[0].order.one()
    seen = {one: None}
    frontier = [one]
    while frontier:
        nxt = []
        for x in frontier:
            for g in generators:
                y = mul(x, g)
                if y not in seen:
                    seen[y] = None
                    nxt.append(y)
                    if len(seen) > cap:
                        raise AlgebraError(f"group closure exceeded cap {cap}")
        frontier = nxt
    return FiniteUnitGroup(tuple(seen))


def build_invariant_form(group: FiniteUnitGroup) -> PositiveElement:
    """a = sum over g of g* g, with G0-invariance checked on the Gram matrix."""
    order = group.elements[0].order
    a = order.zero()
    for g in group.elements:
        a = a + mul(involute(g), g)
    pos = PositiveElement.from_element(a)
    gram = pos.int_gram()
    for g in group.elements:
        lg = left_matrix_int(order, g.int_coords())
        if not np.array_equal(lg.T @ gram @ lg, gram):
            raise AlgebraError("invariant form check failed")
    return pos


def norm_trace_gap(x: AlgebraElement, a: AlgebraElement) -> tuple[Fraction, float]:
    """(T(x* a x)/d, |N(x)|^(2/d) N(a)^(1/d)); the first never falls below the second."""
    d = x.order.dim_total
    lhs = trace_q(mul(mul(involute(x), a), x)) / d
    nx = abs(norm_q(x))
    if nx == 0:
        return lhs, 0.0
    na = norm_q(a)
    rhs = math.exp((2 * _log_fraction(nx) + _log_fraction(na)) / d)
    return lhs, rhs


def _log_fraction(q: Fraction) -> float:
    return math.log(q.numerator) - math.log(q.denominator)
