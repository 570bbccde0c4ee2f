"""A-valued inner products, Gram-Schmidt over A_R, A-successive minima and Minkowski balancing.

Vectors of A_R^t are float arrays of shape (t, N) holding order-basis
coordinates. Everything here is double precision; the only exact steps are
the lattice enumeration behind the successive minima and the certificate
attached to the balanced shortest vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _enum, _exact
from .algebra import OrderSpec, PositiveElement
from .lattice import LatticeInstance, ambient_gram, short_vectors

ORTHONORMAL_TOL = 1e-10
SINGULAR_COND = 1e12


class AMinimaError(ValueError):
    pass


class RealAlgebra:
    """Float arithmetic in A_R for one order's basis."""

    def __init__(self, order: OrderSpec):
        self.order = order
        self.c = order.structure_constants.astype(float)
        self.sigma = order.involution.astype(float)
        self.unity = np.array(order.unity, dtype=float)
        self.trace_vec = np.array(order._trace_vec, dtype=float)
        self.dim = order.dim_total
        # trace form T(x* y) = x^T P y, used to orthonormalise the coordinates
        pair = np.einsum("ijk,k->ij", self.c, self.trace_vec)
        self.trace_gram = self.sigma.T @ pair
        self.chol = np.linalg.cholesky(self.trace_gram)

    def mul(self, x, y):
        return np.einsum("i,j,ijk->k", x, y, self.c)

    def star(self, x):
        return self.sigma @ x

    def trace(self, x) -> float:
        return float(self.trace_vec @ x)

    def left(self, x):
        """Matrix of y -> x y."""
        return np.einsum("i,ijk->kj", x, self.c)

    def inverse(self, x):
        lx = self.left(x)
        if np.linalg.cond(lx) > SINGULAR_COND:
            raise AMinimaError("element is numerically singular")
        return np.linalg.solve(lx, self.unity)

    def sqrt_positive(self, s):
        """Principal square root r of a symmetric positive element s (r* = r, r^2 = s).

        L(s) is self-adjoint for T(x* y); in trace-orthonormal coordinates it
        is a symmetric matrix whose principal root is again left multiplication
        by a polynomial in s, so r = root(L(s)) applied to 1.
        """
        lc = self.chol  # trace_gram = lc lc^T; z = lc^T x are orthonormal coordinates
        m = lc.T @ self.left(s) @ np.linalg.inv(lc.T)
        m = 0.5 * (m + m.T)
        w, v = np.linalg.eigh(m)
        if w.min() <= 0:
            raise AMinimaError("element is not positive definite")
        root = v @ np.diag(np.sqrt(w)) @ v.T
        back = np.linalg.inv(lc.T) @ root @ lc.T
        return back @ self.unity


def _a_element(alg: RealAlgebra, a: PositiveElement | np.ndarray | None):
    if a is None:
        return alg.unity
    if isinstance(a, PositiveElement):
        return np.array([float(v) for v in a.value.coords])
    return np.asarray(a, dtype=float)


def a_inner(alg: RealAlgebra, x, y, a=None):
    """<x, y>_A = sum_i x_i a y_i*."""
    av = _a_element(alg, a)
    x, y = np.atleast_2d(x), np.atleast_2d(y)
    out = np.zeros(alg.dim)
    for xi, yi in zip(x, y):
        out += alg.mul(alg.mul(xi, av), alg.star(yi))
    return out


def left_scale(alg: RealAlgebra, alpha, x):
    """alpha * (x_1, ..., x_t) coordinatewise on the left."""
    return np.array([alg.mul(alpha, xi) for xi in np.atleast_2d(x)])


def real_norm(alg: RealAlgebra, x, a=None) -> float:
    """<x, x>_R = T(<x, x>_A) = q_a(x)."""
    return alg.trace(a_inner(alg, x, x, a))


def project(alg: RealAlgebra, u, v, a=None):
    """Component of v along the left A-line of u: <v, u>_A <u, u>_A^{-1} u.

    With this argument order <v - pr(u, v), u>_A = 0 and pr(u, alpha u) = alpha u.
    """
    u = np.atleast_2d(u)
    if not np.any(u):
        return np.zeros_like(u)
    coef = alg.mul(a_inner(alg, v, u, a), alg.inverse(a_inner(alg, u, u, a)))
    return left_scale(alg, coef, u)


def normalise(alg: RealAlgebra, x, a=None):
    """b x with <b x, b x>_A = 1, where b is the inverse principal root of <x, x>_A."""
    s = a_inner(alg, x, x, a)
    r = alg.sqrt_positive(s)
    return left_scale(alg, alg.inverse(r), x)


def a_gram_schmidt(alg: RealAlgebra, vs, a=None):
    """Orthonormalise v_1, ..., v_k for <,>_A, keeping every left A-span."""
    out = []
    for v in vs:
        w = np.array(np.atleast_2d(v), dtype=float)
        for x in out:
            w = w - project(alg, x, w, a)
        s = a_inner(alg, w, w, a)
        if np.linalg.cond(alg.left(s)) > SINGULAR_COND:
            raise AMinimaError("vectors are not free under the left action")
        out.append(normalise(alg, w, a))
    return out


def orthonormality_residual(alg: RealAlgebra, xs, a=None) -> float:
    worst = 0.0
    for i, xi in enumerate(xs):
        for j, xj in enumerate(xs):
            target = alg.unity if i == j else np.zeros(alg.dim)
            worst = max(worst, float(np.abs(a_inner(alg, xi, xj, a) - target).max()))
    return worst


def coordinates(alg: RealAlgebra, y, xs, a=None):
    """Coefficients y_j = <y, x_j>_A; for an orthonormal family y = sum_j y_j x_j on its span."""
    return [a_inner(alg, y, x, a) for x in xs]


def combine(alg: RealAlgebra, coeffs, xs):
    out = np.zeros_like(np.atleast_2d(xs[0]))
    for c, x in zip(coeffs, xs):
        out = out + left_scale(alg, c, x)
    return out


# --------------------------------------------------------------- successive minima


@dataclass(frozen=True)
class MinimaProfile:
    minima_sq: tuple[int, ...]
    witnesses: tuple[tuple[int, ...], ...]  # O^t coordinates

    @property
    def minima(self) -> tuple[float, ...]:
        return tuple(math.sqrt(v) for v in self.minima_sq)


def _left_multiples(order: OrderSpec, t: int, v) -> list[list[int]]:
    """Integer coordinates of e_l * v for every basis element e_l."""
    dim = order.dim_total
    c = order.structure_constants
    blocks = [np.array(v[s * dim:(s + 1) * dim], dtype=np.int64) for s in range(t)]
    rows = []
    for l in range(dim):
        row = []
        for b in blocks:
            row.extend(int(x) for x in np.einsum("j,jk->k", b, c[l]))
        rows.append(row)
    return rows


def successive_minima(inst: LatticeInstance, cap: int = 2_000_000) -> MinimaProfile:
    """Greedy A-minima: scan lattice vectors by exact norm, skipping the left A-span of earlier picks.

    For rational vectors the left A_R-span meets the lattice in the rational
    span of the left multiples e_l v_i, and A is a division algebra, so a
    vector outside the span raises the rank by exactly N.
    """
    order, t = inst.order, inst.t
    span = _exact.IncrementalRank()
    minima, witnesses = [], []
    g, _ = inst.reduction
    bound = min(g[i][i] for i in range(len(g)))
    scanned: set = set()
    while len(witnesses) < t:
        for coeffs, nrm in short_vectors(inst, bound, cap=cap):
            if coeffs in scanned:
                continue
            scanned.add(coeffs)
            v = inst.to_ambient(coeffs)
            if span.contains(v):
                continue
            for row in _left_multiples(order, t, v):
                span.add(row)
            minima.append(nrm)
            witnesses.append(v)
            if len(witnesses) == t:
                break
        # anything skipped in this pass lies in the span found so far, so
        # only the next shell needs scanning
        bound *= 2
    return MinimaProfile(tuple(minima), tuple(witnesses))


# --------------------------------------------------------------- balancing


@dataclass(frozen=True)
class BalancedLattice:
    basis: np.ndarray  # rows in ambient float coordinates
    gram: np.ndarray
    source: LatticeInstance
    profile: MinimaProfile
    frame: tuple  # orthonormal x_j
    scale: float

    @property
    def covolume(self) -> float:
        sign, logdet = np.linalg.slogdet(self.gram)
        return math.exp(0.5 * logdet)

    def to_text(self) -> str:
        rows = [" ".join(f"{v:.15g}" for v in row) for row in self.basis]
        return "\n".join(rows) + "\n"


def balance(inst: LatticeInstance, profile: MinimaProfile | None = None) -> BalancedLattice:
    """Lambda' = (prod lambda_j)^(1/t) T(Lambda), T(y) = sum_j (y_j / lambda_j) x_j."""
    profile = profile or successive_minima(inst)
    alg = RealAlgebra(inst.order)
    t, dim = inst.t, inst.order.dim_total
    a = inst.a
    ws = [np.array(w, dtype=float).reshape(t, dim) for w in profile.witnesses]
    frame = a_gram_schmidt(alg, ws, a)
    lam = profile.minima
    scale = math.exp(sum(math.log(v) for v in lam) / t)
    rows = []
    for row in inst.basis:
        y = np.array(row, dtype=float).reshape(t, dim)
        ys = coordinates(alg, y, frame, a)
        ty = combine(alg, [c / l for c, l in zip(ys, lam)], frame)
        rows.append(scale * ty.reshape(-1))
    basis = np.array(rows)
    amb = np.array(ambient_gram(a, t), dtype=float)
    gram = basis @ amb @ basis.T
    return BalancedLattice(basis, 0.5 * (gram + gram.T), inst, profile, tuple(frame), scale)


@dataclass(frozen=True)
class BalancedMinimum:
    lambda1_sq: float
    coefficients: tuple[int, ...]
    certified: bool
    top_index: int  # largest j with a nonzero frame coordinate


def balanced_minimum(bal: BalancedLattice) -> BalancedMinimum:
    """Float SVP on Lambda' plus an exact certificate for the geometric-mean bound.

    For y in Lambda whose frame coordinates vanish beyond index i, q'(T y) is at
    least (prod lambda_j)^(2/t) q(y) / lambda_i^2, and q(y) >= min_i^2 holds
    exactly because y avoids the span of the first i - 1 witnesses. The check
    q(y) >= min_i^2 is done in integers for the shortest candidate.
    """
    inst = bal.source
    _, u = inst.reduction
    umat = np.array(u, dtype=float)
    g = umat @ bal.gram @ umat.T
    g = 0.5 * (g + g.T)
    bound = float(min(np.diag(g)))
    best = None
    for x in _enum.enumerate_short(g.tolist(), bound):
        val = float(np.array(x) @ g @ np.array(x))
        if best is None or val < best[0]:
            best = (val, x)
    val, x = best
    coeffs = _enum.apply_transform(u, x)
    y = inst.to_ambient(coeffs)
    alg = RealAlgebra(inst.order)
    t, dim = inst.t, inst.order.dim_total
    ys = coordinates(alg, np.array(y, dtype=float).reshape(t, dim), bal.frame, inst.a)
    top = max(j for j, c in enumerate(ys) if np.abs(c).max() > 1e-9)
    exact_q = inst.norm(coeffs)
    certified = exact_q >= bal.profile.minima_sq[top] and not _in_prior_span(inst, bal.profile, top, y)
    return BalancedMinimum(val, tuple(coeffs), certified, top)


def _in_prior_span(inst: LatticeInstance, profile: MinimaProfile, top: int, y) -> bool:
    span = _exact.IncrementalRank()
    for w in profile.witnesses[:top]:
        for row in _left_multiples(inst.order, inst.t, w):
            span.add(row)
    return top > 0 and span.contains(y)


def geometric_mean_sq(profile: MinimaProfile) -> float:
    t = len(profile.minima_sq)
    return math.exp(sum(math.log(v) for v in profile.minima_sq) / t)


def norm_identity_gap(alg: RealAlgebra, frame, coeffs, a=None) -> float:
    """| q_a(sum a_i x_i) - sum_i T(a_i a_i*) | for an orthonormal frame."""
    v = combine(alg, coeffs, frame)
    lhs = real_norm(alg, v, a)
    rhs = sum(alg.trace(alg.mul(c, alg.star(c))) for c in coeffs)
    return abs(lhs - rhs)
