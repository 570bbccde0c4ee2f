"""Lifted lattices inside O^t: construction, exact Gram data, shortest vectors, densities and bounds.

Lattices stay unscaled with integer bases (rows in the Z-basis of O^t). The
quadratic form is q_a(x) = sum_i T(x_i* a x_i), integral for integral a.
Normalising factors such as beta_p only enter the density arithmetic, which
is scale invariant.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _enum, _exact
from .algebra import (AlgebraElement, FiniteUnitGroup, OrderSpec, PositiveElement,
                      left_matrix_int, norm_q)
from .codes import Code
from .numerics import log_ball_volume, zeta
from .residue import SplittingMap

DEFAULT_DIM_CAP = 16


class LatticeError(ValueError):
    pass


def ambient_gram(a: PositiveElement, t: int) -> list[list[int]]:
    """Block-diagonal Gram matrix of q_a on O^t."""
    g = a.int_gram().tolist()
    dim = len(g)
    out = [[0] * (dim * t) for _ in range(dim * t)]
    for s in range(t):
        for i in range(dim):
            out[s * dim + i][s * dim:(s + 1) * dim] = g[i]
    return out


def unit_form(order: OrderSpec) -> PositiveElement:
    return PositiveElement.from_element(order.one())


@dataclass(frozen=True, eq=False)
class LatticeInstance:
    order: OrderSpec
    t: int
    a: PositiveElement
    basis: tuple[tuple[int, ...], ...]
    gram: tuple[tuple[int, ...], ...]
    provenance: dict = field(default_factory=dict)
    g0_order: int | None = None

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @cached_property
    def index(self) -> int:
        """[O^t : Lambda] = |det basis|."""
        return abs(_exact.bareiss_det(self.basis))

    @cached_property
    def covolume_sq(self) -> Fraction:
        return Fraction(_exact.bareiss_det(self.gram))

    @cached_property
    def reduction(self) -> tuple[list[list[int]], list[list[int]]]:
        """(LLL-reduced Gram, unimodular U) with reduced = U gram U^T."""
        return _enum.lll_gram(self.gram)

    def to_ambient(self, coeffs: Sequence[int]) -> tuple[int, ...]:
        """O^t coordinates of the lattice vector with the given basis coefficients."""
        d = self.dimension
        return tuple(sum(coeffs[i] * self.basis[i][j] for i in range(d) if coeffs[i]) for j in range(d))

    def coefficients(self, v: Sequence[int]) -> list[Fraction] | None:
        """Solve c . basis = v over Q; None when v is not in the Q-span (never for full rank)."""
        d = self.dimension
        aug = [[Fraction(self.basis[i][j]) for i in range(d)] + [Fraction(v[j])] for j in range(d)]
        for col in range(d):
            piv = next(r for r in range(col, d) if aug[r][col] != 0)
            aug[col], aug[piv] = aug[piv], aug[col]
            pr = aug[col]
            for r in range(d):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col] / pr[col]
                    aug[r] = [x - f * y for x, y in zip(aug[r], pr)]
        return [aug[i][d] / aug[i][i] for i in range(d)]

    def contains(self, v: Sequence[int]) -> bool:
        return all(c.denominator == 1 for c in self.coefficients(v))

    def norm(self, coeffs: Sequence[int]) -> int:
        return _enum.exact_norm(self.gram, coeffs)

    def scaled_form(self, c: int) -> "LatticeInstance":
        """Same lattice under the form q_{c a}; lengths scale by sqrt(c)."""
        a = PositiveElement.from_element(self.a.value * c)
        gram = tuple(tuple(c * v for v in row) for row in self.gram)
        return LatticeInstance(self.order, self.t, a, self.basis, gram, dict(self.provenance), self.g0_order)


def from_basis(order: OrderSpec, t: int, basis, a: PositiveElement | None = None,
               provenance: dict | None = None, g0_order: int | None = None) -> LatticeInstance:
    a = a or unit_form(order)
    rows = [[int(v) for v in r] for r in basis]
    d = order.dim_total * t
    if len(rows) != d or any(len(r) != d for r in rows):
        raise LatticeError(f"basis must be {d} x {d}")
    b = np.array(rows, dtype=object)
    gram = b.dot(np.array(ambient_gram(a, t), dtype=object)).dot(b.T)
    inst = LatticeInstance(order, t, a, tuple(tuple(r) for r in rows),
                           tuple(tuple(int(v) for v in r) for r in gram.tolist()),
                           provenance or {}, g0_order)
    if inst.index == 0:
        raise LatticeError("basis is not full rank")
    return inst


def order_lattice(order: OrderSpec, t: int, a: PositiveElement | None = None,
                  g0_order: int | None = None) -> LatticeInstance:
    d = order.dim_total * t
    return from_basis(order, t, [[int(i == j) for j in range(d)] for i in range(d)], a,
                      {"kind": "order"}, g0_order)


# --------------------------------------------------------------- lifting


def lift_equations(smap: SplittingMap, code: Code) -> list[list[int]]:
    """Rows E with x in the lift iff E x = 0 mod p (x in Z^{N t})."""
    pr = code.params
    if pr.n != smap.n or pr.p != smap.p:
        raise LatticeError("code and reduction map disagree on (n, p)")
    h = code.parity_check()
    n, t, p = pr.n, pr.t, pr.p
    ims = smap.images
    dim = ims.shape[0]
    rows = []
    for r in range(n):
        for hrow in h:
            eq = []
            for s in range(t):
                hblock = np.array(hrow[s * n:(s + 1) * n], dtype=np.int64)
                eq.extend(int(v) % p for v in ims[:, r, :] @ hblock)
            rows.append(eq)
    return rows


def lift_code(smap: SplittingMap, code: Code, a: PositiveElement | None = None,
              g0_order: int | None = None, provenance: dict | None = None) -> LatticeInstance:
    """phi_p^{-1}(C) in O^t with an upper-triangular HNF basis (diagonal entries 1 or p)."""
    p = smap.p
    t = code.params.t
    d = smap.order.dim_total * t
    eqs = lift_equations(smap, code)
    if code.params.k == code.params.width:
        kernel = [[int(i == j) for j in range(d)] for i in range(d)]
    else:
        kernel = _exact.nullspace_mod(eqs, p, d)
    red, pivots = _exact.rref_mod(kernel, p) if kernel else ([], [])
    lead = {pc: row for row, pc in zip(red, pivots)}
    basis = []
    for j in range(d):
        if j in lead:
            basis.append([int(v) for v in lead[j]])
        else:
            basis.append([p * int(i == j) for i in range(d)])
    prov = {"kind": "lift", "p": p, "code": code.to_json()}
    if smap.root is not None:
        prov["root"] = smap.root
    prov.update(provenance or {})
    return from_basis(smap.order, t, basis, a, prov, g0_order)


def expected_index(n: int, t: int, k: int, p: int) -> int:
    """[O^t : phi^{-1}(C)] = p^{n (n t - k)} for a code in one split factor."""
    return p ** (n * (n * t - k))


# --------------------------------------------------------------- shortest vectors


@dataclass(frozen=True)
class SVPResult:
    min_sq: int
    vectors: tuple[tuple[int, ...], ...]  # O^t coordinates, one per +- pair
    coefficients: tuple[tuple[int, ...], ...]
    kissing: int


def _reduced_bound(inst: LatticeInstance) -> int:
    g, _ = inst.reduction
    return min(g[i][i] for i in range(len(g)))


def short_vectors(inst: LatticeInstance, bound, half: bool = True, cap: int = 2_000_000,
                  dim_cap: int | None = None) -> list[tuple[tuple[int, ...], int]]:
    """(basis coefficients, exact norm) of lattice vectors with 0 < q(v) <= bound."""
    if dim_cap is not None and inst.dimension > dim_cap:
        raise LatticeError(f"dimension {inst.dimension} exceeds cap {dim_cap}")
    g, u = inst.reduction
    out = []
    exact_bound = Fraction(bound)
    for x in _enum.enumerate_short(g, float(bound), cap=cap, half=half):
        nrm = _enum.exact_norm(g, x)
        if nrm <= exact_bound:
            out.append((_enum.apply_transform(u, x), nrm))
    out.sort(key=lambda item: item[1])
    return out


def svp(inst: LatticeInstance, dim_cap: int = DEFAULT_DIM_CAP) -> SVPResult:
    if inst.dimension > dim_cap:
        raise LatticeError(f"dimension {inst.dimension} exceeds the exact SVP cap {dim_cap}")
    bound = _reduced_bound(inst)
    vecs = short_vectors(inst, bound)
    best = min(n for _, n in vecs)
    minimal = [c for c, n in vecs if n == best]
    return SVPResult(best, tuple(inst.to_ambient(c) for c in minimal), tuple(minimal), 2 * len(minimal))


def is_primitive(coeffs: Sequence[int]) -> bool:
    return math.gcd(*coeffs) == 1


def count_vectors(inst: LatticeInstance, bound, primitive: bool = True) -> int:
    """Number of (signed) lattice vectors with 0 < q(v) <= bound."""
    return 2 * sum(1 for c, _ in short_vectors(inst, bound) if not primitive or is_primitive(c))


# --------------------------------------------------------------- densities and bounds


def log_density(dim: int, lambda1_sq, covolume_sq) -> float:
    return (log_ball_volume(dim) + 0.5 * dim * (_log(lambda1_sq) - math.log(4))
            - 0.5 * _log(covolume_sq))


def _log(q) -> float:
    q = Fraction(q)
    return math.log(q.numerator) - math.log(q.denominator)


@dataclass(frozen=True)
class DensityReport:
    dimension: int
    lambda1_sq: Fraction
    covolume_sq: Fraction
    density: float
    log2_density: float
    bound_mh: float
    bound_g0: float | None
    kissing: int | None = None
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "lambda1_sq": _frac(self.lambda1_sq),
            "covolume_sq": _frac(self.covolume_sq),
            "density": self.density,
            "log2_density": self.log2_density,
            "bound_mh": self.bound_mh,
            "bound_g0": self.bound_g0,
            "kissing": self.kissing,
            "provenance": self.provenance,
        }


def _frac(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def density_from(dim: int, lambda1_sq, covolume_sq, g0_order: int | None = None,
                 kissing: int | None = None, provenance: dict | None = None) -> DensityReport:
    ld = log_density(dim, lambda1_sq, covolume_sq)
    z = zeta(dim)
    return DensityReport(
        dimension=dim,
        lambda1_sq=Fraction(lambda1_sq),
        covolume_sq=Fraction(covolume_sq),
        density=math.exp(ld),
        log2_density=ld / math.log(2),
        bound_mh=2 * z * 2.0 ** -dim,
        bound_g0=g0_order * z * 2.0 ** -dim if g0_order else None,
        kissing=kissing,
        provenance=dict(provenance or {}),
    )


def packing_density(inst: LatticeInstance, result: SVPResult | None = None,
                    dim_cap: int = DEFAULT_DIM_CAP) -> DensityReport:
    result = result or svp(inst, dim_cap)
    return density_from(inst.dimension, result.min_sq, inst.covolume_sq, inst.g0_order,
                        result.kissing, inst.provenance)


def beta_scale(p: int, n: int, m: int, t: int, k: int) -> float:
    """p^((n k - n^2 t) / (n^2 m t)): rescales a lift to the covolume of O^t."""
    return p ** ((n * k - n * n * t) / (n * n * m * t))


def bad_point_bound(order: OrderSpec, a: PositiveElement, p: int) -> float:
    """Length below which no lattice point can reduce to a singular matrix.

    sqrt(N) * N(a)^(1/(2N)) * p^(1/(n m)) with N = [A:Q], n^2 = [A:K], m = [K:Q].
    """
    big_n = order.dim_total
    na = float(norm_q(a.value))
    return math.sqrt(big_n) * na ** (1 / (2 * big_n)) * p ** (1 / (order.n * order.m))


def order_bounds(order: OrderSpec, a: PositiveElement, discriminant) -> dict:
    """Lower bounds for lambda_1 and the Hermite parameter, upper bound for the covering radius of O."""
    if discriminant is None:
        raise LatticeError("order discriminant unavailable for this family")
    big_n = order.dim_total
    na = float(norm_q(a.value))
    disc = float(Fraction(discriminant))
    root = disc ** (1 / big_n)
    return {
        "lambda1_lb": math.sqrt(big_n) * na ** (1 / (2 * big_n)),
        "hermite_lb": big_n / root,
        "covering_ub": root * (math.sqrt(big_n) / (2 * math.pi) + 3 / math.pi) * na ** (-1 / (2 * big_n)),
    }


def hermite_parameter(inst: LatticeInstance, result: SVPResult | None = None) -> float:
    result = result or svp(inst)
    return float(result.min_sq) / math.exp(_log(inst.covolume_sq) / inst.dimension)


# --------------------------------------------------------------- covering radius (sampled)


class ClosestPointOracle:
    """Exact closest-vector distances by descent over the Voronoi-relevant candidates.

    A point x is closest to y iff no relevant vector v gives q(y - x - v) < q(y - x).
    Relevant vectors have norm at most 4 mu^2, and mu^2 <= (sum of GSO norms) / 4,
    so every vector up to that norm is kept as a candidate.
    """

    def __init__(self, inst: LatticeInstance, cap: int = 200_000):
        g, u = inst.reduction
        self.gram = np.array(g, dtype=float)
        mu, r = _enum.cholesky_data(g)
        bound = sum(r)
        cands = [x for x in _enum.enumerate_short(g, bound, cap=cap, half=False)
                 if _enum.exact_norm(g, x) <= bound * (1 + 1e-9)]
        self.cands = np.array(cands, dtype=float)
        self.cand_norms = np.einsum("ij,jk,ik->i", self.cands, self.gram, self.cands)
        b = np.array(inst.basis, dtype=float)
        self.reduced_basis = np.array(u, dtype=float) @ b  # rows in ambient coordinates
        self.inv_reduced = np.linalg.inv(self.reduced_basis)
        self.ambient_gram = np.array(ambient_gram(inst.a, inst.t), dtype=float)

    def distance_sq(self, points: np.ndarray) -> np.ndarray:
        """Squared q_a distance from each ambient point (rows) to the lattice."""
        y = np.atleast_2d(points) @ self.inv_reduced  # reduced-basis coordinates
        x = np.round(y)
        diff = y - x
        dist = np.einsum("ij,jk,ik->i", diff, self.gram, diff)
        for _ in range(1000):
            # q(diff - v) = q(diff) - 2 diff.G.v + q(v)
            cross = diff @ self.gram @ self.cands.T
            delta = self.cand_norms[None, :] - 2 * cross
            best = np.argmin(delta, axis=1)
            gain = delta[np.arange(len(y)), best]
            move = gain < -1e-12
            if not move.any():
                return dist
            diff[move] -= self.cands[best[move]]
            dist[move] += gain[move]
        raise RuntimeError("closest-vector descent did not terminate")


def covering_radius_sample(inst: LatticeInstance, n_targets: int, rng: random.Random,
                           ascent_starts: int = 8) -> dict:
    """Lower bound for the covering radius: farthest random target, then local ascent.

    Every reported distance is an exact closest-vector distance, so the result
    never exceeds the true covering radius (up to float round-off).
    """
    from scipy.optimize import minimize

    oracle = ClosestPointOracle(inst)
    d = inst.dimension
    np_rng = np.random.default_rng(rng.getrandbits(64))
    coeffs = np_rng.random((n_targets, d))
    points = coeffs @ oracle.reduced_basis
    dists = np.concatenate([oracle.distance_sq(points[i:i + 4096]) for i in range(0, n_targets, 4096)])
    sampled = float(np.sqrt(dists.max()))
    best_sq = float(dists.max())
    best_point = points[int(dists.argmax())]
    for idx in np.argsort(dists)[::-1][:ascent_starts]:
        res = minimize(lambda z: -oracle.distance_sq(z)[0], points[idx], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        val = float(oracle.distance_sq(res.x)[0])
        if val > best_sq:
            best_sq, best_point = val, res.x
    return {
        "targets": n_targets,
        "sampled_lower_bound": sampled,
        "lower_bound": math.sqrt(best_sq),
        "witness": [float(v) for v in best_point],
    }


# --------------------------------------------------------------- symmetry audits


def g0_invariant(inst: LatticeInstance, group: FiniteUnitGroup) -> bool:
    """Does the diagonal left action of every g in G0 map the lattice to itself?"""
    order = inst.order
    dim = order.dim_total
    for g in group.elements:
        lg = left_matrix_int(order, g.int_coords())
        for row in inst.basis:
            image = []
            for s in range(inst.t):
                image.extend(int(v) for v in lg @ np.array(row[s * dim:(s + 1) * dim], dtype=np.int64))
            if not inst.contains(image):
                return False
    return True


def primitive_counts(inst: LatticeInstance, bounds: Sequence) -> dict:
    """Signed primitive-vector counts in balls q(v) <= bound, for several bounds."""
    top = max(bounds)
    vecs = [(c, n) for c, n in short_vectors(inst, top) if is_primitive(c)]
    return {_frac(b): 2 * sum(1 for _, n in vecs if n <= Fraction(b)) for b in bounds}


# --------------------------------------------------------------- export


def write_lattice(path: str | Path, inst: LatticeInstance, family: dict | None = None) -> None:
    header = {
        "family": family,
        "t": inst.t,
        "a": [_frac(c) for c in inst.a.value.coords],
        "provenance": inst.provenance,
        "gram_det": _frac(inst.covolume_sq),
        "g0_order": inst.g0_order,
        "order": inst.order.to_json(),
    }
    lines = ["# " + json.dumps(header, sort_keys=True)]
    lines += [" ".join(str(v) for v in row) for row in inst.basis]
    Path(path).write_text("\n".join(lines) + "\n")


def load_lattice(path: str | Path) -> LatticeInstance:
    text = Path(path).read_text().splitlines()
    header = json.loads(text[0][2:])
    order = OrderSpec.from_json(header["order"])
    a = PositiveElement.from_element(order.element(Fraction(c) for c in header["a"]))
    basis = [[int(v) for v in line.split()] for line in text[1:] if line.strip()]
    inst = from_basis(order, header["t"], basis, a, header.get("provenance"), header.get("g0_order"))
    if _frac(inst.covolume_sq) != header["gram_det"]:
        raise LatticeError("reloaded lattice has a different Gram determinant")
    return inst
