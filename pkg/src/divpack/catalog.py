"""Concrete orders with large finite unit groups, their constants and prime searches.

Families:

* ``hurwitz``        Hurwitz integers, basis {1, i, j, w}, w = (1+i+j+k)/2, |G0| = 24
* ``cyclotomic``     Z[zeta_m] with power basis, G0 = roots of unity (order lcm(2, m))
* ``cyclo-quat``     Z[zeta_m] (x) Hurwitz, 2 of odd order mod m, G0 = T* x <zeta_m>
* ``dihedral-quat``  Z[zeta_m] + Z[zeta_m] j, j^2 = -1, j z = conj(z) j; centre
                     Q(zeta_m + zeta_m^-1); G0 = <zeta_m, j> (experimental)
* ``hurwitz-rank``   Hurwitz integers tagged with a rank t for the rank-varying regime
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from fractions import Fraction
from functools import lru_cache

import gmpy2
import numpy as np

from . import _exact
from .algebra import (AlgebraElement, AlgebraError, FiniteUnitGroup, OrderSpec,
                      enumerate_group, mul, trace_q)
from .numerics import (euler_phi, log_ball_volume, multiplicative_order, prime_factors,
                       primes_up_to, zeta)

VARIANTS = ("hurwitz", "cyclotomic", "cyclo-quat", "dihedral-quat", "hurwitz-rank")


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class FamilySpec:
    variant: str
    m: int = 1
    t: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise CatalogError(f"unknown family {self.variant!r}; choose from {VARIANTS}")
        if self.variant in ("cyclotomic", "dihedral-quat") and self.m < 3:
            raise CatalogError(f"{self.variant} needs m >= 3")
        if self.variant == "cyclo-quat":
            if self.m < 1 or self.m % 2 == 0 or not cyclo_quat_admissible(self.m):
                raise CatalogError(f"cyclo-quat needs 2 of odd order mod m; m={self.m} fails")
        if self.variant in ("hurwitz", "hurwitz-rank") and self.m != 1:
            raise CatalogError("hurwitz families take no m parameter")

    @property
    def tag(self) -> str:
        if self.variant in ("hurwitz", "hurwitz-rank"):
            return self.variant
        return f"{self.variant}({self.m})"

    @property
    def n(self) -> int:
        return 1 if self.variant == "cyclotomic" else 2

    @property
    def center_degree(self) -> int:
        if self.variant in ("hurwitz", "hurwitz-rank"):
            return 1
        if self.variant == "dihedral-quat":
            return euler_phi(self.m) // 2
        return euler_phi(self.m)

    @property
    def dim(self) -> int:
        return self.center_degree * self.n ** 2

    @property
    def cyclotomic_level(self) -> int:
        """Level m of the cyclotomic field whose primes drive the splitting (1 for Q)."""
        return 1 if self.variant in ("hurwitz", "hurwitz-rank") else self.m

    def is_split_prime(self, p: int) -> bool:
        if p < 3 or not gmpy2.is_prime(p):
            return False
        level = self.cyclotomic_level
        return level == 1 or p % level == 1

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def cyclo_quat_admissible(m: int) -> bool:
    if m == 1:
        return True
    if m % 2 == 0:
        return False
    return multiplicative_order(2, m) % 2 == 1


# --------------------------------------------------------------- polynomials


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[int, ...]:
    """Coefficients of Phi_m, lowest degree first."""
    num = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            num = _poly_exact_div(num, list(cyclotomic_polynomial(d)))
    return tuple(num)


def _poly_exact_div(num, den):
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        coef = num[i + len(den) - 1] // den[-1]
        out[i] = coef
        for j, dj in enumerate(den):
            num[i + j] -= coef * dj
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return out


@lru_cache(maxsize=None)
def _power_table(m: int) -> tuple[tuple[int, ...], ...]:
    """Coordinates of zeta^e, e = 0..m-1, in the power basis of Z[zeta_m]."""
    phi = cyclotomic_polynomial(m)
    deg = len(phi) - 1
    rows = []
    cur = [1] + [0] * (deg - 1)
    for _ in range(m):
        rows.append(tuple(cur))
        # multiply by zeta and reduce with the monic Phi_m
        top = cur[-1]
        cur = [0] + cur[:-1]
        cur = [c - top * phi[i] for i, c in enumerate(cur)]
    return tuple(rows)


# --------------------------------------------------------------- builders

_Q_MUL = {  # Lipschitz basis 1, i, j, k
    (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
    (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
    (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
    (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
}

# Hurwitz basis (1, i, j, w) written in Lipschitz coordinates, and the inverse map
_HURWITZ_TO_LIP = [
    [Fraction(1), 0, 0, 0],
    [0, Fraction(1), 0, 0],
    [0, 0, Fraction(1), 0],
    [Fraction(1, 2)] * 4,
]


def _lip_to_hurwitz(q):
    a, b, c, d = q
    return [a - d, b - d, c - d, 2 * d]


def _lip_mul(x, y):
    out = [Fraction(0)] * 4
    for i in range(4):
        for j in range(4):
            if x[i] and y[j]:
                s, k = _Q_MUL[(i, j)]
                out[k] += s * x[i] * y[j]
    return out


def _hurwitz_tables():
    c = np.zeros((4, 4, 4), dtype=np.int64)
    for i in range(4):
        for j in range(4):
            prod = _lip_to_hurwitz(_lip_mul(_HURWITZ_TO_LIP[i], _HURWITZ_TO_LIP[j]))
            c[i, j] = [int(v) for v in prod]
    sigma = np.zeros((4, 4), dtype=np.int64)
    for i in range(4):
        conj = [_HURWITZ_TO_LIP[i][0]] + [-v for v in _HURWITZ_TO_LIP[i][1:]]
        sigma[:, i] = [int(v) for v in _lip_to_hurwitz(conj)]
    return c, sigma


def _cyclotomic_tables(m: int):
    table = _power_table(m)
    deg = euler_phi(m)
    c = np.zeros((deg, deg, deg), dtype=np.int64)
    sigma = np.zeros((deg, deg), dtype=np.int64)
    for a in range(deg):
        for b in range(deg):
            c[a, b] = table[(a + b) % m]
        sigma[:, a] = table[(-a) % m]
    return c, sigma


def _tensor(c1, s1, c2, s2):
    n1, n2 = c1.shape[0], c2.shape[0]
    c = np.einsum("abc,pqr->apbqcr", c1, c2).reshape(n1 * n2, n1 * n2, n1 * n2)
    s = np.einsum("ab,pq->apbq", s1, s2).reshape(n1 * n2, n1 * n2)
    return c, s


def _dihedral_tables(m: int):
    table = _power_table(m)
    deg = euler_phi(m)
    dim = 2 * deg
    c = np.zeros((dim, dim, dim), dtype=np.int64)
    for a in range(deg):
        for b in range(deg):
            plus = np.array(table[(a + b) % m])
            minus = np.array(table[(a - b) % m])
            c[a, b, :deg] = plus                  # z^a z^b
            c[a, deg + b, deg:] = plus            # z^a (z^b j)
            c[deg + a, b, deg:] = minus           # (z^a j) z^b = z^(a-b) j
            c[deg + a, deg + b, :deg] = -minus    # (z^a j)(z^b j) = -z^(a-b)
    sigma = np.zeros((dim, dim), dtype=np.int64)
    for a in range(deg):
        sigma[:deg, a] = table[(-a) % m]
        sigma[deg + a, deg + a] = -1
    return c, sigma


@dataclass(frozen=True, eq=False)
class Family:
    spec: FamilySpec
    order: OrderSpec
    group: FiniteUnitGroup
    named: dict  # handy named elements (i, j, w, zeta, ...)

    @property
    def g0_order(self) -> int:
        return self.group.order


@lru_cache(maxsize=None)
def build(spec: FamilySpec, validate: bool = True) -> Family:
    """Construct the order, its involution and the finite unit group G0."""
    v = spec.variant
    if v in ("hurwitz", "hurwitz-rank"):
        c, sigma = _hurwitz_tables()
        order = OrderSpec(2, 1, c, sigma, (1, 0, 0, 0), canonical=sigma, name=spec.tag)
        i, j, w = order.basis(1), order.basis(2), order.basis(3)
        named = {"i": i, "j": j, "w": w, "k": mul(i, j)}
        gens = [i, w]
    elif v == "cyclotomic":
        c, sigma = _cyclotomic_tables(spec.m)
        unity = (1,) + (0,) * (c.shape[0] - 1)
        order = OrderSpec(1, euler_phi(spec.m), c, sigma, unity, name=spec.tag)
        z = order.basis(1)
        named = {"zeta": z}
        gens = [z] if spec.m % 2 == 0 else [-z]
    elif v == "cyclo-quat":
        ch, sh = _hurwitz_tables()
        cz, sz = _cyclotomic_tables(spec.m)
        c, sigma = _tensor(cz, sz, ch, sh)
        _, canon = _tensor(cz, np.eye(cz.shape[0], dtype=np.int64), ch, sh)
        dim = c.shape[0]
        unity = (1,) + (0,) * (dim - 1)
        order = OrderSpec(2, euler_phi(spec.m), c, sigma, unity, canonical=canon, name=spec.tag)
        named = {"i": order.basis(1), "j": order.basis(2), "w": order.basis(3)}
        if spec.m > 1:
            named["zeta"] = order.basis(4)
        gens = [named["i"], named["w"]] + ([named["zeta"]] if spec.m > 1 else [])
    else:  # dihedral-quat
        c, sigma = _dihedral_tables(spec.m)
        deg = euler_phi(spec.m)
        unity = (1,) + (0,) * (2 * deg - 1)
        order = OrderSpec(2, deg // 2, c, sigma, unity, canonical=sigma, name=spec.tag)
        named = {"zeta": order.basis(1), "j": order.basis(deg)}
        gens = [named["zeta"], named["j"]]
    if validate:
        order.validate()
    group = enumerate_group(gens, cap=100_000)
    if validate:
        group.validate()
    return Family(spec, order, group, named)


def expected_g0_order(spec: FamilySpec) -> int:
    v = spec.variant
    if v in ("hurwitz", "hurwitz-rank"):
        return 24
    if v == "cyclotomic":
        return math.lcm(2, spec.m)
    if v == "cyclo-quat":
        return 24 * spec.m
    return 2 * math.lcm(2, spec.m)


# --------------------------------------------------------------- discriminants


def cyclotomic_discriminant(m: int) -> int:
    """|d(Z[zeta_m]/Z)| = m^phi(m) / prod_{l | m} l^(phi(m)/(l-1))."""
    if m < 3:
        raise CatalogError("cyclotomic discriminant needs m >= 3")
    phi = euler_phi(m)
    den = 1
    for l in prime_factors(m):
        den *= l ** (phi // (l - 1))
    num = m ** phi
    if num % den:
        raise ArithmeticError("non-integral discriminant")
    return num // den


def _pairing_det(order: OrderSpec, trace) -> Fraction:
    dim = order.dim_total
    basis = [order.basis(i) for i in range(dim)]
    return _exact.det([[trace(mul(basis[i], basis[j])) for j in range(dim)] for i in range(dim)])


def order_discriminant(spec: FamilySpec) -> dict:
    """Discriminant of the order under three conventions.

    ``composed`` is N_{K/Q}(reduced discriminant of O/O_K) * d(O_K/Z)^{n^2};
    ``trace_pairing`` is |det T_{A/Q}(e_i e_j)| and ``reduced_trace_pairing``
    is |det trd_{A/Q}(e_i e_j)|. The conventions differ by square factors.
    """
    fam = build(spec)
    order = fam.order
    full = abs(_pairing_det(order, trace_q))
    reduced = abs(_pairing_det(order, lambda x: trace_q(x) / order.n))
    v = spec.variant
    if v in ("hurwitz", "hurwitz-rank"):
        composed = 2
    elif v == "cyclotomic":
        composed = cyclotomic_discriminant(spec.m)
    elif v == "cyclo-quat":
        # ramified exactly at the primes above 2 (odd residue degree), N(2 O_K) = 2^phi
        dk = cyclotomic_discriminant(spec.m) if spec.m >= 3 else 1
        composed = 2 ** euler_phi(spec.m) * dk ** 4
    else:
        composed = None
    return {
        "composed": composed,
        "trace_pairing": _frac_str(full),
        "reduced_trace_pairing": _frac_str(reduced),
    }


def _frac_str(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def order_volume(spec: FamilySpec) -> float:
    """Covolume of O under the trace form T(x* y): sqrt|det T(e_i e_j)|."""
    d = Fraction(order_discriminant(spec)["trace_pairing"])
    return math.sqrt(float(d))


# --------------------------------------------------------------- sequences and primes


def admissible_m_sequence(k: int, cap_bits: int = 1 << 20) -> int:
    """m_k = product of primes p <= k with ord_p(2) odd."""
    if k < 2:
        raise CatalogError("k must be >= 2")
    out = 1
    for p in primes_up_to(k):
        if p == 2:
            continue
        if multiplicative_order(2, p) % 2 == 1:
            out *= p
            if out.bit_length() > cap_bits:
                raise OverflowError("m_k exceeds cap")
    return out


_SMALL_PRIMES = primes_up_to(20_000)
_SMALL_PRIME_SET = frozenset(_SMALL_PRIMES)


def is_probable_prime(n: int, rounds: int = 64) -> bool:
    """Miller-Rabin with ``rounds`` fixed prime bases followed by a strong Lucas test."""
    n = int(n)
    if n < 2:
        return False
    if n <= _SMALL_PRIMES[-1]:
        return n in _SMALL_PRIME_SET
    for q in _SMALL_PRIMES[:max(50, rounds)]:
        if n % q == 0:
            return False
    g = gmpy2.mpz(n)
    for base in _SMALL_PRIMES[:rounds]:
        if not gmpy2.is_strong_prp(g, base):
            return False
    return bool(gmpy2.is_strong_selfridge_prp(g))


def find_congruence_prime(m: int, lower: int, cap: int = 10_000_000) -> int:
    """Smallest probable prime p >= lower with p = 1 mod m."""
    if m < 1:
        raise CatalogError("m must be positive")
    lower = int(lower)
    start = lower + ((1 - lower) % m)
    step = m
    # sieve candidates start + i*step against small primes before running the full test
    window = 4096
    base = start
    tried = 0
    while tried < cap:
        alive = bytearray([1]) * window
        for q in _SMALL_PRIMES:
            if step % q == 0:
                continue
            # base + i*step = 0 mod q  <=>  i = -base * step^-1 mod q
            i0 = (-base * pow(step, -1, q)) % q
            for i in range(i0, window, q):
                if base + i * step != q:
                    alive[i] = 0
        for i in range(window):
            cand = base + i * step
            if cand < 2:
                continue
            if alive[i] and is_probable_prime(cand):
                return cand
        base += window * step
        tried += window
    raise CatalogError("congruence prime search exhausted its cap")


# --------------------------------------------------------------- bounds


def asymptotic_bounds(spec: FamilySpec, t: int) -> dict:
    """Density targets as base-2 logarithms (no underflow at d ~ 1000)."""
    fam_dim = spec.dim
    g0 = expected_g0_order(spec)
    d = fam_dim * t
    log2z = math.log2(zeta(d))
    ln2 = math.log(2)
    out = {
        "dimension": d,
        "g0_order": g0,
        "log2_minkowski_hlawka": 1 + log2z - d,
        "log2_symmetric": math.log2(g0) + log2z - d,
        "log2_rogers_symmetric": (math.log2(g0) + log2z + math.log2(t) - d
                                  - (1 + math.log(1 - math.exp(-t))) / ln2),
    }
    if spec.variant == "cyclo-quat":
        nk = 8 * euler_phi(spec.m)
        out["n_k"] = nk
        out["log2_cycloquat_target"] = math.log2(24 * spec.m) - nk
        out["log2_cycloquat_asymptotic"] = (math.log2(3 * nk) + 7 / 24 * math.log2(math.log(math.log(nk)))
                                            - nk + math.log2(-math.expm1(-nk)))
    return out


def describe(spec: FamilySpec) -> dict:
    fam = build(spec)
    disc = order_discriminant(spec)
    out = {
        "family": spec.tag,
        **spec.to_json(),
        "n": spec.n,
        "center_degree": spec.center_degree,
        "dim_total": fam.order.dim_total,
        "g0_order": fam.g0_order,
        "discriminant": disc,
        "log_ball_volume_dim": log_ball_volume(fam.order.dim_total),
        "split_criterion": ("p odd" if spec.cyclotomic_level == 1
                            else f"p = 1 mod {spec.cyclotomic_level}"),
    }
    if spec.variant == "dihedral-quat":
        out["experimental"] = True
    return out
