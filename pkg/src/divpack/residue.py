"""Degree-one split primes and explicit reductions O -> M_n(F_p)."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

import gmpy2
import numpy as np

from . import _exact
from .algebra import AlgebraElement, OrderSpec
from .catalog import Family, FamilySpec, _power_table, build
from .numerics import euler_phi, primitive_root


class ResidueError(ValueError):
    pass


@dataclass(frozen=True)
class SplitPrime:
    p: int
    family: FamilySpec

    @property
    def residue_card(self) -> int:
        return self.p


def find_split_prime(spec: FamilySpec, min_bound: int, cap: int = 1_000_000) -> SplitPrime:
    """Smallest prime >= min_bound passing the family's split criterion."""
    if min_bound < 2:
        raise ResidueError("min_bound must be at least 2")
    p = max(int(min_bound), 3)
    for _ in range(cap):
        if spec.is_split_prime(p):
            return SplitPrime(p, spec)
        p += 1
    raise ResidueError("split prime search exhausted its cap")


def gl_order(n: int, p: int) -> int:
    out = 1
    for i in range(n):
        out *= p ** n - p ** i
    return out


# --------------------------------------------------------------- the map


@dataclass(frozen=True, eq=False)
class SplittingMap:
    """Images of the order basis in M_n(F_p); ``root`` is the chosen zeta_m image (if any)."""

    order: OrderSpec
    p: int
    images: np.ndarray  # shape (N, n, n), entries in [0, p)
    root: int | None = None

    @property
    def n(self) -> int:
        return self.images.shape[1]

    def reduce(self, x) -> np.ndarray:
        coords = _int_coords(x)
        # object dtype keeps large coordinates exact
        acc = np.tensordot(np.array([c % self.p for c in coords], dtype=object),
                           self.images.astype(object), axes=1)
        return (acc % self.p).astype(np.int64)

    def reduce_many(self, coords: np.ndarray) -> np.ndarray:
        """Batch version for integer coordinate rows (small entries only)."""
        c = np.asarray(coords, dtype=np.int64) % self.p
        return np.einsum("bi,ijk->bjk", c, self.images) % self.p

    def verify(self) -> None:
        """Check the homomorphism property on every basis pair and surjectivity."""
        order, p = self.order, self.p
        c = order.structure_constants
        ims = self.images
        prod_direct = np.einsum("iab,jbc->ijac", ims, ims) % p
        prod_via_c = np.einsum("ijk,kac->ijac", c % p, ims) % p
        if not np.array_equal(prod_direct, prod_via_c):
            raise ResidueError("reduction is not multiplicative on basis pairs")
        one = self.reduce(order.one())
        if not np.array_equal(one, np.eye(self.n, dtype=np.int64)):
            raise ResidueError("1 does not map to the identity matrix")
        if _exact.rank_mod(ims.reshape(len(ims), -1).tolist(), p) != self.n ** 2:
            raise ResidueError("reduction is not surjective")

    def matrix_unit_preimages(self) -> list[list[int]]:
        """Integer coordinate vectors mapping to E_11, E_12, ... (certifies surjectivity)."""
        n, p = self.n, self.p
        flat = self.images.reshape(len(self.images), -1)
        out = []
        for target in range(n * n):
            # solve sum_i x_i flat[i] = unit vector, i.e. flat^T x = e_target
            aug = [list(map(int, flat[:, r])) + [int(r == target)] for r in range(n * n)]
            red, piv = _exact.rref_mod(aug, p)
            if len(flat) in piv:
                raise ResidueError("matrix unit has no preimage")
            x = [0] * len(flat)
            for row, pc in zip(red, piv):
                x[pc] = row[-1]
            out.append(x)
        return out

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "root": self.root,
                "images": self.images.reshape(len(self.images), -1).tolist()}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _int_coords(x) -> list[int]:
    if isinstance(x, AlgebraElement):
        return x.int_coords()
    out = []
    for c in x:
        if int(c) != c:
            raise ResidueError("non-integral coordinates")
        out.append(int(c))
    return out


def sum_of_two_squares_minus_one(p: int) -> tuple[int, int]:
    """(x, y) with x^2 + y^2 = -1 mod p, found by scanning x."""
    for x in range(p):
        r = (-1 - x * x) % p
        if r == 0:
            return x, 0
        if gmpy2.legendre(r, p) == 1:
            y = _sqrt_mod(r, p)
            return x, y
    raise ResidueError(f"no solution of x^2 + y^2 = -1 mod {p}")


def _sqrt_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while gmpy2.legendre(z, p) != -1:
        z += 1
    mm, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % p
            i += 1
        b = pow(c, 1 << (mm - i - 1), p)
        mm, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def _hurwitz_images(p: int) -> np.ndarray:
    x, y = sum_of_two_squares_minus_one(p)
    one = np.eye(2, dtype=np.int64)
    i = np.array([[0, 1], [-1, 0]], dtype=np.int64)
    j = np.array([[x, y], [y, -x]], dtype=np.int64)
    k = i @ j
    inv2 = pow(2, -1, p)
    w = (one + i + j + k) * inv2
    return np.stack([one, i, j, w]) % p


def root_of_unity(m: int, p: int) -> int:
    """r = g^((p-1)/m) for the least primitive root g: a primitive m-th root of unity mod p."""
    if (p - 1) % m:
        raise ResidueError(f"p={p} is not 1 mod {m}")
    return pow(primitive_root(p), (p - 1) // m, p)


def _cyclotomic_images(m: int, p: int, r: int) -> np.ndarray:
    return np.array([[[pow(r, a, p)]] for a in range(euler_phi(m))], dtype=np.int64)


def build_reduction(family: Family | FamilySpec, p: int) -> SplittingMap:
    fam = build(family) if isinstance(family, FamilySpec) else family
    spec = fam.spec
    if not spec.is_split_prime(p):
        raise ResidueError(f"p={p} does not split {spec.tag}")
    v = spec.variant
    root = None
    if v in ("hurwitz", "hurwitz-rank"):
        images = _hurwitz_images(p)
    elif v == "cyclotomic":
        root = root_of_unity(spec.m, p)
        images = _cyclotomic_images(spec.m, p, root)
    elif v == "cyclo-quat":
        h = _hurwitz_images(p)
        if spec.m == 1:
            images = h
        else:
            root = root_of_unity(spec.m, p)
            images = np.stack([pow(root, a, p) * h[q] for a in range(euler_phi(spec.m)) for q in range(4)]) % p
    else:
        root = root_of_unity(spec.m, p)
        deg = euler_phi(spec.m)
        inv = pow(root, -1, p)
        zs = [np.diag([pow(root, a, p), pow(inv, a, p)]) for a in range(deg)]
        jmat = np.array([[0, -1], [1, 0]], dtype=np.int64)
        images = np.stack(zs + [z @ jmat for z in zs]).astype(np.int64) % p
    smap = SplittingMap(fam.order, p, images.astype(np.int64), root)
    smap.verify()
    return smap


# --------------------------------------------------------------- audits


def det_compat_audit(smap: SplittingMap, samples: int, rng: random.Random,
                     coord_range: int = 10) -> dict:
    """det(phi(x)) against the reduction of nrd_{A/K}(x), which is central so maps to a scalar.

    Samples are integral, so nrd_{A/K}(x) = x conj(x) (n = 2) or x itself
    (n = 1) is computed in int64 for the whole batch at once.
    """
    order, p, n = smap.order, smap.p, smap.n
    dim = order.dim_total
    xs = np.array([order.unity] + [[rng.randint(-coord_range, coord_range) for _ in range(dim)]
                                   for _ in range(samples - 1)], dtype=np.int64)[:samples]
    if n == 1:
        centre = xs
    elif n == 2:
        conj = xs @ order.canonical.T
        centre = np.einsum("bi,ijk,bj->bk", xs, order.structure_constants, conj)
    else:
        raise ResidueError("no closed-form reduced norm for n > 2")
    mats = smap.reduce_many(xs)
    cmats = smap.reduce_many(centre)
    if n == 1:
        dets = mats[:, 0, 0]
    else:
        dets = (mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]) % p
    scalars = cmats[:, 0, 0]
    eye = np.eye(n, dtype=np.int64)
    is_scalar = np.all(cmats == scalars[:, None, None] * eye, axis=(1, 2))
    bad = np.nonzero(~is_scalar | (scalars != dets))[0]
    violations = [{"x": [int(v) for v in xs[b]], "det": int(dets[b]), "nrd_mod_p": int(scalars[b])}
                  for b in bad]
    return {"p": p, "samples": len(xs), "violations": violations}
