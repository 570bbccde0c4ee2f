"""LLL reduction and Fincke-Pohst enumeration driven by an exact integer Gram matrix.

The Gram matrix and the unimodular transform are kept exact (Python ints);
only the Gram-Schmidt data is floating point. Enumeration uses a relative
slack on the radius and every returned vector is re-normed exactly.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

RADIUS_SLACK = 1e-6


class EnumerationCap(RuntimeError):
    pass


def _to_int_rows(g) -> list[list[int]]:
    return [[int(v) for v in row] for row in g]


def _gso_row(g, mu, r, k):
    """Fill mu[k][:k] and r[k] from exact Gram rows and earlier GSO rows."""
    rk = [0.0] * k
    for j in range(k):
        s = float(g[k][j])
        mj = mu[j]
        for l in range(j):
            s -= mj[l] * rk[l]
        rk[j] = s
        mu[k][j] = s / r[j]
    s = float(g[k][k])
    for l in range(k):
        s -= mu[k][l] * rk[l]
    r[k] = s


def lll_gram(gram, delta: float = 0.99) -> tuple[list[list[int]], list[list[int]]]:
    """LLL on a positive definite integer Gram matrix.

    Returns (reduced Gram, U) with reduced Gram = U gram U^T and U unimodular.
    """
    g = _to_int_rows(gram)
    d = len(g)
    u = [[int(i == j) for j in range(d)] for i in range(d)]
    if d <= 1:
        return g, u
    mu = [[0.0] * d for _ in range(d)]
    r = [0.0] * d
    r[0] = float(g[0][0])
    k = 1
    guard = 0
    while k < d:
        guard += 1
        if guard > 200_000:
            raise RuntimeError("LLL failed to converge")
        _gso_row(g, mu, r, k)
        # size reduction, repeated while float round-off leaves large coefficients
        while True:
            big = False
            for j in range(k - 1, -1, -1):
                q = round(mu[k][j])
                if q == 0:
                    continue
                if abs(q) > 1 << 20:
                    big = True
                _row_op(g, u, k, j, q)
                for l in range(j):
                    mu[k][l] -= q * mu[j][l]
                mu[k][j] -= q
            if not big:
                break
            _gso_row(g, mu, r, k)
        _gso_row(g, mu, r, k)
        if r[k] >= (delta - mu[k][k - 1] ** 2) * r[k - 1]:
            k += 1
        else:
            _swap(g, u, k, k - 1)
            if k - 1 == 0:
                r[0] = float(g[0][0])
            else:
                _gso_row(g, mu, r, k - 1)
            k = max(k - 1, 1)
    return g, u


def _row_op(g, u, k, j, q):
    """b_k <- b_k - q b_j on the Gram matrix and the transform."""
    d = len(g)
    gj, gk = g[j], g[k]
    gkk = gk[k] - 2 * q * gk[j] + q * q * gj[j]
    for i in range(d):
        gk[i] -= q * gj[i]
    for i in range(d):
        g[i][k] = gk[i] if i != k else gkk
    gk[k] = gkk
    uj, uk = u[j], u[k]
    for i in range(d):
        uk[i] -= q * uj[i]


def _swap(g, u, a, b):
    g[a], g[b] = g[b], g[a]
    for row in g:
        row[a], row[b] = row[b], row[a]
    u[a], u[b] = u[b], u[a]


def cholesky_data(gram) -> tuple[list[list[float]], list[float]]:
    """GSO data of a Gram matrix; integer entries stay exact until the float division."""
    g = [[v if isinstance(v, float) else int(v) for v in row] for row in gram]
    d = len(g)
    mu = [[0.0] * d for _ in range(d)]
    r = [0.0] * d
    r[0] = float(g[0][0])
    for k in range(1, d):
        _gso_row(g, mu, r, k)
    if min(r) <= 0:
        raise ValueError("Gram matrix is not positive definite")
    return mu, r


def enumerate_short(gram, bound: float, cap: int = 2_000_000,
                    half: bool = True) -> Iterator[tuple[int, ...]]:
    """Yield integer x != 0 with x^T gram x <= bound (up to a small relative slack).

    ``gram`` may hold integers or floats; it need not be reduced, but the
    search tree is far smaller when it is.

    With ``half`` only one of each pair +-x is produced (the one whose last
    nonzero coordinate is positive). The caller must re-check norms exactly.
    """
    mu, r = cholesky_data(gram)
    d = len(r)
    limit = bound * (1 + RADIUS_SLACK) + 1e-9
    x = [0] * d
    centers = [0.0] * d
    partial = [0.0] * (d + 1)  # partial[i] = contribution of coordinates i..d-1
    produced = 0

    def bounds_at(i):
        c = 0.0
        for j in range(i + 1, d):
            c -= mu[j][i] * x[j]
        centers[i] = c
        rem = limit - partial[i + 1]
        if rem < 0:
            return None
        w = math.sqrt(rem / r[i])
        lo, hi = math.ceil(c - w), math.floor(c + w)
        if half and all(v == 0 for v in x[i + 1:]):
            lo = max(lo, 0)
        return lo, hi

    # iterative depth-first search; stack holds the remaining values per level
    i = d - 1
    rng = bounds_at(i)
    stack: list = [None] * d
    stack[i] = iter(range(rng[0], rng[1] + 1)) if rng else iter(())
    while True:
        try:
            v = next(stack[i])
        except StopIteration:
            i += 1
            if i >= d:
                return
            continue
        x[i] = v
        diff = v - centers[i]
        partial[i] = partial[i + 1] + r[i] * diff * diff
        if partial[i] > limit:
            continue
        if i == 0:
            if any(x):
                produced += 1
                if produced > cap:
                    raise EnumerationCap(f"more than {cap} vectors inside the enumeration radius")
                yield tuple(x)
            continue
        i -= 1
        x[i] = 0
        rng = bounds_at(i)
        stack[i] = iter(range(rng[0], rng[1] + 1)) if rng else iter(())


def exact_norm(gram_rows, x) -> int:
    return sum(xi * sum(gij * xj for gij, xj in zip(row, x) if xj) for xi, row in zip(x, gram_rows) if xi)


def apply_transform(u, x) -> tuple[int, ...]:
    """Coefficients w.r.t. the original basis of the vector with coefficients x in the reduced basis."""
    d = len(u)
    return tuple(sum(x[i] * u[i][j] for i in range(d) if x[i]) for j in range(d))


def as_object_array(rows) -> np.ndarray:
    return np.array([[int(v) for v in r] for r in rows], dtype=object)
