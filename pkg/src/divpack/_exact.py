"""Exact linear algebra over Z, Q and F_p on plain Python lists."""

from __future__ import annotations

from fractions import Fraction
from math import gcd


def to_fraction_matrix(rows):
    return [[Fraction(v) for v in row] for row in rows]


def det(rows) -> Fraction:
    """Determinant by fraction-free elimination after clearing denominators."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    mat = to_fraction_matrix(rows)
    scale = Fraction(1)
    ints = []
    for row in mat:
        den = 1
        for v in row:
            den = den * v.denominator // gcd(den, v.denominator)
        scale /= den
        ints.append([int(v * den) for v in row])
    return scale * bareiss_det(ints)


def bareiss_det(rows) -> int:
    m = [list(map(int, r)) for r in rows]
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            row_i = m[i]
            row_k = m[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - mik * row_k[j]) // prev
        prev = pivot
    return sign * m[n - 1][n - 1] if n else 1


def rank_q(rows) -> int:
    """Rank over Q of an integer or rational matrix."""
    mat = [[Fraction(v) for v in r] for r in rows]
    if not mat:
        return 0
    ncols = len(mat[0])
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pr = mat[rank]
        for i in range(rank + 1, len(mat)):
            if mat[i][c] != 0:
                f = mat[i][c] / pr[c]
                mat[i] = [a - f * b for a, b in zip(mat[i], pr)]
        rank += 1
        if rank == len(mat):
            break
    return rank


class IncrementalRank:
    """Row echelon basis over Q that accepts rows one at a time."""

    def __init__(self):
        self._rows: list[tuple[int, list[Fraction]]] = []

    @property
    def rank(self) -> int:
        return len(self._rows)

    def reduce(self, vec):
        v = [Fraction(x) for x in vec]
        for piv, row in self._rows:
            if v[piv] != 0:
                f = v[piv] / row[piv]
                v = [a - f * b for a, b in zip(v, row)]
        return v

    def contains(self, vec) -> bool:
        return not any(self.reduce(vec))

    def add(self, vec) -> bool:
        v = self.reduce(vec)
        for i, x in enumerate(v):
            if x != 0:
                self._rows.append((i, v))
                return True
        return False

    def copy(self) -> "IncrementalRank":
        out = IncrementalRank()
        out._rows = list(self._rows)
        return out


def ldl(rows) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Exact LDL^T of a symmetric rational matrix. Raises if a pivot vanishes."""
    a = to_fraction_matrix(rows)
    n = len(a)
    lower = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    diag: list[Fraction] = []
    for j in range(n):
        dj = a[j][j] - sum(lower[j][k] ** 2 * diag[k] for k in range(j))
        if dj == 0:
            raise ZeroDivisionError("zero pivot in LDL decomposition")
        diag.append(dj)
        for i in range(j + 1, n):
            lower[i][j] = (a[i][j] - sum(lower[i][k] * lower[j][k] * diag[k] for k in range(j))) / dj
    return lower, diag


def is_positive_definite(rows) -> bool:
    try:
        _, diag = ldl(rows)
    except ZeroDivisionError:
        return False
    return all(d > 0 for d in diag)


def mat_mul(a, b):
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def transpose(a):
    return [list(r) for r in zip(*a)]


# ---------------------------------------------------------------- F_p


def rref_mod(rows, p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form mod p; zero rows dropped. Returns (rows, pivots)."""
    mat = [[int(v) % p for v in r] for r in rows]
    if not mat:
        return [], []
    ncols = len(mat[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c]), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = pow(mat[r][c], -1, p)
        mat[r] = [(v * inv) % p for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c]:
                f = mat[i][c]
                mat[i] = [(x - f * y) % p for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def rank_mod(rows, p: int) -> int:
    return len(rref_mod(rows, p)[1])


def nullspace_mod(rows, p: int, ncols: int | None = None) -> list[list[int]]:
    """Basis (in RREF) of {x : rows . x = 0} over F_p."""
    if ncols is None:
        ncols = len(rows[0])
    red, pivots = rref_mod(rows, p) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for row, pc in zip(red, pivots):
            v[pc] = (-row[f]) % p
        basis.append(v)
    return rref_mod(basis, p)[0] if basis else []


def det_mod(rows, p: int) -> int:
    mat = [[int(v) % p for v in r] for r in rows]
    n = len(mat)
    out = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if mat[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            mat[c], mat[piv] = mat[piv], mat[c]
            out = -out
        out = out * mat[c][c] % p
        inv = pow(mat[c][c], -1, p)
        for i in range(c + 1, n):
            if mat[i][c]:
                f = mat[i][c] * inv % p
                mat[i] = [(x - f * y) % p for x, y in zip(mat[i], mat[c])]
    return out % p


def mat_mul_mod(a, b, p: int):
    return [[v % p for v in row] for row in mat_mul(a, b)]


def integer_nth_root(value: Fraction, n: int) -> Fraction:
    """Exact non-negative n-th root of a rational; raises ValueError if irrational."""
    value = Fraction(value)
    if value < 0:
        raise ValueError("negative radicand")

    def iroot(x: int) -> int:
        if x < 2:
            return x
        r = int(round(x ** (1.0 / n))) if x.bit_length() < 1000 else 1 << (x.bit_length() // n)
        # Newton refinement
        while True:
            nr = ((n - 1) * r + x // r ** (n - 1)) // n
            if abs(nr - r) <= 1:
                break
            r = nr
        for c in (r - 1, r, r + 1):
            if c >= 0 and c ** n == x:
                return c
        raise ValueError("not a perfect power")

    return Fraction(iroot(value.numerator), iroot(value.denominator))
