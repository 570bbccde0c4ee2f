"""Left M_n(F_p)-submodules of M_n(F_p)^t, stored in Morita coordinates.

A code isomorphic to (F_p^n)^k is the set of t-tuples (M_1, ..., M_t) whose
concatenated n x nt matrix [M_1 | ... | M_t] has every row inside a fixed
k-dimensional subspace of F_p^{nt}. We store that subspace in RREF.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import _exact


class CodeError(ValueError):
    pass


@dataclass(frozen=True)
class CodeParams:
    n: int
    t: int
    k: int
    p: int

    def __post_init__(self):
        if self.n < 1 or self.t < 1 or self.p < 2:
            raise CodeError(f"invalid code parameters {self}")
        if not 0 <= self.k <= self.n * self.t:
            raise CodeError(f"k={self.k} outside [0, {self.n * self.t}]")

    @property
    def width(self) -> int:
        return self.n * self.t

    @property
    def in_search_range(self) -> bool:
        return (self.n - 1) * self.t < self.k < self.n * self.t


@dataclass(frozen=True)
class Code:
    params: CodeParams
    rows: tuple[tuple[int, ...], ...]
    pivots: tuple[int, ...]

    @classmethod
    def from_rows(cls, params: CodeParams, rows) -> "Code":
        red, piv = _exact.rref_mod(rows, params.p) if len(rows) else ([], [])
        if len(piv) != params.k:
            raise CodeError(f"rows have rank {len(piv)}, expected k={params.k}")
        return cls(params, tuple(tuple(r) for r in red), tuple(piv))

    def parity_check(self) -> list[list[int]]:
        """H with (nt - k) rows such that v lies in the row space iff H v = 0."""
        p = self.params
        if self.params.k == 0:
            return [[int(i == j) for j in range(p.width)] for i in range(p.width)]
        return _exact.nullspace_mod([list(r) for r in self.rows], p.p, p.width)

    def contains_row(self, v: Sequence[int]) -> bool:
        p = self.params.p
        acc = [x % p for x in v]
        for row, c in zip(self.rows, self.pivots):
            f = acc[c]
            if f:
                acc = [(a - f * b) % p for a, b in zip(acc, row)]
        return not any(acc)

    def to_json(self) -> dict:
        p = self.params
        return {"n": p.n, "t": p.t, "k": p.k, "p": p.p, "rows": [list(r) for r in self.rows]}

    @classmethod
    def from_json(cls, data: dict) -> "Code":
        params = CodeParams(data["n"], data["t"], data["k"], data["p"])
        return cls.from_rows(params, data["rows"])

    @property
    def key(self) -> tuple:
        return self.rows


def gaussian_binomial(n: int, k: int, q: int) -> int:
    """Number of k-dimensional subspaces of F_q^n."""
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def code_count(params: CodeParams) -> int:
    return gaussian_binomial(params.width, params.k, params.p)


def sample_code(params: CodeParams, rng: random.Random) -> Code:
    """Uniform k-dimensional subspace: draw random k x nt matrices until one has rank k."""
    p, width = params.p, params.width
    while True:
        rows = [[rng.randrange(p) for _ in range(width)] for _ in range(params.k)]
        red, piv = _exact.rref_mod(rows, p)
        if len(piv) == params.k:
            return Code(params, tuple(tuple(r) for r in red), tuple(piv))


def iter_codes(params: CodeParams) -> Iterator[Code]:
    """All k-dimensional subspaces in RREF, ordered by pivot pattern then free entries."""
    p, width, k = params.p, params.width, params.k
    for pivots in itertools.combinations(range(width), k):
        piv_set = set(pivots)
        slots = [(r, c) for r, pc in enumerate(pivots) for c in range(pc + 1, width) if c not in piv_set]
        for values in itertools.product(range(p), repeat=len(slots)):
            rows = [[0] * width for _ in range(k)]
            for r, pc in enumerate(pivots):
                rows[r][pc] = 1
            for (r, c), v in zip(slots, values):
                rows[r][c] = v
            yield Code(params, tuple(tuple(r) for r in rows), pivots)


def enumerate_codes(params: CodeParams, cap: int = 1_000_000) -> list[Code]:
    total = code_count(params)
    if total > cap:
        raise CodeError(f"{total} codes exceed the enumeration cap {cap}")
    return list(iter_codes(params))


# --------------------------------------------------------------- residue tuples


def concat(mats: Sequence[np.ndarray]) -> np.ndarray:
    """[M_1 | ... | M_t] as an n x nt array."""
    return np.concatenate([np.asarray(m, dtype=np.int64) for m in mats], axis=1)


def contains(code: Code, mats: Sequence[np.ndarray]) -> bool:
    block = concat(mats)
    if block.shape != (code.params.n, code.params.width):
        raise CodeError("tuple shape does not match the code parameters")
    return all(code.contains_row(row) for row in block.tolist())


def in_U(mats: Sequence[np.ndarray], p: int) -> bool:
    block = concat(mats)
    return _exact.rank_mod(block.tolist(), p) == block.shape[0]


def expand_code(code: Code) -> set[tuple]:
    """Every tuple in the code as a flattened n x nt block (p^(nk) elements)."""
    pr = code.params
    span = set()
    for coeffs in itertools.product(range(pr.p), repeat=pr.k):
        v = [0] * pr.width
        for c, row in zip(coeffs, code.rows):
            v = [(a + c * b) % pr.p for a, b in zip(v, row)]
        span.add(tuple(v))
    span = sorted(span)
    return {sum(rows, ()) for rows in itertools.product(span, repeat=pr.n)}


def balancedness_audit(params: CodeParams, cap: int = 1_000_000) -> dict:
    """Count the codes through every u in U and compare with [nt-n choose k-n]_p.

    When the number of full-rank u is small they are walked one by one;
    otherwise u is grouped by its row space, on which membership depends.
    """
    codes = enumerate_codes(params, cap)
    n, p, width = params.n, params.p, params.width
    expected = gaussian_binomial(width - n, params.k - n, p)
    n_points = p ** (n * width)
    counts: dict[int, int] = {}
    if n_points * len(codes) <= 5_000_000:
        for flat in itertools.product(range(p), repeat=n * width):
            block = [list(flat[r * width:(r + 1) * width]) for r in range(n)]
            if _exact.rank_mod(block, p) != n:
                continue
            c = sum(all(code.contains_row(r) for r in block) for code in codes)
            counts[c] = counts.get(c, 0) + 1
        walked = "points"
    else:
        for sub in iter_codes(CodeParams(1, width, n, p)):
            c = sum(all(code.contains_row(r) for r in sub.rows) for code in codes)
            counts[c] = counts.get(c, 0) + 1
        walked = "row spaces"
    uniform = len(counts) == 1
    L = next(iter(counts)) if uniform else None
    return {
        "params": {"n": n, "t": params.t, "k": params.k, "p": p},
        "codes": len(codes),
        "L": L,
        "uniform": uniform,
        "expected_L": expected,
        "matches_bijection": uniform and L == expected,
        "count_histogram": {str(k): v for k, v in sorted(counts.items())},
        "walked": walked,
    }
