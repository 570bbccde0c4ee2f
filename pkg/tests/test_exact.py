import itertools
from fractions import Fraction

import sympy
from hypothesis import given, strategies as st

from divpack import _exact

small_ints = st.integers(-6, 6)


def square(n):
    return st.lists(st.lists(small_ints, min_size=n, max_size=n), min_size=n, max_size=n)


@given(st.integers(1, 5).flatmap(square))
def test_det_matches_sympy(rows):
    assert _exact.bareiss_det(rows) == sympy.Matrix(rows).det()
    assert _exact.det(rows) == sympy.Matrix(rows).det()


@given(st.integers(1, 4).flatmap(lambda r: st.lists(st.lists(small_ints, min_size=5, max_size=5),
                                                      min_size=r, max_size=r)))
def test_rank_q_matches_sympy(rows):
    assert _exact.rank_q(rows) == sympy.Matrix(rows).rank()


def _brute_rank_mod(rows, p):
    """Size of the row space over F_p, via enumeration of all combinations."""
    span = {tuple(sum(c * r[j] for c, r in zip(cs, rows)) % p for j in range(len(rows[0])))
            for cs in itertools.product(range(p), repeat=len(rows))}
    size, rank = len(span), 0
    while p ** rank < size:
        rank += 1
    return rank


@given(st.sampled_from([2, 3, 5]),
       st.lists(st.lists(st.integers(0, 4), min_size=4, max_size=4), min_size=1, max_size=3))
def test_rref_mod_rank_and_nullspace(p, rows):
    rank = _exact.rank_mod(rows, p)
    assert rank == _brute_rank_mod(rows, p)
    red, piv = _exact.rref_mod(rows, p)
    for r, c in zip(red, piv):
        assert r[c] == 1
        assert all(other[c] == 0 for other in red if other is not r)
    null = _exact.nullspace_mod(rows, p, 4)
    assert len(null) == 4 - rank
    for h in null:
        assert all(sum(a * b for a, b in zip(r, h)) % p == 0 for r in rows)


@given(st.sampled_from([3, 7, 11]), st.integers(1, 4).flatmap(square))
def test_det_mod(p, rows):
    assert _exact.det_mod(rows, p) == _exact.bareiss_det(rows) % p


def test_incremental_rank():
    span = _exact.IncrementalRank()
    assert span.add([1, 2, 3])
    assert span.add([0, 1, 1])
    assert not span.add([2, 5, 7])
    assert span.contains([1, 3, 4])
    assert not span.contains([0, 0, 1])
    assert span.rank == 2


def test_ldl_positive_definite():
    g = [[2, 1], [1, 2]]
    lower, diag = _exact.ldl(g)
    assert diag == [Fraction(2), Fraction(3, 2)]
    assert _exact.is_positive_definite(g)
    assert not _exact.is_positive_definite([[1, 2], [2, 1]])


def test_integer_nth_root():
    assert _exact.integer_nth_root(Fraction(81, 16), 4) == Fraction(3, 2)
