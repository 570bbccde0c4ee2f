import itertools
import random

import pytest
from hypothesis import given, strategies as st

from divpack import _exact
from divpack.codes import (Code, CodeError, CodeParams, balancedness_audit, code_count, enumerate_codes,
                           expand_code, gaussian_binomial, iter_codes, sample_code)


def brute_subspace_count(n, k, q):
    vecs = list(itertools.product(range(q), repeat=n))
    seen = set()
    for rows in itertools.combinations(vecs, k):
        if _exact.rank_mod([list(r) for r in rows], q) == k:
            red, _ = _exact.rref_mod([list(r) for r in rows], q)
            seen.add(tuple(map(tuple, red)))
    return len(seen)


@pytest.mark.parametrize("n,k,q", [(3, 1, 2), (4, 2, 2), (3, 2, 3), (4, 1, 3), (4, 2, 3)])
def test_gaussian_binomial_brute_force(n, k, q):
    assert gaussian_binomial(n, k, q) == brute_subspace_count(n, k, q)


@pytest.mark.parametrize("params", [CodeParams(2, 2, 3, 3), CodeParams(1, 3, 2, 3), CodeParams(2, 2, 3, 5)])
def test_iter_codes_is_complete_and_distinct(params):
    codes = list(iter_codes(params))
    assert len(codes) == code_count(params) == gaussian_binomial(params.width, params.k, params.p)
    assert len({c.key for c in codes}) == len(codes)


def test_search_range():
    assert CodeParams(2, 2, 3, 3).in_search_range
    assert not CodeParams(2, 2, 2, 3).in_search_range
    with pytest.raises(CodeError):
        CodeParams(2, 2, 5, 3)


@given(st.integers(0, 10 ** 6))
def test_parity_check_annihilates_code(seed):
    params = CodeParams(2, 3, 5, 5)
    code = sample_code(params, random.Random(seed))
    h = code.parity_check()
    assert len(h) == params.width - params.k
    for r in code.rows:
        assert all(sum(a * b for a, b in zip(r, hr)) % params.p == 0 for hr in h)
    assert code == Code.from_json(code.to_json())


def test_expand_code_size():
    params = CodeParams(2, 2, 3, 3)
    code = enumerate_codes(params)[0]
    # M_2(F_3)-module of dimension 2k over F_3 in the 2x2 block coordinates
    assert len(expand_code(code)) == 3 ** (params.n * params.k)


@pytest.mark.parametrize("n,t,k,p,L", [(2, 2, 3, 2, 3), (2, 2, 3, 3, 4), (1, 2, 1, 5, 1), (1, 3, 2, 3, 4)])
def test_balancedness(n, t, k, p, L):
    res = balancedness_audit(CodeParams(n, t, k, p))
    assert res["uniform"] and res["L"] == L == res["expected_L"]
