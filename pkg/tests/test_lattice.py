import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from divpack import _exact
from divpack.algebra import build_invariant_form
from divpack.catalog import FamilySpec, build, order_discriminant
from divpack.codes import CodeParams, iter_codes, sample_code
from divpack.lattice import (ClosestPointOracle, bad_point_bound, beta_scale, count_vectors, expected_index,
                             g0_invariant, lift_code, load_lattice, order_bounds, order_lattice,
                             packing_density, primitive_counts, short_vectors, svp, unit_form, write_lattice)
from divpack.residue import build_reduction

HUR = build(FamilySpec("hurwitz"))
CYC5 = build(FamilySpec("cyclotomic", 5))


def box_minimum(inst, box=2):
    """Smallest nonzero q over a box of basis coefficients (independent of LLL)."""
    g = np.array(inst.gram, dtype=object)
    best = None
    for x in itertools.product(range(-box, box + 1), repeat=inst.dimension):
        if any(x):
            v = np.array(x)
            q = int(v @ g @ v)
            best = q if best is None else min(best, q)
    return best


def test_d4_reproduction():
    inst = order_lattice(HUR.order, 1, unit_form(HUR.order), HUR.g0_order)
    res = svp(inst)
    assert res.min_sq == 4 == box_minimum(inst)
    assert res.kissing == 24
    assert inst.covolume_sq == 64
    assert packing_density(inst, res).density == pytest.approx(math.pi ** 2 / 16, abs=1e-12)


def test_cyclotomic_trace_form_gram():
    inst = order_lattice(CYC5.order, 1, unit_form(CYC5.order))
    assert [list(r) for r in inst.gram] == [[5 * (i == j) - 1 for j in range(4)] for i in range(4)]
    assert svp(inst).min_sq == 4 == box_minimum(inst)


@pytest.mark.parametrize("fam,p,t,k", [(HUR, 3, 2, 3), (HUR, 5, 2, 3), (CYC5, 11, 2, 1), (CYC5, 11, 3, 2)])
def test_lift_index_and_membership(fam, p, t, k):
    smap = build_reduction(fam, p)
    code = sample_code(CodeParams(fam.order.n, t, k, p), random.Random(p * 10 + k))
    inst = lift_code(smap, code)
    assert inst.index == expected_index(fam.order.n, t, k, p)
    # oracle: every basis vector reduces into the code, p O^t is contained
    dim = fam.order.dim_total
    for row in inst.basis:
        mats = [smap.reduce(row[s * dim:(s + 1) * dim]) for s in range(t)]
        flat_rows = np.concatenate(mats, axis=1) % p
        assert all(code.contains_row([int(v) for v in r]) for r in flat_rows)
    for j in range(inst.dimension):
        assert inst.contains([p * int(i == j) for i in range(inst.dimension)])


def test_cyclotomic_lift_index_is_p():
    code = next(iter_codes(CodeParams(1, 2, 1, 11)))
    assert lift_code(build_reduction(CYC5, 11), code).index == 11


def test_ideal_lift_minimum():
    # t = 1, k = 1: the lift is a maximal left ideal of reduced norm p
    smap = build_reduction(HUR, 3)
    for code in iter_codes(CodeParams(2, 1, 1, 3)):
        inst = lift_code(smap, code, unit_form(HUR.order))
        assert inst.index == 9
        assert svp(inst).min_sq == 12 == box_minimum(inst, 3)


def test_g0_invariance_and_orbit_divisibility():
    a = build_invariant_form(HUR.group)
    smap = build_reduction(HUR, 5)
    rng = random.Random(7)
    for _ in range(3):
        inst = lift_code(smap, sample_code(CodeParams(2, 2, 3, 5), rng), a, 24)
        assert g0_invariant(inst, HUR.group)
        m = svp(inst).min_sq
        for count in primitive_counts(inst, [m, 2 * m]).values():
            assert count % 24 == 0


def test_primitivity_is_taken_in_the_lift():
    smap = build_reduction(CYC5, 11)
    inst = lift_code(smap, next(iter_codes(CodeParams(1, 2, 1, 11))))
    vecs = short_vectors(inst, 2 * svp(inst).min_sq)
    assert count_vectors(inst, 2 * svp(inst).min_sq, primitive=False) == 2 * len(vecs)


def test_write_load_roundtrip(tmp_path):
    smap = build_reduction(HUR, 3)
    inst = lift_code(smap, next(iter_codes(CodeParams(2, 2, 3, 3))), build_invariant_form(HUR.group), 24)
    path = tmp_path / "lat.txt"
    write_lattice(path, inst, {"variant": "hurwitz"})
    again = load_lattice(path)
    assert again.basis == inst.basis and again.covolume_sq == inst.covolume_sq
    path.write_text(path.read_text().replace('"gram_det": "', '"gram_det": "1'))
    with pytest.raises(ValueError):
        load_lattice(path)


def test_bad_point_bound_is_sharp_at_three():
    a = unit_form(HUR.order)
    assert bad_point_bound(HUR.order, a, 3) == pytest.approx(2 * math.sqrt(3))


def test_order_bounds_hurwitz():
    a = unit_form(HUR.order)
    ob = order_bounds(HUR.order, a, order_discriminant(FamilySpec("hurwitz"))["composed"])
    assert ob["lambda1_lb"] == pytest.approx(2.0)
    assert ob["covering_ub"] == pytest.approx(2 ** 0.25 * (1 / math.pi + 3 / math.pi), rel=1e-12)


def test_beta_scale_normalises_covolume():
    p, n, m, t, k = 11, 2, 1, 2, 3
    smap = build_reduction(HUR, p)
    inst = lift_code(smap, next(iter_codes(CodeParams(n, t, k, p))))
    base = order_lattice(HUR.order, t)
    d = inst.dimension
    ratio = math.sqrt(inst.covolume_sq / base.covolume_sq)
    assert beta_scale(p, n, m, t, k) ** d * ratio == pytest.approx(1.0)


@given(st.integers(0, 10 ** 6))
def test_closest_point_oracle_matches_brute_force(seed):
    inst = order_lattice(HUR.order, 1, unit_form(HUR.order))
    oracle = ClosestPointOracle(inst)
    rng = np.random.default_rng(seed)
    pts = rng.normal(scale=2.0, size=(5, 4))
    g = np.array(inst.gram, dtype=float)
    basis = np.array(inst.basis, dtype=float)
    got = oracle.distance_sq(pts)
    for pt, val in zip(pts, got):
        centre = np.round(pt @ np.linalg.inv(basis))
        best = min(float((pt - (centre + np.array(o)) @ basis) @ g @ (pt - (centre + np.array(o)) @ basis))
                   for o in itertools.product(range(-2, 3), repeat=4))
        assert val == pytest.approx(best, abs=1e-9)
