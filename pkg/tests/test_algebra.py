from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from divpack.algebra import (AlgebraError, OrderSpec, PositiveElement, build_invariant_form, conjugate,
                             involute, mul, norm_q, reduced_norm, reduced_trace, trace_q)
from divpack.catalog import FamilySpec, build

FAMILIES = [FamilySpec("hurwitz"), FamilySpec("cyclotomic", 5), FamilySpec("cyclotomic", 4),
            FamilySpec("cyclo-quat", 7), FamilySpec("dihedral-quat", 5)]


def elements(order, lo=-4, hi=4):
    return st.lists(st.integers(lo, hi), min_size=order.dim_total,
                    max_size=order.dim_total).map(order.element)


HUR = build(FamilySpec("hurwitz")).order
CYC = build(FamilySpec("cyclotomic", 5)).order


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s.tag)
def test_built_orders_validate(spec):
    fam = build(spec)
    fam.order.validate()
    fam.group.validate()
    assert fam.g0_order == len(fam.group.elements)


def test_non_associative_table_rejected():
    c = np.zeros((2, 2, 2), dtype=np.int64)
    c[0, 0, 0] = c[0, 1, 1] = c[1, 0, 1] = 1
    c[1, 1, 0] = 1
    c[1, 1, 1] = 1
    OrderSpec(n=1, m=2, structure_constants=c, involution=np.eye(2), unity=(1, 0)).validate()
    bad = c.copy()
    bad[0, 1] = [1, 0]  # (e0 e1) e1 = e0 but e0 (e1 e1) = 2 e0
    with pytest.raises(AlgebraError):
        OrderSpec(n=1, m=2, structure_constants=bad, involution=np.eye(2), unity=(1, 0)).validate()


@given(elements(HUR), elements(HUR), elements(HUR))
def test_hurwitz_ring_axioms(x, y, z):
    assert mul(mul(x, y), z) == mul(x, mul(y, z))
    assert mul(x, y + z) == mul(x, y) + mul(x, z)
    assert involute(mul(x, y)) == mul(involute(y), involute(x))
    assert involute(involute(x)) == x


@given(elements(HUR), elements(HUR))
def test_hurwitz_norms_multiplicative(x, y):
    assert reduced_norm(mul(x, y)) == reduced_norm(x) * reduced_norm(y)
    assert norm_q(x) == reduced_norm(x) ** 2
    assert trace_q(x) == 2 * reduced_trace(x)


@given(elements(CYC), elements(CYC))
def test_cyclotomic_norm_multiplicative(x, y):
    assert norm_q(mul(x, y)) == norm_q(x) * norm_q(y)
    assert reduced_norm(x) == norm_q(x)


@given(elements(HUR))
def test_positive_involution(x):
    if any(x.coords):
        assert trace_q(mul(x, conjugate(x))) > 0


def test_hurwitz_omega_has_norm_one():
    w = HUR.element([0, 0, 0, 1])
    assert reduced_norm(w) == 1
    assert HUR.element([Fraction(1, 2)] * 4) != w


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s.tag)
def test_invariant_form_is_central_scalar(spec):
    fam = build(spec)
    a = build_invariant_form(fam.group)
    assert a.is_central_scalar
    assert a.value == fam.order.scalar(fam.g0_order)


def test_positive_element_rejects_non_positive():
    with pytest.raises(AlgebraError):
        PositiveElement.from_element(HUR.scalar(-1))
