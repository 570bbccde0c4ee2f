import math

import pytest
import sympy

from divpack.catalog import (CatalogError, FamilySpec, admissible_m_sequence, asymptotic_bounds, build,
                             cyclo_quat_admissible, cyclotomic_discriminant, describe, expected_g0_order,
                             find_congruence_prime, is_probable_prime, order_discriminant)
from divpack.numerics import euler_phi, multiplicative_order, zeta


@pytest.mark.parametrize("spec,dim,g0", [
    (FamilySpec("hurwitz"), 4, 24),
    (FamilySpec("cyclotomic", 5), 4, 10),
    (FamilySpec("cyclotomic", 4), 2, 4),
    (FamilySpec("cyclo-quat", 7), 24, 168),
    (FamilySpec("cyclo-quat", 1), 4, 24),
])
def test_family_dimensions_and_groups(spec, dim, g0):
    fam = build(spec)
    assert fam.order.dim_total == dim == spec.dim
    assert fam.g0_order == g0 == expected_g0_order(spec)


def test_dihedral_group_order_matches_declared():
    spec = FamilySpec("dihedral-quat", 5)
    assert build(spec).g0_order == expected_g0_order(spec)
    assert describe(spec)["experimental"]


def test_cycloquat_admissibility_agrees_with_multiplicative_order():
    for m in range(1, 10_001, 2):
        direct = m == 1 or multiplicative_order(2, m) % 2 == 1
        assert cyclo_quat_admissible(m) == direct, m


def test_inadmissible_cycloquat_rejected():
    with pytest.raises(CatalogError):
        FamilySpec("cyclo-quat", 13)
    with pytest.raises(CatalogError):
        FamilySpec("cyclotomic", 2)


@pytest.mark.parametrize("k,expected", [(7, 7), (23, 161), (2, 1)])
def test_admissible_m_sequence(k, expected):
    assert admissible_m_sequence(k) == expected


def test_admissible_m_sequence_oracle():
    for k in range(2, 60):
        prod = math.prod(p for p in sympy.primerange(3, k + 1) if sympy.n_order(2, p) % 2 == 1)
        assert admissible_m_sequence(k) == prod


def test_cyclotomic_discriminant():
    assert cyclotomic_discriminant(4) == 4
    assert cyclotomic_discriminant(5) == 125
    for p in (3, 7, 11, 13):
        assert cyclotomic_discriminant(p) == p ** (p - 2)
    for m in (8, 9, 12, 15):
        assert cyclotomic_discriminant(m) == abs(sympy.discriminant(sympy.cyclotomic_poly(m, sympy.Symbol("x"))))


def test_order_discriminant_paths():
    hur = order_discriminant(FamilySpec("hurwitz"))
    assert hur["composed"] == 2
    # pairing determinant of the reduced trace over Z is d^2 for the maximal order
    assert hur["reduced_trace_pairing"] == "4"
    for m in (4, 5):
        d = order_discriminant(FamilySpec("cyclotomic", m))
        assert str(d["composed"]) == d["trace_pairing"]


def test_find_congruence_prime_small():
    assert find_congruence_prime(5, 2) == 11
    assert find_congruence_prime(1, 90) == 97
    p = find_congruence_prime(161, 10 ** 50)
    assert (p - 1) % 161 == 0 and sympy.isprime(p)
    assert p == sympy.nextprime(10 ** 50 - 1) or all(
        not sympy.isprime(q) for q in range(10 ** 50 + (1 - 10 ** 50) % 161, p, 161))


def test_is_probable_prime_agrees_with_sympy():
    for n in [*range(-5, 3000), *range(19_900, 21_000)]:
        assert is_probable_prime(n) == sympy.isprime(n), n
    for n in (2 ** 127 - 1, 2 ** 89 - 1, (2 ** 61 - 1) * (2 ** 31 - 1), 3215031751, 3825123056546413051):
        assert is_probable_prime(n) == sympy.isprime(n)


def test_asymptotic_bounds_hurwitz():
    b = asymptotic_bounds(FamilySpec("hurwitz"), 2)
    z = zeta(8)
    assert b["dimension"] == 8
    assert math.isclose(2 ** b["log2_symmetric"], 24 * z / 2 ** 8, rel_tol=1e-12)
    rogers = 24 * z * 2 / (2 ** 8 * math.e * (1 - math.exp(-2)))
    assert math.isclose(2 ** b["log2_rogers_symmetric"], rogers, rel_tol=1e-12)
    assert b["log2_symmetric"] > b["log2_rogers_symmetric"]
    assert math.isclose(2 ** b["log2_minkowski_hlawka"], 2 * z / 2 ** 8, rel_tol=1e-12)


def test_asymptotic_bounds_large_dimension_do_not_underflow():
    b = asymptotic_bounds(FamilySpec("cyclo-quat", 161), 2)
    assert b["n_k"] == 8 * euler_phi(161) == 1056
    assert b["log2_cycloquat_target"] == pytest.approx(math.log2(24 * 161) - 1056, abs=1e-12)
    assert math.isfinite(b["log2_rogers_symmetric"])
