"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from divpack import _exact
from divpack.aminima import (RealAlgebra, a_gram_schmidt, balance, balanced_minimum, geometric_mean_sq,
                             orthonormality_residual, successive_minima)
from divpack.algebra import build_invariant_form
from divpack.catalog import FamilySpec, asymptotic_bounds, build, find_congruence_prime, is_probable_prime
from divpack.catalog import order_discriminant
from divpack.codes import CodeParams, balancedness_audit, sample_code
from divpack.lattice import (bad_point_bound, covering_radius_sample, lift_code, order_bounds, order_lattice,
                             packing_density, primitive_counts, short_vectors, svp, unit_form)
from divpack.residue import build_reduction, det_compat_audit
from divpack.search import TestFunction, ball_radius, density_search, mc_average, order_power_volume, zeta

HURWITZ = FamilySpec("hurwitz")
CYC5 = FamilySpec("cyclotomic", 5)


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return emit


def test_criterion_01_d4(verdict):
    t0 = time.perf_counter()
    fam = build(HURWITZ)
    inst = order_lattice(fam.order, 1, unit_form(fam.order))
    res = svp(inst)
    rep = packing_density(inst, res)
    elapsed = time.perf_counter() - t0
    # oracle: exhaustive coordinate box, independent of LLL and enumeration
    g = np.array(inst.gram)
    pts = np.array(list(itertools.product(range(-3, 4), repeat=4)))
    norms = np.einsum("ij,jk,ik->i", pts, g, pts)
    box_min = int(norms[norms > 0].min())
    covolume = math.sqrt(inst.covolume_sq)
    ok = (Fraction(res.min_sq) == 4 == box_min and covolume == 8
          and abs(rep.density - math.pi ** 2 / 16) <= 1e-9 and elapsed < 1)
    verdict(1, ok, f"lambda1^2={res.min_sq} covolume={covolume} density={rep.density:.9f} ({elapsed:.2f}s)")
    assert ok


def test_criterion_02_balancedness(verdict):
    t0 = time.perf_counter()
    rows = []
    ok = True
    for (n, t, k, p), expected in [((2, 2, 3, 2), 3), ((2, 2, 3, 3), 4), ((1, 2, 1, 5), 1), ((1, 3, 2, 3), 4)]:
        res = balancedness_audit(CodeParams(n, t, k, p))
        good = res["uniform"] and res["L"] == expected == res["expected_L"]
        ok &= good
        rows.append(f"{(n, t, k, p)}:L={res['L']}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    verdict(2, ok, f"{' '.join(rows)} ({elapsed:.1f}s)")
    assert ok


def test_criterion_03_nrd_det(verdict):
    t0 = time.perf_counter()
    total, bad = 0, 0
    for spec, primes in [(HURWITZ, (3, 5, 7)), (CYC5, (11, 31, 41))]:
        fam = build(spec)
        for p in primes:
            res = det_compat_audit(build_reduction(fam, p), 10_000, random.Random(p))
            total += res["samples"]
            bad += len(res["violations"])
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and total == 60_000 and elapsed < 10
    verdict(3, ok, f"{bad} violations in {total} samples ({elapsed:.2f}s)")
    assert ok


def test_criterion_04_bad_point(verdict):
    t0 = time.perf_counter()
    fam = build(HURWITZ)
    a = unit_form(fam.order)
    inst = order_lattice(fam.order, 1, a)
    smap = build_reduction(fam, 3)
    bound = bad_point_bound(fam.order, a, 3)
    singular = []
    for coeffs, nrm in short_vectors(inst, 48, half=False):
        if _exact.rank_mod(smap.reduce(inst.to_ambient(coeffs)).tolist(), 3) < 2:
            singular.append((inst.to_ambient(coeffs), nrm))
    min_norm = min(math.sqrt(n) for _, n in singular)
    one_i_j = (1, 1, 1, 0)  # 1 + i + j in the basis 1, i, j, omega
    attained = any(v == one_i_j and n == 12 for v, n in singular)
    elapsed = time.perf_counter() - t0
    ok = (abs(bound - 2 * math.sqrt(3)) < 1e-12 and min_norm >= bound - 1e-12
          and abs(min_norm - bound) < 1e-12 and attained and elapsed < 10)
    verdict(4, ok, f"{len(singular)} singular points, min norm {min_norm:.6f} vs bound {bound:.6f}, "
                   f"1+i+j attains: {attained} ({elapsed:.2f}s)")
    assert ok


def test_criterion_05_covering(verdict):
    t0 = time.perf_counter()
    fam = build(HURWITZ)
    a = unit_form(fam.order)
    inst = order_lattice(fam.order, 1, a)
    upper = order_bounds(fam.order, a, order_discriminant(HURWITZ)["composed"])["covering_ub"]
    res = covering_radius_sample(inst, 100_000, random.Random(11))
    lower = res["lower_bound"]
    elapsed = time.perf_counter() - t0
    # the bound is 2^(1/4) * 4 / pi = 1.51415 in closed form for this order
    closed = 2 ** 0.25 * 4 / math.pi
    ok = 1.40 <= lower <= 1.513 and lower <= upper and abs(upper - closed) < 1e-12 and elapsed < 30
    verdict(5, ok, f"sampled lower bound {lower:.5f} (raw {res['sampled_lower_bound']:.5f}) "
                   f"<= upper bound {upper:.5f} ({elapsed:.1f}s)")
    assert ok


def test_criterion_06_mean_value_trend(verdict):
    t0 = time.perf_counter()
    fam = build(CYC5)
    a = build_invariant_form(fam.group)
    d = 8
    r = ball_radius(5 * zeta(d) * order_power_volume(a, 2), d)
    f = TestFunction("indicator", r, d)
    means = {p: mc_average(CYC5, 1, 2, p, f, None, random.Random(0)).mean for p in (11, 31, 101)}
    margins = [abs(means[p] - 5) for p in (11, 31, 101)]
    elapsed = time.perf_counter() - t0
    within = all(m <= 5 * 1.25 for m in means.values())
    shrinking = all(x > y for x, y in zip(margins, margins[1:]))
    ok = within and shrinking and elapsed < 300
    verdict(6, ok, f"means {', '.join(f'p={p}: {m:.4f}' for p, m in means.items())}; "
                   f"<= 6.25: {within}; margins {[round(m, 4) for m in margins]} shrinking: {shrinking} "
                   f"({elapsed:.1f}s)")
    assert ok


def test_criterion_07_density_search(verdict):
    t0 = time.perf_counter()
    target = 0.99 * 24 * zeta(8) / 2 ** 8
    hits = []
    details = []
    for p in (7, 11, 13):
        res = density_search(HURWITZ, 2, 3, p, sampling="exhaustive", workers=1)
        details.append(f"p={p}: {res.codes_tried} codes, best {res.best.density:.5f}")
        if not res.hit:
            continue
        inst = res.best_instance
        exact = svp(inst)
        certified = Fraction(exact.min_sq) == res.best.lambda1_sq
        m = exact.min_sq
        orbit_ok = all(c % 24 == 0 for c in primitive_counts(inst, [m, 2 * m, 3 * m]).values())
        if res.best.density >= target and certified and orbit_ok and not res.orbit_violations:
            hits.append(p)
    elapsed = time.perf_counter() - t0
    ok = bool(hits) and elapsed < 3600
    verdict(7, ok, f"target {target:.5f}; {'; '.join(details)}; certified hits at p={hits} ({elapsed:.1f}s)")
    assert ok


def test_criterion_08_balancing(verdict):
    t0 = time.perf_counter()
    fam = build(HURWITZ)
    a = build_invariant_form(fam.group)
    smap = build_reduction(fam, 11)
    rng = random.Random(2024)
    worst_cov, worst_ratio, all_ok = 0.0, math.inf, True
    for _ in range(100):
        inst = lift_code(smap, sample_code(CodeParams(2, 2, 3, 11), rng), a, 24)
        prof = successive_minima(inst)
        bal = balance(inst, prof)
        bm = balanced_minimum(bal)
        cov_err = abs(bal.covolume / math.sqrt(inst.covolume_sq) - 1)
        # geometric_mean_sq is min1 * min2 for t = 2
        ratio = math.sqrt(bm.lambda1_sq / geometric_mean_sq(prof))
        worst_cov, worst_ratio = max(worst_cov, cov_err), min(worst_ratio, ratio)
        all_ok &= cov_err <= 1e-9 and ratio >= 1 - 1e-9 and bm.certified
    elapsed = time.perf_counter() - t0
    ok = all_ok and elapsed < 600
    verdict(8, ok, f"100 lattices: max covolume error {worst_cov:.2e}, "
                   f"min lambda1(L')/sqrt(min1 min2) {worst_ratio:.12f} ({elapsed:.1f}s)")
    assert ok


def test_criterion_09_gram_schmidt(verdict):
    t0 = time.perf_counter()
    fam = build(HURWITZ)
    alg = RealAlgebra(fam.order)
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(1000):
        pair = [rng.normal(size=(2, 4)) for _ in range(2)]
        worst = max(worst, orthonormality_residual(alg, a_gram_schmidt(alg, pair)))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 60
    verdict(9, ok, f"max residual {worst:.2e} over 1000 pairs ({elapsed:.1f}s)")
    assert ok


def test_criterion_10_congruence_prime(verdict):
    t0 = time.perf_counter()
    lower = (161 * 132 ** 2) ** 264
    p = find_congruence_prime(161, lower)
    elapsed = time.perf_counter() - t0
    ok = p == lower + 223147 and (p - 1) % 161 == 0 and is_probable_prime(p) and elapsed < 1800
    verdict(10, ok, f"p = lower + {p - lower}, {len(str(p))} digits, p mod 161 = {p % 161} ({elapsed:.1f}s)")
    assert ok


def test_criterion_11_bound_calculators(verdict):
    b161 = asymptotic_bounds(FamilySpec("cyclo-quat", 161), 2)
    expected = math.log2(24 * 161) - 1056
    hur = asymptotic_bounds(HURWITZ, 2)
    # zeta(8) = pi^8 / 9450 in closed form
    z8 = math.pi ** 8 / 9450
    thm = math.log2(24 * z8 * 2 / (2 ** 8 * math.e * (1 - math.exp(-2))))
    err1 = abs(b161["log2_cycloquat_target"] - expected)
    err2 = abs(hur["log2_rogers_symmetric"] - thm)
    ok = b161["n_k"] == 1056 and err1 <= 1e-12 and err2 <= 1e-12
    verdict(11, ok, f"log2(24*161/2^1056) = {b161['log2_cycloquat_target']:.12f} (err {err1:.1e}); "
                    f"rogers bound at (2,1,2) = {hur['log2_rogers_symmetric']:.12f} (err {err2:.1e})")
    assert ok
