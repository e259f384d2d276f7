import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from primeprod.analytic import (
    COSINE_INTERVAL,
    WeightFunction,
    coset_masses,
    cosine_expression,
    heathbrown_sum,
    laplace_F,
    least_prime_with_char_value,
    quadratic_case_check,
    thm2_case_certificate,
    thm2_grid_check,
    thm3_cosine_certificate,
    thm3_M_combination,
    weight_eval,
)
from primeprod.errors import ResourceLimitError
from primeprod.modgroup import characters, trivial_character, unit_group_structure


def is_prime(n):
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


def test_weight_examples():
    assert weight_eval(WeightFunction(6 / 5), 0) == 6 / 5
    assert weight_eval(WeightFunction(6 / 5), 2) == 0
    assert WeightFunction(1)(0.5) == 0.5
    with pytest.raises(ValueError):
        weight_eval(WeightFunction(1), -0.1)
    with pytest.raises(ValueError):
        WeightFunction(0)


def test_laplace_examples():
    assert laplace_F(6 / 5, 0) == pytest.approx(0.72, abs=1e-15)
    assert abs(laplace_F(1, 1) - math.exp(-1)) < 1e-15
    oracle = quad(lambda t: (1 - t) * math.exp(-t), 0, 1)[0]
    assert abs(laplace_F(1, 1).real - oracle) < 1e-12


def quad_F(alpha, z):
    re = quad(lambda t: (alpha - t) * math.exp(-z.real * t) * math.cos(z.imag * t), 0, alpha, epsabs=1e-13, limit=200)[0]
    im = quad(lambda t: -(alpha - t) * math.exp(-z.real * t) * math.sin(z.imag * t), 0, alpha, epsabs=1e-13, limit=200)[0]
    return complex(re, im)


def test_laplace_matches_quadrature():
    rng = np.random.default_rng(11)
    for _ in range(100):
        z = complex(rng.uniform(0, 10), rng.uniform(-10, 10))
        alpha = rng.uniform(0.2, 2)
        assert abs(laplace_F(alpha, z) - quad_F(alpha, z)) < 1e-8


def test_laplace_continuous_at_zero():
    for z in (1e-3, 1e-6, 1e-9, 1e-6j, 0.49, 0.51, 0.5 + 0.01j):
        assert abs(laplace_F(1.2, z) - quad_F(1.2, complex(z))) < 1e-12


def test_laplace_right_half_plane_nonnegative():
    x = np.linspace(0, 50, 100)
    y = np.linspace(-50, 50, 100)
    Z = (x[:, None] + 1j * y[None, :]).ravel()
    Z = Z[np.abs(Z) <= 50]
    assert (laplace_F(6 / 5, Z).real >= -1e-12).all()
    assert (laplace_F(6 / 5, 1j * np.linspace(-50, 50, 2001)).real >= -1e-12).all()


def direct_prime_sum(q, alpha, chi=None):
    L = math.log(q)
    total = []
    for p in range(2, math.floor(q**alpha) + 1):
        if is_prime(p) and q % p:
            t = math.log(p) / L
            if t <= alpha:
                c = 1 if chi is None else chi(p % q)
                total.append(c * math.log(p) / p * (alpha - t))
    raw = complex(math.fsum(z.real for z in total), math.fsum(complex(z).imag for z in total))
    return raw, 2 / (alpha * alpha * L) * raw.real


@pytest.mark.parametrize("q", [11, 100, 360, 1000])
def test_prime_sum_matches_direct_sum(q):
    r = heathbrown_sum(q, None, 6 / 5)
    raw, norm = direct_prime_sum(q, 6 / 5)
    assert abs(r.raw - raw) < 1e-12 * max(1, abs(raw))
    assert abs(r.normalized - norm) < 1e-12
    chi = characters(q)[-1]
    r = heathbrown_sum(q, chi, 6 / 5)
    raw, norm = direct_prime_sum(q, 6 / 5, chi)
    assert abs(r.raw - raw) < 1e-11
    assert abs(r.normalized - norm) < 1e-11


def test_prime_sum_trend_and_triangle():
    vals = [heathbrown_sum(q, None, 6 / 5).normalized for q in (10**3, 10**4, 10**5)]
    gaps = [abs(v - 1) for v in vals]
    assert gaps[0] > gaps[1] > gaps[2]
    q = 1009
    r0 = heathbrown_sum(q, None, 6 / 5)
    for chi in characters(q)[1:40]:
        assert abs(heathbrown_sum(q, chi, 6 / 5).raw) <= r0.raw.real + 1e-12
    assert r0.prime_power_raw.real > 0


def test_prime_sum_empty_and_errors():
    r = heathbrown_sum(1000, None, 0.05)  # 1000^0.05 < 2
    assert r.raw == 0 and r.n_primes == 0
    with pytest.raises(ValueError):
        heathbrown_sum(1000, None, 2.5)
    with pytest.raises(ValueError):
        heathbrown_sum(1000, characters(7)[1], 1)
    with pytest.raises(ResourceLimitError):
        heathbrown_sum(10**6, None, 1.5, ceiling=10**7)


def test_coset_masses():
    q = 101
    total = heathbrown_sum(q, None, 1.0).normalized
    single = coset_masses(q, 1.0, lambda n: "all")
    assert abs(single["all"] - total) < 1e-12
    qr = {n * n % q for n in range(1, q)}
    split = coset_masses(q, 1.0, lambda n: n in qr)
    assert set(split) == {True, False}
    assert abs(sum(split.values()) - total) < 1e-12
    assert all(v >= 0 for v in split.values())


@pytest.mark.parametrize("q", [41, 73, 97])
def test_coset_masses_recover_character_sum(q):
    # masses on the cosets of ker(chi) weighted by Re chi reproduce S(chi)
    G = unit_group_structure(q)
    for chi in [c for c in characters(q) if c.order in (2, 4, 8)][:4]:
        labels = np.full(q, -1)
        for n in G.residues:
            labels[n] = chi.phase(int(n))
        masses = coset_masses(q, 1.2, labels)
        combo = math.fsum(m * math.cos(2 * math.pi * k / G.exponent) for k, m in masses.items())
        assert abs(combo - heathbrown_sum(q, chi, 1.2).normalized) < 1e-10


def test_c8_case_examples():
    c = thm2_case_certificate(0, 3, 0.6, 0.4)
    assert c.case == "i0" and c.contradiction_found
    c = thm2_case_certificate(2, 1, 0.5, 0.5)
    assert c.case == "i26" and c.contradiction_found
    lhs = {ineq["chi_power"]: ineq["lhs"] for ineq in c.inequalities if "chi_power" in ineq}
    assert lhs[4] == 0.0  # M - N
    assert lhs[1] == pytest.approx(0.5 / math.sqrt(2))
    assert c.combined_bound == pytest.approx((math.sqrt(8) + 1) / 4)
    c = thm2_case_certificate(4, 1, 0.25, 0.75)
    assert c.case == "i4" and c.contradiction_found
    first, second = (i for i in c.inequalities if "chi_power" in i)
    assert first["holds"] and not second["holds"]
    assert second["lhs"] == pytest.approx(-0.25 + 0.75 / math.sqrt(2))
    assert thm2_case_certificate(1, 3, 0.5, 0.5).case == "coset_degenerate"
    assert thm2_case_certificate(2, 4, 0.5, 0.5).case == "coset_degenerate"


def test_c8_no_contradiction_off_the_simplex():
    assert not thm2_case_certificate(2, 1, 0.1, 0.1).contradiction_found


@settings(max_examples=200)
@given(st.floats(0, 10), st.floats(0, 10))
def test_real_part_identities(M, N):
    r2 = math.sqrt(2)
    assert abs((M + N) - ((M - N) + math.sqrt(8) * (N / r2))) <= 1e-12 * max(1, M + N)
    assert abs((M + N) - (r2 * (-M + N / r2) + (r2 + 1) * M)) <= 1e-12 * max(1, M + N)


def test_c8_grid_margin():
    assert thm2_grid_check(0, 1, 0.05)["contradiction_everywhere"]
    # the C_8 chain only closes when tol is below 1 - (sqrt8+1)/4 ~ 0.0429
    for i in (2, 4, 6):
        assert thm2_grid_check(i, 1, 0.04)["contradiction_everywhere"]
        g = thm2_grid_check(i, 1, 0.05)
        M, N = g["witness"]
        assert not thm2_case_certificate(i, 1, M, N, 0.05).contradiction_found


def test_cosine_certificate():
    c = thm3_cosine_certificate(1e-5)
    assert abs(c.value_at_half - 0.19) < 1e-6
    assert abs(c.min_value - 0.014) <= 1e-3
    assert abs(c.argmin - 0.564) <= 1e-3
    assert c.positive_on_interval
    assert abs(c.first_zero_above - 0.656) < 1e-3 and c.first_zero_above > COSINE_INTERVAL[1]
    with pytest.raises(ValueError):
        thm3_cosine_certificate(1e-3)


def test_cosine_symmetry():
    z = np.random.default_rng(3).random(1000)
    assert np.abs(cosine_expression(z) - cosine_expression(1 - z)).max() < 1e-12


def test_M_combination():
    q = 101
    chi1 = next(c for c in characters(q) if c.order == 5)
    m = thm3_M_combination(q, chi1)
    assert m.coefficient_sum == pytest.approx(4.79)
    assert m.coefficient_check
    assert m.hypothetical_bound < 0
    assert math.isfinite(m.value)
    expect = 2.7 * m.terms["S(chi1^2)"] + 1.8 * m.terms["S(chi1^3)"] + 0.29 * m.terms["S(chi1^6)"] - m.terms["S(chi0)"]
    assert m.value == pytest.approx(expect, abs=1e-12)
    with pytest.raises(ValueError):
        # 3 divides no 3k+2
        thm3_M_combination(103, next(c for c in characters(103) if c.order == 3))


def legendre_character(q):
    return next(c for c in characters(q) if c.order == 2)


def test_least_prime_examples():
    assert least_prime_with_char_value(5, legendre_character(5), 1) == 11
    assert least_prime_with_char_value(5, legendre_character(5), -1) == 2
    assert least_prime_with_char_value(7, legendre_character(7), -1) == 3
    with pytest.raises(ValueError):
        least_prime_with_char_value(5, trivial_character(5), 1)
    with pytest.raises(ValueError):
        least_prime_with_char_value(5, legendre_character(5), 0)


@pytest.mark.parametrize("q", [13, 60, 97, 1009])
def test_least_prime_matches_scan(q):
    for chi in [c for c in characters(q) if c.order == 2]:
        for target in (1, -1):
            p = least_prime_with_char_value(q, chi, target)
            expect = next(n for n in range(2, 10**5) if is_prime(n) and q % n and round(chi(n % q).real) == target)
            assert p == expect


def test_quadratic_case_check():
    rows = quadratic_case_check(1009)
    assert len(rows) == 1 and rows[0]["both_below"]
    # (Z/120Z)* = C2 x C2 x C2 x C4 has 2^4 - 1 real nontrivial characters
    assert len(quadratic_case_check(120)) == 15
