import math

import numpy as np
import pytest

from penciltrace.special import (BTable, DivergentMomentError, a_coeffs,
                                 b_one, b_plain, b_radial_oracle,
                                 b_two, gamma_half, moment_qmc_oracle,
                                 sphere_moment, PiRat, PiSum)
from fractions import Fraction


def test_gamma_half_integer_values():
    assert float(gamma_half(8)) == math.factorial(3)
    assert abs(float(gamma_half(1)) - math.sqrt(math.pi)) < 1e-15
    assert abs(float(gamma_half(7)) - 15 * math.sqrt(math.pi) / 8) < 1e-14


def test_b_plain_values():
    assert abs(b_plain(2, 2) - math.pi) < 1e-14
    assert abs(b_plain(4, 5) - math.pi**3 / 12) < 1e-14


def test_b_plain_divergence_boundary():
    with pytest.raises(DivergentMomentError):
        b_plain(3, 6)


def test_b_one_values():
    assert abs(b_one(5, 5) - math.pi**3 / 96) < 1e-14
    assert abs(b_one(6, 5) - math.pi**3 / 320) < 1e-15


def test_b_two_finiteness_region():
    # the integrand eta1^4 (1+|eta|^2)^(-j) in d=5 converges iff 2j-4 > 5
    with pytest.raises(DivergentMomentError):
        b_two(4, 5)
    with pytest.raises(DivergentMomentError):
        b_two(5, 6)
    assert abs(b_two(5, 5) - math.pi**3 / 32) < 1e-14


def test_sphere_moment_surface_identity():
    assert abs(sphere_moment((), 3) - 2 * math.pi) < 1e-14


def test_sphere_moment_consistency_with_b_one():
    from scipy import integrate
    for d, j in ((3, 4), (5, 5)):
        M = sphere_moment((2,), d)
        radial, _ = integrate.quad(lambda u: u ** ((d + 2) / 2 - 1)
                                   * (1 + u) ** (-j), 0, np.inf)
        assert abs(M * radial - b_one(j, d)) < 1e-10 * b_one(j, d)


def test_sphere_moment_rejects_odd():
    with pytest.raises(ValueError, match="odd"):
        sphere_moment((1, 2), 4)


@pytest.mark.parametrize("j,k,l,d", [
    (4, 0, 0, 5), (5, 0, 0, 5), (6, 0, 0, 5), (7, 0, 0, 5),
    (5, 1, 0, 5), (6, 1, 0, 5), (7, 1, 0, 5),
    (6, 2, 0, 5), (7, 2, 0, 5), (6, 1, 1, 5), (7, 1, 1, 5),
    (4, 0, 0, 7), (5, 0, 0, 7), (6, 0, 0, 7), (7, 0, 0, 7),
    (5, 1, 0, 7), (6, 1, 0, 7), (7, 1, 0, 7),
    (6, 2, 0, 7), (7, 2, 0, 7), (6, 1, 1, 7), (7, 1, 1, 7),
])
def test_b_table_against_radial_quadrature(j, k, l, d):
    val = BTable(d).b(j, k, l)
    oracle = b_radial_oracle(j, k, l, d)
    assert abs(val - oracle) <= 1e-10 * abs(oracle)
    assert val > 0


def test_b_values_decrease_in_j():
    tb = BTable(5)
    for k, l in ((0, 0), (1, 0), (2, 0), (1, 1)):
        prev = None
        for j in range(5, 9):
            v = tb.b(j, k, l)
            if prev is not None:
                assert v < prev
            prev = v


def test_b_one_recurrence_identity():
    for d in (3, 5, 7):
        for j in (5, 6, 7):
            lhs = b_one(j, d) * d + b_plain(j, d)
            rhs = b_plain(j - 1, d)
            assert abs(lhs - rhs) <= 1e-13 * abs(rhs)


def test_a_coeffs_d5_exact_values():
    a = a_coeffs(5)
    assert abs(a.a1 - math.pi**3 / 1920) < 1e-15
    assert abs(a.a2 - math.pi**3 / 960) < 1e-15
    assert abs(a.a1_combo + math.pi**3 / 480) < 1e-15
    assert a.discrepancy > 0  # the quoted combination disagrees; surfaced


def test_a_coeffs_d7_positive():
    a = a_coeffs(7)
    assert a.a2 > 0
    assert abs(a.a2 - math.pi**4 / 480) < 1e-15


def test_a_coeffs_domain():
    with pytest.raises(ValueError):
        a_coeffs(6)


def test_a1_matches_defining_integral_qmc():
    a = a_coeffs(5)

    def integrand(eta):
        u = (eta**2).sum(axis=1)
        return (4 * eta[:, 0] ** 2 - (1 + u)) ** 2 / (96 * (1 + u) ** 6)

    mean, stderr = moment_qmc_oracle(integrand, 5)
    assert abs(mean - a.a1) <= 3 * stderr


def test_pirat_arithmetic():
    x = PiRat(Fraction(1, 2), 2)  # pi/2
    y = PiRat(Fraction(3), 2)
    assert float(x + y) == pytest.approx(3.5 * math.pi)
    s = PiSum.of(x, PiRat(Fraction(1), 0))
    assert float(s) == pytest.approx(math.pi / 2 + 1)
    assert float(x * PiRat(Fraction(2), -2)) == pytest.approx(1.0)
