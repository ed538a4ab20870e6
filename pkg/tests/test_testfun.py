import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from penciltrace.testfun import (InversePowerF, SectorSpec, decay_admissible,
                                 default_mu, f_deriv, in_sector)


def test_f_deriv_values():
    f = InversePowerF(t=1.0, mu=7)
    assert f_deriv(f, 0, 0.0) == 1.0
    assert f_deriv(f, 1, 0.0) == -7.0
    f4 = InversePowerF(t=1.0, mu=4)
    assert f_deriv(f4, 3, 1.0) == pytest.approx(-0.9375, abs=1e-15)


def test_f_deriv_pole():
    f = InversePowerF(t=1.0, mu=2)
    with pytest.raises(ZeroDivisionError):
        f_deriv(f, 0, -1.0)


def test_f_deriv_branch_cut_noninteger():
    f = InversePowerF(t=1.0, mu=2.5)
    with pytest.raises(ValueError, match="cut"):
        f_deriv(f, 0, -3.0)
    # integer exponent has no cut
    g = InversePowerF(t=1.0, mu=3)
    assert f_deriv(g, 0, -3.0) == pytest.approx((-2.0) ** -3)


def _central_kth(f, k, s, h):
    from math import comb
    # k-th central difference on the half-integer grid, O(h^2) accurate
    return sum((-1) ** m * comb(k, m) * f_deriv(f, 0, s + (k / 2 - m) * h)
               for m in range(k + 1)) / h**k


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_f_deriv_matches_finite_differences(k):
    f = InversePowerF(t=1.0, mu=5)
    h = 0.04
    for s in np.linspace(0.0, 10.0, 7):
        d1 = _central_kth(f, k, s, h)
        d2 = _central_kth(f, k, s, h / 2)
        d3 = _central_kth(f, k, s, h / 4)
        e1 = (4 * d2 - d1) / 3
        e2 = (4 * d3 - d2) / 3
        fd = (16 * e2 - e1) / 15  # two Richardson steps
        exact = f_deriv(f, k, s)
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


def test_decay_admissible_thresholds():
    assert decay_admissible(InversePowerF(mu=7), 5, 4)          # 7 > 6.25
    assert not decay_admissible(InversePowerF(mu=6), 5, 4)      # 6 < 6.25
    assert decay_admissible(InversePowerF(mu=2), 1, 2)          # 2 > 1.5
    assert default_mu(5, 4) == 7


def test_in_sector():
    spec = SectorSpec(r0=1.0, delta=0.1)
    assert in_sector(-2.0, spec)
    assert not in_sector(2.0, spec)
    assert not in_sector(0.4j - 0.3, spec)  # |z| = 0.5 < r0


def test_decay_bound_on_sector_sample():
    # the pole of (z+t)^(-mu) sits on the sector axis, so the decay bound
    # holds away from a fixed ball around it (that is all the contour needs:
    # the path and the enclosed region stay to the right of the pole)
    f = InversePowerF(t=1.0, mu=4)
    spec = SectorSpec(r0=0.5, delta=0.2)
    ratios = []
    for r in np.geomspace(0.5, 1e4, 25):
        for th in np.linspace(math.pi / 2 + 0.25, 3 * math.pi / 2 - 0.25, 9):
            z = r * cmath.exp(1j * th)
            if in_sector(z, spec) and abs(z + f.t) >= 0.5:
                ratios.append(abs(f(z)) * (1 + abs(z)) ** f.mu)
    assert len(ratios) > 100
    assert max(ratios) < 300.0  # bounded C over the sample


@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 4))
@settings(max_examples=80, deadline=None)
def test_schwarz_symmetry(re, im, k):
    f = InversePowerF(t=1.0, mu=4)
    s = complex(re, im)
    if abs(s + f.t) < 1e-6:
        return
    a = f_deriv(f, k, s)
    b = f_deriv(f, k, s.conjugate())
    assert cmath.isclose(a.conjugate(), b, rel_tol=1e-12, abs_tol=1e-300)
