import math

import pytest

from penciltrace.contour import (ContourSpec, J, I, contour_integrate,
                                 i_recursion_residual, j_pieces)
from penciltrace.testfun import InversePowerF


def spec_for(u, v, **kw):
    return ContourSpec(r0=min(0.5, 0.4 * math.hypot(v, math.sqrt(u))),
                       R_max=kw.get("R_max", 800.0),
                       n_nodes=kw.get("n_nodes", 96))


def test_orientation_calibration():
    # single pole of residue one in the right region -> winding +1
    res = contour_integrate(lambda z: 1 / (z - 1))
    assert abs(res.value - 1) < 1e-10


def test_excluded_pole():
    res = contour_integrate(lambda z: 1 / (z + 3))
    assert abs(res.value) < 1e-12


def test_j_closed_form_vs_contour_example():
    f = InversePowerF(t=1.0, mu=4)
    g = lambda z: (0 - z) / (1 + (0 - z) ** 2) * f(z)
    cv = contour_integrate(g, spec_for(1.0, 0.0)).value
    assert abs(J(0, 1, f, 1.0, 0.0) - cv) < 1e-8 * abs(cv)


def test_j01_value_under_plus_winding():
    # With poles enclosed at winding +1 the residue sum is -(f(i)+f(-i))/2,
    # the sign opposite to the reversed-traversal convention.
    f = InversePowerF(t=1.0, mu=4)
    val = J(0, 1, f, 1.0, 0.0)
    expected = -(f(1j) + f(-1j)) / 2
    assert val == pytest.approx(expected.real, abs=1e-15)
    assert val.real == pytest.approx(0.25)


def test_j00_schwarz_identity():
    f = InversePowerF(t=1.0, mu=4)
    for u, v in ((1.0, 2.0), (0.3, 0.0), (5.0, 1.5)):
        lhs = J(0, 0, f, u, v)
        rhs = (f(v + 1j * math.sqrt(u))).imag / math.sqrt(u)
        assert abs(lhs - rhs) < 1e-13 * max(1.0, abs(rhs))


def test_j1_matches_u_derivative():
    f = InversePowerF(t=1.0, mu=6)
    u, v = 2.0, 1.0
    h = 1e-5
    fd = -(J(0, 2, f, u + h, v) - J(0, 2, f, u - h, v)) / (2 * h)
    assert abs(J(1, 2, f, u, v) - fd) < 1e-8 * abs(fd)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("nu", [0, 1, 2, 4])
@pytest.mark.parametrize("u,v", [(0.1, 0.0), (1.0, 1.0), (10.0, 5.0)])
def test_j_vs_contour_grid(k, nu, u, v):
    f = InversePowerF(t=2.5, mu=8)
    jv = J(k, nu, f, u, v)
    g = lambda z: (v - z) ** nu / (u + (v - z) ** 2) ** (k + 1) * f(z)
    cv = contour_integrate(g, spec_for(u, v)).value
    assert abs(jv - cv) <= 1e-8 * max(abs(cv), 1e-300)


def test_series_and_closed_agree_in_overlap():
    f = InversePowerF(t=1.0, mu=4)
    worst = 0.0
    for k in range(7):
        for nu in range(5):
            for v in (0.0, 0.7, 3.0):
                w2 = (v + 1.0) ** 2
                for u in (0.2 * w2, 0.25 * w2, 0.35 * w2):
                    a = J(k, nu, f, u, v, mode="series")
                    b = J(k, nu, f, u, v, mode="closed")
                    worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-30))
    assert worst < 1e-10


def test_j_rejects_u_zero():
    f = InversePowerF(t=1.0, mu=4)
    with pytest.raises(ValueError, match="singular"):
        J(0, 0, f, 0.0, 1.0)


def test_i_is_j():
    f = InversePowerF(t=1.0, mu=4)
    assert I(0, 0, f, 0.7, 1.2) == J(0, 0, f, 0.7, 1.2)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("nu", [1, 2])
def test_integration_by_parts_recursion(k, nu):
    f = InversePowerF(t=1.0, mu=4)
    for u, v in ((0.5, 1.0), (2.0, 0.3), (0.05, 0.2)):
        assert i_recursion_residual(k, nu, f, u, v) < 1e-9


def test_i_small_u_boundedness():
    # I(l, 0) stays bounded near u = 0 (its limit is a pure residue), so the
    # product with u^(l-1) is bounded on the sampled range.
    f = InversePowerF(t=1.0, mu=6)
    for ell in (1, 2, 3):
        vals = [abs(I(ell, 0, f, u, 1.0)) * u ** (ell - 1)
                for u in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)]
        assert max(vals) < 10.0


def test_j_real_for_real_f():
    f = InversePowerF(t=1.0, mu=5)
    for k in (0, 1, 2, 3):
        for nu in (0, 1, 2, 3):
            val = J(k, nu, f, 0.8, 1.3)
            assert abs(val.imag) <= 1e-12 * max(abs(val), 1e-30)


def test_j_pieces_structure():
    pieces = j_pieces(0, 1)
    assert len(pieces) == 2
    # tail warning fires for slowly decaying integrands
    res = contour_integrate(lambda z: 1 / (z - 1), ContourSpec())
    assert res.tail_warning  # 1/(z-1) decays like 1/R on the rays


def test_contour_rejects_nonfinite():
    with pytest.raises(ValueError, match="non-finite"):
        contour_integrate(lambda z: float("inf") if abs(z) > 100 else 1.0,
                          ContourSpec())
