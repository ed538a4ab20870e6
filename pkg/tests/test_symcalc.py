from fractions import Fraction

import numpy as np
import pytest

from penciltrace.polyalg import MultiPoly, parse_poly
from penciltrace.symcalc import (INF_VALUATION, ParamSymbol, check_degree,
                                 check_index_range, check_lemma_val,
                                 compare_with_printed_k2, d_x, d_xi,
                                 expand_generic, instantiate, k0, next_order,
                                 q_decomposition, symbol_chain,
                                 valuation, weyl_sign, _concrete_key)


def test_k0_structure():
    S = k0(2)
    assert len(S) == 1
    ((nu, k, xi, dmons),) = S.terms
    assert (nu, k, xi, dmons) == (0, 0, (0, 0), ())
    assert S.terms[(nu, k, xi, dmons)] == Fraction(1)


def test_k0_instantiated_value():
    P = parse_poly("x1^2", dim=1)
    ev = instantiate(k0(1), P)
    # L = 0 + (1 - i)^2 = -2i at (x, xi, z) = (1, 0, i): 1/L = i/2
    assert ev((1.0,), (0.0,), 1j) == pytest.approx(0.5j)


def test_k0_valuation_and_degree():
    S = k0(3)
    qd = q_decomposition(S)
    assert list(qd) == [0]
    assert valuation(qd[0]) == 0


def test_dxi_k0_closed_rule():
    S = d_xi(k0(2), 0)
    assert S.terms == {(0, 1, (1, 0), ()): Fraction(-2)}


def test_dx_k0_closed_rule():
    S = d_x(k0(2), 0)
    assert S.terms == {(1, 1, (0, 0), ((1, 0),)): Fraction(-2)}


def test_dx_dxi_k0_mixed():
    S = d_x(d_xi(k0(2), 0), 0)
    # 8 xi_1 (P-z) dP_1 / L^3
    assert S.terms == {(1, 2, (1, 0), ((1, 0),)): Fraction(8)}


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_recursion_reproduces_printed_k2(d):
    rep = compare_with_printed_k2(d)
    assert rep["equal"], rep["diffs"][:5]


def test_k2_contains_lap_term_with_unit_coefficient():
    S = symbol_chain(1, d=3, mode="concrete")[1]
    key = _concrete_key(1, 2, (0, 0, 0), ((2, 0, 0),))
    assert S.terms[key] == Fraction(1)
    key2 = _concrete_key(0, 2, (0, 0, 0), ((1, 0, 0), (1, 0, 0)))
    assert S.terms[key2] == Fraction(1)


def test_k2_k_range():
    S = symbol_chain(1, d=2, mode="concrete")[1]
    assert S.k_values() == {2, 3}


def test_k4_k_range_and_decomposition():
    S = symbol_chain(2, d=2, mode="concrete")[2]
    assert S.k_values() <= {3, 4, 5, 6}
    qd = q_decomposition(S)
    assert set(qd) <= {3, 4, 5, 6}


def test_index_range_invariant():
    for j, S in enumerate(symbol_chain(3, d=2, mode="concrete")):
        if j >= 1:
            assert check_index_range(S)["ok"]


def test_valuation_single_term():
    group = [(Fraction(1), 2, (2, 0), ())]  # (P-z)^2 xi_1^2
    assert valuation(group) == 4
    assert valuation([]) == INF_VALUATION


def test_valuation_of_k2_top_group():
    S = symbol_chain(1, d=2, mode="concrete")[1]
    qd = q_decomposition(S)
    assert valuation(qd[3]) == 2


def test_lemma_vacuous_at_j1():
    rep = check_lemma_val(1, mode="concrete", d=2)
    assert rep["ok"] and rep["rows"] == []


def test_lemma_j2_concrete():
    rep = check_lemma_val(2, mode="concrete", d=2)
    assert rep["ok"]
    (row,) = rep["rows"]
    assert row["j"] == 2 and row["k"] == 6 and row["required"] == 2


def test_degree_sharp_bound_holds():
    for j, S in enumerate(symbol_chain(3, d=2, mode="concrete")):
        if j >= 1:
            assert check_degree(S, "sharp")["ok"]


@pytest.mark.xfail(strict=True, reason="the displayed joint-degree bound "
                   "nu+|gamma| <= k-2 is violated already by the order-2 "
                   "numerator (P-z)*lap(P)/L^3 (degree 1 > 0); no "
                   "representation can satisfy it since the symbol decays "
                   "strictly slower than the bound implies")
def test_degree_bound_as_displayed():
    S = symbol_chain(1, d=2, mode="concrete")[1]
    assert check_degree(S, "printed")["ok"]


def test_generic_matches_concrete_at_d5():
    gch = symbol_chain(2, mode="generic")
    cch = symbol_chain(2, d=5, mode="concrete")
    assert expand_generic(gch[1], 5) == cch[1]
    assert expand_generic(gch[2], 5) == cch[2]


def test_generic_matches_concrete_low_d():
    gch = symbol_chain(2, mode="generic")
    for d in (1, 2, 3):
        cch = symbol_chain(2, d=d, mode="concrete")
        assert expand_generic(gch[2], d) == cch[2]


def test_instantiate_matches_term_assembly():
    P = parse_poly("x1^2 + 0.5*x1*x2 + x2^4", dim=2)
    S = symbol_chain(1, d=2, mode="concrete")[1]
    ev = instantiate(S, P)
    x, xi, z = (0.7, -0.3), (0.4, 1.1), 0.9 + 1.3j
    # direct assembly from the printed K2 shape
    from penciltrace.polyalg import derivative, evaluate
    Px = evaluate(P, x)
    w = Px - z
    L = xi[0] ** 2 + xi[1] ** 2 + w * w
    g = [evaluate(derivative(P, (1, 0)), x), evaluate(derivative(P, (0, 1)), x)]
    H = [[evaluate(derivative(P, (2, 0)), x), evaluate(derivative(P, (1, 1)), x)],
         [evaluate(derivative(P, (1, 1)), x), evaluate(derivative(P, (0, 2)), x)]]
    lap = H[0][0] + H[1][1]
    grad2 = g[0] ** 2 + g[1] ** 2
    hxx = sum(H[i][j] * xi[i] * xi[j] for i in range(2) for j in range(2))
    gdot = g[0] * xi[0] + g[1] * xi[1]
    ref = (w * lap + grad2) / L**3 - 2 * (w * hxx + gdot**2 + w**2 * grad2) / L**4
    assert ev(x, xi, z) == pytest.approx(ref, rel=1e-13)


def test_instantiate_zero_symbol():
    S = ParamSymbol(2, "concrete", 2, {})
    P = parse_poly("x1^2 + x2^2", dim=2)
    assert instantiate(S, P)((1.0, 2.0), (0.5, 0.5), 1j) == 0


@pytest.mark.parametrize("seed", [0, 1])
def test_dx_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    d = 2
    P = MultiPoly(d, {(2, 0): float(rng.integers(1, 4)),
                      (0, 4): float(rng.integers(1, 4)),
                      (1, 1): float(rng.integers(-3, 4))})
    S = symbol_chain(1, d=d, mode="concrete")[1]
    dS = d_x(S, 0)
    ev = instantiate(S, P)
    dev = instantiate(dS, P)
    x = rng.uniform(-1, 1, d)
    xi = rng.uniform(-1, 1, d)
    z = complex(-1.2, 0.8)
    h = 1e-6
    xp, xm = x.copy(), x.copy()
    xp[0] += h
    xm[0] -= h
    fd = (ev(xp, xi, z) - ev(xm, xi, z)) / (2 * h)
    assert abs(dev(x, xi, z) - fd) <= 1e-6 * max(1.0, abs(fd))


def test_dxi_matches_finite_differences():
    P = parse_poly("x1^2 + x2^2", dim=2)
    S = symbol_chain(2, d=2, mode="concrete")[2]
    dS = d_xi(S, 1)
    ev = instantiate(S, P)
    dev = instantiate(dS, P)
    x, xi, z = (0.5, -0.7), [0.3, 0.9], -1.0 + 0.5j
    h = 1e-6
    xp = [xi[0], xi[1] + h]
    xm = [xi[0], xi[1] - h]
    fd = (ev(x, xp, z) - ev(x, xm, z)) / (2 * h)
    assert abs(dev(x, xi, z) - fd) <= 1e-6 * max(1.0, abs(fd))


def test_odd_xi_terms_cancel_under_symmetrization():
    # averaging an instantiated symbol over the sign flips of xi equals the
    # sum of its per-coordinate-even terms only
    P = parse_poly("x1^2 + x1*x2 + x2^4", dim=2)
    S = symbol_chain(2, d=2, mode="concrete")[2]
    even_terms = {key: c for key, c in S.terms.items()
                  if all(e % 2 == 0 for e in key[2])}
    Seven = ParamSymbol(S.order, "concrete", 2, even_terms)
    ev = instantiate(S, P)
    ev_even = instantiate(Seven, P)
    x, z = (0.4, -0.8), -1.5 + 0.7j
    xi = (0.6, 1.1)
    flips = [(sx * xi[0], sy * xi[1]) for sx in (1, -1) for sy in (1, -1)]
    avg = sum(ev(x, ff, z) for ff in flips) / 4
    assert avg == pytest.approx(ev_even(x, xi, z), rel=1e-12)


def test_next_order_requires_history():
    with pytest.raises(ValueError):
        next_order([])


def test_weyl_sign():
    assert weyl_sign(0) == 1 and weyl_sign(1) == -1 and weyl_sign(2) == 1


def test_pruned_recursion_drops_vanishing_factors():
    def prune(m):
        nz = [e for e in m if e]
        return len(nz) > 1 or (nz and nz[0] > 4)

    full = symbol_chain(2, d=2, mode="concrete")[2]
    pruned = symbol_chain(2, d=2, mode="concrete", prune=prune)[2]
    assert len(pruned) < len(full)
    kept = {key for key in full.terms
            if not any(prune(m) for m in key[3])}
    assert set(pruned.terms) == kept
    for key in pruned.terms:
        assert pruned.terms[key] == full.terms[key]
