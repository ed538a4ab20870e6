"""Finite-dimensional checks of the quadratic-pencil trace identities.

A pencil L(z) = L0 + z L1 + z^2 I (L0 symmetric positive definite, L1
symmetric) is linearized by the doubled companion matrix [[0, I], [-L0,
-L1]], whose eigenvalues coincide with the pencil's nonlinear spectrum with
multiplicity.  The resolvent-power traces are compared against the z-
derivatives of Tr[L(z)^-1 L'(z)], assembled exactly in a small
noncommutative word algebra, and against the eigenvalue sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .polyalg import MultiPoly

__all__ = [
    "QuadPencil",
    "SpectrumReport",
    "companion",
    "trace_identity_residual",
    "lidskii_residual",
    "discretize_1d",
    "refined_spectrum",
    "location_check",
    "counting_profile",
]

MAX_TRACE_ORDER = 8


@dataclass(frozen=True)
class QuadPencil:
    L0: np.ndarray
    L1: np.ndarray

    def __post_init__(self):
        L0 = np.atleast_2d(np.asarray(self.L0, dtype=float))
        L1 = np.atleast_2d(np.asarray(self.L1, dtype=float))
        object.__setattr__(self, "L0", L0)
        object.__setattr__(self, "L1", L1)
        if L0.shape != L1.shape or L0.shape[0] != L0.shape[1]:
            raise ValueError("L0 and L1 must be square and of equal size")
        if not np.allclose(L0, L0.T, atol=1e-12 * (1 + abs(L0).max())):
            raise ValueError("L0 must be symmetric")
        if not np.allclose(L1, L1.T, atol=1e-12 * (1 + abs(L1).max())):
            raise ValueError("L1 must be symmetric")
        try:
            np.linalg.cholesky(L0)
        except np.linalg.LinAlgError as exc:
            raise ValueError("L0 must be positive definite") from exc

    @property
    def n(self) -> int:
        return self.L0.shape[0]

    def at(self, z: complex) -> np.ndarray:
        return self.L0 + z * self.L1 + z * z * np.eye(self.n)


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: tuple
    converged: tuple
    location_violations: tuple
    levels: tuple


def companion(pencil: QuadPencil) -> np.ndarray:
    n = pencil.n
    A = np.zeros((2 * n, 2 * n))
    A[:n, n:] = np.eye(n)
    A[n:, :n] = -pencil.L0
    A[n:, n:] = -pencil.L1
    return A


# ---------------------------------------------------------------------------
# exact word algebra for d^k/dz^k (L^-1 L')
#
# words are tuples over {'A', 'B'} meaning L^-1 and L'(z); the derivative
# rules are d(A) = -A B A and d(B) = 2 * (empty word = identity scalar).


def _differentiate_words(words: dict) -> dict:
    out: dict = {}
    for word, c in words.items():
        for i, sym in enumerate(word):
            if sym == "A":
                neww = word[:i] + ("A", "B", "A") + word[i + 1:]
                out[neww] = out.get(neww, Fraction(0)) - c
            else:
                neww = word[:i] + word[i + 1:]
                out[neww] = out.get(neww, Fraction(0)) + 2 * c
    return {w: c for w, c in out.items() if c != 0}


def _trace_word_derivative(pencil: QuadPencil, z: complex, k: int) -> complex:
    """Tr[d^k/dz^k (L(z)^-1 L'(z))], derivatives taken symbolically first."""
    words = {("A", "B"): Fraction(1)}
    for _ in range(k):
        words = _differentiate_words(words)
    n = pencil.n
    Lz = pencil.at(z)
    Ainv = np.linalg.inv(Lz)
    B = pencil.L1 + 2 * z * np.eye(n)
    mats = {"A": Ainv, "B": B}
    total = 0j
    for word, c in words.items():
        M = np.eye(n, dtype=complex)
        for sym in word:
            M = M @ mats[sym]
        total += complex(c) * np.trace(M)
    return total


def _check_z(pencil: QuadPencil, z: complex):
    eigs = np.linalg.eigvals(companion(pencil))
    if np.min(np.abs(eigs - z)) < 1e-8:
        raise ValueError("z is within 1e-8 of an eigenvalue; ill conditioned")


def trace_identity_residual(pencil: QuadPencil, z: complex, k: int) -> float:
    """|Tr (A_L - z)^(-k-1) + (1/k!) Tr d^k(L^-1 L')| / (1 + |lhs|)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > MAX_TRACE_ORDER:
        raise ValueError(f"k > {MAX_TRACE_ORDER} not supported")
    _check_z(pencil, z)
    A = companion(pencil).astype(complex)
    R = np.linalg.inv(A - z * np.eye(A.shape[0]))
    lhs = complex(np.trace(np.linalg.matrix_power(R, k + 1)))
    rhs = -_trace_word_derivative(pencil, z, k) / math.factorial(k)
    return abs(lhs - rhs) / (1 + abs(lhs))


def lidskii_residual(pencil: QuadPencil, z: complex, k: int) -> float:
    """Residual of the eigenvalue-sum version of the same identity."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > MAX_TRACE_ORDER:
        raise ValueError(f"k > {MAX_TRACE_ORDER} not supported")
    _check_z(pencil, z)
    eigs = np.linalg.eigvals(companion(pencil))
    lhs = complex(np.sum((eigs - z) ** (-k - 1)))
    rhs = -_trace_word_derivative(pencil, z, k) / math.factorial(k)
    return abs(lhs - rhs) / (1 + abs(lhs))


# ---------------------------------------------------------------------------
# 1-d discretization


def discretize_1d(P: MultiPoly | tuple, X: float, n: int,
                  g: float = 0.0) -> QuadPencil:
    """Dirichlet finite-difference pencil for -(d/dx)^2 + (P(x) - z)^2 [+ g x^(m-1)].

    Accepts a one-variable polynomial, or a pair (m, g) selecting P = x^m
    with the extra potential g x^(m-1).
    """
    if isinstance(P, tuple):
        m, g = P
        P = MultiPoly(1, {(m,): 1.0})
    if P.dim != 1:
        raise ValueError("one-variable polynomial required")
    if n < 16:
        raise ValueError("grid too coarse")
    if X <= 0:
        raise ValueError("half-width must be positive")
    x = np.linspace(-X, X, n + 2)[1:-1]
    h = x[1] - x[0]
    lap = (np.diag(np.full(n, 2.0)) - np.diag(np.ones(n - 1), 1)
           - np.diag(np.ones(n - 1), -1)) / h**2
    Pv = P.eval_many(x[:, None])
    diag = Pv**2
    if g:
        diag = diag + g * x ** (P.degree - 1)
    L0 = lap + np.diag(diag)
    L1 = np.diag(-2.0 * Pv)
    return QuadPencil(L0=L0, L1=L1)


def refined_spectrum(P: MultiPoly | tuple, levels=((8.0, 200), (10.0, 400),
                                                   (12.0, 800)),
                     g: float = 0.0, match_tol: float = 1e-3,
                     box: float = 40.0) -> SpectrumReport:
    """Eigenvalues stable across discretization refinements.

    An eigenvalue of the finest level is 'converged' when a matching value
    exists on every coarser level within match_tol (relative), tracked by
    nearest-neighbour pairing inside a modulus box.
    """
    spectra = []
    for X, n in levels:
        pen = discretize_1d(P, X, n, g=g)
        eigs = np.linalg.eigvals(companion(pen))
        spectra.append(eigs[np.abs(eigs) <= box])
    fine = spectra[-1]
    converged = []
    for lam in fine:
        ok = True
        for coarse in spectra[:-1]:
            if len(coarse) == 0:
                ok = False
                break
            dist = np.min(np.abs(coarse - lam))
            if dist > match_tol * max(1.0, abs(lam)):
                ok = False
                break
        if ok:
            converged.append(complex(lam))
    violations = location_violations(converged)
    return SpectrumReport(eigenvalues=tuple(map(complex, fine)),
                          converged=tuple(converged),
                          location_violations=tuple(violations),
                          levels=tuple(levels))


def location_violations(eigs, tol: float = 1e-6) -> list:
    """Converged eigenvalues outside the two right-hand quarters."""
    out = []
    for lam in eigs:
        scale = max(abs(lam), 1.0)
        if lam.real < -tol * scale or abs(lam.imag) <= tol * scale:
            out.append(complex(lam))
    return out


def location_check(report: SpectrumReport) -> list:
    return list(report.location_violations)


def counting_profile(report: SpectrumReport, R_list) -> dict:
    """N(R) over the converged spectrum plus a log-log slope fit."""
    eigs = np.array(report.converged, dtype=complex)
    counts = {float(R): int(np.sum(np.abs(eigs) <= R)) for R in R_list}
    pairs = [(math.log(R), math.log(c)) for R, c in counts.items() if c > 0]
    slope = None
    if len(pairs) >= 2:
        xs = np.array([p[0] for p in pairs])
        ys = np.array([p[1] for p in pairs])
        slope = float(np.polyfit(xs, ys, 1)[0])
    return {"N_of_R": counts, "fitted_slope": slope,
            "n_converged": len(eigs)}
