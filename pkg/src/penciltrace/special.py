"""Gamma/Beta closed forms for the moment integrals over (1+|eta|^2)^(-j).

Every Gamma argument arising here is a half-integer, so values are carried
exactly as ``rational * pi^(h/2)`` (:class:`PiRat`).  A 1-d radial quadrature
oracle and a quasi Monte-Carlo oracle are provided so the closed forms never
have to be trusted blindly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import ndtri

__all__ = [
    "PiRat",
    "PiSum",
    "gamma_half",
    "beta_half",
    "BTable",
    "ACoeffs",
    "b_plain",
    "b_one",
    "b_two",
    "b_oneone",
    "sphere_moment",
    "a_coeffs",
    "b_radial_oracle",
    "moment_qmc_oracle",
]


class DivergentMomentError(ValueError):
    """Requested moment integral does not converge."""


# ---------------------------------------------------------------------------
# exact rational multiples of half powers of pi


@dataclass(frozen=True)
class PiRat:
    """Exact value ``frac * pi**(half/2)``."""

    frac: Fraction
    half: int = 0

    def __mul__(self, other):
        if isinstance(other, PiRat):
            return PiRat(self.frac * other.frac, self.half + other.half)
        return PiRat(self.frac * Fraction(other), self.half)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PiRat):
            if other.frac == 0:
                raise ZeroDivisionError
            return PiRat(self.frac / other.frac, self.half - other.half)
        return PiRat(self.frac / Fraction(other), self.half)

    def __neg__(self):
        return PiRat(-self.frac, self.half)

    def __add__(self, other):
        if isinstance(other, PiRat):
            if self.frac == 0:
                return other
            if other.frac == 0:
                return self
            if self.half != other.half:
                return PiSum.of(self) + other
            return PiRat(self.frac + other.frac, self.half)
        return NotImplemented

    def __float__(self):
        return float(self.frac) * math.pi ** (self.half / 2)

    def __str__(self):
        if self.half == 0:
            return str(self.frac)
        p = "pi" if self.half == 2 else ("sqrt(pi)" if self.half == 1 else f"pi^({self.half}/2)" if self.half % 2 else f"pi^{self.half // 2}")
        return f"{self.frac}*{p}"


class PiSum:
    """Exact finite sum of PiRat values with distinct pi powers."""

    __slots__ = ("parts",)

    def __init__(self, parts: dict[int, Fraction]):
        self.parts = {h: f for h, f in parts.items() if f != 0}

    @classmethod
    def of(cls, *vals: PiRat) -> "PiSum":
        s = cls({})
        for v in vals:
            s = s + v
        return s

    def __add__(self, other):
        parts = dict(self.parts)
        if isinstance(other, PiRat):
            parts[other.half] = parts.get(other.half, Fraction(0)) + other.frac
        elif isinstance(other, PiSum):
            for h, f in other.parts.items():
                parts[h] = parts.get(h, Fraction(0)) + f
        else:
            return NotImplemented
        return PiSum(parts)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return PiSum({h: f * other for h, f in self.parts.items()})
        if isinstance(other, PiRat):
            return PiSum({h + other.half: f * other.frac
                          for h, f in self.parts.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __float__(self):
        return float(sum(float(f) * math.pi ** (h / 2)
                         for h, f in self.parts.items()))

    def __eq__(self, other):
        if isinstance(other, PiRat):
            other = PiSum.of(other)
        return isinstance(other, PiSum) and self.parts == other.parts

    def __str__(self):
        if not self.parts:
            return "0"
        return " + ".join(str(PiRat(f, h)) for h, f in sorted(self.parts.items()))


def gamma_half(twice: int) -> PiRat:
    """Gamma(twice/2) exactly, for positive integer or half-integer argument."""
    if twice <= 0:
        raise ValueError("Gamma argument must be positive here")
    if twice % 2 == 0:
        return PiRat(Fraction(math.factorial(twice // 2 - 1)), 0)
    n = (twice - 1) // 2  # Gamma(n + 1/2)
    return PiRat(Fraction(math.factorial(2 * n), 4**n * math.factorial(n)), 1)


def beta_half(twice_a: int, twice_b: int) -> PiRat:
    """Euler Beta at half-integer arguments, exactly."""
    return gamma_half(twice_a) * gamma_half(twice_b) / gamma_half(twice_a + twice_b)


# ---------------------------------------------------------------------------
# b-integrals


def b_plain_exact(j: int, d: int) -> PiRat:
    if 2 * j - d <= 0:
        raise DivergentMomentError(f"divergent moment integral: b_{j}({d})")
    return PiRat(Fraction(1), d) * gamma_half(2 * j - d) / gamma_half(2 * j)


def b_one_exact(j: int, d: int) -> PiRat:
    if 2 * (j - 1) - d <= 0:
        raise DivergentMomentError(f"divergent moment integral: b_{{{j},1}}({d})")
    return (b_plain_exact(j - 1, d) + (-b_plain_exact(j, d))) / d


def b_two_exact(j: int, d: int) -> PiRat:
    # integrand eta1^4 (1+|eta|^2)^(-j): converges iff 2j - 4 > d
    if 2 * j - 4 - d <= 0:
        raise DivergentMomentError(f"divergent moment integral: b_{{{j},2}}({d})")
    return beta_half(5, 2 * j - d - 4) * b_plain_exact(j, d - 1)


def b_oneone_exact(j: int, d: int) -> PiRat:
    # prefactor is pi/8, not 1/8: the R^2 angular average of eta1^2 eta2^2 is
    # r^4/8 times a full 2*pi turn (cross-checked against the radial oracle)
    if 2 * j - 4 - d <= 0:
        raise DivergentMomentError(f"divergent moment integral: b_{{{j},1,1}}({d})")
    return PiRat(Fraction(1, 8), 2) * beta_half(6, 2 * j - d - 4) * b_plain_exact(j, d - 2)


def b_plain(j: int, d: int) -> float:
    return float(b_plain_exact(j, d))


def b_one(j: int, d: int) -> float:
    return float(b_one_exact(j, d))


def b_two(j: int, d: int) -> float:
    return float(b_two_exact(j, d))


def b_oneone(j: int, d: int) -> float:
    return float(b_oneone_exact(j, d))


def sphere_moment_exact(gamma: Sequence[int], d: int) -> PiRat:
    """Factor M with int xi^gamma g(|xi|^2) dxi = M * int_0^inf u^((d+|g|)/2-1) g(u) du."""
    gamma = tuple(int(g) for g in gamma)
    if any(g < 0 for g in gamma):
        raise ValueError("negative entry in moment multi-index")
    if any(g % 2 for g in gamma):
        raise ValueError("odd entry in moment multi-index; odd moments vanish")
    if len(gamma) > d:
        raise ValueError("multi-index longer than dimension")
    num = PiRat(Fraction(1), 0)
    for g in gamma:
        num = num * gamma_half(g + 1)
    for _ in range(d - len(gamma)):
        num = num * gamma_half(1)
    return num / gamma_half(d + sum(gamma))


def sphere_moment(gamma: Sequence[int], d: int) -> float:
    return float(sphere_moment_exact(gamma, d))


# ---------------------------------------------------------------------------
# memoized table


@dataclass
class BTable:
    """Memoized b_{j,k,l}(dim) values and sphere moments."""

    dim: int
    values: dict[tuple[int, int, int], float] = field(default_factory=dict)
    moments: dict[tuple[int, ...], float] = field(default_factory=dict)

    def b(self, j: int, k: int = 0, ell: int = 0) -> float:
        key = (j, k, ell)
        if key not in self.values:
            if ell == 0 and k == 0:
                v = b_plain(j, self.dim)
            elif ell == 0 and k == 1:
                v = b_one(j, self.dim)
            elif ell == 0 and k == 2:
                v = b_two(j, self.dim)
            elif k == 1 and ell == 1:
                v = b_oneone(j, self.dim)
            else:
                v = float(general_moment_exact((2 * k, 2 * ell), j, self.dim))
            if not (math.isfinite(v) and v > 0):
                raise DivergentMomentError(f"b_{key} not finite/positive")
            self.values[key] = v
        return self.values[key]

    def moment(self, gamma: Sequence[int]) -> float:
        key = tuple(int(g) for g in gamma)
        if key not in self.moments:
            self.moments[key] = sphere_moment(key, self.dim)
        return self.moments[key]


def general_moment_exact(gamma: Sequence[int], j: int, d: int) -> PiRat:
    """Exact value of int eta^gamma (1+|eta|^2)^(-j) d eta over R^d."""
    gamma = tuple(int(g) for g in gamma)
    D = d + sum(gamma)
    if 2 * j - D <= 0:
        raise DivergentMomentError(f"divergent moment integral gamma={gamma}, j={j}, d={d}")
    return sphere_moment_exact(gamma, d) * beta_half(D, 2 * j - D)


# ---------------------------------------------------------------------------
# oracles


def b_radial_oracle(j: int, k: int, ell: int, d: int) -> float:
    """Adaptive 1-d radial quadrature of the defining integral of b_{j,k,l}(d)."""
    gamma = (2 * k, 2 * ell)
    D = d + 2 * k + 2 * ell
    M = sphere_moment(gamma, d)

    def integrand(u):
        return u ** (D / 2 - 1) * (1 + u) ** (-j)

    val, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=1e-13, epsrel=1e-13, limit=400)
    return M * val


def _halton_block(n0: int, n: int, dim: int) -> np.ndarray:
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    idx = np.arange(n0 + 1, n0 + n + 1)
    u = np.empty((n, dim))
    for jj in range(dim):
        b = primes[jj]
        x = np.zeros(n)
        f = 1.0
        i = idx.copy()
        while np.any(i > 0):
            f /= b
            x += f * (i % b)
            i //= b
        u[:, jj] = x
    return u


def moment_qmc_oracle(integrand, d: int, scale: float = 1.0, n: int = 2**15,
                      blocks: int = 8) -> tuple[float, float]:
    """Deterministic quasi-MC estimate of int_{R^d} integrand(eta) d eta.

    Uses (d+1)-dimensional Halton points: d coordinates give a direction via
    the Gaussian map, the extra coordinate gives a radius through the
    heavy-tail substitution r = scale*t/(1-t), whose Jacobian keeps
    polynomially decaying integrands bounded on the cube.  The stderr is the
    spread of consecutive-block means.
    """
    surf = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    means = []
    for b in range(blocks):
        u = _halton_block(b * n, n, d + 1)
        u = np.clip(u, 1e-9, 1 - 1e-9)
        g = ndtri(u[:, :d])
        norms = np.linalg.norm(g, axis=1)
        norms[norms == 0] = 1.0
        dirs = g / norms[:, None]
        t = u[:, d]
        r = scale * t / (1 - t)
        jac = scale / (1 - t) ** 2
        pts = dirs * r[:, None]
        w = surf * r ** (d - 1) * jac
        means.append(float(np.mean(w * integrand(pts))))
    mean = float(np.mean(means))
    stderr = float(np.std(means, ddof=1) / math.sqrt(blocks))
    return mean, stderr


# ---------------------------------------------------------------------------
# the a-coefficients


@dataclass(frozen=True)
class ACoeffs:
    a1: float
    a2: float
    a1_combo: float
    discrepancy: float


def a_coeffs_exact(d: int) -> tuple[PiRat, PiRat, PiRat]:
    """(a1 from the defining integral, a2, a1 from the quoted combination)."""
    if d not in (5, 7):
        raise ValueError("a-coefficients are defined for d in {5, 7}")
    # (16 eta1^4 - 8 eta1^2 (1+|eta|^2) + (1+|eta|^2)^2) / (96 (1+|eta|^2)^6)
    a1 = (
        PiRat(Fraction(16, 96)) * b_two_exact(6, d)
        + (-PiRat(Fraction(8, 96)) * b_one_exact(5, d))
        + PiRat(Fraction(1, 96)) * b_plain_exact(4, d)
    )
    a2 = b_oneone_exact(6, d)
    combo = (
        PiRat(Fraction(1, 6)) * b_two_exact(6, d)
        + (-PiRat(Fraction(1, 3)) * b_one_exact(5, d))
        + PiRat(Fraction(1, 96)) * b_plain_exact(4, d)
    )
    # a1 collapses: the -8/96 b_{5,1} and +1/96 b_4 parts cancel identically
    return a1, a2, combo


def a_coeffs(d: int) -> ACoeffs:
    a1, a2, combo = a_coeffs_exact(d)
    fa1, fa2, fc = float(a1), float(a2), float(combo)
    return ACoeffs(a1=fa1, a2=fa2, a1_combo=fc, discrepancy=abs(fa1 - fc))
