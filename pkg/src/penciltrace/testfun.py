"""Inverse-power test functions f(s) = (s+t)^(-mu) and sector geometry."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

__all__ = ["InversePowerF", "SectorSpec", "f_deriv", "decay_admissible",
           "in_sector", "default_mu"]


@dataclass(frozen=True)
class InversePowerF:
    """f(s) = (s + t)^(-mu) with t > 0, mu > 0.

    Holomorphic off the ray through -t; for non-integer mu the principal
    branch is used and the negative real axis of (s+t) is a genuine cut.
    """

    t: float = 1.0
    mu: float = 4.0

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("shift t must be positive")
        if self.mu <= 0:
            raise ValueError("exponent mu must be positive")

    @property
    def mu_is_integer(self) -> bool:
        return float(self.mu).is_integer()

    def __call__(self, s: complex) -> complex:
        return f_deriv(self, 0, s)

    def deriv(self, k: int):
        return lambda s: f_deriv(self, k, s)

    def scaled(self, factor: float) -> "ScaledF":
        return ScaledF(self, factor)


@dataclass(frozen=True)
class ScaledF:
    """factor * f; the coefficient machinery is linear in f."""

    base: InversePowerF
    factor: float

    @property
    def t(self):
        return self.base.t

    @property
    def mu(self):
        return self.base.mu

    @property
    def mu_is_integer(self):
        return self.base.mu_is_integer

    def __call__(self, s):
        return self.factor * self.base(s)

    def deriv(self, k):
        return lambda s: self.factor * f_deriv(self.base, k, s)


def f_deriv(f: InversePowerF | ScaledF, k: int, s: complex) -> complex:
    """k-th derivative (-1)^k mu (mu+1)...(mu+k-1) (s+t)^(-mu-k)."""
    if isinstance(f, ScaledF):
        return f.factor * f_deriv(f.base, k, s)
    if k < 0:
        raise ValueError("derivative order must be >= 0")
    w = complex(s) + f.t
    if w == 0:
        raise ZeroDivisionError("evaluation at the pole s = -t")
    coef = 1.0
    for r in range(k):
        coef *= -(f.mu + r)
    if f.mu_is_integer:
        # integer exponent: plain reciprocal power, no branch choice involved
        n = int(f.mu) + k
        return coef * (1.0 / w) ** n
    if w.real < 0 and w.imag == 0:
        raise ValueError("point lies on the branch cut for non-integer mu")
    return coef * w ** (-(f.mu + k))


def decay_admissible(f: InversePowerF | ScaledF, d: int, m: int) -> bool:
    """Decay threshold mu > d(m+1)/m for trace-class contour integrals."""
    if d < 1 or m < 2:
        raise ValueError("need d >= 1 and m >= 2")
    return f.mu > d * (m + 1) / m


def default_mu(d: int, m: int) -> int:
    return math.floor(d * (m + 1) / m) + 1


@dataclass(frozen=True)
class SectorSpec:
    """Lambda = {|z| >= r0, pi/2 + delta < arg z < 3 pi/2 - delta}."""

    r0: float = 0.5
    delta: float = 0.1

    def __post_init__(self):
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")
        if not (0 < self.delta < math.pi / 2):
            raise ValueError("delta must lie in (0, pi/2)")


def in_sector(z: complex, spec: SectorSpec) -> bool:
    z = complex(z)
    if abs(z) < spec.r0:
        return False
    theta = cmath.phase(z) % (2 * math.pi)
    return math.pi / 2 + spec.delta < theta < 3 * math.pi / 2 - spec.delta
