"""Sparse multivariate polynomial arithmetic and the semiclassical scaling map.

Polynomials are stored as a map from exponent multi-indices to real
coefficients, kept in canonical sparse form (no zero coefficients, graded
lexicographic key order).  This module also hosts the sampled ellipticity
check for the leading homogeneous part and the tau -> (hbar, z, epsilon)
scaling reduction.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import ndtri

__all__ = [
    "MultiPoly",
    "ScalingResult",
    "EllipticityCertificate",
    "leading_part",
    "is_elliptic",
    "derivative",
    "evaluate",
    "scaling_reduce",
    "parse_poly",
    "format_poly",
    "poly_from_json",
    "poly_to_json",
]


def _grlex_key(exps: tuple[int, ...]) -> tuple:
    return (sum(exps), tuple(-e for e in exps))


class MultiPoly:
    """Sparse polynomial over the reals in ``dim`` variables.

    ``terms`` maps exponent tuples (length ``dim``) to nonzero float
    coefficients.  Equality is structural, which the canonical form makes
    meaningful.
    """

    __slots__ = ("dim", "terms", "degree")

    def __init__(self, dim: int, terms: Mapping[tuple[int, ...], float]):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        clean: dict[tuple[int, ...], float] = {}
        for exps, coef in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != dim:
                raise ValueError(f"exponent {exps} does not have length {dim}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = float(coef)
            if c != 0.0:
                clean[exps] = clean.get(exps, 0.0) + c
        clean = {e: c for e, c in clean.items() if c != 0.0}
        object.__setattr__(self, "dim", dim)
        object.__setattr__(
            self, "terms", dict(sorted(clean.items(), key=lambda kv: _grlex_key(kv[0])))
        )
        object.__setattr__(
            self, "degree", max((sum(e) for e in clean), default=0)
        )

    def __setattr__(self, name, value):  # immutable after construction
        raise AttributeError("MultiPoly is immutable")

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiPoly)
            and self.dim == other.dim
            and self.terms == other.terms
        )

    def __hash__(self) -> int:
        return hash((self.dim, tuple(self.terms.items())))

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        merged = dict(self.terms)
        for e, c in other.terms.items():
            merged[e] = merged.get(e, 0.0) + c
        return MultiPoly(self.dim, merged)

    def __mul__(self, scalar: float) -> "MultiPoly":
        return MultiPoly(self.dim, {e: c * scalar for e, c in self.terms.items()})

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"MultiPoly(dim={self.dim}, {format_poly(self)!r})"

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on an (n, dim) array of points."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.shape[1] != self.dim:
            raise ValueError("point dimension mismatch")
        out = np.zeros(pts.shape[0])
        for exps, coef in self.terms.items():
            mono = np.full(pts.shape[0], coef)
            for i, e in enumerate(exps):
                if e:
                    mono *= pts[:, i] ** e
            out += mono
        return out


@dataclass(frozen=True)
class ScalingResult:
    """Outcome of the large-parameter scaling x -> tau^(1/m) y."""

    hbar: float
    z: complex
    epsilon: float


@dataclass(frozen=True)
class EllipticityCertificate:
    elliptic: bool
    min_value: float
    direction: tuple[float, ...]
    n_dirs: int


def leading_part(P: MultiPoly) -> MultiPoly:
    """Terms of top total degree (the leading homogeneous part)."""
    if P.is_zero():
        raise ValueError("empty polynomial")
    m = P.degree
    return MultiPoly(P.dim, {e: c for e, c in P.terms.items() if sum(e) == m})


def _halton_directions(n: int, dim: int) -> np.ndarray:
    """Deterministic low-discrepancy unit directions (Halton -> Gaussian -> sphere)."""
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
    if dim > len(primes):
        raise ValueError("dimension too large for the direction generator")
    idx = np.arange(1, n + 1)
    u = np.empty((n, dim))
    for j in range(dim):
        b = primes[j]
        x = np.zeros(n)
        f = 1.0
        i = idx.copy()
        while np.any(i > 0):
            f /= b
            x += f * (i % b)
            i //= b
        u[:, j] = x
    u = np.clip(u, 1e-12, 1 - 1e-12)
    g = ndtri(u)
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0] = 1.0
    dirs = g / norms[:, None]
    if dim == 1:
        # both orientations of the single axis
        dirs = np.array([[1.0], [-1.0]])
    return dirs


def is_elliptic(P: MultiPoly, n_dirs: int | None = None) -> EllipticityCertificate:
    """Sampled positivity of the leading part on the unit sphere.

    This is a screening check, not a proof: it reports the minimum of P_m
    over a deterministic low-discrepancy direction set.
    """
    if P.degree < 2:
        raise ValueError("degree below 2")
    if n_dirs is None:
        n_dirs = 10_000 * P.dim
    if n_dirs < 1:
        raise ValueError("n_dirs must be >= 1")
    Pm = leading_part(P)
    dirs = _halton_directions(n_dirs, P.dim)
    vals = Pm.eval_many(dirs)
    i = int(np.argmin(vals))
    vmin = float(vals[i])
    return EllipticityCertificate(
        elliptic=vmin > 0.0,
        min_value=vmin,
        direction=tuple(dirs[i]),
        n_dirs=len(dirs),
    )


def derivative(P: MultiPoly, gamma: Sequence[int]) -> MultiPoly:
    """Exact formal partial derivative d^gamma P."""
    gamma = tuple(int(g) for g in gamma)
    if len(gamma) != P.dim:
        raise ValueError("multi-index length mismatch")
    terms: dict[tuple[int, ...], float] = {}
    for exps, coef in P.terms.items():
        c = coef
        new = list(exps)
        dead = False
        for i, g in enumerate(gamma):
            e = new[i]
            if e < g:
                dead = True
                break
            for r in range(g):
                c *= e - r
            new[i] = e - g
        if not dead and c != 0.0:
            key = tuple(new)
            terms[key] = terms.get(key, 0.0) + c
    return MultiPoly(P.dim, terms)


def evaluate(P: MultiPoly, x: Sequence[float]) -> float:
    x = tuple(float(v) for v in x)
    if len(x) != P.dim:
        raise ValueError("point dimension mismatch")
    total = 0.0
    for exps, coef in P.terms.items():
        v = coef
        for xi, e in zip(x, exps):
            if e:
                v *= xi**e
        total += v
    return total


def scaling_reduce(lam: complex, tau: float, m: int) -> ScalingResult:
    """Reduce the large-parameter pencil to the small-hbar normal form."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if m < 2:
        raise ValueError("m must be >= 2")
    hbar = tau ** (-(m + 1) / m)
    eps = tau ** (-1.0 / m)
    return ScalingResult(hbar=hbar, z=complex(lam) / tau, epsilon=eps)


# ---------------------------------------------------------------------------
# text / JSON interchange

_TERM_RE = re.compile(r"^\s*(?P<coef>[+-]?(\d+\.?\d*([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?)?)\s*(?P<rest>(\*?\s*x\d+(\^\d+)?\s*)*)\s*$")
_VAR_RE = re.compile(r"x(\d+)(?:\^(\d+))?")


def parse_poly(text: str, dim: int | None = None) -> MultiPoly:
    """Parse ``c * x1^a1 * ... * xd^ad`` sums; variables are 1-based."""
    s = "".join(text.split())
    s = s.replace("-", "+-").replace("E+-", "E-").replace("e+-", "e-")
    chunks = [c.strip() for c in s.split("+") if c.strip()]
    raw: list[tuple[float, dict[int, int]]] = []
    max_var = 0
    for chunk in chunks:
        m = _TERM_RE.match(chunk)
        if not m:
            raise ValueError(f"cannot parse term {chunk!r}")
        coef_s = m.group("coef")
        if coef_s in ("", "+"):
            coef = 1.0
        elif coef_s == "-":
            coef = -1.0
        else:
            coef = float(coef_s)
        powers: dict[int, int] = {}
        for vm in _VAR_RE.finditer(m.group("rest")):
            i = int(vm.group(1))
            p = int(vm.group(2) or 1)
            if i < 1:
                raise ValueError("variables are numbered from x1")
            powers[i] = powers.get(i, 0) + p
            max_var = max(max_var, i)
        raw.append((coef, powers))
    d = dim if dim is not None else max(max_var, 1)
    terms: dict[tuple[int, ...], float] = {}
    for coef, powers in raw:
        exps = [0] * d
        for i, p in powers.items():
            if i > d:
                raise ValueError(f"variable x{i} exceeds dim {d}")
            exps[i - 1] = p
        key = tuple(exps)
        terms[key] = terms.get(key, 0.0) + coef
    return MultiPoly(d, terms)


def format_poly(P: MultiPoly) -> str:
    if P.is_zero():
        return "0"
    parts = []
    for exps, coef in P.terms.items():
        factors = [repr(coef)]
        for i, e in enumerate(exps):
            if e == 1:
                factors.append(f"x{i + 1}")
            elif e > 1:
                factors.append(f"x{i + 1}^{e}")
        parts.append(" * ".join(factors))
    return " + ".join(parts)


def poly_to_json(P: MultiPoly) -> dict:
    return {
        "dim": P.dim,
        "terms": [{"exps": list(e), "coef": c} for e, c in P.terms.items()],
    }


def poly_from_json(obj: dict | str) -> MultiPoly:
    if isinstance(obj, str):
        obj = json.loads(obj)
    return MultiPoly(int(obj["dim"]), {tuple(t["exps"]): float(t["coef"]) for t in obj["terms"]})
