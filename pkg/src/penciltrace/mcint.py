"""High-dimensional integrators over R^d: cut-off Monte-Carlo and tensor grids.

Monte-Carlo uses counter-based Philox streams keyed by (seed, replicate), so
results are bit-identical for a fixed configuration no matter how the work
would be scheduled; the reduction is an ordered serial sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = ["MCConfig", "MCEstimate", "ball_volume", "cutoff_radius",
           "mc_integrate", "tensor_quadrature"]


@dataclass(frozen=True)
class MCConfig:
    n_samples: int = 1_000_000
    n_replicates: int = 20
    seed: int = 20240901
    cutoff_radius: float = 10.0
    tail_tol: float = 1e-6

    def __post_init__(self):
        if self.n_samples < 1 or self.n_replicates < 1:
            raise ValueError("need at least one sample and one replicate")
        if self.cutoff_radius <= 0:
            raise ValueError("cutoff radius must be positive")


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    replicates: tuple
    tail_bound: float
    config: MCConfig


def ball_volume(d: int, R: float) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * R**d


def cutoff_radius(envelope, d: int, tol: float, r_start: float = 1.0,
                  n_shells: int = 40, max_doublings: int = 60) -> float:
    """Smallest dyadic R with the shell-summed tail bound below tol.

    ``envelope(r)`` must bound the integrand magnitude on the sphere of
    radius r (decaying eventually); the tail bound is the sum over dyadic
    shells beyond R of shell volume times the envelope at the inner radius.
    """

    def tail(R):
        total = 0.0
        for i in range(n_shells):
            a, b = R * 2.0**i, R * 2.0 ** (i + 1)
            total += (ball_volume(d, b) - ball_volume(d, a)) * envelope(a)
        return total

    R = r_start
    for _ in range(max_doublings):
        if tail(R) < tol:
            return R
        R *= 2.0
    raise RuntimeError("tail bound never fell below tolerance; "
                       "integrand envelope does not decay")


def density_envelope(density_abs, d: int, n_dirs: int = 64):
    """Envelope from the worst absolute density over a fixed direction set."""
    rng = np.random.default_rng(7)
    dirs = rng.standard_normal((n_dirs, d))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]

    def env(r):
        return float(np.max(density_abs(dirs * r)))

    return env


def mc_integrate(density, d: int, config: MCConfig,
                 block: int = 250_000) -> MCEstimate:
    """Uniform ball sampling of a vectorized density over R^d.

    ``density`` maps an (n, d) array to n values.  Replicate r uses the
    Philox stream keyed by (seed, r); samples are drawn in fixed-size blocks
    in a fixed order, so the estimate is reproducible bit for bit.
    """
    R = config.cutoff_radius
    vol = ball_volume(d, R)
    reps = []
    for r in range(config.n_replicates):
        gen = np.random.Generator(np.random.Philox(key=[config.seed, r]))
        remaining = config.n_samples
        total = 0.0
        while remaining > 0:
            n = min(block, remaining)
            g = gen.standard_normal((n, d))
            norms = np.linalg.norm(g, axis=1)
            norms[norms == 0.0] = 1.0
            radii = R * gen.random(n) ** (1.0 / d)
            pts = g * (radii / norms)[:, None]
            vals = np.asarray(density(pts), dtype=float)
            if not np.all(np.isfinite(vals)):
                bad = pts[~np.isfinite(vals)][0]
                raise ValueError(f"non-finite density sample at x = {bad}")
            total += float(np.sum(vals))
            remaining -= n
        reps.append(vol * total / config.n_samples)
    mean = float(np.mean(reps))
    stderr = 0.0
    if config.n_replicates > 1:
        stderr = float(np.std(reps, ddof=1) / math.sqrt(config.n_replicates))
    return MCEstimate(mean=mean, stderr=stderr, replicates=tuple(reps),
                      tail_bound=float("nan"), config=config)


def tensor_quadrature(density, d: int, R: float, nodes_per_axis: int = 32,
                      richardson: bool = True) -> dict:
    """Gauss-Legendre tensor product on the box [-R, R]^d (d <= 5)."""
    if d > 5:
        raise ValueError("tensor quadrature refused for d > 5 (cost nodes^d)")

    def run(n):
        x, w = leggauss(n)
        x = x * R
        w = w * R
        grids = np.meshgrid(*([x] * d), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        wts = np.ones(pts.shape[0])
        for i in range(d):
            wts *= np.tile(np.repeat(w, n ** (d - 1 - i)), n**i)
        vals = np.asarray(density(pts), dtype=float)
        return float(np.sum(wts * vals))

    value = run(nodes_per_axis)
    out = {"value": value, "nodes_per_axis": nodes_per_axis}
    if richardson:
        coarse = run(max(4, nodes_per_axis // 2))
        out["richardson_delta"] = abs(value - coarse)
    return out
