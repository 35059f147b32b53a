"""Probability vectors, sampling, and Bregman projections onto clipped simplexes.

A clipped simplex is the probability simplex intersected with a per-coordinate
floor: {p : p_i >= floor, sum(p) = 1}. Both learners in this package project
onto such sets, one under the negative-entropy geometry (KL projection) and
one under the log-barrier geometry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Normalization slack accepted by Distribution; projections land well inside.
SUM_TOL = 1e-9
# Target accuracy for the log-barrier normalization search.
BISECT_TOL = 1e-10
MAX_BISECT_ITERS = 200


@dataclass(frozen=True)
class ClippedSimplex:
    """Probability simplex with an optional per-coordinate lower bound."""

    dimension: int
    floor: float = 0.0

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError(f"simplex dimension must be >= 1, got {self.dimension}")
        if not np.isfinite(self.floor) or self.floor < 0.0:
            raise ValueError(f"floor must be a finite nonnegative real, got {self.floor}")
        if self.floor * self.dimension > 1.0 + 1e-12:
            raise ValueError(
                f"floor {self.floor} times dimension {self.dimension} exceeds 1: empty domain"
            )


class Distribution:
    """Immutable probability vector over a finite action set."""

    __slots__ = ("_weights",)

    def __init__(self, weights) -> None:
        w = np.array(weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a one-dimensional vector of length >= 1")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0.0):
            raise ValueError("weights must be nonnegative")
        total = float(w.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"weights must sum to 1 within {SUM_TOL}, got {total!r}")
        w.flags.writeable = False
        self._weights = w

    @classmethod
    def uniform(cls, dimension: int) -> "Distribution":
        return cls(np.full(dimension, 1.0 / dimension))

    @classmethod
    def _trusted(cls, weights: np.ndarray) -> "Distribution":
        # Internal fast path for vectors produced by the projections below,
        # which already guarantee the invariants.
        out = cls.__new__(cls)
        weights.flags.writeable = False
        out._weights = weights
        return out

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def dim(self) -> int:
        return self._weights.size

    def __len__(self) -> int:
        return self._weights.size

    def __repr__(self) -> str:
        return f"Distribution({self._weights.tolist()})"


def sample_index(weights: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw over the stored coordinate order.

    Deterministic given the rng state; renormalizes by the realized total so
    that slight normalization slack cannot bias the last coordinate.
    """
    cdf = np.cumsum(weights)
    u = rng.random() * cdf[-1]
    i = int(np.searchsorted(cdf, u, side="right"))
    return min(i, len(cdf) - 1)


def sample(dist: Distribution, rng: np.random.Generator) -> int:
    """Draw an action index with probability given by the distribution."""
    return sample_index(dist.weights, rng)


def floor_project_entropy(raw: np.ndarray, floor: float) -> np.ndarray:
    """KL (negative-entropy Bregman) projection of raw/sum(raw) onto the clipped simplex.

    The projection has the form p_i = max(c * q_i, floor) for a scale c > 0.
    It is computed by repeatedly clipping violators to the floor and
    renormalizing the rest, which reaches the exact fixed point in at most
    d passes (the implied scale is strictly decreasing across passes, so a
    coordinate once clipped stays clipped).
    """
    q = np.asarray(raw, dtype=np.float64)
    total = float(q.sum())
    if not np.isfinite(total) or total <= 0.0 or np.any(q < 0.0):
        raise ValueError(
            "degenerate pre-projection point: raw weights must be nonnegative "
            "with a positive finite sum"
        )
    q = q / total
    if floor <= 0.0:
        return q
    d = q.size
    floored = q < 0.0  # all False
    scaled = q
    for _ in range(d):
        free_count = d - int(np.count_nonzero(floored))
        if free_count == 0:
            break
        free_mass = 1.0 - floor * (d - free_count)
        scale = free_mass / float(q[~floored].sum())
        scaled = q * scale
        newly = ~floored & (scaled < floor)
        if not newly.any():
            break
        floored |= newly
    return np.where(floored, floor, scaled)


def project_entropy(raw, domain: ClippedSimplex) -> Distribution:
    """Project a nonnegative pre-point onto the clipped simplex under KL divergence."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size != domain.dimension:
        raise ValueError(f"expected {domain.dimension} coordinates, got {raw.size}")
    return Distribution._trusted(floor_project_entropy(raw, domain.floor))


def floor_project_logbarrier(
    raw_inverse: np.ndarray, rates: np.ndarray, floor: float
) -> np.ndarray:
    """Log-barrier Bregman projection onto the clipped simplex.

    The projected point satisfies p_i = clamp(1/(raw_inverse_i + rates_i * lam),
    floor, 1) for the scalar lam that normalizes the sum to 1. lam is found by
    bisection; the bracket stays strictly above the pole where any denominator
    would vanish, so every evaluation is finite.
    """
    inv = np.asarray(raw_inverse, dtype=np.float64)
    xi = np.asarray(rates, dtype=np.float64)
    d = inv.size
    if xi.size != d:
        raise ValueError("rates must have one entry per coordinate")
    if not np.all(np.isfinite(inv)) or np.any(inv <= 0.0):
        raise ValueError("raw inverse coordinates must be finite and strictly positive")
    if not np.all(np.isfinite(xi)) or np.any(xi <= 0.0):
        raise ValueError("rates must be finite and strictly positive")
    if d == 1:
        return np.ones(1)
    if floor * d >= 1.0 - 1e-12:
        # The floor leaves a single feasible point.
        return np.full(d, 1.0 / d)

    def total(lam: float) -> float:
        p = 1.0 / (inv + xi * lam)
        np.clip(p, floor, 1.0, out=p)
        return float(p.sum())

    # Left end of the bracket: just above the largest pole, where the nearly
    # singular coordinate clips to 1 and the sum is guaranteed >= 1.
    j = int(np.argmax(-inv / xi))
    pole = -inv[j] / xi[j]
    lo = pole + 0.5 / xi[j]
    if total(lo) < 1.0:
        raise RuntimeError("projection bracket failure: lower bracket lost")
    width = max(1.0, abs(lo))
    hi = lo + width
    for _ in range(MAX_BISECT_ITERS):
        if total(hi) <= 1.0:
            break
        lo = hi
        width *= 2.0
        hi = lo + width
    else:
        raise RuntimeError("projection bracket failure: no upper bracket found")

    lam = lo
    for _ in range(MAX_BISECT_ITERS):
        lam = 0.5 * (lo + hi)
        g = total(lam)
        if abs(g - 1.0) <= BISECT_TOL:
            break
        if g > 1.0:
            lo = lam
        else:
            hi = lam
    else:
        raise RuntimeError("projection bracket failure: bisection did not converge")
    p = 1.0 / (inv + xi * lam)
    np.clip(p, floor, 1.0, out=p)
    return p


def project_logbarrier(raw_inverse, rates, domain: ClippedSimplex) -> Distribution:
    """Project a point given in inverse coordinates onto the clipped simplex."""
    raw_inverse = np.asarray(raw_inverse, dtype=np.float64)
    if raw_inverse.size != domain.dimension:
        raise ValueError(f"expected {domain.dimension} coordinates, got {raw_inverse.size}")
    rates = np.asarray(rates, dtype=np.float64)
    return Distribution._trusted(floor_project_logbarrier(raw_inverse, rates, domain.floor))


def mix_uniform(weights: np.ndarray, floor: float) -> np.ndarray:
    """Uniform-mixing alternative to exact clipping: p <- (1-eps) p + eps/d.

    With eps = floor * d the result has every coordinate >= floor. This is the
    cheap approximation of the clipped domain; exact projection is the default
    everywhere because the learners' guarantees are stated for it.
    """
    d = weights.size
    eps = floor * d
    return (1.0 - eps) * weights + floor
