"""One-step online-mirror-descent update kernels.

Each kernel is the unconstrained Bregman step for its regularizer followed by
the matching Bregman projection onto a clipped simplex:

  negative entropy -> multiplicative/exponential update, KL projection
  log barrier      -> additive update in inverse coordinates, barrier projection
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simplex import (
    ClippedSimplex,
    Distribution,
    floor_project_entropy,
    floor_project_logbarrier,
)


@dataclass(frozen=True)
class EntropyStepParams:
    """Scalar learning rate plus target domain for a negative-entropy step."""

    learning_rate: float
    domain: ClippedSimplex

    def __post_init__(self) -> None:
        if not np.isfinite(self.learning_rate) or self.learning_rate <= 0.0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")


@dataclass(frozen=True)
class LogBarrierStepParams:
    """Per-coordinate learning rates plus target domain for a log-barrier step."""

    rates: np.ndarray
    domain: ClippedSimplex

    def __post_init__(self) -> None:
        rates = np.asarray(self.rates, dtype=np.float64)
        if rates.size != self.domain.dimension:
            raise ValueError("one rate per coordinate required")
        if not np.all(np.isfinite(rates)) or np.any(rates <= 0.0):
            raise ValueError("all rates must be finite and strictly positive")
        object.__setattr__(self, "rates", rates)


def _check_loss(loss: np.ndarray) -> None:
    if not np.all(np.isfinite(loss)):
        raise ValueError("estimator overflow: loss estimate has non-finite entries")
    if np.any(loss < 0.0):
        raise ValueError("loss estimates must be nonnegative")


def entropy_step_weights(
    weights: np.ndarray, loss_estimate: np.ndarray, learning_rate: float, floor: float
) -> np.ndarray:
    """Array-level negative-entropy OMD step: w_i * exp(-rate * loss_i), then KL-project.

    Computed in log space with a max subtraction: importance-weighted losses
    can reach 1/(master_floor * base_floor), far beyond exp() range. A
    coordinate that underflows to zero would have been clipped to the floor by
    the exact projection anyway, so the result is unaffected.
    """
    loss = np.asarray(loss_estimate, dtype=np.float64)
    _check_loss(loss)
    z = np.log(weights) - learning_rate * loss
    z -= z.max()
    return floor_project_entropy(np.exp(z), floor)


def entropy_step(
    current: Distribution, loss_estimate, params: EntropyStepParams
) -> Distribution:
    """Negative-entropy OMD step from `current` against a nonnegative loss estimate."""
    new = entropy_step_weights(
        current.weights, loss_estimate, params.learning_rate, params.domain.floor
    )
    return Distribution._trusted(new)


def logbarrier_step_weights(
    weights: np.ndarray, loss_estimate: np.ndarray, rates: np.ndarray, floor: float
) -> np.ndarray:
    """Array-level log-barrier OMD step: 1/p_i <- 1/w_i + rate_i * loss_i, then project."""
    loss = np.asarray(loss_estimate, dtype=np.float64)
    _check_loss(loss)
    raw_inverse = 1.0 / weights + rates * loss
    return floor_project_logbarrier(raw_inverse, rates, floor)


def logbarrier_step(
    current: Distribution, loss_estimate, params: LogBarrierStepParams
) -> Distribution:
    """Log-barrier OMD step from `current` against a nonnegative loss estimate."""
    new = logbarrier_step_weights(
        current.weights, loss_estimate, params.rates, params.domain.floor
    )
    return Distribution._trusted(new)
