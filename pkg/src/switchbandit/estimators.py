"""Importance-weighted loss estimators for the two sampling layers.

One round of bandit feedback yields two unbiased estimates: a per-base
estimate (observed loss divided by the master probability of the chosen base)
and a per-arm estimate for the chosen base (further divided by that base's arm
probability). Both are nonzero in a single coordinate, so they are kept as
(index, value) pairs; dense vectors are materialized only where needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Slack when checking probabilities against the active clipping floor.
FLOOR_SLACK = 1e-12


@dataclass(frozen=True)
class FeedbackRecord:
    """Everything observed in one round: choices, loss, and the acting probabilities."""

    chosen_base: int
    chosen_arm: int
    observed_loss: float
    master_prob: float
    base_arm_prob: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.observed_loss <= 1.0:
            raise ValueError(f"observed loss must lie in [0, 1], got {self.observed_loss}")
        for name, p in (("master_prob", self.master_prob), ("base_arm_prob", self.base_arm_prob)):
            if not 0.0 < p <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {p}")
        if self.chosen_base < 0 or self.chosen_arm < 0:
            raise ValueError("chosen indices must be nonnegative")


@dataclass(frozen=True)
class SparseEstimate:
    """A loss-estimate vector that is zero except possibly at one index."""

    size: int
    index: int
    value: float

    def dense(self) -> np.ndarray:
        out = np.zeros(self.size)
        if self.value != 0.0:
            out[self.index] = self.value
        return out


def master_estimate(
    fb: FeedbackRecord, num_bases: int, floor: float = 0.0
) -> SparseEstimate:
    """Estimate of each base's loss this round: loss/master_prob at the chosen base.

    `floor` is the clipping floor the master distribution was projected onto;
    a probability below it means an upstream projection bug, not noise.
    """
    if fb.chosen_base >= num_bases:
        raise ValueError(f"chosen base {fb.chosen_base} out of range for {num_bases} bases")
    if fb.master_prob < floor - FLOOR_SLACK:
        raise RuntimeError(
            f"floor violation: master probability {fb.master_prob} below floor {floor}"
        )
    return SparseEstimate(num_bases, fb.chosen_base, fb.observed_loss / fb.master_prob)


def base_arm_estimate(
    fb: FeedbackRecord, target_base: int, num_arms: int, floor: float = 0.0
) -> SparseEstimate:
    """Estimate of each arm's loss for `target_base`: zero unless that base acted.

    When it did, the chosen arm carries loss/(master_prob * base_arm_prob),
    with base_arm_prob the target base's own probability of the chosen arm.
    """
    if fb.chosen_arm >= num_arms:
        raise ValueError(f"chosen arm {fb.chosen_arm} out of range for {num_arms} arms")
    if target_base != fb.chosen_base:
        return SparseEstimate(num_arms, fb.chosen_arm, 0.0)
    if fb.base_arm_prob < floor - FLOOR_SLACK:
        raise RuntimeError(
            f"floor violation: arm probability {fb.base_arm_prob} below floor {floor}"
        )
    value = fb.observed_loss / (fb.master_prob * fb.base_arm_prob)
    return SparseEstimate(num_arms, fb.chosen_arm, value)
