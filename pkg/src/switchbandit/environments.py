"""Oblivious adversarial environments: full loss tables fixed before play.

All randomness is consumed when a table is built; afterwards the table is
immutable and step-time access is read-only, so the adversary cannot react to
the learner. Generators record their parameters and intended switch structure
in a metadata dict that travels with the table (and with its CSV sidecar).
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

DETERMINISTIC_PATTERNS = ("alternating-punisher", "sawtooth")
SEGMENT_MODES = ("equal", "geometric")


@dataclass(frozen=True)
class SwitchSchedule:
    """Piecewise-constant arm sequence: 1-indexed segment start times and arms."""

    starts: tuple[int, ...]
    arms: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.starts) != len(self.arms) or not self.starts:
            raise ValueError("need one arm per segment and at least one segment")
        if self.starts[0] != 1:
            raise ValueError("first segment must start at t=1")
        if any(b >= a for a, b in zip(self.starts[1:], self.starts[:-1])):
            raise ValueError("segment starts must be strictly increasing")

    @property
    def num_switches(self) -> int:
        return len(self.starts) - 1

    def as_sequence(self, horizon: int) -> np.ndarray:
        """Expand to an arm index per time step, t = 1..horizon."""
        if self.starts[-1] > horizon:
            raise ValueError("schedule extends beyond the horizon")
        out = np.empty(horizon, dtype=np.int64)
        bounds = list(self.starts[1:]) + [horizon + 1]
        for start, end, arm in zip(self.starts, bounds, self.arms):
            out[start - 1 : end - 1] = arm
        return out


class LossMatrix:
    """Immutable T x K table of losses in [0, 1] plus generator metadata."""

    __slots__ = ("_losses", "metadata")

    def __init__(self, losses, metadata: dict | None = None) -> None:
        table = np.array(losses, dtype=np.float64)
        if table.ndim != 2 or table.shape[0] < 1 or table.shape[1] < 1:
            raise ValueError("losses must be a T x K table with T, K >= 1")
        if not np.all(np.isfinite(table)) or table.min() < 0.0 or table.max() > 1.0:
            raise ValueError("every loss entry must lie in [0, 1]")
        table.flags.writeable = False
        self._losses = table
        self.metadata = dict(metadata) if metadata else {}

    @property
    def losses(self) -> np.ndarray:
        return self._losses

    @property
    def horizon(self) -> int:
        return self._losses.shape[0]

    @property
    def num_arms(self) -> int:
        return self._losses.shape[1]


def _as_rng_and_seed(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng)), int(rng)
    return rng, None


def segment_lengths(T: int, S: int, mode: str = "equal") -> list[int]:
    """Split T steps into S+1 positive segments.

    equal: lengths differ by at most one. geometric: lengths roughly double
    from segment to segment, stressing short early segments.
    """
    if mode not in SEGMENT_MODES:
        raise ValueError(f"unknown segment mode {mode!r}; choose from {SEGMENT_MODES}")
    n = S + 1
    if n > T:
        raise ValueError(f"cannot fit {n} segments into horizon {T}")
    if mode == "equal":
        base, rem = divmod(T, n)
        return [base + (1 if i < rem else 0) for i in range(n)]
    raw = np.power(2.0, np.arange(n))
    lengths = np.maximum(1, np.floor(T * raw / raw.sum()).astype(int))
    # Push any rounding surplus/deficit into the largest (last) segment.
    lengths[-1] += T - int(lengths.sum())
    if lengths[-1] < 1:
        raise ValueError(f"geometric segments infeasible for T={T}, S={S}")
    return [int(x) for x in lengths]


def _segment_schedule(T: int, K: int, S: int, mode: str) -> SwitchSchedule:
    lengths = segment_lengths(T, S, mode)
    starts = [1]
    for length in lengths[:-1]:
        starts.append(starts[-1] + length)
    arms = [s % K for s in range(S + 1)]
    return SwitchSchedule(tuple(starts), tuple(arms))


def gen_piecewise_bernoulli(
    T: int, K: int, S: int, gap: float, rng, segment_mode: str = "equal"
) -> LossMatrix:
    """Piecewise-stationary Bernoulli losses with a rotating best arm.

    Within each of the S+1 segments the best arm has mean 0.5 - gap/2 and all
    others 0.5 + gap/2; realized losses are independent {0,1} draws, fixed here
    once and for all (oblivious adversary). gap=1 degenerates to a
    deterministic 0/1 table.
    """
    if T < 1 or K < 2:
        raise ValueError("need T >= 1 and K >= 2")
    if S < 0 or S >= T:
        raise ValueError(f"switch count S={S} must satisfy 0 <= S < T")
    if not 0.0 < gap <= 1.0:
        raise ValueError(f"gap must lie in (0, 1], got {gap}")
    generator, seed = _as_rng_and_seed(rng)
    schedule = _segment_schedule(T, K, S, segment_mode)
    best = schedule.as_sequence(T)
    means = np.full((T, K), 0.5 + gap / 2.0)
    means[np.arange(T), best] = 0.5 - gap / 2.0
    losses = (generator.random((T, K)) < means).astype(np.float64)
    metadata = {
        "generator": "piecewise_bernoulli",
        "params": {"S": S, "gap": gap, "segment_mode": segment_mode},
        "seed": seed,
        "switch_times": [int(t) for t in schedule.starts[1:]],
        "segment_arms": [int(a) for a in schedule.arms],
    }
    return LossMatrix(losses, metadata)


def gen_deterministic_adversarial(T: int, K: int, S: int, pattern: str) -> LossMatrix:
    """Deterministic stress tables with exactly S best-arm switches.

    alternating-punisher: the current segment's arm has loss 0, all others 1,
    so any learner camped on a stale arm pays full price. sawtooth: losses ramp
    within each segment, keeping a unique argmin that changes at boundaries.
    """
    if pattern not in DETERMINISTIC_PATTERNS:
        raise ValueError(
            f"unknown pattern {pattern!r}; choose from {DETERMINISTIC_PATTERNS}"
        )
    if T < 1 or K < 2:
        raise ValueError("need T >= 1 and K >= 2")
    if S < 0 or S >= T:
        raise ValueError(f"switch count S={S} must satisfy 0 <= S < T")
    schedule = _segment_schedule(T, K, S, "equal")
    best = schedule.as_sequence(T)
    if pattern == "alternating-punisher":
        losses = np.ones((T, K))
        losses[np.arange(T), best] = 0.0
    else:
        lengths = segment_lengths(T, S, "equal")
        losses = np.empty((T, K))
        t = 0
        for length, arm in zip(lengths, schedule.arms):
            phase = (np.arange(1, length + 1) / length)[:, None]
            losses[t : t + length, :] = 0.55 + 0.4 * phase
            losses[t : t + length, arm] = (0.45 * phase)[:, 0]
            t += length
    metadata = {
        "generator": pattern,
        "params": {"S": S},
        "seed": None,
        "switch_times": [int(t) for t in schedule.starts[1:]],
        "segment_arms": [int(a) for a in schedule.arms],
    }
    return LossMatrix(losses, metadata)


def _sidecar_path(path: str) -> str:
    return str(path) + ".meta.json"


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_loss_matrix(matrix: LossMatrix, path: str) -> None:
    """Persist as CSV (header t,a0,...,a{K-1}) plus a JSON metadata sidecar."""
    K = matrix.num_arms
    lines = ["t," + ",".join(f"a{k}" for k in range(K))]
    for t, row in enumerate(matrix.losses, start=1):
        lines.append(f"{t}," + ",".join(repr(float(x)) for x in row))
    atomic_write_text(path, "\n".join(lines) + "\n")
    atomic_write_text(
        _sidecar_path(path),
        json.dumps(
            {
                "horizon": matrix.horizon,
                "num_arms": K,
                "metadata": matrix.metadata,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
    )


def load_loss_matrix(path: str) -> LossMatrix:
    """Load a CSV loss table written by save_loss_matrix; bit-exact round trip."""
    with open(path) as handle:
        lines = [line.rstrip("\n") for line in handle if line.strip()]
    if not lines:
        raise ValueError(f"malformed loss file {path!r}: empty")
    header = lines[0].split(",")
    if header[0] != "t" or len(header) < 2 or any(
        col != f"a{k}" for k, col in enumerate(header[1:])
    ):
        raise ValueError(
            f"malformed loss file {path!r}: header must be 't,a0,...,a{{K-1}}', got {lines[0]!r}"
        )
    K = len(header) - 1
    rows = []
    for i, line in enumerate(lines[1:], start=1):
        fields = line.split(",")
        if len(fields) != K + 1:
            raise ValueError(
                f"dimension mismatch in {path!r} at row {i}: "
                f"expected {K + 1} columns, got {len(fields)}"
            )
        try:
            t = int(fields[0])
        except ValueError:
            raise ValueError(
                f"malformed loss file {path!r} at row {i}, column 't': {fields[0]!r}"
            ) from None
        if t != i:
            raise ValueError(
                f"malformed loss file {path!r} at row {i}: time column reads {t}"
            )
        row = []
        for k, field in enumerate(fields[1:]):
            try:
                value = float(field)
            except ValueError:
                raise ValueError(
                    f"malformed loss file {path!r} at row {i}, column 'a{k}': {field!r}"
                ) from None
            if not 0.0 <= value <= 1.0:
                raise ValueError(
                    f"out-of-range entry in {path!r} at row {i}, column 'a{k}': {value}"
                )
            row.append(value)
        rows.append(row)
    if not rows:
        raise ValueError(f"malformed loss file {path!r}: no data rows")
    metadata: dict = {}
    sidecar = _sidecar_path(path)
    if os.path.exists(sidecar):
        with open(sidecar) as handle:
            payload = json.load(handle)
        metadata = payload.get("metadata", {})
        declared = (payload.get("horizon"), payload.get("num_arms"))
        if declared != (len(rows), K):
            raise ValueError(
                f"dimension mismatch between {path!r} ({len(rows)}x{K}) and its "
                f"sidecar ({declared[0]}x{declared[1]})"
            )
    return LossMatrix(np.array(rows), metadata)
