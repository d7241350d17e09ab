"""Sensor models, fault injection, and residual-based fault detection.

A :class:`SensorModel` adds bias, Gaussian noise, quantization, and an
optional slower sample clock to a true signal value.  A :class:`FaultSpec`
overrides the measurement after an onset time: stuck-at (hold the last
healthy reading), bias jump, drift, or dropout (hold-last for a fixed
duration).

Randomness is a pure function of (seed, draw counter) via a splitmix64
bit mixer feeding Box-Muller, so a measurement stream is reproducible
from its :class:`SensorState` alone; no global generator is touched.
Detection works on a residual series (measured minus model-predicted,
supplied by the caller) with run-length-confirmed threshold and rate
tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

__all__ = [
    "DetectorConfig",
    "FaultEvent",
    "FaultKind",
    "FaultSpec",
    "SensorModel",
    "SensorState",
    "apply_sensor",
    "counter_gauss",
    "detect_faults",
]


# ---------------------------------------------------------------------------
# Counter-based Gaussian draws
# ---------------------------------------------------------------------------

_MASK64 = 0xFFFFFFFFFFFFFFFF
_TWO53 = 9007199254740992.0  # 2**53


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def counter_gauss(seed: int, counter: int) -> float:
    """Standard normal deviate as a pure function of (seed, counter)."""
    base = _splitmix64(((seed & _MASK64) << 1) ^ _splitmix64(counter & _MASK64))
    u1 = (_splitmix64(base) >> 11) / _TWO53
    u2 = (_splitmix64(base + 1) >> 11) / _TWO53
    if u1 <= 0.0:
        u1 = 5e-324
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


# ---------------------------------------------------------------------------
# Sensor and fault models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensorModel:
    """Measurement imperfections; all defaults give an ideal pass-through."""

    noise_sigma: float = 0.0        # Gaussian std, output units
    bias: float = 0.0               # constant offset, output units
    quantization_step: float = 0.0  # 0 disables
    sample_dt: float = 0.0          # 0 samples every simulation step

    def __post_init__(self) -> None:
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.quantization_step < 0:
            raise ValueError("quantization_step must be >= 0")
        if self.sample_dt < 0:
            raise ValueError("sample_dt must be >= 0")

    @property
    def is_ideal(self) -> bool:
        return (
            self.noise_sigma == 0.0
            and self.bias == 0.0
            and self.quantization_step == 0.0
            and self.sample_dt == 0.0
        )


class FaultKind(str, Enum):
    STUCK = "stuck"
    BIAS_JUMP = "bias_jump"
    DRIFT = "drift"
    DROPOUT = "dropout"


@dataclass(frozen=True)
class FaultSpec:
    """One injected sensor fault.

    ``magnitude`` is the jump for BIAS_JUMP and the slope (units/s) for
    DRIFT; STUCK and DROPOUT ignore it.  ``duration`` bounds the active
    window [onset_t, onset_t + duration); ``None`` means permanent, which
    is the usual choice for STUCK.
    """

    kind: FaultKind
    onset_t: float
    magnitude: float = 0.0
    duration: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", FaultKind(self.kind))
        if self.onset_t < 0:
            raise ValueError("onset_t must be >= 0")
        if self.duration is not None and not self.duration > 0:
            raise ValueError("duration must be > 0 when given")

    def active(self, t: float) -> bool:
        if t < self.onset_t:
            return False
        return self.duration is None or t < self.onset_t + self.duration


@dataclass(frozen=True)
class SensorState:
    """Reproducible per-stream state threaded through :func:`apply_sensor`."""

    seed: int = 0
    counter: int = 0
    prev_measured: float | None = None
    hold_value: float | None = None
    last_sample_t: float | None = None
    last_output: float = 0.0


def apply_sensor(
    true_value: float,
    model: SensorModel,
    fault: FaultSpec | None,
    t: float,
    state: SensorState,
) -> tuple[float, SensorState]:
    """Measure one value; returns (measurement, next state).

    Pipeline: bias + noise, fault additives (bias jump, drift), then
    quantization; STUCK and DROPOUT replace the result with the last
    measurement taken before onset.  With ``sample_dt`` set, calls between
    sensor ticks return the held previous output unchanged.
    """
    if model.sample_dt > 0.0 and state.last_sample_t is not None:
        # Half-step slack so accumulated float error cannot skip a tick.
        if t - state.last_sample_t < model.sample_dt * (1.0 - 1e-9):
            return state.last_output, state

    counter = state.counter
    value = true_value + model.bias
    if model.noise_sigma > 0.0:
        value += model.noise_sigma * counter_gauss(state.seed, counter)
        counter += 1

    hold = state.hold_value
    if fault is not None and fault.active(t):
        if fault.kind is FaultKind.BIAS_JUMP:
            value += fault.magnitude
        elif fault.kind is FaultKind.DRIFT:
            value += fault.magnitude * (t - fault.onset_t)

    if model.quantization_step > 0.0:
        value = round(value / model.quantization_step) * model.quantization_step

    if fault is not None and fault.active(t) and fault.kind in (FaultKind.STUCK, FaultKind.DROPOUT):
        if hold is None:
            hold = state.prev_measured if state.prev_measured is not None else value
        value = hold

    return value, replace(
        state,
        counter=counter,
        prev_measured=value,
        hold_value=hold,
        last_sample_t=t,
        last_output=value,
    )


# ---------------------------------------------------------------------------
# Residual-based detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DetectorConfig:
    """Run-length-confirmed residual thresholding.

    An alarm needs ``consecutive_required`` successive samples with
    |residual| above ``residual_threshold`` (or rate of change above
    ``rate_threshold``, when enabled).  ``window`` > 0 subtracts the mean
    of the first ``window`` samples as a baseline before testing, which
    calibrates out constant model mismatch.
    """

    residual_threshold: float
    rate_threshold: float = 0.0     # units/s, 0 disables the rate test
    consecutive_required: int = 1
    window: int = 0

    def __post_init__(self) -> None:
        if not self.residual_threshold > 0:
            raise ValueError("residual_threshold must be > 0")
        if self.rate_threshold < 0:
            raise ValueError("rate_threshold must be >= 0")
        if self.consecutive_required < 1:
            raise ValueError("consecutive_required must be >= 1")
        if self.window < 0:
            raise ValueError("window must be >= 0")


@dataclass(frozen=True)
class FaultEvent:
    detected_t: float
    kind_hint: str        # "threshold" or "rate"
    peak_residual: float


def _qualifying_runs(mask: np.ndarray, min_len: int) -> list[tuple[int, int]]:
    """Maximal True runs of length >= min_len as (start, end) inclusive."""
    runs: list[tuple[int, int]] = []
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return runs
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate([[idx[0]], idx[breaks + 1]])
    ends = np.concatenate([idx[breaks], [idx[-1]]])
    for s, e in zip(starts, ends):
        if e - s + 1 >= min_len:
            runs.append((int(s), int(e)))
    return runs


def detect_faults(
    t: np.ndarray, residual: np.ndarray, cfg: DetectorConfig
) -> list[FaultEvent]:
    """Scan a uniformly sampled residual series for confirmed alarms.

    Overlapping threshold and rate alarms merge into a single event whose
    ``detected_t`` is the first sample of the merged run and whose
    ``kind_hint`` comes from the earliest-starting contributor (threshold
    wins ties).
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(residual, dtype=float)
    if t.shape != r.shape:
        raise ValueError("time and residual arrays must have the same shape")
    if len(t) < 2:
        return []
    dt = float(t[1] - t[0])

    if cfg.window > 0:
        r = r - float(np.mean(r[: cfg.window]))

    intervals: list[tuple[int, int, str]] = []
    for s, e in _qualifying_runs(np.abs(r) > cfg.residual_threshold, cfg.consecutive_required):
        intervals.append((s, e, "threshold"))
    if cfg.rate_threshold > 0.0:
        rate_mask = np.zeros(len(r), dtype=bool)
        rate_mask[1:] = np.abs(np.diff(r)) / dt > cfg.rate_threshold
        for s, e in _qualifying_runs(rate_mask, cfg.consecutive_required):
            intervals.append((s, e, "rate"))

    # Merge overlapping intervals; threshold outranks rate on equal starts.
    intervals.sort(key=lambda iv: (iv[0], 0 if iv[2] == "threshold" else 1))
    events: list[FaultEvent] = []
    merged: tuple[int, int, str] | None = None
    for iv in intervals:
        if merged is not None and iv[0] <= merged[1]:
            merged = (merged[0], max(merged[1], iv[1]), merged[2])
        else:
            if merged is not None:
                events.append(_event_from(t, r, merged))
            merged = iv
    if merged is not None:
        events.append(_event_from(t, r, merged))
    return events


def _event_from(t: np.ndarray, r: np.ndarray, interval: tuple[int, int, str]) -> FaultEvent:
    s, e, hint = interval
    return FaultEvent(
        detected_t=float(t[s]),
        kind_hint=hint,
        peak_residual=float(np.max(np.abs(r[s : e + 1]))),
    )
