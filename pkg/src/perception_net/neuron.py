"""Single robust-median anomaly detector for univariate numeric batches.

The detector learns three integers from a batch: the integer median of the
scaled values, the total absolute deviation S from that median, and the
observation count W. A value at integer deviation n from the median is
anomalous when the expected number of n-element co-occurrences under a
uniform-noise null, C(S, n) / W**(n-1), is below one; equivalently when the
log-transformed score f = -(ln C(S,n) - (n-1) ln W) / S is positive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateModelError, DomainError, IntegerRangeError, InvalidInputError

MAX_DECIMALS = 6

# beyond 2**53 an int64 no longer round-trips through float64 exactly
_INT_EXACT_LIMIT = float(2**53)


def _as_float_array(values, name: str = "values") -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < 1:
        raise InvalidInputError(f"{name} must contain at least one value")
    if not np.isfinite(arr).all():
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise InvalidInputError(f"{name} contains a non-finite value at index {bad}")
    return arr


def infer_decimals(values) -> int:
    """Smallest d <= 6 such that every value*10**d is within 1e-9 of an
    integer; 6 when no such d exists."""
    arr = _as_float_array(values)
    for d in range(MAX_DECIMALS + 1):
        scaled = arr * 10.0**d
        if np.all(np.abs(scaled - np.rint(scaled)) <= 1e-9):
            return d
    return MAX_DECIMALS


def round_half_away(scaled: np.ndarray) -> np.ndarray:
    """Elementwise round half away from zero, snapping near-ties.

    Decimal inputs reach us through binary floats, so a true .5 tie may sit a
    few ulp below it; the snap band covers representation error without
    disturbing genuine sub-half fractions.
    """
    a = np.abs(scaled)
    k = np.floor(a)
    frac = a - k
    eps = np.maximum(1e-9, 5e-14 * a)
    k = k + (frac >= 0.5 - eps)
    return np.where(np.signbit(scaled), -k, k)


def integerize(values, decimals: int) -> np.ndarray:
    """Scale by 10**decimals and round half away from zero to int64."""
    if not 0 <= decimals <= MAX_DECIMALS:
        raise DomainError(f"decimals must be in [0, {MAX_DECIMALS}], got {decimals}")
    arr = _as_float_array(values)
    rounded = round_half_away(arr * 10.0**decimals)
    if np.any(np.abs(rounded) >= _INT_EXACT_LIMIT):
        raise IntegerRangeError(
            f"scaled values exceed the exact integer range (|v*10^{decimals}| >= 2^53)"
        )
    return rounded.astype(np.int64)


def integerize_value(z: float, decimals: int) -> int:
    """Scalar integerize with the same rounding rule."""
    if not math.isfinite(z):
        raise InvalidInputError(f"value must be finite, got {z!r}")
    return int(integerize([z], decimals)[0])


def int_median(ints: np.ndarray) -> int:
    """Integer median; for even length the mean of the two central values,
    rounded half away from zero."""
    xs = np.sort(np.asarray(ints, dtype=np.int64))
    m = xs.size
    if m == 0:
        raise InvalidInputError("cannot take the median of an empty series")
    if m % 2:
        return int(xs[m // 2])
    s = int(xs[m // 2 - 1]) + int(xs[m // 2])
    if s % 2 == 0:
        return s // 2
    return (s + 1) // 2 if s > 0 else (s - 1) // 2


def exact_deviation_sum(devs: np.ndarray) -> int:
    """Sum of nonnegative int64 deviations, exact even past int64."""
    if devs.size == 0:
        return 0
    if int(devs.max()) * devs.size < 2**63:
        return int(devs.sum(dtype=np.int64))
    return sum(int(v) for v in devs)


@dataclass(frozen=True)
class NeuronModel:
    """Learned state of one detector: everything scoring needs."""

    median_int: int
    total_dev: int
    count: int
    decimals: int

    def __post_init__(self):
        if self.count < 1:
            raise InvalidInputError("count must be >= 1")
        if self.total_dev < 0:
            raise InvalidInputError("total_dev must be >= 0")
        if not 0 <= self.decimals <= MAX_DECIMALS:
            raise DomainError(f"decimals must be in [0, {MAX_DECIMALS}]")

    @property
    def degenerate(self) -> bool:
        """True when the fitted batch had no contrast (S == 0); such a model
        never fires."""
        return self.total_dev == 0


def fit_integers(ints, decimals: int = 0) -> NeuronModel:
    """Fit on an already-integerized series."""
    ints = np.asarray(ints, dtype=np.int64)
    if ints.ndim != 1 or ints.size < 1:
        raise InvalidInputError("series must be a non-empty one-dimensional sequence")
    med = int_median(ints)
    total = exact_deviation_sum(np.abs(ints - med))
    return NeuronModel(median_int=med, total_dev=total, count=int(ints.size), decimals=decimals)


def fit_values(values, decimals: int | None = None) -> NeuronModel:
    """Fit on raw values; the decimal scale is inferred unless given."""
    arr = _as_float_array(values)
    d = infer_decimals(arr) if decimals is None else decimals
    return fit_integers(integerize(arr, d), d)


def log_binomial(total: int, n: int) -> float:
    """Natural log of C(total, n) via the log-gamma function."""
    if not 0 <= n <= total:
        raise DomainError(f"n must be in [0, {total}], got {n}")
    return float(kernels.log_binomial_array(total, np.array([n], dtype=np.int64))[0])


def expected_count(total_dev: int, count: int, n: int) -> float:
    """Expected number of n-element co-occurrences, C(S, n) / W**(n-1)."""
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    if not 0 <= n <= total_dev:
        raise DomainError(f"n must be in [0, {total_dev}], got {n}")
    log_e = log_binomial(total_dev, n) - (n - 1) * math.log(count)
    try:
        return math.exp(log_e)
    except OverflowError:
        return math.inf


def deviation(model: NeuronModel, z: float) -> int:
    """Integer deviation of a raw value from the model median."""
    return abs(integerize_value(z, model.decimals) - model.median_int)


def score(model: NeuronModel, z: float) -> float:
    """Anomaly score of a single raw value; 0.0 for a degenerate model."""
    n = deviation(model, z)
    if model.degenerate:
        return 0.0
    devs = np.array([n], dtype=np.int64)
    return float(kernels.scores_for_deviations(model.total_dev, model.count, devs)[0])


def decide(model: NeuronModel, z: float) -> bool:
    """True when the value is anomalous (score strictly positive)."""
    return score(model, z) > 0.0


@dataclass(frozen=True)
class ScoredPoint:
    """Per-value scoring result."""

    value: float
    deviation: int
    score: float
    expected_count: float | None  # absent past the fitted range (n > S)
    anomaly: bool


def score_array(model: NeuronModel, values) -> np.ndarray:
    """Vectorized scores for raw values (shares the series kernel path)."""
    ints = integerize(values, model.decimals)
    if model.degenerate:
        return np.zeros(ints.size)
    devs = np.abs(ints - model.median_int)
    return kernels.scores_for_deviations(model.total_dev, model.count, devs)


def score_series(model: NeuronModel, values) -> list[ScoredPoint]:
    """Score every value, preserving order."""
    arr = _as_float_array(values)
    ints = integerize(arr, model.decimals)
    devs = np.abs(ints - model.median_int)
    if model.degenerate:
        scores = np.zeros(arr.size)
    else:
        scores = kernels.scores_for_deviations(model.total_dev, model.count, devs)
    out = []
    log_w = math.log(model.count)
    for v, n, f in zip(arr, devs, scores):
        n = int(n)
        if n > model.total_dev:
            e = None
        else:
            log_e = log_binomial(model.total_dev, n) - (n - 1) * log_w
            e = math.inf if log_e > 709.0 else math.exp(log_e)
        out.append(ScoredPoint(float(v), n, float(f), e, bool(f > 0.0)))
    return out


def anomaly_values(model: NeuronModel, values) -> list[float]:
    """Distinct raw values the model flags, ascending."""
    pts = score_series(model, values)
    return sorted({p.value for p in pts if p.anomaly})


def score_curve(model: NeuronModel, z_lo: float, z_hi: float):
    """Tabulate the score over [z_lo, z_hi] at the model's decimal step.

    Returns (z, deviations, scores, beyond) arrays where ``beyond`` marks the
    linear region n > S. Raises for degenerate models, which have no curve.
    """
    if model.degenerate:
        raise DegenerateModelError("a zero-contrast model has no score curve")
    if not (math.isfinite(z_lo) and math.isfinite(z_hi)) or z_hi < z_lo:
        raise InvalidInputError("need finite z_lo <= z_hi")
    lo = integerize_value(z_lo, model.decimals)
    hi = integerize_value(z_hi, model.decimals)
    ints = np.arange(lo, hi + 1, dtype=np.int64)
    devs = np.abs(ints - model.median_int)
    scores = kernels.scores_for_deviations(model.total_dev, model.count, devs)
    z = ints / 10.0**model.decimals
    return z, devs, scores, devs > model.total_dev
