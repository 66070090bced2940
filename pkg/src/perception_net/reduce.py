"""Multivariate reduction: observations become nonnegative integer deviation
magnitudes (L1 distance to the per-feature integer medians), so the
univariate expected-count test applies unchanged. For one feature this is
exactly the univariate detector."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidInputError
from .neuron import (
    exact_deviation_sum,
    infer_decimals,
    int_median,
    integerize,
)


def as_matrix(matrix, name: str = "matrix") -> np.ndarray:
    try:
        arr = np.asarray(matrix, dtype=np.float64)
    except ValueError as exc:
        raise InvalidInputError(f"{name} is ragged or non-numeric: {exc}") from exc
    if arr.ndim == 1:
        arr = arr[:, np.newaxis]
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} must have at least one row and one column")
    if not np.isfinite(arr).all():
        i, j = np.argwhere(~np.isfinite(arr))[0]
        raise InvalidInputError(f"{name} contains a non-finite value at row {i}, column {j}")
    return arr


def infer_matrix_decimals(matrix) -> np.ndarray:
    """Per-feature decimal scales, each capped at 6."""
    arr = as_matrix(matrix)
    return np.array([infer_decimals(arr[:, j]) for j in range(arr.shape[1])], dtype=np.int64)


def integerize_matrix(matrix, scales) -> np.ndarray:
    """Per-feature scaling and rounding to an int64 matrix."""
    arr = as_matrix(matrix)
    scales = np.asarray(scales, dtype=np.int64)
    if scales.shape != (arr.shape[1],):
        raise InvalidInputError(
            f"expected {arr.shape[1]} per-feature scales, got shape {scales.shape}"
        )
    cols = [integerize(arr[:, j], int(scales[j])) for j in range(arr.shape[1])]
    return np.column_stack(cols)


def featurewise_median(int_matrix) -> np.ndarray:
    """Integer median of every column (even-length rule as in the univariate fit)."""
    x = np.asarray(int_matrix, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise InvalidInputError(f"need a non-empty 2-d integer matrix, got shape {x.shape}")
    return np.array([int_median(x[:, j]) for j in range(x.shape[1])], dtype=np.int64)


def deviation_reduce(int_matrix, medians) -> np.ndarray:
    """Per-row L1 distance to the medians: the reduced deviation series."""
    x = np.asarray(int_matrix, dtype=np.int64)
    med = np.asarray(medians, dtype=np.int64)
    if x.ndim != 2:
        raise InvalidInputError(f"need a 2-d integer matrix, got shape {x.shape}")
    if med.shape != (x.shape[1],):
        raise InvalidInputError(f"expected {x.shape[1]} medians, got shape {med.shape}")
    return kernels.l1_deviations(np.ascontiguousarray(x), med)


@dataclass(frozen=True)
class DeviationNeuron:
    """Expected-count test over a fitted deviation series: S is the sum of
    the deviations, W their count; deviations are tested directly."""

    total_dev: int
    count: int

    @property
    def degenerate(self) -> bool:
        return self.total_dev == 0

    def scores(self, devs) -> np.ndarray:
        devs = np.asarray(devs, dtype=np.int64)
        if self.degenerate:
            return np.zeros(devs.size)
        return kernels.scores_for_deviations(self.total_dev, self.count, devs)

    def decisions(self, devs) -> np.ndarray:
        return self.scores(devs) > 0.0


def fit_deviation_neuron(devs) -> DeviationNeuron:
    """Fit the direct test on a nonnegative integer deviation series."""
    devs = np.asarray(devs, dtype=np.int64)
    if devs.ndim != 1 or devs.size < 1:
        raise InvalidInputError("deviation series must be non-empty and one-dimensional")
    if (devs < 0).any():
        raise InvalidInputError("deviations must be nonnegative")
    return DeviationNeuron(total_dev=exact_deviation_sum(devs), count=int(devs.size))


@dataclass(frozen=True)
class DeviationModel:
    """A fitted multivariate detector: per-feature medians and scales plus
    the deviation test. This is the single-detector path for any F >= 1."""

    medians: np.ndarray
    scales: np.ndarray
    total_dev: int
    count: int

    @property
    def degenerate(self) -> bool:
        return self.total_dev == 0

    @property
    def n_features(self) -> int:
        return int(self.medians.size)

    @classmethod
    def fit_int(cls, int_matrix: np.ndarray, scales: np.ndarray) -> "DeviationModel":
        med = featurewise_median(int_matrix)
        devs = deviation_reduce(int_matrix, med)
        test = fit_deviation_neuron(devs)
        return cls(medians=med, scales=np.asarray(scales, dtype=np.int64),
                   total_dev=test.total_dev, count=test.count)

    @classmethod
    def fit(cls, matrix, decimals: int | None = None) -> "DeviationModel":
        arr = as_matrix(matrix)
        if decimals is None:
            scales = infer_matrix_decimals(arr)
        else:
            scales = np.full(arr.shape[1], decimals, dtype=np.int64)
        return cls.fit_int(integerize_matrix(arr, scales), scales)

    def deviations(self, matrix) -> np.ndarray:
        x = integerize_matrix(as_matrix(matrix), self.scales)
        return deviation_reduce(x, self.medians)

    def scores(self, matrix) -> np.ndarray:
        devs = self.deviations(matrix)
        if self.degenerate:
            return np.zeros(devs.size)
        return kernels.scores_for_deviations(self.total_dev, self.count, devs)

    def decisions(self, matrix) -> np.ndarray:
        return self.scores(matrix) > 0.0
