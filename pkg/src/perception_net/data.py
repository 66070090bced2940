"""CSV ingestion and score emission.

Input: RFC-4180-style CSV with a header row, `.` decimal separator, UTF-8.
All non-label cells must parse as finite reals; an optional label column
(named at load time) must hold 0/1 values. Output: one row per observation,
input order preserved, scores at nine significant digits.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CellParseError,
    DataFormatError,
    LabelValueError,
    MissingColumnError,
    RaggedRowError,
)


@dataclass(frozen=True)
class Dataset:
    """An in-memory numeric dataset with optional binary labels."""

    matrix: np.ndarray                 # N x F float64, finite
    labels: np.ndarray | None          # N int8 in {0,1}, or None
    feature_names: tuple[str, ...]
    name: str

    @property
    def n_obs(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.matrix.shape[1])


def load_csv(path, label_column: str | None = None, name: str | None = None) -> Dataset:
    """Load a dataset; the label column, when named, is split out of the
    matrix. Errors carry 1-based row numbers counted from the header."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        label_idx = None
        if label_column is not None:
            if label_column not in header:
                raise MissingColumnError(
                    f"{path}: no column named {label_column!r} in header {header}"
                )
            label_idx = header.index(label_column)
        feature_names = tuple(h for i, h in enumerate(header) if i != label_idx)
        if not feature_names:
            raise DataFormatError(f"{path}: no feature columns besides the label")

        rows: list[list[float]] = []
        labels: list[int] = []
        for row_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue  # ignore trailing blank lines
            if len(row) != len(header):
                raise RaggedRowError(
                    f"{path}: row {row_no} has {len(row)} fields, header has {len(header)}"
                )
            vals = []
            for col_idx, cell in enumerate(row):
                if col_idx == label_idx:
                    try:
                        lab = float(cell)
                    except ValueError:
                        raise LabelValueError(
                            f"{path}: row {row_no} label {cell!r} is not 0 or 1"
                        ) from None
                    if lab not in (0.0, 1.0):
                        raise LabelValueError(
                            f"{path}: row {row_no} label {cell!r} is not 0 or 1"
                        )
                    labels.append(int(lab))
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise CellParseError(
                        f"{path}: row {row_no}, column {header[col_idx]!r}: "
                        f"cannot parse {cell!r} as a number"
                    ) from None
                if not math.isfinite(v):
                    raise CellParseError(
                        f"{path}: row {row_no}, column {header[col_idx]!r}: "
                        f"non-finite value {cell!r}"
                    )
                vals.append(v)
            rows.append(vals)

    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    matrix = np.array(rows, dtype=np.float64)
    return Dataset(
        matrix=matrix,
        labels=np.array(labels, dtype=np.int8) if label_idx is not None else None,
        feature_names=feature_names,
        name=name if name is not None else _stem(path),
    )


def _stem(path) -> str:
    import os

    return os.path.splitext(os.path.basename(str(path)))[0]


@dataclass(frozen=True)
class ScoreReport:
    """Per-observation scoring result destined for a CSV file."""

    score_sum: np.ndarray
    vote_sum: np.ndarray
    decision: np.ndarray   # {0,1}


def write_scores(report: ScoreReport, path) -> None:
    """Emit `index,score_sum,vote_sum,decision` with 9-significant-digit
    scores and 0/1 decisions."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("index,score_sum,vote_sum,decision\n")
        for i, (s, v, d) in enumerate(zip(report.score_sum, report.vote_sum,
                                          report.decision)):
            fh.write(f"{i},{float(s):.9g},{int(v)},{int(d)}\n")


def read_scores(path) -> ScoreReport:
    """Parse a file produced by :func:`write_scores`."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["index", "score_sum", "vote_sum", "decision"]:
            raise DataFormatError(f"{path}: unexpected score header {header}")
        ss, vs, ds = [], [], []
        for row in reader:
            ss.append(float(row[1]))
            vs.append(int(row[2]))
            ds.append(int(row[3]))
    return ScoreReport(score_sum=np.array(ss), vote_sum=np.array(vs, dtype=np.int64),
                       decision=np.array(ds, dtype=np.int8))
