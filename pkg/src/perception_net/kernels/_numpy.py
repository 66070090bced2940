"""Pure-NumPy scoring kernels (fallback backend).

Same contract as the compiled extension in ``_accel.pyx``; selection happens
in the package ``__init__``.
"""
import numpy as np
from scipy.special import gammaln

NAME = "numpy"


def log_binomial_array(total: int, n) -> np.ndarray:
    """ln C(total, n) elementwise via the log-gamma function."""
    n = np.asarray(n, dtype=np.float64)
    t = float(total)
    return gammaln(t + 1.0) - gammaln(n + 1.0) - gammaln(t - n + 1.0)


def score_deviations(total_dev: int, count: int, devs) -> tuple[np.ndarray, np.ndarray]:
    """Anomaly scores for integer deviations under an (S=total_dev, W=count) model.

    In range (n <= S) the score is -(ln C(S,n) - (n-1) ln W) / S; past it the
    log-binomial term is dropped, leaving the linear tail (n-1) ln W / S.
    Returns (scores, suspect): ``suspect`` marks in-range points whose log
    expected count sits inside the floating-point guard band around zero, to
    be settled exactly by the caller.
    """
    devs = np.asarray(devs, dtype=np.int64)
    S = float(total_dev)
    log_w = np.log(float(count))
    nf = devs.astype(np.float64)
    in_range = devs <= total_dev
    n_safe = np.where(in_range, nf, 0.0)
    ln_c = gammaln(S + 1.0) - gammaln(n_safe + 1.0) - gammaln(S - n_safe + 1.0)
    lead = (nf - 1.0) * log_w
    g = ln_c - lead
    scores = np.where(in_range, -g / S, lead / S)
    guard = 1e-9 * (1.0 + np.abs(ln_c) + np.abs(lead))
    suspect = in_range & (devs >= 2) & (np.abs(g) <= guard)
    return scores, suspect


def l1_deviations(x_int: np.ndarray, medians: np.ndarray) -> np.ndarray:
    """Per-row L1 distance of an integer matrix to the column medians."""
    return np.abs(x_int - medians[np.newaxis, :]).sum(axis=1)
