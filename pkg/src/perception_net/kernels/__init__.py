"""Kernel backend selection and the exact-arithmetic guard band.

The compiled extension is preferred when built; the NumPy fallback is
selected otherwise. ``PERCEPTION_NET_BACKEND`` forces a choice
(``accel``/``numpy``). Both backends share one subtlety: for points whose
log expected count falls inside a tiny guard band around zero, the sign of
the score is settled with exact big-integer arithmetic so that decisions
never depend on floating-point noise (and ties at an expected count of
exactly one score exactly 0.0).
"""
import math
import os
from fractions import Fraction

import numpy as np

from . import _numpy

_choice = os.environ.get("PERCEPTION_NET_BACKEND", "auto").strip().lower()
if _choice in ("", "auto"):
    try:
        from . import _accel as _impl
    except ImportError:
        _impl = _numpy
elif _choice == "accel":
    from . import _accel as _impl
elif _choice == "numpy":
    _impl = _numpy
else:
    raise ValueError(f"PERCEPTION_NET_BACKEND must be auto, accel or numpy, got {_choice!r}")

BACKEND = _impl.NAME

log_binomial_array = _impl.log_binomial_array
l1_deviations = _impl.l1_deviations


def _exact_score(total_dev: int, count: int, n: int) -> float:
    """Score sign settled by comparing C(S, n) with W**(n-1) exactly."""
    c = math.comb(total_dev, n)
    w = count ** (n - 1)
    if c == w:
        return 0.0
    return -math.log1p(float(Fraction(c - w, w))) / total_dev


def scores_for_deviations(total_dev: int, count: int, devs) -> np.ndarray:
    """Scores for integer deviations, with guard-band points settled exactly.

    Requires total_dev >= 1 and count >= 1; degenerate (zero-contrast)
    models are handled by callers before reaching the kernels.
    """
    scores, suspect = _impl.score_deviations(total_dev, count, devs)
    if suspect.any():
        devs = np.asarray(devs, dtype=np.int64)
        for i in np.flatnonzero(suspect):
            scores[i] = _exact_score(total_dev, count, int(devs[i]))
    return scores
