"""Sliding-window median smoothing."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import EmptyInput, EvenWindow


def median_filter(values: Sequence[float] | np.ndarray, window: int = 5) -> np.ndarray:
    """Replace each sample by the median of its ``window`` neighbourhood.

    Near the ends the window shrinks symmetrically to the largest odd
    neighbourhood that fits, so no padding values enter the output, every
    output is an input value and monotone runs are left as they are.
    """
    if window < 3 or window % 2 == 0:
        raise EvenWindow(f"window must be odd and >= 3, got {window}")
    x = np.asarray(values, dtype=float)
    n = x.size
    if n == 0:
        raise EmptyInput("median_filter needs at least one sample")
    h = window // 2
    out = np.empty(n)
    if n >= window:
        out[h : n - h] = np.median(sliding_window_view(x, window), axis=1)
        edges = list(range(h)) + list(range(n - h, n))
    else:
        edges = list(range(n))
    for i in edges:
        k = min(h, i, n - 1 - i)
        out[i] = np.median(x[i - k : i + k + 1])
    return out
