"""Discrete wavelet shrinkage with Daubechies-4 filters.

The transform is an orthonormal periodic filter bank. For arbitrary lengths
(``mode="symmetric"``) the signal is first mirrored, ``x + x[::-1]``, and then
padded with ``x[0]`` up to a multiple of ``2**levels``; the mirrored copy makes
the periodic wrap continuous, so the ends of a fuel trace do not bleed into
each other. ``mode="periodic"`` transforms the signal as is and needs a length
divisible by ``2**levels``; it is the exactly energy-preserving variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BadLevels, EmptyDetails, ShapeMismatch, TooShort
from .model import PipelineConfig

# Daubechies wavelet with 4 vanishing moments (8 taps), analysis low-pass.
DB4_LOW = np.array(
    [
        -0.010597401785069032,
        0.0328830116668852,
        0.030841381835560764,
        -0.18703481171909309,
        -0.027983769416859854,
        0.6308807679298589,
        0.7148465705529157,
        0.2303778133088965,
    ]
)
DB4_HIGH = DB4_LOW[::-1] * np.array([(-1) ** m for m in range(DB4_LOW.size)])

MODES = ("symmetric", "periodic")


@dataclass(frozen=True)
class WaveletDecomposition:
    approx: np.ndarray
    details: tuple[np.ndarray, ...]  # finest level first
    levels: int
    original_length: int
    mode: str = "symmetric"

    def replace_details(self, details: Sequence[np.ndarray]) -> WaveletDecomposition:
        return WaveletDecomposition(
            self.approx, tuple(np.asarray(d, dtype=float) for d in details),
            self.levels, self.original_length, self.mode,
        )

    def energy(self) -> float:
        return float(np.sum(self.approx**2) + sum(np.sum(d**2) for d in self.details))


@dataclass(frozen=True)
class ShrinkThreshold:
    alpha: float
    noise_estimate: float
    datasize: int
    value: float


def _taps_index(n: int) -> np.ndarray:
    return (2 * np.arange(n // 2)[:, None] + np.arange(DB4_LOW.size)[None, :]) % n


def _analysis(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    windows = x[_taps_index(x.size)]
    return windows @ DB4_LOW, windows @ DB4_HIGH


def _synthesis(approx: np.ndarray, detail: np.ndarray) -> np.ndarray:
    n = 2 * approx.size
    out = np.zeros(n)
    base = 2 * np.arange(approx.size)
    for m in range(DB4_LOW.size):
        out[(base + m) % n] += approx * DB4_LOW[m] + detail * DB4_HIGH[m]
    return out


def _extend(x: np.ndarray, levels: int, mode: str) -> np.ndarray:
    block = 2**levels
    if mode == "periodic":
        if x.size % block:
            raise ShapeMismatch(f"periodic mode needs a length divisible by {block}, got {x.size}")
        return x
    ext = np.concatenate([x, x[::-1]])
    pad = (-ext.size) % block
    if pad:
        ext = np.concatenate([ext, np.full(pad, x[0])])
    return ext


def dwt(values: Sequence[float] | np.ndarray, levels: int = 4, mode: str = "symmetric") -> WaveletDecomposition:
    if levels < 1:
        raise BadLevels(f"levels must be >= 1, got {levels}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    x = np.asarray(values, dtype=float)
    if x.size < 2**levels:
        raise TooShort(f"{levels} levels need at least {2**levels} samples, got {x.size}")
    approx = _extend(x, levels, mode)
    details = []
    for _ in range(levels):
        approx, detail = _analysis(approx)
        details.append(detail)
    return WaveletDecomposition(approx, tuple(details), levels, x.size, mode)


def idwt(decomp: WaveletDecomposition) -> np.ndarray:
    if len(decomp.details) != decomp.levels:
        raise ShapeMismatch(f"expected {decomp.levels} detail levels, got {len(decomp.details)}")
    approx = np.asarray(decomp.approx, dtype=float)
    for detail in reversed(decomp.details):
        if detail.size != approx.size:
            raise ShapeMismatch(f"detail length {detail.size} != approximation length {approx.size}")
        approx = _synthesis(approx, np.asarray(detail, dtype=float))
    if approx.size < decomp.original_length:
        raise ShapeMismatch("decomposition is shorter than its original length")
    return approx[: decomp.original_length].copy()


def shrink_threshold(details: Sequence[np.ndarray], alpha: float, datasize: int) -> ShrinkThreshold:
    """``alpha * sqrt(noise) * ln(datasize)`` with noise = median |finest detail|."""
    if datasize < 2:
        raise TooShort("datasize must be >= 2")
    if len(details) == 0 or np.asarray(details[0]).size == 0:
        raise EmptyDetails("no detail coefficients to estimate noise from")
    noise = float(np.median(np.abs(details[0])))
    value = alpha * math.sqrt(noise) * math.log(datasize)
    return ShrinkThreshold(alpha, noise, datasize, value)


def soft_threshold(coeffs: np.ndarray, t: float) -> np.ndarray:
    return np.sign(coeffs) * np.maximum(np.abs(coeffs) - t, 0.0)


def denoise(values: Sequence[float] | np.ndarray, config: PipelineConfig | None = None) -> np.ndarray:
    config = config or PipelineConfig()
    x = np.asarray(values, dtype=float)
    decomp = dwt(x, config.wavelet_levels)
    threshold = shrink_threshold(decomp.details, config.wavelet_alpha, x.size)
    if threshold.value == 0.0:
        return idwt(decomp)
    shrunk = [soft_threshold(d, threshold.value) for d in decomp.details]
    return idwt(decomp.replace_details(shrunk))


def _pearson_by_lag(x: np.ndarray, y: np.ndarray, max_lag: int) -> tuple[np.ndarray, np.ndarray]:
    n = x.size
    x = x - x.mean()
    y = y - y.mean()
    size = 1 << (2 * n - 1).bit_length()
    # cross[lag] = sum_t x[t] * y[t + lag]; negative lags wrap to the end
    cross = np.fft.irfft(np.conj(np.fft.rfft(x, size)) * np.fft.rfft(y, size), size)
    lags = np.arange(-max_lag, max_lag + 1)
    sxy = cross[lags % size]

    cx = np.concatenate([[0.0], np.cumsum(x)])
    cx2 = np.concatenate([[0.0], np.cumsum(x * x)])
    cy = np.concatenate([[0.0], np.cumsum(y)])
    cy2 = np.concatenate([[0.0], np.cumsum(y * y)])
    # overlap: x[a:b] pairs with y[a+lag:b+lag]
    a = np.maximum(0, -lags)
    b = np.minimum(n, n - lags)
    m = (b - a).astype(float)
    sx, sx2 = cx[b] - cx[a], cx2[b] - cx2[a]
    sy, sy2 = cy[b + lags] - cy[a + lags], cy2[b + lags] - cy2[a + lags]
    cov = m * sxy - sx * sy
    var = (m * sx2 - sx**2) * (m * sy2 - sy**2)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(var > 0, cov / np.sqrt(np.where(var > 0, var, 1.0)), -np.inf)
    return lags, r


def align_shift(
    original: Sequence[float] | np.ndarray, denoised: Sequence[float] | np.ndarray, max_lag: int = 6000
) -> int:
    """Lag that best aligns ``denoised`` onto ``original``.

    Returns ``lag`` such that ``denoised[t + lag]`` matches ``original[t]``
    (normalised cross-correlation over the overlap). Shift anything found in
    ``denoised`` by ``-lag`` to get back to ``original`` coordinates. Ties go
    to the smallest absolute lag.
    """
    x = np.asarray(original, dtype=float)
    y = np.asarray(denoised, dtype=float)
    if x.size != y.size:
        raise ShapeMismatch("align_shift needs sequences of equal length")
    if x.size < 2 or 2 * max_lag >= x.size:
        raise TooShort(f"max_lag {max_lag} must be below half the length {x.size}")
    lags, r = _pearson_by_lag(x, y, max_lag)
    if not np.isfinite(r).any():
        return 0
    best = np.flatnonzero(r == r.max())
    return int(lags[best[np.argmin(np.abs(lags[best]))]])
