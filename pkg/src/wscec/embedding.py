"""Sliding-window FFT embedding of a heartbeat into R^d."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class EmbeddingParams:
    window_length: int = 10
    stride: int = 1
    embed_dim: int = 3

    def __post_init__(self):
        l, tau, d = self.window_length, self.stride, self.embed_dim
        if not 1 <= tau <= l:
            raise ParameterError(f"need 1 <= stride <= window_length, got stride={tau}, l={l}")
        if not 1 <= d <= l:
            raise ParameterError(f"need 1 <= embed_dim <= window_length, got d={d}, l={l}")

    def n_windows(self, n):
        """Number of windows ``floor((n - l) / tau) - 1`` for a length-``n`` signal."""
        return max((n - self.window_length) // self.stride - 1, 0)


@dataclass(frozen=True)
class FourierWindow:
    """DFT coefficients ``C_k = a_k + j b_k`` of one window."""

    a: np.ndarray
    b: np.ndarray

    @property
    def amplitude(self):
        return 2.0 * np.hypot(self.a, self.b)

    @property
    def phase(self):
        return np.arctan2(self.b, self.a)

    @property
    def coefficients(self):
        return self.a + 1j * self.b


@dataclass(frozen=True)
class EuclideanCloud:
    points: np.ndarray
    params: EmbeddingParams

    def __len__(self):
        return len(self.points)


def window_slices(samples, params):
    """Windows ``p_k = t[k tau : k tau + l]`` for ``k = 1 .. n_hat - 1``.

    ``n_hat = floor((n - l) / tau)``. The ``k = 0`` window is not used.
    Returns an ``(n_hat - 1, l)`` array.
    """
    t = np.asarray(getattr(samples, "samples", samples), dtype=float)
    n, l, tau = len(t), params.window_length, params.stride
    if l > n:
        raise ParameterError(f"window length {l} exceeds signal length {n}")
    count = params.n_windows(n)
    if count == 0:
        raise ParameterError(f"signal of length {n} yields no windows for l={l}, tau={tau}")
    starts = tau * np.arange(1, count + 1)
    return t[starts[:, None] + np.arange(l)[None, :]]


def fft_window(window):
    """DFT of one real window, split as ``C_k = a_k + j b_k`` (``b_k = Im C_k``)."""
    w = np.asarray(window, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise ParameterError("window must be a nonempty 1-D sequence")
    C = np.fft.fft(w)
    return FourierWindow(C.real.copy(), C.imag.copy())


def interleave(C, d):
    """First ``d`` entries of ``(a_0, a_1, b_1, a_2, b_2, ...)`` for each row of ``C``."""
    C = np.atleast_2d(C)
    cols = [C[:, 0].real]
    k = 1
    while len(cols) < d:
        cols.append(C[:, k].real)
        cols.append(C[:, k].imag)
        k += 1
    return np.stack(cols[:d], axis=-1)


def embed(beat, params=EmbeddingParams()):
    """Point cloud ``(2/l) (a_0, a_1, b_1, ...)[:d]`` over all sliding windows."""
    P = window_slices(beat, params)
    C = np.fft.fft(P, axis=-1)
    points = (2.0 / params.window_length) * interleave(C, params.embed_dim)
    return EuclideanCloud(points, params)
