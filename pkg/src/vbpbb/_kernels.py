"""Hot inner loops.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy
version.  ``BACKEND`` picks one at import time (the windowed sum always
uses numpy, which is faster there).  Set
``VBPBB_DISABLE_NUMBA=1`` to force the numpy path (numba is also skipped
if it fails to import).  Both versions are importable directly as
``*_numba`` / ``*_numpy`` for testing and benchmarking.
"""

from __future__ import annotations

import os

import numpy as np

try:
    if os.environ.get("VBPBB_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on"):
        raise ImportError("numba disabled by VBPBB_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# -- windowed weighted sum ------------------------------------------------------


def window_sum_numpy(x: np.ndarray, w_re: np.ndarray, w_im: np.ndarray):
    """``out[t] = sum_u w[u] * x[t + u]`` over full windows only."""
    # convolve flips its kernel, so pre-flip to get a correlation
    re = np.convolve(x, w_re[::-1], mode="valid")
    im = np.convolve(x, w_im[::-1], mode="valid")
    return re, im


def _window_sum_loop(x, w_re, w_im):
    L = w_re.shape[0]
    n_out = x.shape[0] - L + 1
    re = np.empty(n_out)
    im = np.empty(n_out)
    for t in range(n_out):
        sr = 0.0
        si = 0.0
        for u in range(L):
            v = x[t + u]
            sr += w_re[u] * v
            si += w_im[u] * v
        re[t] = sr
        im[t] = si
    return re, im


# -- periodic block bootstrap: per-resample periodic means -------------------------


def block_means_numpy(blocks: np.ndarray, fixed_sum: np.ndarray, counts: np.ndarray, draws: np.ndarray):
    """Periodic means of block resamples.

    ``blocks`` is (nb, P), ``draws`` is (R, nb) block indices; row r sums
    the drawn blocks, adds the fixed prefix/suffix contribution and divides
    by the per-phase sample count.
    """
    R, nb = draws.shape
    out = np.empty((R, blocks.shape[1]))
    for r in range(R):
        out[r] = (fixed_sum + blocks[draws[r]].sum(axis=0)) / counts
    return out


def _block_means_loop(blocks, fixed_sum, counts, draws):
    R, nb = draws.shape
    P = blocks.shape[1]
    out = np.empty((R, P))
    acc = np.empty(P)
    for r in range(R):
        for p in range(P):
            acc[p] = 0.0
        for s in range(nb):
            b = draws[r, s]
            for p in range(P):
                acc[p] += blocks[b, p]
        for p in range(P):
            out[r, p] = (fixed_sum[p] + acc[p]) / counts[p]
    return out


def phase_means_numpy(pool: np.ndarray, pool_start: np.ndarray, phase_of_pos: np.ndarray, counts: np.ndarray, draws: np.ndarray):
    """Periodic means of phasewise resamples.

    ``pool`` holds the samples grouped by phase (phase p occupies
    ``pool[pool_start[p]:pool_start[p] + counts[p]]``); ``draws`` is (R, n)
    within-phase offsets for each output position.
    """
    P = counts.shape[0]
    picked = pool[pool_start[phase_of_pos][None, :] + draws]
    out = np.empty((draws.shape[0], P))
    for r in range(draws.shape[0]):
        out[r] = np.bincount(phase_of_pos, weights=picked[r], minlength=P) / counts
    return out


def _phase_means_loop(pool, pool_start, phase_of_pos, counts, draws):
    R, n = draws.shape
    P = counts.shape[0]
    out = np.empty((R, P))
    acc = np.empty(P)
    for r in range(R):
        for p in range(P):
            acc[p] = 0.0
        for t in range(n):
            ph = phase_of_pos[t]
            acc[ph] += pool[pool_start[ph] + draws[r, t]]
        for p in range(P):
            out[r, p] = acc[p] / counts[p]
    return out


if HAVE_NUMBA:
    window_sum_numba = njit(cache=True, nogil=True)(_window_sum_loop)
    block_means_numba = njit(cache=True, nogil=True)(_block_means_loop)
    phase_means_numba = njit(cache=True, nogil=True)(_phase_means_loop)
    # np.convolve beats the compiled loop (see benchmarks/), so it is used by both backends
    window_sum = window_sum_numpy
    block_means = block_means_numba
    phase_means = phase_means_numba
else:
    window_sum_numba = block_means_numba = phase_means_numba = None
    window_sum = window_sum_numpy
    block_means = block_means_numpy
    phase_means = phase_means_numpy
