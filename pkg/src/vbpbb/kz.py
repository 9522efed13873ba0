"""Kolmogorov-Zurbenko low-pass and KZFT band-pass filters.

A KZ filter is a centred moving average of odd width ``m`` iterated ``k``
times.  Its weights are the coefficients of ``(1 + z + ... + z^(m-1))^k``
divided by ``m^k``.  The KZFT filter modulates those weights by
``exp(-i 2 pi nu u)`` to move the passband to frequency ``nu``::

    KZFT(t) = sum_u  a_u / m^k * exp(-i 2 pi nu u) * X(t + u),
              u = -k(m-1)/2 .. k(m-1)/2

For k = 1 the transfer function has exact zeros at ``nu + q/m`` for every
nonzero integer ``q``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from . import _kernels
from .errors import (
    DuplicateFrequencyError,
    InfeasibleBandwidthError,
    InsufficientDataError,
    InvalidParameterError,
)
from .series import TimeSeries

EdgeMode = Literal["valid", "renormalized"]

_INT64_SAFE = 2**62


def kz_coefficients(m: int, k: int) -> np.ndarray:
    """Integer coefficients of ``(1 + z + ... + z^(m-1))^k``.

    Computed by exact integer convolution (repeated sliding-window sums).
    The result is ``int64`` while ``m**k`` fits, otherwise an object array
    of Python ints.
    """
    _check_mk(m, k)
    dtype = np.int64 if m**k < _INT64_SAFE else object
    coef = np.ones(1, dtype=dtype)
    for _ in range(k):
        # convolving with m ones == difference of prefix sums m apart
        padded = np.concatenate([np.zeros(m - 1, dtype=dtype), coef, np.zeros(m - 1, dtype=dtype)])
        csum = np.concatenate([np.zeros(1, dtype=dtype), np.cumsum(padded)])
        coef = csum[m:] - csum[:-m]
    return coef


def _check_mk(m, k) -> None:
    if int(m) != m or m < 1 or m % 2 == 0:
        raise InvalidParameterError(f"window m must be an odd positive integer, got {m!r}")
    if int(k) != k or k < 1:
        raise InvalidParameterError(f"iterations k must be a positive integer, got {k!r}")


def _as_frequency(nu) -> Fraction | float:
    if isinstance(nu, Fraction):
        return nu
    if isinstance(nu, int):
        return Fraction(nu)
    return float(nu)


@dataclass(frozen=True, eq=False)
class KZFTPlan:
    """Filter parameters plus the derived integer coefficient vector."""

    m: int
    k: int = 1
    nu: Fraction | float = Fraction(0)

    def __post_init__(self):
        _check_mk(self.m, self.k)
        nu = _as_frequency(self.nu)
        if not 0 <= nu <= Fraction(1, 2):
            raise InvalidParameterError(f"center frequency must lie in [0, 1/2], got {nu}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "nu", nu)
        coef = kz_coefficients(self.m, self.k)
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)

    @property
    def normalizer(self) -> int:
        return self.m**self.k

    @property
    def half_width(self) -> int:
        return self.k * (self.m - 1) // 2

    @property
    def length(self) -> int:
        return self.k * (self.m - 1) + 1

    def lags(self) -> np.ndarray:
        h = self.half_width
        return np.arange(-h, h + 1)

    def weights(self) -> np.ndarray:
        """Complex weights ``a_u / m^k * exp(-i 2 pi nu u)`` for u = -h..h."""
        norm = self.normalizer
        # int / int is correctly rounded even past 2**53
        scaled = np.array([int(c) / norm for c in self.coefficients])
        lags = self.lags()
        if isinstance(self.nu, Fraction):
            # reduce nu*u modulo 1 exactly before going to floating point
            num, den = self.nu.numerator, self.nu.denominator
            turns = ((num * lags) % den) / den
        else:
            turns = np.mod(self.nu * lags, 1.0)
        return scaled * np.exp(-2j * np.pi * turns)

    def __repr__(self) -> str:
        return f"KZFTPlan(m={self.m}, k={self.k}, nu={self.nu})"


@dataclass(frozen=True, eq=False)
class FilteredComponent:
    """Complex KZFT output over the positions where it was computed.

    ``valid_from``/``valid_to`` are inclusive positions inside the input
    series; ``origin_index`` is the absolute index of ``complex_series[0]``.
    """

    complex_series: np.ndarray
    valid_from: int
    valid_to: int
    plan: KZFTPlan
    origin_index: int
    source: TimeSeries

    @property
    def real_series(self) -> TimeSeries:
        return reconstruct_real(self)


def kzft_apply(series: TimeSeries, plan: KZFTPlan, edge: EdgeMode = "valid") -> FilteredComponent:
    """Apply the KZFT filter described by ``plan``.

    ``edge="valid"`` (default) keeps only positions where the whole window
    fits, so the output is ``k(m-1)`` samples shorter than the input.
    ``edge="renormalized"`` returns full-length output where edge windows
    are rescaled by the in-range coefficient mass; it biases amplitude near
    the ends and is meant for exploratory plots.
    """
    n, L, h = series.n, plan.length, plan.half_width
    if n < L:
        raise InsufficientDataError(
            f"series of length {n} is shorter than the filter window; need at least {L} samples "
            f"(m={plan.m}, k={plan.k})",
            required=L,
        )
    w = plan.weights()
    w_re = np.ascontiguousarray(w.real)
    w_im = np.ascontiguousarray(w.imag)
    x = np.ascontiguousarray(series.values, dtype=np.float64)
    if edge == "valid":
        re, im = _kernels.window_sum(x, w_re, w_im)
        out = re + 1j * im
        return FilteredComponent(out, h, n - 1 - h, plan, series.origin_index + h, series)
    if edge == "renormalized":
        xp = np.concatenate([np.zeros(h), x, np.zeros(h)])
        re, im = _kernels.window_sum(xp, w_re, w_im)
        mass, _ = _kernels.window_sum(np.concatenate([np.zeros(h), np.ones(n), np.zeros(h)]), np.abs(w), np.zeros(L))
        out = (re + 1j * im) / mass
        return FilteredComponent(out, 0, n - 1, plan, series.origin_index, series)
    raise InvalidParameterError(f"unknown edge mode {edge!r}")


def reconstruct_real(fc: FilteredComponent) -> TimeSeries:
    """Real-valued component carried by a KZFT output.

    A band-pass output centred at ``nu > 0`` only holds the positive
    frequency half of a real oscillation, so the real component is twice
    its real part.  At ``nu = 0`` (low-pass) and for the all-pass ``m = 1``
    filter both spectral halves are already present and no doubling
    applies.
    """
    plan = fc.plan
    scale = 1.0 if (plan.nu == 0 or plan.m == 1) else 2.0
    values = scale * fc.complex_series.real
    label = fc.source.label_at(fc.valid_from)
    return TimeSeries(values, fc.origin_index, label)


def select_bandwidth(target, others: Iterable, n: int | None = None, k: int = 1) -> int:
    """Smallest odd window that keeps every other frequency out of the passband.

    Frequency 0 is always added to ``others`` so trend and level are
    excluded.  With ``delta`` the smallest distance from ``target`` to a
    competitor, the window is the smallest odd integer strictly greater
    than ``2 / delta``.  If ``n`` is given, the window must fit:
    ``k(m-1)+1 <= n``.
    """
    target = _as_frequency(target)
    competitors = {_as_frequency(f) for f in others} | {Fraction(0)}
    delta = min(abs(target - f) for f in competitors)
    if delta == 0:
        raise DuplicateFrequencyError(f"target frequency {target} coincides with a competing frequency")
    bound = 2 / delta
    m = math.floor(bound) + 1
    if m % 2 == 0:
        m += 1
    if n is not None:
        required = k * (m - 1) + 1
        if required > n:
            raise InfeasibleBandwidthError(
                f"passband for frequency {target} needs m={m}; series length {n} is too short, "
                f"minimum n = {required}",
                required_n=required,
            )
    return m


def kz_lowpass(series: TimeSeries, m: int, k: int = 1, edge: EdgeMode = "valid") -> TimeSeries:
    """Iterated centred moving average (KZ filter)."""
    return reconstruct_real(kzft_apply(series, KZFTPlan(m, k, Fraction(0)), edge=edge))
