"""Single-channel correlation and convolution kernels.

Conventions used throughout the package:

* a signal is a 1-D float64 array indexed from 0;
* cross-correlation slides the kernel without reversal,
  ``y(n) = sum_m w(m) x(n + m)``;
* convolution reverses one factor, ``out(n) = sum_m a(m) b(n - m)``.

Every kernel accumulates its dot products in ascending index order, one tap at
a time. That makes results reproducible bit for bit and lets tests compare
against double-loop reference implementations with ``==`` rather than a
tolerance.
"""

import numpy as np

from .errors import LengthError, ShapeError, ZeroEnergyError


def as_signal(x) -> np.ndarray:
    """Coerce to a 1-D float64 array, rejecting higher-rank input."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"expected a 1-D signal, got shape {arr.shape}")
    return arr


def reverse(w) -> np.ndarray:
    """Time-reverse a signal: reverse(w)(n) = w(M-1-n)."""
    return as_signal(w)[::-1].copy()


def energy(x) -> float:
    """Sum of squared samples. Empty signals have zero energy."""
    x = as_signal(x)
    acc = 0.0
    for v in x:
        acc += v * v
    return acc


def ordered_sum(x) -> float:
    """Left-to-right sum of a signal.

    A strict ascending-index fold, unlike ``np.sum``'s pairwise scheme, so a
    sum over a sparse vector is bit-equal to the sum over its non-zero entries
    in order. Bias gradients rely on this to equal the sum of repositioned
    deltas exactly.
    """
    x = as_signal(x)
    acc = 0.0
    for v in x:
        acc += v
    return acc


def unit_normalize(x) -> np.ndarray:
    """Scale a signal to unit energy.

    Raises ZeroEnergyError for zero-energy input, or when the energy is so
    small that the scaled result would overflow.
    """
    x = as_signal(x)
    e = energy(x)
    if e == 0.0:
        raise ZeroEnergyError("cannot normalize a zero-energy signal")
    out = x / np.sqrt(e)
    if not np.all(np.isfinite(out)):
        raise ZeroEnergyError("energy too small to normalize without overflow")
    return out


def xcorr_valid(x, w) -> np.ndarray:
    """Valid-mode cross-correlation: y(n) = sum_m w(m) x(n+m).

    The kernel w must fit inside x; the output has length len(x) - len(w) + 1.
    This is the matched-filter response of x to the template w.
    """
    x, w = as_signal(x), as_signal(w)
    if len(w) == 0 or len(x) == 0:
        raise LengthError("signals must be non-empty")
    if len(w) > len(x):
        raise LengthError(f"kernel of length {len(w)} does not fit signal of length {len(x)}")
    out_len = len(x) - len(w) + 1
    y = np.zeros(out_len)
    for m in range(len(w)):
        y += w[m] * x[m : m + out_len]
    return y


def xcorr_same(x, w) -> np.ndarray:
    """Cross-correlation with zero padding so the output length equals len(x).

    (len(w) - 1) // 2 zeros are appended on each side, which centres the
    kernel; only odd kernel lengths have a symmetric centre, so even lengths
    are rejected.
    """
    x, w = as_signal(x), as_signal(w)
    if len(w) == 0 or len(w) % 2 == 0:
        raise LengthError(f"same-mode correlation needs an odd kernel length, got {len(w)}")
    if len(w) > len(x):
        raise LengthError(f"kernel of length {len(w)} does not fit signal of length {len(x)}")
    pad = (len(w) - 1) // 2
    return xcorr_valid(np.pad(x, pad), w)


def conv_full(a, b) -> np.ndarray:
    """Full linear convolution: out(n) = sum_m a(m) b(n-m).

    Output length is len(a) + len(b) - 1. This is the operation used to push
    delta errors backwards through a correlation layer.
    """
    a, b = as_signal(a), as_signal(b)
    if len(a) == 0 or len(b) == 0:
        raise LengthError("signals must be non-empty")
    out = np.zeros(len(a) + len(b) - 1)
    for m in range(len(a)):
        out[m : m + len(b)] += a[m] * b
    return out
