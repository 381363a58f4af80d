"""Brute-force reference implementations used as oracles by the test suite.

Everything here is written as plain double loops over Python floats, with
accumulation strictly in ascending index order so the library kernels can be
compared bit-for-bit. Nothing imports the package under test.
"""

import numpy as np


def xcorr_valid_ref(x, w):
    """y(n) = sum_m w(m) x(n+m), n = 0 .. len(x)-len(w)."""
    x = [float(v) for v in x]
    w = [float(v) for v in w]
    out = []
    for n in range(len(x) - len(w) + 1):
        acc = 0.0
        for m in range(len(w)):
            acc += w[m] * x[n + m]
        out.append(acc)
    return np.array(out, dtype=np.float64)


def xcorr_same_ref(x, w):
    """Valid correlation after padding (len(w)-1)//2 zeros on each side."""
    pad = (len(w) - 1) // 2
    xp = [0.0] * pad + [float(v) for v in x] + [0.0] * pad
    return xcorr_valid_ref(xp, w)


def conv_full_ref(a, b):
    """out(n) = sum_m a(m) b(n-m), full support, ascending m."""
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    out = []
    for n in range(len(a) + len(b) - 1):
        acc = 0.0
        for m in range(len(a)):
            if 0 <= n - m < len(b):
                acc += a[m] * b[n - m]
        out.append(acc)
    return np.array(out, dtype=np.float64)


def dense_ref(weights, x, bias=None):
    """y(k) = sum_n w(k,n) x(n) (+ b(k)), ascending n."""
    out = []
    for k in range(len(weights)):
        acc = 0.0
        for n in range(len(x)):
            acc += float(weights[k][n]) * float(x[n])
        if bias is not None:
            acc += float(bias[k])
        out.append(acc)
    return np.array(out, dtype=np.float64)


def maxpool_ref(rows, width):
    """Non-overlapping max pooling with a short trailing segment.

    Returns (pooled, mask) where mask marks the first-index argmax of every
    segment.
    """
    rows = np.asarray(rows, dtype=np.float64)
    n_seg = -(-rows.shape[1] // width)
    pooled = np.zeros((rows.shape[0], n_seg))
    mask = np.zeros(rows.shape, dtype=np.int64)
    for k in range(rows.shape[0]):
        for s in range(n_seg):
            lo, hi = s * width, min((s + 1) * width, rows.shape[1])
            best, best_i = rows[k][lo], lo
            for i in range(lo + 1, hi):
                if rows[k][i] > best:  # strict: first index wins ties
                    best, best_i = rows[k][i], i
            pooled[k][s] = best
            mask[k][best_i] = 1
    return pooled, mask


def softmax_ref_mpmath(y, dps=50):
    """Arbitrary-precision softmax, returned as float64."""
    import mpmath

    with mpmath.workdps(dps):
        exps = [mpmath.exp(mpmath.mpf(repr(float(v)))) for v in y]
        total = mpmath.fsum(exps)
        return np.array([float(e / total) for e in exps], dtype=np.float64)


def numeric_gradient(loss_fn, arr, index, h=1e-6):
    """Central finite difference of loss_fn w.r.t. arr[index] (arr mutated in place)."""
    old = arr[index]
    arr[index] = old + h
    lp = loss_fn()
    arr[index] = old - h
    lm = loss_fn()
    arr[index] = old
    return (lp - lm) / (2.0 * h)
