"""Layer primitives: correlation layers, activations, pooling, dense maps.

A convolutional channel k applied to a P-channel input x computes

    y_k(n) = sum_p xcorr_valid(x_p, w[k][p])(n) + b_k

optionally after zero padding ("same" mode) and followed by keeping every
stride-th output sample. Activation masks, pooling argmax masks, and stride
masks are 0/1 integer matrices with one row per channel; the backward pass
repositions delta errors by scattering through exactly these masks.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, LengthError, ShapeError
from .signal_ops import as_signal, xcorr_valid

PADDING_MODES = ("valid", "same")


def as_channels(x) -> np.ndarray:
    """Coerce to a (channels, length) float64 array; 1-D input becomes one channel."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise ShapeError(f"expected 1-D or (channels, length) input, got shape {arr.shape}")
    return arr


@dataclass
class ConvLayer:
    """Bank of correlation kernels w[k][p][m] with one bias per output channel."""

    weights: np.ndarray  # (out_channels, in_channels, taps)
    bias: np.ndarray  # (out_channels,)
    stride: int = 1
    padding: str = "valid"

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 3:
            raise ShapeError(f"conv weights must be 3-D, got shape {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[0],):
            raise ShapeError(
                f"bias shape {self.bias.shape} does not match {self.weights.shape[0]} channels"
            )
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")
        if self.padding not in PADDING_MODES:
            raise ConfigError(f"padding must be one of {PADDING_MODES}, got {self.padding!r}")

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def taps(self) -> int:
        return self.weights.shape[2]

    def param_count(self) -> int:
        """K * (P*M + 1): every channel owns P*M taps and one bias."""
        return self.out_channels * (self.in_channels * self.taps + 1)


@dataclass
class DenseLayer:
    """Fully connected map y(k) = sum_n w(k,n) x(n) (+ b(k)); bias off by default."""

    weights: np.ndarray  # (out_size, in_size)
    bias: np.ndarray | None = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 2:
            raise ShapeError(f"dense weights must be 2-D, got shape {self.weights.shape}")
        if self.bias is not None:
            self.bias = np.asarray(self.bias, dtype=np.float64)
            if self.bias.shape != (self.weights.shape[0],):
                raise ShapeError(
                    f"bias shape {self.bias.shape} does not match out size "
                    f"{self.weights.shape[0]}"
                )

    @property
    def out_size(self) -> int:
        return self.weights.shape[0]

    @property
    def in_size(self) -> int:
        return self.weights.shape[1]

    def param_count(self) -> int:
        return self.weights.size + (0 if self.bias is None else self.bias.size)


@dataclass
class ConvTrace:
    """What conv_forward must remember for the backward pass."""

    x_padded: np.ndarray  # input after zero padding, (in_channels, padded_len)
    pad: int  # zeros added on each side
    full_len: int  # correlation length before stride decimation
    stride: int
    stride_mask: np.ndarray  # (out_channels, full_len) 0/1, ones at kept positions


def conv_forward(x, layer: ConvLayer) -> tuple[np.ndarray, ConvTrace]:
    """Correlate a multi-channel input with a ConvLayer.

    Returns the stride-decimated pre-activations (out_channels, out_len) and
    the trace needed to run the layer backwards. Channel sums accumulate in
    ascending input-channel order.
    """
    x = as_channels(x)
    if x.shape[0] != layer.in_channels:
        raise ShapeError(
            f"layer expects {layer.in_channels} input channels, got {x.shape[0]}"
        )
    m = layer.taps
    if layer.padding == "same":
        if m % 2 == 0:
            raise LengthError(f"same padding needs an odd kernel length, got {m}")
        if m > x.shape[1]:
            raise LengthError(
                f"kernel of length {m} does not fit signal of length {x.shape[1]}"
            )
        pad = (m - 1) // 2
        xp = np.pad(x, ((0, 0), (pad, pad)))
    else:
        pad = 0
        xp = x
    if m > xp.shape[1]:
        raise LengthError(
            f"kernel of length {m} does not fit signal of length {xp.shape[1]}"
        )
    full_len = xp.shape[1] - m + 1
    y_full = np.zeros((layer.out_channels, full_len))
    for k in range(layer.out_channels):
        acc = np.zeros(full_len)
        for p in range(layer.in_channels):
            acc += xcorr_valid(xp[p], layer.weights[k, p])
        y_full[k] = acc + layer.bias[k]
    y, stride_mask = stride_decimate(y_full, layer.stride)
    return y, ConvTrace(xp, pad, full_len, layer.stride, stride_mask)


def relu_forward(y, leaky_slope: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """f(y) = y for y > 0, leaky_slope * y otherwise.

    The mask bit is 1 exactly where y > 0; the derivative used downstream is
    1 on the mask and leaky_slope off it, so the kink at 0 is assigned the
    negative-side slope.
    """
    if leaky_slope < 0.0:
        raise DomainError(f"leaky slope must be >= 0, got {leaky_slope}")
    y = np.asarray(y, dtype=np.float64)
    mask = (y > 0).astype(np.int64)
    return np.where(y > 0, y, leaky_slope * y), mask


def stride_decimate(y, stride: int) -> tuple[np.ndarray, np.ndarray]:
    """Keep samples 0, s, 2s, ... of every channel.

    Output length is floor((L-1)/s) + 1. The mask marks kept positions.
    """
    y = as_channels(y)
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")
    mask = np.zeros(y.shape, dtype=np.int64)
    mask[:, ::stride] = 1
    return y[:, ::stride].copy(), mask


def maxpool_forward(o, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Non-overlapping max pooling with segment width P.

    A trailing segment shorter than P is pooled over what remains. The mask
    marks the argmax of each segment; ties go to the first index, so the
    scatter in the backward pass is unambiguous.
    """
    o = as_channels(o)
    if width < 1:
        raise ConfigError(f"pool width must be >= 1, got {width}")
    channels, length = o.shape
    if length == 0:
        raise LengthError("cannot pool an empty signal")
    n_seg = -(-length // width)
    pooled = np.zeros((channels, n_seg))
    mask = np.zeros(o.shape, dtype=np.int64)
    for s in range(n_seg):
        lo, hi = s * width, min((s + 1) * width, length)
        seg = o[:, lo:hi]
        arg = np.argmax(seg, axis=1)  # first index on ties
        pooled[:, s] = seg[np.arange(channels), arg]
        mask[np.arange(channels), lo + arg] = 1
    return pooled, mask


def pool_segments(length: int, width: int) -> list[tuple[int, int]]:
    """[lo, hi) bounds of every pooling segment over a signal of this length."""
    return [(s * width, min((s + 1) * width, length)) for s in range(-(-length // width))]


def flatten(o) -> np.ndarray:
    """Channel-major flattening: channel k occupies the k-th block of the output."""
    return as_channels(o).reshape(-1).copy()


def unflatten(flat, channels: int, length: int) -> np.ndarray:
    flat = as_signal(flat)
    if flat.size != channels * length:
        raise ShapeError(f"cannot reshape {flat.size} values into ({channels}, {length})")
    return flat.reshape(channels, length).copy()


def dense_forward(x, layer: DenseLayer) -> np.ndarray:
    """Apply a dense layer, accumulating over inputs in ascending order."""
    x = as_signal(x)
    if x.size != layer.in_size:
        raise ShapeError(f"layer expects {layer.in_size} inputs, got {x.size}")
    y = np.zeros(layer.out_size)
    for n in range(layer.in_size):
        y += layer.weights[:, n] * x[n]
    if layer.bias is not None:
        y = y + layer.bias
    return y


def softmax(y) -> np.ndarray:
    """Numerically safe softmax: exponentials are taken after subtracting max(y)."""
    y = as_signal(y)
    if y.size == 0:
        raise LengthError("softmax of an empty vector")
    e = np.exp(y - np.max(y))
    return e / np.sum(e)


def dropout_mask(shape, keep_prob: float, rng: np.random.Generator) -> np.ndarray:
    """Bernoulli(keep_prob) 0/1 mask of the given shape."""
    if not 0.0 < keep_prob <= 1.0:
        raise DomainError(f"keep_prob must be in (0, 1], got {keep_prob}")
    return (rng.random(shape) < keep_prob).astype(np.int64)


def apply_dropout(x, mask, keep_prob: float) -> np.ndarray:
    """Inverted dropout: zero the dropped units and scale survivors by 1/keep_prob."""
    return np.asarray(x, dtype=np.float64) * mask / keep_prob
