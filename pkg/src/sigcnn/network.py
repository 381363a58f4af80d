"""Network container, taped forward pass, back-propagation, SGD, training.

A :class:`Network` is a stack of correlation blocks (correlation layer +
rectifier + optional max pooling) followed by a flattening step and a stack
of dense blocks; the loss kind decides whether the final pre-activations go
through softmax (``"cross_entropy"``) or are used raw (``"mse"``).

The forward pass records a :class:`ForwardTape` holding every pre-activation
and indicator mask. The backward pass replays the tape in reverse:

1. output delta ``output − target``;
2. dense deltas via ascending-index weighted sums gated by each block's
   rectifier mask;
3. unflattening into channel blocks;
4. repositioning through the pooling mask (the delta of a pooled value lands
   on the argmax position recorded by THIS forward pass) gated by the
   rectifier indicator;
5. zero insertion at stride-removed positions;
6. correlation-weight gradients as valid cross-correlations of layer input
   and repositioned deltas, channel deltas pushed further down via full
   convolution with the layer kernels;
7. bias gradients as plain left-to-right delta sums.

Parameters are updated only after all gradients are computed (gradients are
taken at the pre-update weights), uniformly with the descent sign:
``w ← w − lr_weights·g``, ``b ← b − lr_bias·g``.

Training is strictly sequential single-sample SGD in generation order, so a
fixed seed reproduces runs bit for bit. With ``keep_prob == 1`` no dropout
randomness is consumed at all, making such runs bit-identical to
dropout-free training.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError, TapeMismatchError
from .layers import (
    ConvLayer,
    ConvTrace,
    DenseLayer,
    apply_dropout,
    conv_forward,
    dense_forward,
    dropout_mask,
    flatten,
    maxpool_forward,
    relu_forward,
    softmax,
    unflatten,
)
from .losses import LOSS_NAMES, loss_and_clamp, output_delta
from .signal_ops import as_signal, conv_full, ordered_sum, xcorr_valid


@dataclass
class ConvBlock:
    """Correlation layer + rectifier (optionally leaky) + optional max pool."""

    layer: ConvLayer
    pool_width: int = 1  # 1 = no pooling
    leaky_slope: float = 0.0

    def __post_init__(self):
        if self.pool_width < 1:
            raise ConfigError(f"pool width must be >= 1, got {self.pool_width}")
        if self.leaky_slope < 0.0:
            raise ConfigError(f"leaky slope must be >= 0, got {self.leaky_slope}")


@dataclass
class DenseBlock:
    """Dense layer, optionally followed by a rectifier (never on the last block)."""

    layer: DenseLayer
    relu: bool = False


class Network:
    """Validated stack of conv blocks + dense blocks with one loss stage."""

    def __init__(self, input_len, conv_blocks, dense_blocks, loss_kind="cross_entropy"):
        if input_len < 1:
            raise ConfigError(f"input length must be >= 1, got {input_len}")
        if loss_kind not in LOSS_NAMES:
            raise ConfigError(f"unknown loss {loss_kind!r}; expected one of {LOSS_NAMES}")
        if not dense_blocks:
            raise ConfigError("a network needs at least one dense block as the output stage")
        if dense_blocks[-1].relu:
            raise ConfigError("the last dense block feeds the loss stage and cannot have a rectifier")
        self.input_len = int(input_len)
        self.conv_blocks = list(conv_blocks)
        self.dense_blocks = list(dense_blocks)
        self.loss_kind = loss_kind
        self._stages = self._dry_run_shapes()

    def _dry_run_shapes(self):
        """Walk the stack symbolically; raise on any incompatible junction."""
        stages = [{"stage": "input", "shape": [1, self.input_len]}]
        channels, length = 1, self.input_len
        for i, blk in enumerate(self.conv_blocks):
            layer = blk.layer
            if layer.in_channels != channels:
                raise ShapeError(
                    f"conv block {i} expects {layer.in_channels} input channels, "
                    f"previous stage provides {channels}"
                )
            if layer.padding == "same":
                if layer.taps % 2 == 0:
                    raise ConfigError(
                        f"conv block {i}: same padding needs an odd tap count, got {layer.taps}"
                    )
                out = length
            else:
                out = length - layer.taps + 1
                if out < 1:
                    raise ShapeError(
                        f"conv block {i}: kernel of {layer.taps} taps does not fit "
                        f"signal of length {length}"
                    )
            out = (out - 1) // layer.stride + 1
            channels = layer.out_channels
            stages.append({"stage": f"conv{i}", "shape": [channels, out]})
            if blk.pool_width > 1:
                out = -(-out // blk.pool_width)
                stages.append({"stage": f"pool{i}", "shape": [channels, out]})
            length = out
        size = channels * length
        stages.append({"stage": "flatten", "shape": [size]})
        for j, blk in enumerate(self.dense_blocks):
            if blk.layer.in_size != size:
                raise ShapeError(
                    f"dense block {j} expects {blk.layer.in_size} inputs, "
                    f"previous stage provides {size}"
                )
            size = blk.layer.out_size
            stages.append({"stage": f"dense{j}", "shape": [size]})
        stages.append({"stage": "output", "shape": [size]})
        return stages

    @property
    def output_size(self) -> int:
        return self.dense_blocks[-1].layer.out_size

    def shape_walk(self):
        """Per-stage output shapes, as computed by the construction dry run."""
        return [dict(s) for s in self._stages]

    def param_count(self) -> int:
        total = sum(b.layer.param_count() for b in self.conv_blocks)
        return total + sum(b.layer.param_count() for b in self.dense_blocks)

    def dense_weight_vector(self) -> np.ndarray:
        """All dense weights concatenated in block order (the traced values)."""
        return np.concatenate([b.layer.weights.ravel() for b in self.dense_blocks])


@dataclass
class ConvBlockTrace:
    conv: ConvTrace
    pre_act: np.ndarray  # (channels, strided_len)
    relu_mask: np.ndarray
    activated: np.ndarray
    pool_mask: np.ndarray
    pooled: np.ndarray
    dropout: np.ndarray | None
    output: np.ndarray  # what the next stage consumed


@dataclass
class DenseBlockTrace:
    input: np.ndarray
    pre_act: np.ndarray
    relu_mask: np.ndarray | None
    activated: np.ndarray
    dropout: np.ndarray | None
    output: np.ndarray


@dataclass
class ForwardTape:
    """Everything backward() needs about one forward pass."""

    x: np.ndarray
    keep_prob: float
    conv: list[ConvBlockTrace]
    flat: np.ndarray
    dense: list[DenseBlockTrace]
    logits: np.ndarray
    output: np.ndarray


def forward(net: Network, x, dropout_rng=None, keep_prob: float = 1.0):
    """Run the network; returns (output, tape).

    Output is the softmax probability vector for cross-entropy networks and
    the raw final pre-activations for MSE networks. Dropout is applied only
    when a generator is supplied AND keep_prob < 1 (training); evaluation
    passes no generator and consumes no randomness.
    """
    x = as_signal(x)
    if len(x) != net.input_len:
        raise ShapeError(f"network expects input length {net.input_len}, got {len(x)}")
    drop = dropout_rng is not None and keep_prob < 1.0
    cur = x
    conv_traces = []
    for blk in net.conv_blocks:
        y, ctrace = conv_forward(cur, blk.layer)
        activated, rmask = relu_forward(y, blk.leaky_slope)
        pooled, pmask = maxpool_forward(activated, blk.pool_width)
        if drop:
            dmask = dropout_mask(pooled.shape, keep_prob, dropout_rng)
            out = apply_dropout(pooled, dmask, keep_prob)
        else:
            dmask, out = None, pooled
        conv_traces.append(
            ConvBlockTrace(ctrace, y, rmask, activated, pmask, pooled, dmask, out)
        )
        cur = out
    flat = flatten(cur)
    dense_traces = []
    vec = flat
    last = len(net.dense_blocks) - 1
    for j, blk in enumerate(net.dense_blocks):
        y = dense_forward(vec, blk.layer)
        if blk.relu:
            activated, rmask = relu_forward(y)
        else:
            activated, rmask = y, None
        if drop and j != last:
            dmask = dropout_mask(activated.shape, keep_prob, dropout_rng)
            out = apply_dropout(activated, dmask, keep_prob)
        else:
            dmask, out = None, activated
        dense_traces.append(DenseBlockTrace(vec, y, rmask, activated, dmask, out))
        vec = out
    logits = dense_traces[-1].pre_act
    output = softmax(logits) if net.loss_kind == "cross_entropy" else logits.copy()
    return output, ForwardTape(x, keep_prob, conv_traces, flat, dense_traces, logits, output)


@dataclass
class GradientSet:
    """Gradients congruent in shape with every weight and bias of a network.

    The two delta lists are diagnostics: the repositioned full-length channel
    deltas per conv block and the pre-activation deltas per dense block.
    """

    conv_weights: list = field(default_factory=list)
    conv_bias: list = field(default_factory=list)
    dense_weights: list = field(default_factory=list)
    dense_bias: list = field(default_factory=list)
    conv_deltas: list = field(default_factory=list)
    dense_deltas: list = field(default_factory=list)


def _check_tape(net: Network, tape: ForwardTape):
    if len(tape.conv) != len(net.conv_blocks) or len(tape.dense) != len(net.dense_blocks):
        raise TapeMismatchError(
            f"tape has {len(tape.conv)} conv / {len(tape.dense)} dense entries, "
            f"network has {len(net.conv_blocks)} / {len(net.dense_blocks)}"
        )
    for i, (blk, tr) in enumerate(zip(net.conv_blocks, tape.conv)):
        if tr.pre_act.shape[0] != blk.layer.out_channels:
            raise TapeMismatchError(f"conv block {i}: tape channels disagree with layer")
        if tr.conv.x_padded.shape[0] != blk.layer.in_channels:
            raise TapeMismatchError(f"conv block {i}: tape input channels disagree with layer")
    for j, (blk, tr) in enumerate(zip(net.dense_blocks, tape.dense)):
        if tr.pre_act.shape != (blk.layer.out_size,) or tr.input.shape != (blk.layer.in_size,):
            raise TapeMismatchError(f"dense block {j}: tape shapes disagree with layer")


def backward(net: Network, tape: ForwardTape, target) -> GradientSet:
    """Back-propagate one sample's loss; gradients use the current weights."""
    _check_tape(net, tape)
    target = as_signal(target)
    grads = GradientSet()
    grads.dense_weights = [None] * len(net.dense_blocks)
    grads.dense_bias = [None] * len(net.dense_blocks)
    grads.dense_deltas = [None] * len(net.dense_blocks)

    delta = output_delta(net.loss_kind, tape.output, target)
    for j in range(len(net.dense_blocks) - 1, -1, -1):
        blk, tr = net.dense_blocks[j], tape.dense[j]
        grads.dense_deltas[j] = delta
        grads.dense_weights[j] = np.outer(delta, tr.input)
        grads.dense_bias[j] = delta.copy() if blk.layer.bias is not None else None
        d_input = np.zeros(blk.layer.in_size)
        for k in range(blk.layer.out_size):
            d_input += delta[k] * blk.layer.weights[k, :]
        if j > 0:
            prev = tape.dense[j - 1]
            if prev.dropout is not None:
                d_input = d_input * prev.dropout / tape.keep_prob
            if prev.relu_mask is not None:
                d_input = np.where(prev.relu_mask == 1, d_input, 0.0)
        delta = d_input

    # delta now sits at the flattened vector
    grads.conv_weights = [None] * len(net.conv_blocks)
    grads.conv_bias = [None] * len(net.conv_blocks)
    grads.conv_deltas = [None] * len(net.conv_blocks)
    if net.conv_blocks:
        last_tr = tape.conv[-1]
        d_cur = unflatten(delta, *last_tr.pooled.shape)
        for i in range(len(net.conv_blocks) - 1, -1, -1):
            blk, tr = net.conv_blocks[i], tape.conv[i]
            layer = blk.layer
            if tr.dropout is not None:
                d_cur = d_cur * tr.dropout / tape.keep_prob
            # scatter pooled deltas back to their argmax positions
            d_act = np.zeros_like(tr.activated)
            d_act[tr.pool_mask == 1] = d_cur.ravel()
            deriv = np.where(tr.relu_mask == 1, 1.0, blk.leaky_slope)
            d_strided = d_act * deriv
            delta_full = np.zeros((layer.out_channels, tr.conv.full_len))
            delta_full[:, :: tr.conv.stride] = d_strided
            grads.conv_deltas[i] = delta_full
            gw = np.zeros_like(layer.weights)
            for k in range(layer.out_channels):
                for p in range(layer.in_channels):
                    gw[k, p] = xcorr_valid(tr.conv.x_padded[p], delta_full[k])
            grads.conv_weights[i] = gw
            grads.conv_bias[i] = np.array(
                [ordered_sum(delta_full[k]) for k in range(layer.out_channels)]
            )
            if i > 0:
                padded_len = tr.conv.x_padded.shape[1]
                d_padded = np.zeros((layer.in_channels, padded_len))
                for p in range(layer.in_channels):
                    acc = np.zeros(padded_len)
                    for k in range(layer.out_channels):
                        acc += conv_full(delta_full[k], layer.weights[k, p])
                    d_padded[p] = acc
                pad = tr.conv.pad
                d_cur = d_padded[:, pad : padded_len - pad] if pad else d_padded
    return grads


@dataclass
class TrainConfig:
    """Hyper-parameters of plain per-sample SGD."""

    lr_weights: float = 0.1
    lr_bias: float = 0.05
    epochs: int = 10
    realizations_per_epoch: int = 200
    seed: int = 1
    keep_prob: float = 1.0

    def __post_init__(self):
        if self.lr_weights < 0 or self.lr_bias < 0:
            raise ConfigError("learning rates must be >= 0")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.realizations_per_epoch < 1:
            raise ConfigError(
                f"realizations_per_epoch must be >= 1, got {self.realizations_per_epoch}"
            )
        if not 0.0 < self.keep_prob <= 1.0:
            raise ConfigError(f"keep_prob must be in (0, 1], got {self.keep_prob}")


def train_streams(seed: int):
    """(init_rng, dropout_rng) derived from one 64-bit training seed."""
    init_seq, dropout_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(init_seq), np.random.default_rng(dropout_seq)


def sgd_step(net: Network, grads: GradientSet, cfg: TrainConfig):
    """In-place descent update: w ← w − lr_weights·g, b ← b − lr_bias·g."""
    if len(grads.conv_weights) != len(net.conv_blocks) or len(grads.dense_weights) != len(
        net.dense_blocks
    ):
        raise ShapeError("gradient set does not match the network's block structure")
    for blk, gw, gb in zip(net.conv_blocks, grads.conv_weights, grads.conv_bias):
        if gw.shape != blk.layer.weights.shape or gb.shape != blk.layer.bias.shape:
            raise ShapeError("conv gradient shapes do not match the layer")
        blk.layer.weights -= cfg.lr_weights * gw
        blk.layer.bias -= cfg.lr_bias * gb
    for blk, gw, gb in zip(net.dense_blocks, grads.dense_weights, grads.dense_bias):
        if gw.shape != blk.layer.weights.shape:
            raise ShapeError("dense gradient shapes do not match the layer")
        blk.layer.weights -= cfg.lr_weights * gw
        if blk.layer.bias is not None:
            if gb is None or gb.shape != blk.layer.bias.shape:
                raise ShapeError("dense bias gradient missing or mis-shaped")
            blk.layer.bias -= cfg.lr_bias * gb


@dataclass
class TrainingLog:
    """Per-iteration history of one training run."""

    losses: list = field(default_factory=list)
    p_target: list = field(default_factory=list)
    p_other: list = field(default_factory=list)
    weight_rows: list = field(default_factory=list)  # dense weights after each update
    clamp_events: int = 0
    epochs: int = 0

    @property
    def iterations(self) -> int:
        return len(self.losses)

    def _epoch_means(self, series) -> list:
        per_epoch = len(series) // self.epochs
        return [
            float(np.mean(series[e * per_epoch : (e + 1) * per_epoch]))
            for e in range(self.epochs)
        ]

    def epoch_mean_losses(self) -> list:
        return self._epoch_means(self.losses)

    def epoch_mean_p_target(self) -> list:
        return self._epoch_means(self.p_target)


def train(net: Network, dataset, cfg: TrainConfig, dropout_rng=None) -> TrainingLog:
    """Plain SGD over the materialized dataset, replayed cfg.epochs times.

    ``dataset`` is a sequence of (x, target, ...) tuples; extra elements
    (e.g. generation metadata) are ignored. Updates are applied sample by
    sample in sequence order.
    """
    log = TrainingLog(epochs=cfg.epochs)
    for _ in range(cfg.epochs):
        for item in dataset:
            x, t = item[0], item[1]
            out, tape = forward(net, x, dropout_rng, cfg.keep_prob)
            loss, clamped = loss_and_clamp(net.loss_kind, out, t)
            grads = backward(net, tape, t)
            sgd_step(net, grads, cfg)
            ti = int(np.argmax(as_signal(t)))
            others = np.delete(out, ti)
            log.losses.append(float(loss))
            log.p_target.append(float(out[ti]))
            log.p_other.append(float(np.max(others)) if others.size else 0.0)
            log.weight_rows.append(net.dense_weight_vector())
            log.clamp_events += int(clamped)
    return log


def evaluate(net: Network, dataset):
    """Frozen-weight scoring: returns (accuracy, correct, ties).

    A prediction is the argmax of the network output; an exact tie between
    the top two outputs counts as incorrect and is tallied separately.
    """
    correct, ties, total = 0, 0, 0
    for item in dataset:
        x, t = item[0], item[1]
        out, _ = forward(net, x)
        pred = int(np.argmax(out))
        tie = np.sum(out == out[pred]) > 1
        ties += int(tie)
        correct += int(not tie and pred == int(np.argmax(as_signal(t))))
        total += 1
    if total == 0:
        raise ConfigError("cannot evaluate on an empty dataset")
    return correct / total, correct, ties
