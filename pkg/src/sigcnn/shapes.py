"""Closed-form output-size and parameter arithmetic for layer stacks.

This module never touches signal data: it walks a table of layer
descriptions and reports, per stage, the output size along each spatial
axis, the channel count, and the parameter count. It exists so that the
size bookkeeping of an architecture can be checked (or debunked) before
building anything, including published multi-axis architectures that the
1-D engine itself does not run.

Two pooling conventions appear in practice and both are supported:

* sliding-window pooling with an explicit ``stride`` uses the same length
  formula as convolution, ``floor((n + 2*pad - width)/stride) + 1``;
* the in-package engine pools non-overlapping windows and keeps a ragged
  tail, giving ``ceil(n / width)``. A pool row without a ``stride`` key
  uses this rule.

A layer row may declare the output size its author expected (``declared``).
The walker verifies every declared transition independently: it computes
the stage output from the *previous row's declared size* (so one wrong line
does not cascade down the table) and flags any row whose computed size
disagrees with its declaration.
"""

from dataclasses import dataclass

from .errors import ConfigError, DomainError, ShapeError

__all__ = [
    "window_out_len",
    "block_pool_len",
    "StageReport",
    "walk_layer_table",
    "ALEXNET_INPUT",
    "ALEXNET_CHANNELS",
    "ALEXNET_LAYERS",
    "alexnet_walkthrough",
    "BudgetReport",
    "param_budget",
]


def window_out_len(n: int, width: int, stride: int = 1, pad: int = 0) -> int:
    """Number of window positions: floor((n + 2*pad - width)/stride) + 1."""
    n, width, stride, pad = int(n), int(width), int(stride), int(pad)
    if n < 1:
        raise ShapeError(f"input size must be >= 1, got {n}")
    if width < 1:
        raise ShapeError(f"window width must be >= 1, got {width}")
    if stride < 1:
        raise ShapeError(f"stride must be >= 1, got {stride}")
    if pad < 0:
        raise ShapeError(f"padding must be >= 0, got {pad}")
    span = n + 2 * pad
    if width > span:
        raise ShapeError(
            f"window of width {width} does not fit padded input of size {span}"
        )
    return (span - width) // stride + 1


def block_pool_len(n: int, width: int) -> int:
    """Output length of non-overlapping pooling with a ragged tail: ceil(n/width)."""
    n, width = int(n), int(width)
    if n < 1:
        raise ShapeError(f"input size must be >= 1, got {n}")
    if width < 1:
        raise ShapeError(f"pool width must be >= 1, got {width}")
    return -(-n // width)


@dataclass(frozen=True)
class StageReport:
    """One row of a shape walk."""

    label: str
    op: str  # "input" | "conv" | "pool" | "dense"
    out_size: tuple  # spatial size per axis; () for dense stages
    channels: int  # feature maps after the stage (dense: unit count)
    params: int
    declared: tuple | None = None  # spatial size the table claimed, if any
    matches_declared: bool | None = None

    @property
    def flagged(self) -> bool:
        return self.matches_declared is False

    def size_text(self) -> str:
        if self.op == "dense":
            return f"[{self.channels}]"
        return "[" + "x".join(str(s) for s in self.out_size + (self.channels,)) + "]"


def _axes(value, n_axes: int, where: str) -> tuple:
    """Broadcast a scalar to every axis; pass per-axis sequences through."""
    if isinstance(value, (list, tuple)):
        if len(value) != n_axes:
            raise ConfigError(f"field {where} must have {n_axes} entries, got {len(value)}")
        return tuple(int(v) for v in value)
    return (int(value),) * n_axes


def _int_field(row: dict, key: str, where: str, default=None) -> int:
    if key not in row:
        if default is None:
            raise ConfigError(f"missing field {where}.{key}")
        return default
    value = row[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"field {where}.{key} must be int, got {value!r}")
    return value


def walk_layer_table(input_size, channels: int, layers) -> list[StageReport]:
    """Walk layer rows over an input of the given spatial size and channels.

    ``input_size`` is an int (one axis) or a sequence of ints (one per
    axis — 2-D tables use a pair). Each row is a dict with ``op`` of
    ``conv`` (keys: filters, size, stride=1, pad=0), ``pool`` (keys: size,
    stride optional — see module docstring, pad=0) or ``dense`` (key:
    units), plus optional ``label`` and ``declared`` output size.
    Convolution and dense parameter counts include one bias per output
    feature.
    """
    if isinstance(input_size, (list, tuple)):
        size = tuple(int(s) for s in input_size)
    else:
        size = (int(input_size),)
    if any(s < 1 for s in size):
        raise ShapeError(f"input size must be >= 1 per axis, got {size}")
    channels = int(channels)
    if channels < 1:
        raise ShapeError(f"input channels must be >= 1, got {channels}")
    n_axes = len(size)
    reports = [StageReport("INPUT", "input", size, channels, 0)]
    flat_done = False
    for i, row in enumerate(layers):
        where = f"layers[{i}]"
        if not isinstance(row, dict):
            raise ConfigError(f"field {where} must be an object, got {row!r}")
        op = row.get("op")
        label = str(row.get("label", f"{op}{i}" if op else where))
        declared = row.get("declared")
        if declared is not None:
            declared = _axes(declared, n_axes, f"{where}.declared")
        if op == "conv":
            if flat_done:
                raise ConfigError(f"{where}: conv cannot follow a dense stage")
            filters = _int_field(row, "filters", where)
            if "size" not in row:
                raise ConfigError(f"missing field {where}.size")
            widths = _axes(row["size"], n_axes, f"{where}.size")
            strides = _axes(row.get("stride", 1), n_axes, f"{where}.stride")
            pads = _axes(row.get("pad", 0), n_axes, f"{where}.pad")
            if filters < 1:
                raise ShapeError(f"{where}: filters must be >= 1, got {filters}")
            out = tuple(
                window_out_len(n, w, s, p)
                for n, w, s, p in zip(size, widths, strides, pads)
            )
            taps = 1
            for w in widths:
                taps *= w
            params = filters * (taps * channels + 1)
            new_channels = filters
        elif op == "pool":
            if flat_done:
                raise ConfigError(f"{where}: pool cannot follow a dense stage")
            if "size" not in row:
                raise ConfigError(f"missing field {where}.size")
            widths = _axes(row["size"], n_axes, f"{where}.size")
            if "stride" in row:
                strides = _axes(row["stride"], n_axes, f"{where}.stride")
                pads = _axes(row.get("pad", 0), n_axes, f"{where}.pad")
                out = tuple(
                    window_out_len(n, w, s, p)
                    for n, w, s, p in zip(size, widths, strides, pads)
                )
            else:
                out = tuple(block_pool_len(n, w) for n, w in zip(size, widths))
            params = 0
            new_channels = channels
        elif op == "dense":
            units = _int_field(row, "units", where)
            if units < 1:
                raise ShapeError(f"{where}: units must be >= 1, got {units}")
            in_features = channels
            for s in size:
                in_features *= s
            params = units * (in_features + 1)
            out = ()
            new_channels = units
            flat_done = True
            size = ()
        else:
            raise ConfigError(f"field {where}.op must be conv/pool/dense, got {op!r}")
        matches = None
        if declared is not None and op != "dense":
            matches = out == declared
        reports.append(StageReport(label, op, out, new_channels, params, declared, matches))
        if op != "dense":
            # carry the declared size forward so each declared transition is
            # judged on its own rather than inheriting an upstream error
            size = declared if declared is not None else out
        channels = new_channels
    return reports


# The published image-classification stack whose printed size chain this
# walker can audit line by line. CONV1's declared 55 disagrees with the
# window formula ((224 - 11)/4 + 1 = 54) and is flagged by the walk; every
# other declared transition checks out.
ALEXNET_INPUT = (224, 224)
ALEXNET_CHANNELS = 3
ALEXNET_LAYERS = (
    {"label": "CONV1", "op": "conv", "filters": 96, "size": 11, "stride": 4, "pad": 0, "declared": 55},
    {"label": "MAX POOL1", "op": "pool", "size": 3, "stride": 2, "declared": 27},
    {"label": "CONV2", "op": "conv", "filters": 256, "size": 5, "stride": 1, "pad": 2, "declared": 27},
    {"label": "MAX POOL2", "op": "pool", "size": 3, "stride": 2, "declared": 13},
    {"label": "CONV3", "op": "conv", "filters": 384, "size": 3, "stride": 1, "pad": 1, "declared": 13},
    {"label": "CONV4", "op": "conv", "filters": 384, "size": 3, "stride": 1, "pad": 1, "declared": 13},
    {"label": "CONV5", "op": "conv", "filters": 256, "size": 3, "stride": 1, "pad": 1, "declared": 13},
    {"label": "MAX POOL3", "op": "pool", "size": 3, "stride": 2, "declared": 6},
    {"label": "FC6", "op": "dense", "units": 4096},
    {"label": "FC7", "op": "dense", "units": 4096},
    {"label": "FC8", "op": "dense", "units": 1000},
)


def alexnet_walkthrough() -> list[StageReport]:
    """Audit the published stack's printed size chain row by row."""
    return walk_layer_table(ALEXNET_INPUT, ALEXNET_CHANNELS, ALEXNET_LAYERS)


@dataclass(frozen=True)
class BudgetReport:
    """Weight-count comparison: direct wide filters vs width-1 bottleneck.

    Applying k2 filters of width m2 across k input channels costs
    ``m2*k*k2`` weights directly. Collapsing the k channels first with
    width-1 filters (k*k2 weights) and then filtering the single resulting
    channel (m2*k2 weights) costs ``(m2 + k)*k2``.
    """

    channels: int  # k
    filters: int  # k2
    taps: int  # m2
    direct: int
    factored: int

    @property
    def beneficial(self) -> bool:
        return self.factored < self.direct

    @property
    def ratio(self) -> float:
        return self.direct / self.factored


def param_budget(channels: int, filters: int, taps: int) -> BudgetReport:
    """Compare direct vs width-1-factored weight counts."""
    for name, value in (("channels", channels), ("filters", filters), ("taps", taps)):
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise DomainError(f"{name} must be a positive integer, got {value!r}")
    direct = taps * channels * filters
    factored = (taps + channels) * filters
    return BudgetReport(channels, filters, taps, direct, factored)
