"""Model and table serialization with lossless float text.

All files this package writes share two rules: floats are printed with 17
significant digits (enough to round-trip any IEEE double exactly) and lines
end with LF regardless of platform. JSON is emitted by a small recursive
dumper because the stdlib encoder cannot be told to format floats that way.

The model file is JSON: an architecture echo plus per-layer weight/bias
arrays nested ``[channel][input-channel][tap]`` for correlation layers and
``[output][input]`` for dense layers.
"""

import csv
import json
import math

import numpy as np

from .errors import ConfigError
from .layers import ConvLayer, DenseLayer
from .network import ConvBlock, DenseBlock, Network

MODEL_FORMAT = "sigcnn-model"
MODEL_VERSION = 1


def format_float(value: float) -> str:
    """17-significant-digit decimal text; round-trips float64 exactly."""
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"cannot serialize non-finite value {value!r}")
    return format(value, ".17g")


def dumps_json(obj, indent: int = 0) -> str:
    """Recursive JSON dump using format_float for every float."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}{json.dumps(str(k))}: {dumps_json(v, indent + 2)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else list(obj)
        parts = [dumps_json(v, indent + 2) for v in seq]
        if sum(len(p) for p in parts) < 70 and all("\n" not in p for p in parts):
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(inner + p for p in parts) + f"\n{pad}]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise ConfigError(f"cannot serialize {type(obj).__name__} to JSON")


def write_text(path, text: str):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def write_json(path, obj):
    write_text(path, dumps_json(obj) + "\n")


def write_csv(path, header, rows):
    """CSV with LF endings; floats formatted at 17 significant digits."""

    def cell(v):
        if isinstance(v, (float, np.floating)):
            return format_float(v)
        return v

    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell(v) for v in row])


def network_to_dict(net: Network) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "input_len": net.input_len,
        "loss": net.loss_kind,
        "conv": [
            {
                "weights": blk.layer.weights,
                "bias": blk.layer.bias,
                "stride": blk.layer.stride,
                "padding": blk.layer.padding,
                "pool_width": blk.pool_width,
                "leaky_slope": float(blk.leaky_slope),
            }
            for blk in net.conv_blocks
        ],
        "dense": [
            {
                "weights": blk.layer.weights,
                "bias": None if blk.layer.bias is None else blk.layer.bias,
                "relu": bool(blk.relu),
            }
            for blk in net.dense_blocks
        ],
        "shapes": net.shape_walk(),
        "parameter_count": net.param_count(),
    }


def network_from_dict(doc: dict) -> Network:
    if doc.get("format") != MODEL_FORMAT:
        raise ConfigError(f"not a {MODEL_FORMAT} file (format={doc.get('format')!r})")
    if doc.get("version") != MODEL_VERSION:
        raise ConfigError(f"unsupported model version {doc.get('version')!r}")
    try:
        conv = [
            ConvBlock(
                ConvLayer(
                    np.asarray(entry["weights"], dtype=np.float64),
                    np.asarray(entry["bias"], dtype=np.float64),
                    stride=int(entry["stride"]),
                    padding=entry["padding"],
                ),
                pool_width=int(entry["pool_width"]),
                leaky_slope=float(entry["leaky_slope"]),
            )
            for entry in doc["conv"]
        ]
        dense = [
            DenseBlock(
                DenseLayer(
                    np.asarray(entry["weights"], dtype=np.float64),
                    bias=None
                    if entry["bias"] is None
                    else np.asarray(entry["bias"], dtype=np.float64),
                ),
                relu=bool(entry["relu"]),
            )
            for entry in doc["dense"]
        ]
        return Network(int(doc["input_len"]), conv, dense, loss_kind=doc["loss"])
    except KeyError as missing:
        raise ConfigError(f"model file is missing field {missing}") from None


def save_model(path, net: Network):
    write_json(path, network_to_dict(net))


def load_model(path) -> Network:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"model file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"model file is not valid JSON: {err}") from None
    return network_from_dict(doc)


def _open_table(path):
    try:
        return open(path, newline="")
    except FileNotFoundError:
        raise ConfigError(f"file not found: {path}") from None


def read_signal_csv(path) -> np.ndarray:
    """Read a single-column CSV (header + one value per line) as a signal."""
    with _open_table(path) as fh:
        reader = csv.reader(fh)
        next(reader)
        values = [float(row[0]) for row in reader if row]
    if not values:
        raise ConfigError(f"no samples in signal file {path}")
    return np.array(values)


def read_templates_csv(path):
    """Read a bank of templates: one named column per template.

    Columns may have different lengths; empty trailing cells are ignored.
    Returns (names, [template arrays]).
    """
    with _open_table(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        columns = [[] for _ in header]
        for row in reader:
            for i, cell in enumerate(row[: len(header)]):
                if cell.strip() != "":
                    columns[i].append(float(cell))
    templates = [np.array(col) for col in columns]
    if any(t.size == 0 for t in templates):
        raise ConfigError(f"template file {path} has an empty column")
    return list(header), templates
