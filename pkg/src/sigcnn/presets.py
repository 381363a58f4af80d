"""Architecture/pipeline configuration, built-in presets, JSON loading.

A :class:`PipelineConfig` bundles everything one experiment needs: the
architecture (conv + dense specs, loss, init scheme), the SGD
hyper-parameters, and the dataset generator settings.

Three presets ship with the package, named ``paperA``, ``paperB`` and
``paperC`` (the names are stable config tokens used by the CLI):

* ``paperA`` — 4 correlation channels of 3 taps, no pooling, one dense layer
  to 2 softmax outputs; 48 dense weights.
* ``paperB`` — 3 channels, width-3 max pooling, leaky rectifier (slope 0.01);
  12 dense weights. The leak keeps sparse post-pooling activations from
  going silent, which a plain rectifier does on a few percent of seeds.
* ``paperC`` — 5 channels, width-3 max pooling, a linear 4-unit hidden dense
  layer, then 2 outputs; 40 + 8 = 48 dense weights. The hidden layer is
  linear because a rectified one this narrow dies at these learning rates
  on a sizeable fraction of seeds.

All presets train with cross-entropy, He-normal initialization, learning
rates 0.1 (weights) / 0.05 (biases), 10 epochs of 200 realizations, and
length-8 two-feature signals.
"""

import json
from dataclasses import dataclass, replace

import numpy as np

from .data import GenConfig
from .errors import ConfigError
from .initializers import SCHEME_NAMES, InitScheme, conv_fans, dense_fans, init_draw
from .layers import PADDING_MODES, ConvLayer, DenseLayer
from .losses import LOSS_NAMES
from .network import ConvBlock, DenseBlock, Network, TrainConfig

PRESET_NAMES = ("paperA", "paperB", "paperC")


@dataclass(frozen=True)
class ConvSpec:
    """One correlation block of the architecture."""

    channels: int
    taps: int
    stride: int = 1
    padding: str = "valid"
    pool_width: int = 1
    leaky_slope: float = 0.0


@dataclass(frozen=True)
class DenseSpec:
    """One dense block; ``bias`` adds a trainable bias vector."""

    size: int
    relu: bool = False
    bias: bool = False


@dataclass(frozen=True)
class ArchConfig:
    input_len: int
    conv: tuple
    dense: tuple
    loss: str = "cross_entropy"
    init: str = "he_normal"


@dataclass(frozen=True)
class PipelineConfig:
    name: str
    arch: ArchConfig
    train: TrainConfig
    data: GenConfig

    def with_overrides(self, **train_fields) -> "PipelineConfig":
        """Copy with TrainConfig fields replaced (used by CLI flags)."""
        return PipelineConfig(
            self.name, self.arch, replace(self.train, **train_fields), self.data
        )


def preset(name: str) -> PipelineConfig:
    """A fresh PipelineConfig for one of the built-in preset names."""
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
    if name == "paperA":
        conv = (ConvSpec(channels=4, taps=3),)
        dense = (DenseSpec(size=2),)
    elif name == "paperB":
        conv = (ConvSpec(channels=3, taps=3, pool_width=3, leaky_slope=0.01),)
        dense = (DenseSpec(size=2),)
    else:
        conv = (ConvSpec(channels=5, taps=3, pool_width=3),)
        dense = (DenseSpec(size=4), DenseSpec(size=2))
    arch = ArchConfig(input_len=8, conv=conv, dense=dense)
    return PipelineConfig(name, arch, TrainConfig(), GenConfig())


def _stage_sizes(arch: ArchConfig):
    """(channels, length) after the conv stack, following the layer formulas."""
    channels, length = 1, arch.input_len
    for spec in arch.conv:
        length = length if spec.padding == "same" else length - spec.taps + 1
        if length < 1:
            raise ConfigError(
                f"arch.conv: {spec.taps}-tap kernel does not fit length {arch.input_len}"
            )
        length = (length - 1) // spec.stride + 1
        length = -(-length // spec.pool_width)
        channels = spec.channels
    return channels, length


def build_network(cfg: PipelineConfig, init_rng: np.random.Generator) -> Network:
    """Materialize a network with freshly initialized weights.

    Draw order is fixed: conv blocks first (weights as one draw each, biases
    start at zero), then dense blocks, so a seeded generator always produces
    the same model.
    """
    arch = cfg.arch
    conv_blocks = []
    in_channels = 1
    for spec in arch.conv:
        fan_in, fan_out = conv_fans(in_channels, spec.channels, spec.taps)
        scheme = InitScheme(arch.init, fan_in, fan_out)
        w = init_draw(scheme, spec.channels * in_channels * spec.taps, init_rng)
        layer = ConvLayer(
            w.reshape(spec.channels, in_channels, spec.taps),
            np.zeros(spec.channels),
            stride=spec.stride,
            padding=spec.padding,
        )
        conv_blocks.append(
            ConvBlock(layer, pool_width=spec.pool_width, leaky_slope=spec.leaky_slope)
        )
        in_channels = spec.channels
    channels, length = _stage_sizes(arch)
    size = channels * length
    dense_blocks = []
    for spec in arch.dense:
        scheme = InitScheme(arch.init, *dense_fans(size, spec.size))
        w = init_draw(scheme, spec.size * size, init_rng)
        layer = DenseLayer(
            w.reshape(spec.size, size),
            bias=np.zeros(spec.size) if spec.bias else None,
        )
        dense_blocks.append(DenseBlock(layer, relu=spec.relu))
        size = spec.size
    return Network(arch.input_len, conv_blocks, dense_blocks, loss_kind=arch.loss)


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigError(f"missing field {where}.{key}")
    return mapping[key]


def _typed(value, kinds, where: str):
    if not isinstance(kinds, tuple):
        kinds = (kinds,)
    # bool is an int subclass; only accept it where bool is explicitly allowed
    if (isinstance(value, bool) and bool not in kinds) or not isinstance(value, kinds):
        names = "/".join(k.__name__ for k in kinds)
        raise ConfigError(f"field {where} must be {names}, got {value!r}")
    return value


def _reject_unknown(mapping: dict, allowed, where: str):
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown field {where}.{unknown[0]}")


def _parse_arch(doc: dict) -> ArchConfig:
    _reject_unknown(doc, {"input_len", "conv", "dense", "loss", "init"}, "arch")
    input_len = _typed(_require(doc, "input_len", "arch"), int, "arch.input_len")
    conv_docs = _typed(doc.get("conv", []), list, "arch.conv")
    dense_docs = _typed(_require(doc, "dense", "arch"), list, "arch.dense")
    loss = doc.get("loss", "cross_entropy")
    init = doc.get("init", "he_normal")
    if loss not in LOSS_NAMES:
        raise ConfigError(f"field arch.loss must be one of {LOSS_NAMES}, got {loss!r}")
    if init not in SCHEME_NAMES:
        raise ConfigError(f"field arch.init must be one of {SCHEME_NAMES}, got {init!r}")
    conv = []
    for i, entry in enumerate(conv_docs):
        where = f"arch.conv[{i}]"
        _typed(entry, dict, where)
        _reject_unknown(
            entry,
            {"channels", "taps", "stride", "padding", "pool_width", "leaky_slope"},
            where,
        )
        padding = entry.get("padding", "valid")
        if padding not in PADDING_MODES:
            raise ConfigError(
                f"field {where}.padding must be one of {PADDING_MODES}, got {padding!r}"
            )
        conv.append(
            ConvSpec(
                channels=_typed(_require(entry, "channels", where), int, f"{where}.channels"),
                taps=_typed(_require(entry, "taps", where), int, f"{where}.taps"),
                stride=_typed(entry.get("stride", 1), int, f"{where}.stride"),
                padding=padding,
                pool_width=_typed(entry.get("pool_width", 1), int, f"{where}.pool_width"),
                leaky_slope=float(
                    _typed(entry.get("leaky_slope", 0.0), (int, float), f"{where}.leaky_slope")
                ),
            )
        )
    dense = []
    for j, entry in enumerate(dense_docs):
        where = f"arch.dense[{j}]"
        _typed(entry, dict, where)
        _reject_unknown(entry, {"size", "relu", "bias"}, where)
        dense.append(
            DenseSpec(
                size=_typed(_require(entry, "size", where), int, f"{where}.size"),
                relu=_typed(entry.get("relu", False), bool, f"{where}.relu"),
                bias=_typed(entry.get("bias", False), bool, f"{where}.bias"),
            )
        )
    if not dense:
        raise ConfigError("field arch.dense must list at least one block")
    return ArchConfig(input_len, tuple(conv), tuple(dense), loss, init)


def _parse_train(doc: dict) -> TrainConfig:
    allowed = {
        "lr_weights",
        "lr_bias",
        "epochs",
        "realizations_per_epoch",
        "seed",
        "keep_prob",
    }
    _reject_unknown(doc, allowed, "train")
    kwargs = {}
    for key in allowed:
        if key in doc:
            kinds = int if key in ("epochs", "realizations_per_epoch", "seed") else (int, float)
            value = _typed(doc[key], kinds, f"train.{key}")
            kwargs[key] = value if isinstance(value, int) else float(value)
    try:
        return TrainConfig(**kwargs)
    except ConfigError as err:
        raise ConfigError(f"train: {err}") from None


def _parse_data(doc: dict) -> GenConfig:
    allowed = {"n", "feature_noise_high", "bg_sigma", "normalize", "seed"}
    _reject_unknown(doc, allowed, "data")
    kwargs = {}
    for key in allowed:
        if key in doc:
            if key == "normalize":
                kwargs[key] = _typed(doc[key], bool, "data.normalize")
            elif key in ("n", "seed"):
                kwargs[key] = _typed(doc[key], int, f"data.{key}")
            else:
                kwargs[key] = float(_typed(doc[key], (int, float), f"data.{key}"))
    try:
        return GenConfig(**kwargs)
    except ConfigError as err:
        raise ConfigError(f"data: {err}") from None


def load_config(source) -> PipelineConfig:
    """Parse a pipeline config from a JSON file path, JSON text, or dict.

    Shape problems are reported with the dotted path of the offending field.
    """
    if isinstance(source, dict):
        doc = source
        name = "config"
    else:
        path = str(source)
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as err:
            raise ConfigError(f"config file is not valid JSON: {err}") from None
        name = path
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown(doc, {"name", "arch", "train", "data"}, "config")
    arch = _parse_arch(_typed(_require(doc, "arch", "config"), dict, "arch"))
    train = _parse_train(_typed(doc.get("train", {}), dict, "train"))
    data = _parse_data(_typed(doc.get("data", {}), dict, "data"))
    cfg = PipelineConfig(str(doc.get("name", name)), arch, train, data)
    # surface junction errors (e.g. kernel larger than input) at load time
    build_network(cfg, np.random.default_rng(0))
    return cfg


def pipeline_to_dict(cfg: PipelineConfig) -> dict:
    """JSON-ready echo of a pipeline config (used in run summaries)."""
    return {
        "name": cfg.name,
        "arch": {
            "input_len": cfg.arch.input_len,
            "conv": [vars(s).copy() for s in cfg.arch.conv],
            "dense": [vars(s).copy() for s in cfg.arch.dense],
            "loss": cfg.arch.loss,
            "init": cfg.arch.init,
        },
        "train": vars(cfg.train).copy(),
        "data": {
            "n": cfg.data.n,
            "feature_noise_high": cfg.data.feature_noise_high,
            "bg_sigma": cfg.data.bg_sigma,
            "normalize": cfg.data.normalize,
            "seed": cfg.data.seed,
        },
    }
