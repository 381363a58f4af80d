"""sigcnn: a small, exactly-reproducible 1-D convolutional network framework.

The package treats a convolutional layer as a bank of learned matched filters:
the same valid-mode cross-correlation that scores a known template against a
noisy signal is the forward pass of a convolutional channel. Everything is
plain float64 numpy with deterministic summation order, so trained models,
logs, and gradient checks reproduce bit for bit under a fixed seed.
"""

from .data import (
    DEFAULT_FEATURES,
    RECTANGULAR,
    TRIANGULAR,
    FeatureSpec,
    GenConfig,
    SampleMeta,
    build_sample,
    data_streams,
    dump_dataset,
    generate_epoch,
    generate_sample,
    load_dataset,
)
from .errors import (
    ConfigError,
    DomainError,
    LengthError,
    ShapeError,
    SigcnnError,
    TapeMismatchError,
    ZeroEnergyError,
)
from .gradcheck import GradCheckReport, ParamCheck, audit, grad_check, relative_error
from .initializers import InitScheme, SCHEME_NAMES, conv_fans, dense_fans, init_draw
from .layers import (
    PADDING_MODES,
    ConvLayer,
    DenseLayer,
    apply_dropout,
    conv_forward,
    dense_forward,
    dropout_mask,
    flatten,
    maxpool_forward,
    relu_forward,
    softmax,
    stride_decimate,
    unflatten,
)
from .losses import CLAMP_FLOOR, LOSS_NAMES, loss_and_clamp, loss_value, output_delta
from .matched_filter import (
    DetectionReport,
    TemplateBank,
    TemplateResponse,
    bank_apply,
    detect_feature,
)
from .model_io import (
    dumps_json,
    format_float,
    load_model,
    read_signal_csv,
    read_templates_csv,
    save_model,
    write_csv,
    write_json,
)
from .network import (
    ConvBlock,
    DenseBlock,
    ForwardTape,
    GradientSet,
    Network,
    TrainConfig,
    TrainingLog,
    backward,
    evaluate,
    forward,
    sgd_step,
    train,
    train_streams,
)
from .presets import (
    PRESET_NAMES,
    ArchConfig,
    ConvSpec,
    DenseSpec,
    PipelineConfig,
    build_network,
    load_config,
    pipeline_to_dict,
    preset,
)
from .shapes import (
    BudgetReport,
    StageReport,
    alexnet_walkthrough,
    block_pool_len,
    param_budget,
    walk_layer_table,
    window_out_len,
)
from .signal_ops import (
    as_signal,
    conv_full,
    energy,
    ordered_sum,
    reverse,
    unit_normalize,
    xcorr_same,
    xcorr_valid,
)

__version__ = "0.1.0"

__all__ = [
    "ArchConfig",
    "BudgetReport",
    "CLAMP_FLOOR",
    "ConfigError",
    "ConvBlock",
    "ConvLayer",
    "ConvSpec",
    "DEFAULT_FEATURES",
    "DenseBlock",
    "DenseLayer",
    "DenseSpec",
    "DetectionReport",
    "DomainError",
    "FeatureSpec",
    "ForwardTape",
    "GenConfig",
    "GradCheckReport",
    "GradientSet",
    "InitScheme",
    "LOSS_NAMES",
    "LengthError",
    "Network",
    "PADDING_MODES",
    "PRESET_NAMES",
    "ParamCheck",
    "PipelineConfig",
    "RECTANGULAR",
    "SCHEME_NAMES",
    "SampleMeta",
    "ShapeError",
    "SigcnnError",
    "StageReport",
    "TRIANGULAR",
    "TapeMismatchError",
    "TemplateBank",
    "TemplateResponse",
    "TrainConfig",
    "TrainingLog",
    "ZeroEnergyError",
    "alexnet_walkthrough",
    "as_signal",
    "apply_dropout",
    "audit",
    "backward",
    "bank_apply",
    "block_pool_len",
    "build_network",
    "build_sample",
    "conv_fans",
    "conv_forward",
    "conv_full",
    "data_streams",
    "dense_fans",
    "dense_forward",
    "detect_feature",
    "dropout_mask",
    "dump_dataset",
    "dumps_json",
    "energy",
    "evaluate",
    "flatten",
    "unflatten",
    "format_float",
    "forward",
    "generate_epoch",
    "generate_sample",
    "grad_check",
    "init_draw",
    "load_config",
    "load_dataset",
    "load_model",
    "loss_and_clamp",
    "loss_value",
    "maxpool_forward",
    "ordered_sum",
    "output_delta",
    "param_budget",
    "pipeline_to_dict",
    "preset",
    "read_signal_csv",
    "read_templates_csv",
    "relative_error",
    "relu_forward",
    "reverse",
    "save_model",
    "sgd_step",
    "softmax",
    "stride_decimate",
    "train",
    "train_streams",
    "unit_normalize",
    "walk_layer_table",
    "window_out_len",
    "write_csv",
    "write_json",
    "xcorr_same",
    "xcorr_valid",
    "__version__",
]
