"""Loss functions and their output-layer delta errors.

Two losses are supported:

* ``"mse"`` — squared error ``0.5 · Σ (y_k − t_k)²`` on raw outputs;
* ``"cross_entropy"`` — ``−Σ t_k ln(P_k)`` on softmax probabilities against a
  one-hot target.

Both share the same output-layer delta, ``output − target``: for MSE it is
the plain derivative, and for cross-entropy it is the derivative of the
composed softmax + cross-entropy with respect to the pre-softmax outputs
(there is no correction left when the probability matches the target).

``ln`` arguments below ``CLAMP_FLOOR`` are clamped so an underflowed
probability yields a large finite loss instead of infinity; callers that need
to know (the training log counts these events) use ``loss_and_clamp``.
"""

import numpy as np

from .errors import DomainError, ShapeError
from .signal_ops import as_signal

LOSS_NAMES = ("mse", "cross_entropy")

CLAMP_FLOOR = 1e-300


def _checked_pair(kind: str, output, target) -> tuple[np.ndarray, np.ndarray]:
    if kind not in LOSS_NAMES:
        raise DomainError(f"unknown loss {kind!r}; expected one of {LOSS_NAMES}")
    output, target = as_signal(output), as_signal(target)
    if len(output) != len(target):
        raise ShapeError(
            f"output length {len(output)} != target length {len(target)}"
        )
    if kind == "cross_entropy":
        one_hot = np.all((target == 0.0) | (target == 1.0)) and target.sum() == 1.0
        if not one_hot:
            raise DomainError(
                f"cross-entropy target must be one-hot, got {target.tolist()}"
            )
    return output, target


def loss_and_clamp(kind: str, output, target) -> tuple[float, bool]:
    """Loss value plus whether the cross-entropy log had to be clamped."""
    output, target = _checked_pair(kind, output, target)
    if kind == "mse":
        diff = output - target
        return 0.5 * float(diff @ diff), False
    clamped = bool(np.any((target != 0.0) & (output < CLAMP_FLOOR)))
    safe = np.where(output < CLAMP_FLOOR, CLAMP_FLOOR, output)
    value = -float(np.sum(target * np.log(safe)))
    return value, clamped


def loss_value(kind: str, output, target) -> float:
    """MSE: ``0.5 Σ (y−t)²``; cross-entropy: ``−Σ t ln P``. Both are >= 0."""
    return loss_and_clamp(kind, output, target)[0]


def output_delta(kind: str, output, target) -> np.ndarray:
    """Delta error at the output layer: elementwise ``output − target``."""
    output, target = _checked_pair(kind, output, target)
    return output - target
