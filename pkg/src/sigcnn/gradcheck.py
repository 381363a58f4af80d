"""Finite-difference auditing of the analytic gradients.

For every parameter θ the audit compares the backward pass's gradient with
the central difference ``(L(θ+h) − L(θ−h)) / 2h`` of the forward loss. The
relative error of a parameter is

* ``0`` when ``|analytic − numeric| ≤ ZERO_FLOOR`` (the difference sits in
  the probe's own noise, so the quotient would measure rounding, not the
  gradient), and
* ``|analytic − numeric| / max(|analytic|, |numeric|)`` otherwise.

The floor is set two orders of magnitude above the central difference's
intrinsic roundoff, ``eps·|loss|/h ≈ 1e−10`` at loss values of order one
and h=1e−6, and two orders below the smallest absolute deviation a real
gradient defect produces at the tolerances this audit certifies. For a
parameter with a near-zero true gradient the quotient is dominated by that
roundoff — the failure mode the floor exists to screen out.

Rectifier and pooling kinks make one-sided derivatives disagree, so a
parameter whose perturbation flips any indicator mask between the two
probe points is reported as "kink-adjacent, excluded" instead of scored —
the analytic gradient is a one-sided subgradient there, not wrong.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .losses import loss_value
from .network import Network, backward, forward

ZERO_FLOOR = 1e-8


@dataclass(frozen=True)
class ParamCheck:
    """One parameter's audit line."""

    path: str
    analytic: float
    numeric: float | None
    rel_err: float | None
    excluded: bool

    @property
    def note(self) -> str:
        return "kink-adjacent, excluded" if self.excluded else "ok"


@dataclass
class GradCheckReport:
    checks: list
    max_rel_err: float
    worst_path: str | None
    excluded: int

    def passed(self, tolerance: float = 1e-6) -> bool:
        return self.max_rel_err <= tolerance


def relative_error(analytic: float, numeric: float) -> float:
    diff = abs(analytic - numeric)
    if diff <= ZERO_FLOOR:
        return 0.0
    return diff / max(abs(analytic), abs(numeric))


def _mask_signature(tape):
    parts = []
    for tr in tape.conv:
        parts.append(tr.relu_mask.tobytes())
        parts.append(tr.pool_mask.tobytes())
    for tr in tape.dense:
        parts.append(b"" if tr.relu_mask is None else tr.relu_mask.tobytes())
    return b"".join(parts)


def _parameter_views(net: Network, grads):
    """(path prefix, parameter array, gradient array) triples in audit order."""
    views = []
    for i, blk in enumerate(net.conv_blocks):
        views.append((f"conv[{i}].weights", blk.layer.weights, grads.conv_weights[i]))
        views.append((f"conv[{i}].bias", blk.layer.bias, grads.conv_bias[i]))
    for j, blk in enumerate(net.dense_blocks):
        views.append((f"dense[{j}].weights", blk.layer.weights, grads.dense_weights[j]))
        if blk.layer.bias is not None:
            views.append((f"dense[{j}].bias", blk.layer.bias, grads.dense_bias[j]))
    return views


def grad_check(net: Network, x, t, h: float = 1e-6) -> GradCheckReport:
    """Audit every parameter of ``net`` at sample (x, t)."""
    if h <= 0:
        raise DomainError(f"step size h must be > 0, got {h}")
    _, tape = forward(net, x)
    grads = backward(net, tape, t)

    def probe():
        out, probe_tape = forward(net, x)
        return loss_value(net.loss_kind, out, t), _mask_signature(probe_tape)

    checks = []
    max_rel, worst, excluded = 0.0, None, 0
    for prefix, arr, grad in _parameter_views(net, grads):
        flat_a, flat_g = arr.reshape(-1), grad.reshape(-1)
        for idx in range(flat_a.size):
            coords = np.unravel_index(idx, arr.shape)
            path = prefix + "".join(f"[{c}]" for c in coords)
            old = flat_a[idx]
            flat_a[idx] = old + h
            loss_p, sig_p = probe()
            flat_a[idx] = old - h
            loss_m, sig_m = probe()
            flat_a[idx] = old
            analytic = float(flat_g[idx])
            if sig_p != sig_m:
                checks.append(ParamCheck(path, analytic, None, None, True))
                excluded += 1
                continue
            numeric = (loss_p - loss_m) / (2.0 * h)
            err = relative_error(analytic, numeric)
            checks.append(ParamCheck(path, analytic, numeric, err, False))
            if err > max_rel:
                max_rel, worst = err, path
    return GradCheckReport(checks, max_rel, worst, excluded)


def audit(cases, h: float = 1e-6):
    """Run grad_check over (net, x, t) cases; returns (max_rel_err, worst, reports).

    ``worst`` is "case <i>: <parameter path>" for the largest included
    relative error across all cases.
    """
    reports = []
    max_rel, worst = 0.0, None
    for i, (net, x, t) in enumerate(cases):
        report = grad_check(net, x, t, h)
        reports.append(report)
        if report.worst_path is not None and report.max_rel_err >= max_rel:
            max_rel = report.max_rel_err
            worst = f"case {i}: {report.worst_path}"
    return max_rel, worst, reports
