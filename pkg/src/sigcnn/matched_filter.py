"""Template-bank matched filtering.

A matched filter scores a known template against every alignment of a signal
by valid-mode cross-correlation; when the template is present at offset n0,
the response peaks there with value equal to the template's energy (plus the
noise contribution). A bank holds several templates and the detector picks
the template with the largest peak.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, LengthError
from .signal_ops import as_signal, unit_normalize, xcorr_valid


class TemplateBank:
    """An ordered collection of 1-D templates, with optional peak thresholds.

    Thresholds are advisory: they feed the threshold flags on a
    DetectionReport but never influence which template wins.
    """

    def __init__(self, templates: Sequence, thresholds: Sequence[float] | None = None):
        if len(templates) == 0:
            raise ConfigError("a template bank needs at least one template")
        self.templates = [as_signal(t) for t in templates]
        for i, t in enumerate(self.templates):
            if len(t) == 0:
                raise LengthError(f"template {i} is empty")
        if thresholds is not None and len(thresholds) != len(self.templates):
            raise ConfigError(
                f"got {len(thresholds)} thresholds for {len(self.templates)} templates"
            )
        self.thresholds = None if thresholds is None else [float(v) for v in thresholds]

    def __len__(self) -> int:
        return len(self.templates)

    def max_template_len(self) -> int:
        return max(len(t) for t in self.templates)

    def normalized(self) -> "TemplateBank":
        """A copy of the bank with every template scaled to unit energy.

        Use this when templates of unequal energy must compete fairly.
        """
        return TemplateBank([unit_normalize(t) for t in self.templates], self.thresholds)


@dataclass(frozen=True)
class TemplateResponse:
    response: np.ndarray
    peak_value: float
    peak_index: int


@dataclass(frozen=True)
class DetectionReport:
    """Per-template responses plus the index of the winning template."""

    per_template: list[TemplateResponse]
    winner: int
    threshold_flags: list[bool] | None = None


def bank_apply(bank: TemplateBank, x) -> list[np.ndarray]:
    """Cross-correlate the signal with every template, in bank order."""
    x = as_signal(x)
    if len(x) < bank.max_template_len():
        raise LengthError(
            f"signal of length {len(x)} is shorter than the longest template "
            f"({bank.max_template_len()})"
        )
    return [xcorr_valid(x, t) for t in bank.templates]


def detect_feature(bank: TemplateBank, x) -> DetectionReport:
    """Run the bank and pick the template with the largest response peak.

    Ties (between alignments and between templates) go to the lowest index,
    so the report is deterministic. Thresholds, when the bank has them, are
    reported as flags only.
    """
    responses = bank_apply(bank, x)
    per_template = []
    for r in responses:
        peak_index = int(np.argmax(r))  # first index on ties
        per_template.append(TemplateResponse(r, float(r[peak_index]), peak_index))
    peaks = [p.peak_value for p in per_template]
    winner = int(np.argmax(peaks))
    flags = None
    if bank.thresholds is not None:
        flags = [p.peak_value >= th for p, th in zip(per_template, bank.thresholds)]
    return DetectionReport(per_template, winner, flags)
