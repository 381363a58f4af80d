"""Deterministic generator of the two-feature noisy signal dataset.

Each realization hides one of two short features in a length-``N`` signal:

* index 0 — the triangular shape ``[-0.5, 1, -0.5]``, target ``[0, 1]``;
* index 1 — the rectangular shape ``[1, 1, 1]``, target ``[1, 0]``.

Per sample, in a fixed draw order: the feature index (uniform), one uniform
perturbation ``ν(m) ~ U(0, feature_noise_high)`` per feature tap, a uniform
placement offset over every position where the feature fits, Gaussian
background noise of standard deviation ``bg_sigma`` on all samples, and a
final per-signal unit-energy normalization. The fixed order is what makes a
seeded run replayable sample for sample.

A training epoch is one materialized, ordered list of realizations; the
training loop replays the same list every epoch rather than regenerating.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .signal_ops import as_signal, unit_normalize


@dataclass(frozen=True)
class FeatureSpec:
    """A clean feature template and its one-hot target."""

    base: np.ndarray
    label: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", as_signal(self.base))
        object.__setattr__(self, "label", as_signal(self.label))
        if self.base.size < 1:
            raise ConfigError("feature template must be non-empty")


TRIANGULAR = FeatureSpec(base=np.array([-0.5, 1.0, -0.5]), label=np.array([0.0, 1.0]))
RECTANGULAR = FeatureSpec(base=np.array([1.0, 1.0, 1.0]), label=np.array([1.0, 0.0]))
DEFAULT_FEATURES = (TRIANGULAR, RECTANGULAR)


@dataclass(frozen=True)
class GenConfig:
    """Dataset shape and noise parameters."""

    n: int = 8
    feature_noise_high: float = 0.3
    bg_sigma: float = 0.05
    normalize: bool = True
    seed: int = 1
    features: tuple = DEFAULT_FEATURES

    def __post_init__(self):
        if not self.features:
            raise ConfigError("at least one feature is required")
        longest = max(f.base.size for f in self.features)
        if self.n < longest:
            raise ConfigError(
                f"signal length n={self.n} shorter than longest feature ({longest})"
            )
        if self.feature_noise_high < 0:
            raise ConfigError(f"feature_noise_high must be >= 0, got {self.feature_noise_high}")
        if self.bg_sigma < 0:
            raise ConfigError(f"bg_sigma must be >= 0, got {self.bg_sigma}")


@dataclass(frozen=True)
class SampleMeta:
    feature_index: int
    offset: int


def build_sample(cfg: GenConfig, feature_index: int, offset: int, feature_noise=None, bg_noise=None):
    """Assemble one signal from explicit draws (the deterministic core)."""
    feature = cfg.features[feature_index]
    m = feature.base.size
    if not 0 <= offset <= cfg.n - m:
        raise ConfigError(f"offset {offset} leaves no room for a {m}-tap feature in n={cfg.n}")
    x = np.zeros(cfg.n)
    perturbed = feature.base if feature_noise is None else feature.base + as_signal(feature_noise)
    if perturbed.size != m:
        raise ShapeError(f"feature noise must have {m} entries")
    x[offset : offset + m] = perturbed
    if bg_noise is not None:
        x = x + as_signal(bg_noise)
    if cfg.normalize:
        x = unit_normalize(x)
    return x


def generate_sample(cfg: GenConfig, rng: np.random.Generator):
    """One realization: returns (x, target, SampleMeta)."""
    index = int(rng.integers(0, len(cfg.features)))
    m = cfg.features[index].base.size
    feature_noise = rng.uniform(0.0, cfg.feature_noise_high, size=m)
    offset = int(rng.integers(0, cfg.n - m + 1))
    bg_noise = rng.normal(0.0, cfg.bg_sigma, size=cfg.n)
    x = build_sample(cfg, index, offset, feature_noise, bg_noise)
    return x, cfg.features[index].label.copy(), SampleMeta(index, offset)


def generate_epoch(cfg: GenConfig, count: int, rng: np.random.Generator):
    """Materialize ``count`` ordered realizations (replayed as-is each epoch)."""
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    return [generate_sample(cfg, rng) for _ in range(count)]


def data_streams(seed: int):
    """(train_rng, test_rng) derived from one 64-bit data seed."""
    train_seq, test_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(train_seq), np.random.default_rng(test_seq)


def dump_dataset(path, dataset):
    """Write realizations as CSV: sample_id,label,offset,x0..x{N-1}.

    ``label`` is the target class index (argmax of the one-hot target);
    floats carry 17 significant digits so the file round-trips losslessly.
    """
    from .model_io import format_float

    first_x = dataset[0][0]
    header = ["sample_id", "label", "offset"] + [f"x{i}" for i in range(len(first_x))]
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, (x, t, meta) in enumerate(dataset):
            row = [i, int(np.argmax(t)), meta.offset] + [format_float(v) for v in x]
            writer.writerow(row)


def load_dataset(path, features=DEFAULT_FEATURES):
    """Read a dataset CSV back into (x, target, SampleMeta) triples.

    The stored class index is mapped back to the feature whose label has its
    argmax there; with the default features class 0 is the rectangular shape
    and class 1 the triangular one.
    """
    by_class = {int(np.argmax(f.label)): (i, f) for i, f in enumerate(features)}
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = len(header) - 3
        for row in reader:
            label, offset = int(row[1]), int(row[2])
            x = np.array([float(v) for v in row[3 : 3 + n]])
            index, feature = by_class[label]
            out.append((x, feature.label.copy(), SampleMeta(index, offset)))
    return out
