"""Random weight initialization schemes.

Two families, each in a normal and a uniform flavour:

* fan-in scaling with variance ``2 / fan_in`` (``he_normal``/``he_uniform``) —
  the factor 2 compensates for the half of the activations a rectifier
  removes, preserving the expected output energy;
* fan-in + fan-out scaling with variance ``2 / (fan_in + fan_out)``
  (``xavier_normal``/``xavier_uniform``).

Uniform flavours draw from ``±bound`` with the bound chosen so the variance
matches the normal flavour of the same family (``Var(U(-a, a)) = a²/3``).

Fan conventions for this package: a correlation layer with ``P`` input
channels, ``K`` output channels and ``M`` taps has ``fan_in = P·M`` and
``fan_out = K·M``; a dense layer mapping ``N`` inputs to ``S`` outputs has
``fan_in = N`` and ``fan_out = S``. Biases always start at zero.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SCHEME_NAMES = ("he_normal", "he_uniform", "xavier_normal", "xavier_uniform")


@dataclass(frozen=True)
class InitScheme:
    """A named weight distribution with its fan sizes.

    ``fan_out`` only affects the two ``xavier_*`` schemes.
    """

    kind: str
    fan_in: int
    fan_out: int = 1

    def __post_init__(self):
        if self.kind not in SCHEME_NAMES:
            raise DomainError(
                f"unknown init scheme {self.kind!r}; expected one of {SCHEME_NAMES}"
            )
        if self.fan_in < 1:
            raise DomainError(f"fan_in must be >= 1, got {self.fan_in}")
        if self.fan_out < 1:
            raise DomainError(f"fan_out must be >= 1, got {self.fan_out}")

    @property
    def variance(self) -> float:
        """The distribution's variance."""
        if self.kind in ("he_normal", "he_uniform"):
            return 2.0 / self.fan_in
        return 2.0 / (self.fan_in + self.fan_out)

    @property
    def uniform_bound(self) -> float:
        """Half-width a of the U(-a, a) draw matching ``variance`` (= sqrt(3·var))."""
        return math.sqrt(3.0 * self.variance)


def init_draw(scheme: InitScheme, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` independent weights from the scheme's distribution."""
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    if scheme.kind.endswith("_normal"):
        return rng.normal(0.0, math.sqrt(scheme.variance), size=count)
    bound = scheme.uniform_bound
    return rng.uniform(-bound, bound, size=count)


def conv_fans(in_channels: int, out_channels: int, taps: int) -> tuple[int, int]:
    """(fan_in, fan_out) of a correlation layer: (P·M, K·M)."""
    return in_channels * taps, out_channels * taps


def dense_fans(in_size: int, out_size: int) -> tuple[int, int]:
    """(fan_in, fan_out) of a dense layer: (N, S)."""
    return in_size, out_size
