"""Shared value types for the Kerr coupler model.

All rates share one arbitrary inverse-time unit. The cross-Kerr coupling
is tied to the self-Kerr rate (cross = 2 * chi) and is not a free field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

UNITARY = "unitary"
PAPER_EXACT = "paper-exact"
CONVENTIONS = (UNITARY, PAPER_EXACT)

#: Largest operator exponent accepted in a moment index.
DEFAULT_EXPONENT_CAP = 8


class OrderCapError(ValueError):
    """A moment index exceeds the supported exponent cap."""


def _check_finite(name, value):
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class CouplerParams:
    kappa: float
    chi: float
    delta: float = 0.0
    convention: str = UNITARY

    def __post_init__(self):
        for name in ("kappa", "chi", "delta"):
            _check_finite(name, getattr(self, name))
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.convention not in CONVENTIONS:
            raise ValueError(
                f"convention must be one of {CONVENTIONS}, got {self.convention!r}")

    @property
    def cross_chi(self) -> float:
        return 2.0 * self.chi


@dataclass(frozen=True)
class InitialAmplitudes:
    alpha1: complex
    alpha2: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha1", complex(self.alpha1))
        object.__setattr__(self, "alpha2", complex(self.alpha2))
        _check_finite("alpha1", self.alpha1)
        _check_finite("alpha2", self.alpha2)

    def epsilon(self) -> float:
        return epsilon(self)

    def swapped(self) -> "InitialAmplitudes":
        return InitialAmplitudes(self.alpha2, self.alpha1)


@dataclass(frozen=True)
class MomentIndex:
    """Exponents of <A1^+n1 A2^+n3 A1^n2 A2^n4>."""

    n1: int
    n2: int
    n3: int
    n4: int
    cap: int = field(default=DEFAULT_EXPONENT_CAP, compare=False, repr=False)

    def __post_init__(self):
        for name in ("n1", "n2", "n3", "n4"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if max(self.as_tuple()) > self.cap:
            raise OrderCapError(
                f"moment index {self.as_tuple()} exceeds exponent cap {self.cap}")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.n1, self.n2, self.n3, self.n4)

    def conjugate(self) -> "MomentIndex":
        """Index of the complex-conjugate moment."""
        return MomentIndex(self.n2, self.n1, self.n4, self.n3, cap=self.cap)

    @property
    def lowered(self) -> int:
        """Quanta removed by the annihilators on the ket side."""
        return self.n2 + self.n4

    @property
    def raised(self) -> int:
        return self.n1 + self.n3

    def __str__(self):
        return "({},{},{},{})".format(*self.as_tuple())


def as_index(idx, cap: int = DEFAULT_EXPONENT_CAP) -> MomentIndex:
    if isinstance(idx, MomentIndex):
        return idx
    return MomentIndex(*idx, cap=cap)


@dataclass(frozen=True)
class SqueezingSample:
    """Squeezing factors at one time point.

    When ``normalized`` is False the commutator mean was below the
    normalization tolerance and ``s``/``q`` carry the raw numerators.
    """

    t: float
    s: float
    q: float
    var_x: float
    var_y: float
    c_mean: float
    raw_s: float
    raw_q: float
    normalized: bool = True


def lambda_rate(params: CouplerParams) -> float:
    """Beat rate sqrt(kappa^2 + delta^2 / 4) of the linear exchange."""
    return math.hypot(params.kappa, params.delta / 2.0)


def epsilon(init: InitialAmplitudes) -> float:
    """Total mean photon number |alpha1|^2 + |alpha2|^2."""
    return abs(init.alpha1) ** 2 + abs(init.alpha2) ** 2
