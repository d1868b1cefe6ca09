"""Closed-form moments of the coupler modes for coherent input.

Every function accepts a scalar time or a numpy array of times and
broadcasts over it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    PAPER_EXACT,
    CouplerParams,
    InitialAmplitudes,
    MomentIndex,
    as_index,
    epsilon,
    lambda_rate,
)

# below this |lambda t| the sin(lambda t)/lambda ratio is taken from its series
_SINC_SERIES_CUTOFF = 1e-8


@dataclass(frozen=True)
class Trajectory:
    """Mean-field amplitudes of the two modes with the Kerr phase removed."""

    a1bar: complex | np.ndarray
    a2bar: complex | np.ndarray

    def photon_numbers(self):
        return np.abs(self.a1bar) ** 2, np.abs(self.a2bar) ** 2


@dataclass(frozen=True)
class KerrPhaseBase:
    z: complex | np.ndarray


def _sin_over_rate(lam, t):
    t = np.asarray(t, dtype=float)
    x = lam * t
    small = np.abs(x) < _SINC_SERIES_CUTOFF
    safe_lam = lam if lam != 0 else 1.0
    ratio = np.where(small, t * (1.0 - x * x / 6.0), np.sin(x) / safe_lam)
    return ratio


def classical_trajectory(params: CouplerParams, init: InitialAmplitudes, t) -> Trajectory:
    lam = lambda_rate(params)
    c = np.cos(lam * np.asarray(t, dtype=float))
    s = _sin_over_rate(lam, t)
    a1, a2 = init.alpha1, init.alpha2
    half = params.delta / 2.0
    a1bar = a1 * c - 1j * (a1 * half + a2 * params.kappa) * s
    if params.convention == PAPER_EXACT:
        a2bar = a2 * c - 1j * (a2 * half + a1 * params.kappa) * s
    else:
        # mode 2 sits at -delta/2 in the co-rotating frame
        a2bar = a2 * c + 1j * (a2 * half - a1 * params.kappa) * s
    if np.ndim(a1bar) == 0:
        a1bar, a2bar = complex(a1bar), complex(a2bar)
    return Trajectory(a1bar, a2bar)


def _kerr_power(chi, t, k):
    """z**k with z = exp(-2i chi t), built from the angle."""
    out = np.exp(-2j * chi * np.asarray(t, dtype=float) * k)
    return complex(out) if np.ndim(out) == 0 else out


def kerr_phase_base(chi: float, t) -> KerrPhaseBase:
    return KerrPhaseBase(_kerr_power(chi, t, 1))


def phase_exponents(idx: MomentIndex) -> tuple[int, int]:
    """Return (photon-shift exponent, Kerr phase exponent) of a moment."""
    n1, n2, n3, n4 = idx.as_tuple()
    shift = n2 + n4 - n3 - n1
    phase2 = (2 * n2 * n4 + n2 * (n2 - 1) + n4 * (n4 - 1)
              - 2 * n1 * n3 - n1 * (n1 - 1) - n3 * (n3 - 1))
    return shift, phase2 // 2


def normally_ordered_moment(params: CouplerParams, init: InitialAmplitudes, t, idx,
                            trajectory: Trajectory | None = None):
    """<A1^+n1 A2^+n3 A1^n2 A2^n4> at time ``t`` for coherent input.

    ``idx`` may be a MomentIndex or a plain 4-tuple; tuples are checked
    against the default exponent cap.
    """
    idx = as_index(idx)
    n1, n2, n3, n4 = idx.as_tuple()
    traj = trajectory if trajectory is not None else classical_trajectory(params, init, t)
    eps = epsilon(init)
    shift, phase = phase_exponents(idx)

    envelope = np.exp(eps * (_kerr_power(params.chi, t, shift) - 1.0))
    amp = (traj.a1bar ** n2 * traj.a2bar ** n4
           * np.conj(traj.a1bar) ** n1 * np.conj(traj.a2bar) ** n3)
    out = envelope * amp * _kerr_power(params.chi, t, phase)
    return complex(out) if np.ndim(out) == 0 else out


def mean_photon(params: CouplerParams, init: InitialAmplitudes, t, mode: int):
    traj = classical_trajectory(params, init, t)
    if mode == 1:
        return np.abs(traj.a1bar) ** 2
    if mode == 2:
        return np.abs(traj.a2bar) ** 2
    raise ValueError(f"mode must be 1 or 2, got {mode!r}")


class AnalyticMomentSource:
    """Moment source bound to one (params, init, t); ``t`` may be an array."""

    backend = "analytic"

    def __init__(self, params: CouplerParams, init: InitialAmplitudes, t):
        self.params = params
        self.init = init
        self.t = t
        self._traj = classical_trajectory(params, init, t)

    @property
    def trajectory(self) -> Trajectory:
        return self._traj

    def normally_ordered_moment(self, idx):
        return normally_ordered_moment(self.params, self.init, self.t, idx,
                                       trajectory=self._traj)

    def mean_photon(self, mode: int):
        n1, n2 = self._traj.photon_numbers()
        if mode == 1:
            return n1
        if mode == 2:
            return n2
        raise ValueError(f"mode must be 1 or 2, got {mode!r}")
