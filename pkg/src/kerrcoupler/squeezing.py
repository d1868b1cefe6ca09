"""Quadrature variances and squeezing factors.

The generic path works from any moment source (analytic or Fock
oracle). The ``closed_form_*`` and ``paper_*`` evaluators reproduce the
published special-case expressions literally and are only meant for
comparison on their stated parameter domains.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial
from typing import Protocol

import numpy as np

from .core import DEFAULT_EXPONENT_CAP, MomentIndex, SqueezingSample

DEFAULT_NORMALIZATION_TOLERANCE = 1e-9
_IMAG_RESIDUE_TOL = 1e-12


class MomentSource(Protocol):
    def normally_ordered_moment(self, idx): ...

    def mean_photon(self, mode: int): ...


@dataclass(frozen=True)
class SingleModeNth:
    mode: int = 1
    n: int = 1

    def __post_init__(self):
        if self.mode not in (1, 2):
            raise ValueError(f"mode must be 1 or 2, got {self.mode!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if 2 * self.n > DEFAULT_EXPONENT_CAP:
            raise ValueError(
                f"order n={self.n} needs exponent {2 * self.n} > cap {DEFAULT_EXPONENT_CAP}")

    @property
    def order(self) -> int:
        return self.n

    def _idx(self, dag, ann):
        if self.mode == 1:
            return MomentIndex(dag, ann, 0, 0)
        return MomentIndex(0, 0, dag, ann)


@dataclass(frozen=True)
class Sum:
    @property
    def order(self) -> int:
        return 2


@dataclass(frozen=True)
class Difference:
    @property
    def order(self) -> int:
        return 1


QuadratureSpec = SingleModeNth | Sum | Difference


def commutator_coefficients(n: int) -> list[int]:
    """Integer weights C(n,k)^2 k! of <A^+(n-k) A^(n-k)>, k = 1..n."""
    return [comb(n, k) ** 2 * factorial(k) for k in range(1, n + 1)]


def _real(value, what):
    value = np.asarray(value)
    if np.iscomplexobj(value):
        scale = np.maximum(1.0, np.abs(value.real))
        if np.any(np.abs(value.imag) > _IMAG_RESIDUE_TOL * scale):
            worst = float(np.max(np.abs(value.imag)))
            raise ArithmeticError(f"{what} has imaginary residue {worst:.3e}")
        value = value.real
    return value.astype(float)


def _scalarize(x):
    return float(x) if np.ndim(x) == 0 else x


def commutator_mean(spec, src: MomentSource):
    """Expectation of the commutator [O, O^+] for the quadrature family."""
    if isinstance(spec, SingleModeNth):
        total = 0.0
        for k, w in zip(range(1, spec.n + 1), commutator_coefficients(spec.n)):
            m = spec.n - k
            if m == 0:
                total = total + float(w)
            else:
                total = total + float(w) * src.normally_ordered_moment(spec._idx(m, m))
        return _scalarize(_real(total, "commutator mean"))
    if isinstance(spec, Sum):
        return _scalarize(_real(src.mean_photon(1) + src.mean_photon(2) + 1.0, "commutator mean"))
    if isinstance(spec, Difference):
        return _scalarize(_real(src.mean_photon(2) - src.mean_photon(1), "commutator mean"))
    raise TypeError(f"unknown quadrature spec {spec!r}")


def operator_moments(spec, src: MomentSource):
    """Return (<O>, <O^2>, <O^+ O>) as normally ordered moments."""
    if isinstance(spec, SingleModeNth):
        n = spec.n
        o = src.normally_ordered_moment(spec._idx(0, n))
        o2 = src.normally_ordered_moment(spec._idx(0, 2 * n))
        odo = src.normally_ordered_moment(spec._idx(n, n))
    elif isinstance(spec, Sum):
        o = src.normally_ordered_moment(MomentIndex(0, 1, 0, 1))
        o2 = src.normally_ordered_moment(MomentIndex(0, 2, 0, 2))
        odo = src.normally_ordered_moment(MomentIndex(1, 1, 1, 1))
    elif isinstance(spec, Difference):
        # O = A1 A2^+; modes commute so A2^+ A1 is already normal ordered
        o = src.normally_ordered_moment(MomentIndex(0, 1, 1, 0))
        o2 = src.normally_ordered_moment(MomentIndex(0, 2, 2, 0))
        odo = (src.normally_ordered_moment(MomentIndex(1, 1, 1, 1))
               + src.normally_ordered_moment(MomentIndex(1, 1, 0, 0)))
    else:
        raise TypeError(f"unknown quadrature spec {spec!r}")
    return o, o2, _real(odo, "<O^+ O>")


def quadrature_variances(spec, src: MomentSource):
    """Variances of X = (O + O^+)/2 and Y = (O - O^+)/(2i), plus <C>."""
    c_mean = commutator_mean(spec, src)
    o, o2, odo = operator_moments(spec, src)
    re_o2 = np.real(o2)
    var_x = (2 * re_o2 + 2 * odo + c_mean - 4 * np.real(o) ** 2) / 4
    var_y = (-2 * re_o2 + 2 * odo + c_mean - 4 * np.imag(o) ** 2) / 4
    return _scalarize(var_x), _scalarize(var_y), c_mean


def factor_arrays(spec, src: MomentSource,
                  normalization_tolerance: float = DEFAULT_NORMALIZATION_TOLERANCE):
    """Vectorized squeezing factors; returns a dict of equally shaped arrays."""
    var_x, var_y, c_mean = quadrature_variances(spec, src)
    # a constant commutator (n = 1) comes back as a scalar
    var_x, var_y, c_mean = (np.array(v, dtype=float)
                            for v in np.broadcast_arrays(var_x, var_y, c_mean))
    c_abs = np.abs(c_mean)
    raw_s = 4 * var_x - c_abs
    raw_q = 4 * var_y - c_abs
    normalized = c_abs > normalization_tolerance
    denom = np.where(normalized, c_abs, 1.0)
    s = np.where(normalized, raw_s / denom, raw_s)
    q = np.where(normalized, raw_q / denom, raw_q)
    return {
        "s": s, "q": q, "var_x": var_x, "var_y": var_y, "c_mean": c_mean,
        "raw_s": raw_s, "raw_q": raw_q, "normalized": normalized,
    }


def squeezing_factors(spec, src: MomentSource,
                      normalization_tolerance: float = DEFAULT_NORMALIZATION_TOLERANCE,
                      t: float | None = None) -> SqueezingSample:
    """Squeezing factors S, Q for a source bound to a single time."""
    cols = factor_arrays(spec, src, normalization_tolerance)
    if np.ndim(cols["s"]) != 0:
        raise ValueError("squeezing_factors needs a single-time source; use factor_arrays")
    if t is None:
        t = float(np.asarray(getattr(src, "t", np.nan)))
    return SqueezingSample(
        t=float(t),
        s=float(cols["s"]), q=float(cols["q"]),
        var_x=float(cols["var_x"]), var_y=float(cols["var_y"]),
        c_mean=float(cols["c_mean"]),
        raw_s=float(cols["raw_s"]), raw_q=float(cols["raw_q"]),
        normalized=bool(cols["normalized"]),
    )


def mu_prefactor(alpha: float, n: int, c_mean: float) -> float:
    if not c_mean > 0:
        raise ValueError(f"commutator mean must be positive, got {c_mean!r}")
    return 2.0 * alpha ** (2 * n) / c_mean


def _envelope(eps, angle):
    return np.exp(-2.0 * eps * np.sin(angle) ** 2)


def closed_form_s1q1(alpha: float, n: int, kappa: float, chi: float, t):
    """nth-order single-mode S and Q for alpha1 = alpha2 = alpha at zero detuning."""
    eps = 2.0 * alpha ** 2
    lam = kappa
    t = np.asarray(t, dtype=float)
    # |abar1|^2 = alpha^2 on this domain, so every normally ordered term is alpha^(2m)
    c_mean = float(sum(w * alpha ** (2 * (n - k))
                       for k, w in zip(range(1, n + 1), commutator_coefficients(n))))
    mu = mu_prefactor(alpha, n, c_mean)
    h1 = (np.cos(2 * lam * t * n + 2 * n * (2 * n - 1) * chi * t + eps * np.sin(4 * n * chi * t))
          * _envelope(eps, 2 * n * chi * t))
    inner = lam * t * n + n * (n - 1) * chi * t + eps * np.sin(2 * n * chi * t)
    f_sq = _envelope(eps, n * chi * t) ** 2
    h2 = 2 * np.cos(inner) ** 2 * f_sq
    h3 = 2 * np.sin(inner) ** 2 * f_sq
    s = mu * (1 + h1 - h2)
    q = mu * (1 - h1 - h3)
    return _scalarize(s), _scalarize(q)


def closed_form_s1q1_half_kerr(alpha: float, n: int, kappa: float, t):
    """The published reduction of S1, Q1 at chi t = pi/2 for odd n (printed form)."""
    if n % 2 != 1:
        raise ValueError("the reduced form holds for odd n only")
    eps = 2.0 * alpha ** 2
    c_mean = float(sum(w * alpha ** (2 * (n - k))
                       for k, w in zip(range(1, n + 1), commutator_coefficients(n))))
    mu = mu_prefactor(alpha, n, c_mean)
    lt = kappa * np.asarray(t, dtype=float)
    s = mu * (1 - np.cos(2 * n * lt) - 2 * np.cos(n * lt) ** 2 * np.exp(-2 * eps))
    q = mu * (1 + np.cos(2 * n * lt) - 2 * np.sin(n * lt) ** 2 * np.exp(-2 * eps))
    return _scalarize(s), _scalarize(q)


def closed_form_s2q2(alpha: float, kappa: float, chi: float, t):
    """Published sum-squeezing S2, Q2 for alpha1 = alpha, alpha2 = 0, zero detuning."""
    eps = alpha ** 2
    lam = kappa
    t = np.asarray(t, dtype=float)
    pref = 2 * alpha ** 4 / (alpha ** 2 + 1) * np.sin(lam * t) ** 2 * np.cos(lam * t) ** 2
    fast = np.cos(12 * chi * t + eps * np.sin(8 * chi * t)) * np.exp(-2 * eps * np.sin(4 * chi * t) ** 2)
    slow = 2 * chi * t + eps * np.sin(4 * chi * t)
    damp = np.exp(-4 * eps * np.sin(2 * chi * t) ** 2)
    s = pref * (1 + fast - 2 * np.sin(slow) ** 2 * damp)
    q = pref * (1 - fast - 2 * np.cos(slow) ** 2 * damp)
    return _scalarize(s), _scalarize(q)


def closed_form_s2q2_quarter_kerr(alpha: float, kappa: float, t):
    """The published reduction of S2, Q2 at chi t = pi/4 (printed form)."""
    eps = alpha ** 2
    lt = kappa * np.asarray(t, dtype=float)
    pref = alpha ** 4 / (alpha ** 2 + 1) * np.sin(2 * lt) ** 2
    return _scalarize(-pref * np.exp(-2 * eps)), _scalarize(pref)


def paper_s3q3(traj, expanded: bool = False):
    """Published difference-squeezing factors S3, Q3.

    By default returns the final reported form, twice the mode-1 mean
    photon number for both factors. ``expanded=True`` evaluates the
    printed four-term expression literally instead; the two disagree
    whenever Re or Im of abar1 * conj(abar2) is nonzero.
    """
    a1 = np.asarray(traj.a1bar)
    a2 = np.asarray(traj.a2bar)
    n1 = np.abs(a1) ** 2
    if not expanded:
        v = _scalarize(2 * n1)
        return v, v
    n2 = np.abs(a2) ** 2
    cross = np.real(a1 ** 2 * np.conj(a2) ** 2)
    x, y = a1.real, a1.imag
    xp, yp = a2.real, a2.imag
    s3 = 2 * cross + 2 * n1 * n2 + 2 * n1 - (x * xp + y * yp) ** 2
    q3 = -2 * cross + 2 * n1 * n2 + 2 * n1 - (x * yp - y * xp) ** 2
    return _scalarize(s3), _scalarize(q3)
