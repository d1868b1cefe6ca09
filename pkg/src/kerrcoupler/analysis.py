"""Time series of squeezing factors, envelopes and collapse detection."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .analytic import AnalyticMomentSource
from .config import ScenarioConfig
from .core import SqueezingSample, epsilon, lambda_rate
from .fock import FockMomentSource, auto_cutoff, build_blocks
from .squeezing import factor_arrays

WORKERS_ENV = "KERRCOUPLER_WORKERS"
# fixed chunking keeps every array operation shape-identical whatever the worker count
CHUNK = 128
COLUMNS = ("s", "q", "var_x", "var_y", "c_mean", "raw_s", "raw_q")
SWEEP_AXES = ("kappa", "chi", "delta", "alpha1", "alpha2", "n")


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


@dataclass
class TimeSeries:
    t: np.ndarray
    columns: dict
    config: ScenarioConfig
    backend: str
    normalized: np.ndarray = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if self.t.ndim != 1 or self.t.size == 0:
            raise ValueError("time grid must be a non-empty 1-D array")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        for name, col in self.columns.items():
            if len(col) != len(self.t):
                raise ValueError(f"column {name} has {len(col)} points, grid has {len(self.t)}")
        if self.normalized is None:
            self.normalized = np.ones(len(self.t), dtype=bool)

    def __len__(self):
        return len(self.t)

    def __getitem__(self, name) -> np.ndarray:
        if name == "t":
            return self.t
        return self.columns[name]

    @property
    def samples(self) -> list[SqueezingSample]:
        cols = self.columns
        return [
            SqueezingSample(float(t), *(float(cols[c][i]) for c in COLUMNS),
                            normalized=bool(self.normalized[i]))
            for i, t in enumerate(self.t)
        ]

    @property
    def order(self) -> int:
        return self.config.spec.order


def envelope(n: int, chi: float, epsilon: float, t):
    """Kerr envelope exp(-2 eps sin^2(n chi t))."""
    out = np.exp(-2.0 * epsilon * np.sin(n * chi * np.asarray(t, dtype=float)) ** 2)
    return float(out) if np.ndim(out) == 0 else out


def _chunks(n):
    return [slice(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]


def compute_series(config: ScenarioConfig, backend: str | None = None,
                   workers: int | None = None) -> TimeSeries:
    """Evaluate the configured measure on its grid with one backend."""
    backend = backend or config.backend
    if backend not in ("analytic", "fock"):
        raise ValueError(f"backend must be analytic or fock, got {backend!r}")
    workers = worker_count() if workers is None else workers
    params, init, spec = config.params, config.init, config.spec
    t = config.grid()
    info = {}

    if backend == "analytic":
        def source(ts):
            return AnalyticMomentSource(params, init, ts)
    else:
        n_max = config.n_max
        if n_max is None:
            n_max = auto_cutoff(epsilon(init), config.tail_tolerance) + 8
        blocks = build_blocks(params, n_max)
        for b in blocks:
            b.eigenvalues  # decompose once before any threads start
        info["n_max"] = n_max

        def source(ts):
            return FockMomentSource(params, init, ts, n_max=n_max, blocks=blocks)

    def work(sl):
        return factor_arrays(spec, source(t[sl]), config.normalization_tolerance)

    pieces = _chunks(len(t))
    if workers > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, pieces))
    else:
        parts = [work(sl) for sl in pieces]
    columns = {c: np.concatenate([p[c] for p in parts]) for c in COLUMNS}
    normalized = np.concatenate([p["normalized"] for p in parts])
    columns["envelope"] = envelope(spec.order, params.chi, epsilon(init), t)
    return TimeSeries(t, columns, config, backend, normalized, info)


def predict_collapse_centers(n: int, chi: float, t_max: float) -> list[float]:
    """Times (2m + 1) pi / (2 n chi) in [0, t_max]."""
    if chi == 0:
        raise ValueError("chi = 0 has a constant envelope and no collapse")
    step = np.pi / (n * abs(chi))
    out = []
    m = 0
    while (center := (m + 0.5) * step) <= t_max:
        out.append(float(center))
        m += 1
    return out


@dataclass
class CollapseReport:
    intervals: list
    centers: list
    predicted: list
    nearest: list
    residuals: list
    window: float
    diagnostics: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.intervals)

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def fast_period(series: TimeSeries) -> float:
    """Period 2 pi / (2 n lambda) of the exchange oscillation of the measure."""
    lam = lambda_rate(series.config.params)
    if lam == 0:
        return float(series.t[-1] - series.t[0])
    return 2 * np.pi / (2 * series.order * lam)


def detect_collapse_intervals(series: TimeSeries, flatness_threshold: float | None = None,
                              min_width: float | None = None,
                              column: str = "s") -> CollapseReport:
    """Find stretches where s(t) stays flat over a sliding one-period window.

    Defaults: threshold 2% of the series range, minimum width two windows.
    """
    t = series.t
    y = np.asarray(series[column], dtype=float)
    window = fast_period(series)
    diagnostics = []
    dt = float(np.mean(np.diff(t))) if len(t) > 1 else window
    per_window = window / dt if dt > 0 else np.inf
    if per_window < 8:
        diagnostics.append(
            f"grid too coarse: {per_window:.1f} points per fast period {window:.4g} (need 8)")
    span = float(np.ptp(y))
    if flatness_threshold is None:
        flatness_threshold = max(0.02 * span, 1e-12)
    elif not flatness_threshold > 0:
        raise ValueError("flatness_threshold must be positive")
    if min_width is None:
        min_width = 2 * window

    size = int(max(1, round(window / dt))) if dt > 0 else 1
    size = min(size, len(y))
    ptp = maximum_filter1d(y, size, mode="nearest") - minimum_filter1d(y, size, mode="nearest")
    flat = ptp <= flatness_threshold

    intervals = []
    edges = np.flatnonzero(np.diff(np.concatenate([[0], flat.astype(int), [0]])))
    for start, stop in zip(edges[::2], edges[1::2]):
        t0, t1 = float(t[start]), float(t[stop - 1])
        whole = start == 0 and stop == len(t)
        if whole or t1 - t0 >= min_width:
            intervals.append((t0, t1))
    centers = [0.5 * (a + b) for a, b in intervals]

    chi = series.config.chi
    predicted = predict_collapse_centers(series.order, chi, float(t[-1])) if chi != 0 else []
    nearest, residuals = [], []
    for c in centers:
        if predicted:
            p = min(predicted, key=lambda x: abs(x - c))
            nearest.append(p)
            residuals.append(abs(p - c))
        else:
            nearest.append(None)
            residuals.append(float("inf"))
    return CollapseReport(intervals, centers, predicted, nearest, residuals, window, diagnostics)


@dataclass(frozen=True)
class SweepPoint:
    value: float
    min_s: float
    argmin_t: float
    collapse_count: int


def _apply_axis(config: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    if axis == "alpha1":
        return config.replace(alpha1_re=value, alpha1_im=0.0)
    if axis == "alpha2":
        return config.replace(alpha2_re=value, alpha2_im=0.0)
    if axis == "n":
        if config.measure != "single_mode_nth":
            raise ValueError("axis n needs the single_mode_nth measure")
        return config.replace(n=int(value))
    return config.replace(**{axis: value})


def sweep(base: ScenarioConfig, axis: str, values, backend: str = "analytic",
          workers: int | None = None) -> list[SweepPoint]:
    """Minimum of s over the grid for each value of one parameter."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")
    out = []
    for value in values:
        series = compute_series(_apply_axis(base, axis, value), backend, workers)
        s = series["s"]
        i = int(np.argmin(s))
        report = detect_collapse_intervals(series)
        out.append(SweepPoint(float(value), float(s[i]), float(series.t[i]), report.count))
    return out
