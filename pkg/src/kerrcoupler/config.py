"""Scenario configuration: flat ``key = value`` text, presets, validation."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .core import CONVENTIONS, UNITARY, CouplerParams, InitialAmplitudes
from .fock import DEFAULT_TAIL_TOLERANCE
from .squeezing import DEFAULT_NORMALIZATION_TOLERANCE, Difference, SingleModeNth, Sum

MEASURES = ("single_mode_nth", "sum", "difference")
BACKENDS = ("analytic", "fock", "both")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    kappa: float = 1.0
    chi: float = 0.5
    delta: float = 0.0
    convention: str = UNITARY
    alpha1_re: float = 0.0
    alpha1_im: float = 0.0
    alpha2_re: float = 0.0
    alpha2_im: float = 0.0
    measure: str = "single_mode_nth"
    mode: int = 1
    n: int = 1
    t_start: float = 0.0
    t_stop: float = 4 * math.pi
    steps: int = 4000
    backend: str = "analytic"
    cutoff: str = "auto"
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE
    normalization_tolerance: float = DEFAULT_NORMALIZATION_TOLERANCE
    output: str = ""

    def __post_init__(self):
        try:
            for f in dataclasses.fields(self):
                value = getattr(self, f.name)
                if f.type == "float":
                    value = float(value)
                    if not math.isfinite(value):
                        raise ConfigError(f"{f.name} must be finite")
                elif f.type == "int":
                    if isinstance(value, str):
                        value = value.strip()
                    if float(value) != int(float(value)):
                        raise ConfigError(f"{f.name} must be an integer, got {value!r}")
                    value = int(float(value))
                else:
                    value = str(value).strip()
                object.__setattr__(self, f.name, value)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None
        self._validate()

    def _validate(self):
        if self.kappa < 0:
            raise ConfigError(f"kappa must be >= 0, got {self.kappa}")
        if self.convention not in CONVENTIONS:
            raise ConfigError(f"convention must be one of {', '.join(CONVENTIONS)}")
        if self.measure not in MEASURES:
            raise ConfigError(f"measure must be one of {', '.join(MEASURES)}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {', '.join(BACKENDS)}")
        if self.steps < 2:
            raise ConfigError(f"steps must be >= 2, got {self.steps}")
        if not self.t_stop > self.t_start:
            raise ConfigError("t_stop must exceed t_start")
        if self.measure == "single_mode_nth":
            if self.mode not in (1, 2):
                raise ConfigError(f"mode must be 1 or 2, got {self.mode}")
            try:
                SingleModeNth(self.mode, self.n)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.cutoff != "auto":
            try:
                c = int(self.cutoff)
            except ValueError:
                raise ConfigError(f"cutoff must be 'auto' or an integer, got {self.cutoff!r}") from None
            if c < 0:
                raise ConfigError("cutoff must be >= 0")
        if not 0 < self.tail_tolerance < 1:
            raise ConfigError("tail_tolerance must lie in (0, 1)")
        if not self.normalization_tolerance >= 0:
            raise ConfigError("normalization_tolerance must be >= 0")

    @property
    def params(self) -> CouplerParams:
        return CouplerParams(self.kappa, self.chi, self.delta, self.convention)

    @property
    def init(self) -> InitialAmplitudes:
        return InitialAmplitudes(complex(self.alpha1_re, self.alpha1_im),
                                 complex(self.alpha2_re, self.alpha2_im))

    @property
    def spec(self):
        if self.measure == "single_mode_nth":
            return SingleModeNth(self.mode, self.n)
        if self.measure == "sum":
            return Sum()
        return Difference()

    @property
    def n_max(self) -> int | None:
        return None if self.cutoff == "auto" else int(self.cutoff)

    def grid(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_stop, self.steps)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {_format_value(value)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ScenarioConfig":
        return cls(**parse_config_text(text))

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


_FIELD_NAMES = {f.name for f in dataclasses.fields(ScenarioConfig)}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_NAMES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


_FIG1 = dict(kappa=1.0, chi=0.5, alpha1_re=2.0, measure="single_mode_nth", mode=1)
_WEAK = dict(kappa=1.0, chi=0.5, delta=50.0, alpha1_re=0.3, alpha2_re=0.3,
             measure="single_mode_nth", mode=1)
_RESONANT_GRID = dict(t_start=0.0, t_stop=4 * math.pi, steps=4000)
_DETUNED_GRID = dict(t_start=0.0, t_stop=2 * math.pi, steps=4000)

PRESETS = {
    "fig1a_n2": dict(_FIG1, delta=0.0, n=2, **_RESONANT_GRID),
    "fig1a_n3": dict(_FIG1, delta=0.0, n=3, **_RESONANT_GRID),
    "fig1b": dict(_FIG1, delta=50.0, n=2, **_DETUNED_GRID),
    "fig1c": dict(_FIG1, delta=50.0, n=3, **_DETUNED_GRID),
    "fig2a": dict(_WEAK, n=2, **_DETUNED_GRID),
    "fig2b": dict(_WEAK, n=3, **_DETUNED_GRID),
    "fig3a_small": dict(kappa=1.0, chi=0.5, delta=0.0, alpha1_re=1.0, alpha2_re=1.5,
                        measure="sum", **_RESONANT_GRID),
    "fig3a_large": dict(kappa=1.0, chi=0.5, delta=0.0, alpha1_re=2.0, alpha2_re=3.0,
                        measure="sum", **_RESONANT_GRID),
    "fig3b": dict(kappa=1.0, chi=0.5, delta=50.0, alpha1_re=0.3, alpha2_re=0.6,
                  measure="sum", **_DETUNED_GRID),
}


def preset(name: str) -> ScenarioConfig:
    try:
        values = PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return ScenarioConfig(**values)


def parse_grid(text: str) -> dict:
    """``START:STOP:STEPS`` -> grid fields."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be START:STOP:STEPS, got {text!r}")
    try:
        return dict(t_start=float(parts[0]), t_stop=float(parts[1]), steps=int(parts[2]))
    except ValueError:
        raise ConfigError(f"grid must be START:STOP:STEPS, got {text!r}") from None
