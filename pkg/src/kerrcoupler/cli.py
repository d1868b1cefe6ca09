"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 numeric guard
failure (Fock cutoff), 3 engine comparison above tolerance.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

import click
import numpy as np

from .analysis import compute_series, sweep
from .analytic import classical_trajectory
from .config import BACKENDS, PRESETS, ConfigError, ScenarioConfig, parse_grid, preset
from .core import CONVENTIONS, epsilon
from .fock import CutoffError

CSV_HEADER = ("t", "s", "q", "var_x", "var_y", "c_mean", "raw_s", "raw_q", "envelope")
COMPARED = ("s", "q")
EXIT_USAGE, EXIT_GUARD, EXIT_TOLERANCE = 1, 2, 3


class ToleranceExceeded(Exception):
    pass


def _fmt(x) -> str:
    return repr(float(x))


def series_csv(series) -> str:
    lines = [",".join(CSV_HEADER)]
    cols = [series[name] for name in CSV_HEADER]
    for row in zip(*cols):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _write(text: str, path: str | None):
    if not path or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _suffixed(path: str, backend: str) -> str:
    stem = path[:-4] if path.endswith(".csv") else path
    return f"{stem}.{backend}.csv"


@dataclass
class Comparison:
    diffs: dict
    worst_t: dict

    @property
    def max_diff(self) -> float:
        return max(self.diffs[c] for c in COMPARED)


def compare_series(a, b) -> Comparison:
    diffs, worst = {}, {}
    for name in CSV_HEADER[1:]:
        d = np.abs(a[name] - b[name])
        i = int(np.argmax(d))
        diffs[name] = float(d[i])
        worst[name] = float(a.t[i])
    return Comparison(diffs, worst)


def nonconservation(config: ScenarioConfig) -> float:
    """Largest deviation of |abar1|^2 + |abar2|^2 from epsilon on the grid."""
    traj = classical_trajectory(config.params, config.init, config.grid())
    n1, n2 = traj.photon_numbers()
    return float(np.max(np.abs(n1 + n2 - epsilon(config.init))))


def run(config: ScenarioConfig, out: str | None = None, err=None,
        tolerance: float | None = None):
    """Compute the configured series and write CSV; returns {backend: TimeSeries}."""
    err = err or sys.stderr
    out = out if out is not None else config.output
    if config.backend == "both":
        if not out or out == "-":
            raise ConfigError("backend=both writes two files and needs --out")
        result = {b: compute_series(config, b) for b in ("analytic", "fock")}
        for b, series in result.items():
            _write(series_csv(series), _suffixed(out, b))
        cmp = compare_series(result["analytic"], result["fock"])
        verdict = ""
        if tolerance is not None:
            verdict = " within" if cmp.max_diff <= tolerance else " ABOVE"
            verdict += f" tolerance {tolerance:g}"
        print(f"max-abs-diff {cmp.max_diff:.3e} (s, q) analytic vs fock{verdict}", file=err)
        return result
    series = compute_series(config)
    _write(series_csv(series), out)
    return {config.backend: series}


def compare(config: ScenarioConfig, tolerance: float = 1e-6, out=None, err=None) -> Comparison:
    out = out or sys.stdout
    err = err or sys.stderr
    config = config.replace(backend="both")
    a = compute_series(config, "analytic")
    b = compute_series(config, "fock")
    cmp = compare_series(a, b)
    print("column,max_abs_diff,t_worst", file=out)
    for name in CSV_HEADER[1:]:
        print(f"{name},{_fmt(cmp.diffs[name])},{_fmt(cmp.worst_t[name])}", file=out)
    drift = nonconservation(config)
    if drift > 1e-9:
        print(f"analytic trajectory does not conserve photon number: "
              f"max |n1 + n2 - eps| = {drift:.3e} (convention {config.convention})", file=err)
    if cmp.max_diff > tolerance:
        raise ToleranceExceeded(
            f"engines disagree: max-abs-diff {cmp.max_diff:.3e} > {tolerance:g}")
    print(f"pass: max-abs-diff {cmp.max_diff:.3e} <= {tolerance:g}", file=err)
    return cmp


def sweep_cmd(config: ScenarioConfig, axis: str, values, out: str | None = None, err=None):
    err = err or sys.stderr
    backend = config.backend if config.backend != "both" else "analytic"
    try:
        points = sweep(config, axis, values, backend=backend)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    lines = ["value,min_s,argmin_t"]
    lines += [f"{_fmt(p.value)},{_fmt(p.min_s)},{_fmt(p.argmin_t)}" for p in points]
    _write("\n".join(lines) + "\n", out)
    counts = ", ".join(f"{p.value:g}: {p.collapse_count}" for p in points)
    note = "changes" if len({p.collapse_count for p in points}) > 1 else "is unchanged"
    print(f"collapse intervals per {axis} value ({counts}); count {note} across the sweep",
          file=err)
    return points


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"values must be comma-separated numbers, got {text!r}") from None


def build_config(config_path=None, preset_name=None, backend=None, grid=None, cutoff=None,
                 convention=None, overrides=()) -> ScenarioConfig:
    if config_path and preset_name:
        raise ConfigError("use either --config or --preset, not both")
    if preset_name:
        cfg = preset(preset_name)
    elif config_path:
        try:
            cfg = ScenarioConfig.from_file(config_path)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    else:
        cfg = ScenarioConfig()
    changes = {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (p.strip() for p in item.split("=", 1))
        changes[key] = value
    if backend:
        changes["backend"] = backend
    if grid:
        changes.update(parse_grid(grid))
    if cutoff:
        changes["cutoff"] = cutoff
    if convention:
        changes["convention"] = convention
    try:
        return cfg.replace(**changes) if changes else cfg
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _scenario_options(f):
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     help="Flat key = value scenario file."),
        click.option("--preset", "preset_name", type=click.Choice(sorted(PRESETS)),
                     help="Start from a figure preset."),
        click.option("--out", "out", default=None, help="Output CSV path (default: stdout)."),
        click.option("--backend", type=click.Choice(BACKENDS), default=None),
        click.option("--grid", default=None, metavar="START:STOP:STEPS"),
        click.option("--cutoff", default=None, metavar="{auto,N}",
                     help="Fock cutoff on total photon number."),
        click.option("--convention", type=click.Choice(CONVENTIONS), default=None),
        click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                     help="Override any config key; repeatable."),
    ]
    for opt in reversed(options):
        f = opt(f)
    return f


@click.group()
def cli():
    """Squeezing dynamics of the codirectional Kerr nonlinear coupler."""


@cli.command("run")
@_scenario_options
@click.option("--tolerance", type=float, default=None,
              help="With --backend both, flag the engine difference against this value.")
def run_command(config_path, preset_name, out, backend, grid, cutoff, convention, overrides,
                tolerance):
    """Compute a squeezing time series and write it as CSV."""
    cfg = build_config(config_path, preset_name, backend, grid, cutoff, convention, overrides)
    run(cfg, out, tolerance=tolerance)


@cli.command("compare")
@_scenario_options
@click.option("--tolerance", type=float, default=1e-6, show_default=True)
def compare_command(config_path, preset_name, out, backend, grid, cutoff, convention, overrides,
                    tolerance):
    """Run both engines and report their largest disagreement."""
    cfg = build_config(config_path, preset_name, backend, grid, cutoff, convention, overrides)
    if out and out != "-":
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            compare(cfg, tolerance, out=fh)
    else:
        compare(cfg, tolerance)


@cli.command("sweep")
@_scenario_options
@click.option("--axis", required=True, type=click.Choice(
    ["kappa", "chi", "delta", "alpha1", "alpha2", "n"]))
@click.option("--values", "values_text", required=True, help="Comma-separated values.")
def sweep_command(config_path, preset_name, out, backend, grid, cutoff, convention, overrides,
                  axis, values_text):
    """Minimum of s over the grid for each value of one parameter."""
    cfg = build_config(config_path, preset_name, backend, grid, cutoff, convention, overrides)
    sweep_cmd(cfg, axis, _parse_values(values_text), out)


@cli.command("preset")
@click.argument("name", type=click.Choice(sorted(PRESETS)))
def preset_command(name):
    """Print a preset as a config file."""
    sys.stdout.write(preset(name).to_text())


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="kerrcoupler", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except CutoffError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_GUARD
    except ToleranceExceeded as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_TOLERANCE
    return 0


if __name__ == "__main__":
    sys.exit(main())
