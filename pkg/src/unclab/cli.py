"""Command-line entry point.

One subcommand per experiment plus `plot`.  Flags override the JSON config
file; the config file supplies everything else.  Exit codes: 0 clean run,
2 bound violations, 1 configuration error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .experiments import EXPERIMENT_NAMES, ConfigError, ExperimentConfig, run
from .plots import PlotDataError, emit_plot_data

_FLOAT_OPTS = ("eta", "delta", "epsilon", "tol")
_INT_OPTS = ("seed", "n", "r", "layers", "k", "trials", "restarts", "points")
_STR_OPTS = ("fuzz_variant", "state", "bank", "out")


def _experiment_options(f):
    # reversed so --help lists them in declaration order
    opts = [
        click.option("--config", "config_path", type=click.Path(), default=None,
                     help="JSON config file; flags override its values."),
    ]
    for name in _INT_OPTS:
        opts.append(click.option(f"--{name}", type=int, default=None))
    for name in _FLOAT_OPTS:
        opts.append(click.option(f"--{name}", type=float, default=None))
    for name in _STR_OPTS:
        flag = name.replace("_", "-")
        opts.append(click.option(f"--{flag}", name, type=str, default=None))
    for opt in reversed(opts):
        f = opt(f)
    return f


def _execute(experiment: str, config_path, overrides: dict) -> None:
    data = {}
    if config_path is not None:
        try:
            data = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            click.echo(f"error: cannot read config {config_path}: {exc}", err=True)
            sys.exit(1)
        if not isinstance(data, dict):
            click.echo("error: config file must hold a JSON object", err=True)
            sys.exit(1)
    data["experiment"] = experiment
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    try:
        config = ExperimentConfig.from_dict(data)
    except (ConfigError, TypeError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    code = run(config)
    if code == 0:
        click.echo(f"{experiment}: ok ({config.out}/results.csv)")
    else:
        click.echo(f"{experiment}: bound violations detected", err=True)
    sys.exit(code)


@click.group()
def main():
    """Seeded experiments for fuzzy-gate bounds, restricted-measurement
    entropies, extraction/expenditure protocols, and dimension sweeps."""


def _make_command(name: str):
    @main.command(name=name)
    @_experiment_options
    def _cmd(config_path, **overrides):
        _execute(name, config_path, overrides)

    _cmd.__doc__ = f"Run the {name} experiment."
    return _cmd


for _name in EXPERIMENT_NAMES:
    _make_command(_name)


@main.command()
@click.argument("results", type=click.Path())
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Directory for plot_data.csv and figures (default: alongside results).")
@click.option("--no-figures", is_flag=True, help="Emit the tidy CSV only.")
def plot(results, out_dir, no_figures):
    """Reshape a results CSV into tidy plot data and render figures."""
    try:
        path = emit_plot_data(Path(results), out_dir, figures=not no_figures)
    except (PlotDataError, OSError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(str(path))
    sys.exit(0)


if __name__ == "__main__":
    main()
