"""
Command-line entry point: `verify <experiment> --config PATH`
"""
import logging
import sys
from typing import Optional

import click

from .config import LOG_LEVELS, settings
from .errors import ConfigError, IoError, VerifierError
from .models.schemas import ExperimentConfig
from .services.experiment_service import experiment_service, load_config
from .services.report_service import report_service

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2

# subcommand -> experiment kinds it accepts
SUBCOMMAND_KINDS = {
    "asgeirsson": ("asgeirsson-circle", "asgeirsson-hyperbola"),
    "uhe-residual": ("uhe-residual",),
    "xray-compare": ("xray-compare",),
    "ruled-surface": ("ruled-surface",),
    "map-triple": ("map-triple",),
    "chart-roundtrip": ("chart-roundtrip",),
}


def _report_config_error(e: ConfigError) -> None:
    click.echo(f"❌ {e}", err=True)
    for item in e.field_errors:
        click.echo(f"   {item['loc']}: {item['msg']}", err=True)


def execute(
    config_path: str,
    format: Optional[str],
    out: Optional[str],
    dump_curves: Optional[str],
    kinds: Optional[tuple[str, ...]] = None,
) -> int:
    """Load, run and emit one experiment; returns the process exit code"""
    try:
        config: ExperimentConfig = load_config(config_path)
        if kinds is not None and config.kind not in kinds:
            raise ConfigError(f"Config kind '{config.kind}' does not match this command (expected {', '.join(kinds)})")
        fmt = format or config.output.format
        target = out or config.output.path
        curves = dump_curves or config.output.dump_curves
        if fmt not in ("json", "csv"):
            raise ConfigError(f"Unknown report format '{fmt}'")
    except ConfigError as e:
        _report_config_error(e)
        return EXIT_CONFIG

    report = experiment_service.run(config)
    try:
        payload = report_service.write(report, fmt, target)
        if target is None:
            click.echo(payload, nl=False)
        if curves is not None:
            report_service.dump_curves(experiment_service.curve_rows(config), curves)
    except ConfigError as e:
        _report_config_error(e)
        return EXIT_CONFIG
    except IoError as e:
        click.echo(f"❌ {e}", err=True)
        return EXIT_FAIL
    except VerifierError as e:
        click.echo(f"❌ Curve dump failed: {e}", err=True)
        return EXIT_FAIL

    for check in report.checks:
        marker = "✅" if check.status == "pass" else "❌"
        click.echo(f"{marker} {check.name}: {check.status}", err=True)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _common_options(f):
    f = click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False), help="Experiment YAML file")(f)
    f = click.option("--format", "format", type=str, default=None, help="json or csv (defaults to the config's output.format)")(f)
    f = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here instead of stdout")(f)
    f = click.option("--dump-curves", type=click.Path(dir_okay=False), default=None, help="CSV of sampled conic integrands")(f)
    return f


@click.group()
@click.option(
    "--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None, help="Override LOG_LEVEL for this run"
)
def verify(log_level: Optional[str]):
    """Numerical checks of mean-value identities over conjugate conics"""
    if log_level:
        settings.configure_logging(log_level)


@verify.command("run")
@_common_options
def run_command(config_path, format, out, dump_curves):
    """Run any experiment, dispatching on its kind"""
    sys.exit(execute(config_path, format, out, dump_curves))


def _register(name: str, kinds: tuple[str, ...], help_text: str):
    @_common_options
    def command(config_path, format, out, dump_curves):
        sys.exit(execute(config_path, format, out, dump_curves, kinds))

    command.__doc__ = help_text
    verify.command(name)(command)


_register("asgeirsson", SUBCOMMAND_KINDS["asgeirsson"], "Compare integrals over a conjugate circle or hyperbola pair")
_register("uhe-residual", SUBCOMMAND_KINDS["uhe-residual"], "Finite-difference ultra-hyperbolic residuals of a solution")
_register("xray-compare", SUBCOMMAND_KINDS["xray-compare"], "Closed-form X-rays against numerical line integrals")
_register("ruled-surface", SUBCOMMAND_KINDS["ruled-surface"], "Unit pseudo-circles against their ruled quadrics")
_register("map-triple", SUBCOMMAND_KINDS["map-triple"], "Send a skew triple to (0, infinity, e1)")
_register("chart-roundtrip", SUBCOMMAND_KINDS["chart-roundtrip"], "Chart inverse and Plucker consistency")


def main():
    verify()


if __name__ == "__main__":
    main()
