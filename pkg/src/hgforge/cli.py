"""The main application entrypoint.

This module puts all the others together and uses click to interact with
the terminal and the user input.
"""
from __future__ import annotations

import json
import logging
import sys
from functools import partial
from pathlib import Path
from typing import Optional, Sequence

import click
from click_aliases import ClickAliasedGroup

from hgforge import __name__, __version__
from hgforge.elliptic import inv_sn, inv_sn_lattice
from hgforge.errors import HgforgeError
from hgforge.params import (
    SamplingMode,
    exponent_set_from_json,
    exponent_set_to_json,
    sample_parameters,
)
from hgforge.report import emit_report, render_text
from hgforge.series import DEFAULT_ORDER, BasePoint, hyper_pfq, mhgs_frobenius
from hgforge.settings import MAX_M, ConfigLoadError, initialize
from hgforge.suites import CAUCHY_KINDS, SUITE_NAMES, SuiteConfig, run_suite

echo_error = partial(click.secho, fg="red", err=True)
echo_success = partial(click.secho, fg="green")

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def configure_logging(verbosity: int) -> None:
    """WARNING by default, INFO with -v, DEBUG with -vv; always on stderr."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(format=LOG_FORMAT, stream=sys.stderr, force=True)
    logging.getLogger().setLevel(level)


def _set_verbosity(ctx: click.Context, param: click.Parameter, value: int) -> int:
    if value or ctx.parent is None:
        configure_logging(value)
    return value


verbosity_option = click.option(
    "-v",
    "--verbose",
    count=True,
    expose_value=False,
    callback=_set_verbosity,
    help="Log progress (-v) or numerical details (-vv) to stderr.",
)


class ComplexType(click.ParamType):
    """A complex number written as 'RE,IM' or just 'RE'."""

    name = "complex"

    def convert(self, value, param, ctx) -> complex:
        if isinstance(value, complex):
            return value
        try:
            parts = [float(p) for p in str(value).split(",")]
        except ValueError:
            parts = []
        if len(parts) not in (1, 2):
            self.fail(f"Expected 'RE,IM' or 'RE', got {value!r}.", param, ctx)
        return complex(*parts)


COMPLEX = ComplexType()


def _format_complex(value: complex) -> str:
    return f"{value.real:.16g},{value.imag:.16g}"


@click.group(cls=ClickAliasedGroup, invoke_without_command=True)
@click.option("--version", is_flag=True, help="Show hgforge's version.")
@verbosity_option
@click.pass_context
def main(ctx, version):
    """hgforge

    Computes the objects attached to hypergeometric systems (residues, flows,
    monodromy, Cauchy-type matrices, elliptic pairings) and verifies the identities
    between them numerically.

    Pass the '--help' flag to sub-commands to see how to use them.
    """
    if version:
        click.echo(f"{__name__} {__version__}")
        sys.exit(0)
    # During testing ctx.obj is constructed externally and passed in, so it's not None.
    if ctx.obj is None or isinstance(ctx.obj, Path):
        try:
            ctx.obj = initialize(config_root=ctx.obj)
        except ConfigLoadError as err:
            echo_error(str(err))
            sys.exit(1)

    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


@main.command(aliases=["check"])
@click.argument("suite", type=click.Choice(SUITE_NAMES))
@click.option("--m", "m", type=click.IntRange(1, MAX_M), help="Size of the system.")
@click.option("--trials", type=click.IntRange(min=1), help="Parameter sets per check.")
@click.option("--seed", type=click.IntRange(min=0), help="Root seed of all trials.")
@click.option("--tol", type=click.FloatRange(min=0, min_open=True), help="Base tolerance.")
@click.option("--omega2", type=COMPLEX, help="Second lattice generator, 'RE,IM'.")
@click.option("--trunc", type=click.IntRange(min=1), help="Inner lattice truncation radius.")
@click.option(
    "--kind",
    type=click.Choice(CAUCHY_KINDS),
    help="Restrict the Cauchy checks to one kernel.",
)
@click.option(
    "--accelerate/--no-accelerate",
    default=None,
    help="Euler acceleration of alternating lattice sums.",
)
@click.option(
    "--json",
    "json_path",
    type=click.Path(dir_okay=False, writable=True, path_type=Path),
    help="Also write the JSON report to this file.",
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["text", "json"]),
    default="text",
    show_default=True,
    help="Format of the report printed to stdout.",
)
@verbosity_option
@click.pass_obj
def verify(settings, suite, m, trials, seed, tol, omega2, trunc, kind, accelerate, json_path, fmt):
    """Run a verification suite and report the residual of every check.

    Flags override the configuration file. The exit status is 1 if any theorem
    check fails; probe checks are reported but never fail the run.
    """
    config = settings.config
    overrides = {}
    if omega2 is not None:
        overrides["omega2"] = omega2
    if trunc is not None:
        overrides["n1"] = trunc
    try:
        cfg = SuiteConfig(
            suite=suite,
            m=config.defaults.m if m is None else m,
            trials=config.defaults.trials if trials is None else trials,
            seed=config.defaults.seed if seed is None else seed,
            tolerances=config.tolerances,
            lattice=config.lattice.spec(**overrides),
            tol=tol,
            kind=kind,
            accelerate=config.debug.accelerate if accelerate is None else accelerate,
            threads=settings.threads,
        )
    except (HgforgeError, ValueError) as err:
        raise click.UsageError(str(err))
    report = run_suite(cfg)
    if json_path is not None:
        json_path.write_text(emit_report(report, "json"))
    if fmt == "json":
        click.echo(emit_report(report, "json"))
    else:
        for msg in render_text(report):
            click.secho(msg.content, **msg.fmt_keywords)
    sys.exit(0 if report.ok else 1)


@main.group(cls=ClickAliasedGroup, name="eval")
def evaluate():
    """Evaluate one function at one point."""


def _run(compute):
    """Call compute, turning library errors into a red message and exit status 1."""
    try:
        return compute()
    except HgforgeError as err:
        echo_error(str(err))
        sys.exit(1)


@evaluate.command()
@click.option("--b", "upper", type=COMPLEX, multiple=True, help="Upper parameter, repeatable.")
@click.option("--c", "lower", type=COMPLEX, multiple=True, help="Lower parameter, repeatable.")
@click.option("--z", type=COMPLEX, required=True, help="Argument, 'RE,IM'.")
@click.option("--terms", type=click.IntRange(min=1), help="Sum exactly this many terms.")
def pfq(upper: Sequence[complex], lower: Sequence[complex], z: complex, terms: Optional[int]):
    """Generalized hypergeometric series pFq(b; c; z) inside the unit disc."""
    result = _run(lambda: hyper_pfq(upper, lower, z, terms))
    click.echo(_format_complex(result.value))
    click.echo(f"terms: {result.terms}, next term: {abs(result.next_term):.3e}", err=True)


@evaluate.command()
@click.option(
    "--params",
    "params_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="JSON parameter file as written by sample-params.",
)
@click.option("--point", type=click.Choice(["0", "inf"]), default="0", show_default=True)
@click.option("--i", "index", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--z", type=COMPLEX, required=True, help="Argument, 'RE,IM'.")
@click.option("--order", type=click.IntRange(min=1), default=DEFAULT_ORDER, show_default=True)
def frobenius(params_path: Path, point: str, index: int, z: complex, order: int):
    """Components of the i-th Frobenius solution of the system at 0 or infinity.

    The parameters must have a2 = 0.
    """
    try:
        E = exponent_set_from_json(json.loads(params_path.read_text()))
    except (KeyError, TypeError, ValueError) as err:
        echo_error(f"Could not read parameters from {params_path}: {err}")
        sys.exit(1)
    if index > E.m:
        raise click.BadParameter(f"Expected at most {E.m}, got {index}.", param_hint="--i")
    solution = _run(lambda: mhgs_frobenius(E, BasePoint(point), index - 1, order))
    for component in _run(lambda: solution.evaluate(z)):
        click.echo(_format_complex(complex(component)))


@evaluate.command(name="inv-sn")
@click.option("--z", type=COMPLEX, required=True, help="Argument, 'RE,IM'.")
@click.option("--omega2", type=COMPLEX, help="Second lattice generator, 'RE,IM'.")
@click.option(
    "--lattice-sum",
    is_flag=True,
    help="Use the alternating double lattice sum instead of the cosecant series.",
)
@click.pass_obj
def inv_sn_command(settings, z: complex, omega2: Optional[complex], lattice_sum: bool):
    """1/sn(z) for the configured lattice; the tail bound goes to stderr."""
    overrides = {} if omega2 is None else {"omega2": omega2}
    try:
        lattice = settings.config.lattice.spec(**overrides)
    except HgforgeError as err:
        raise click.BadParameter(str(err), param_hint="--omega2")
    if lattice_sum:
        accelerate = settings.config.debug.accelerate
        result = _run(lambda: inv_sn_lattice(z, lattice, accelerate=accelerate))
    else:
        result = _run(lambda: inv_sn(z, lattice))
    click.echo(_format_complex(result.value))
    click.echo(f"tail bound: {result.tail_bound:.3e}", err=True)


@main.command(name="sample-params", aliases=["sample"])
@click.option("--m", "m", type=click.IntRange(1, MAX_M), help="Size of the system.")
@click.option("--seed", type=click.IntRange(min=0), help="Sampling seed.")
@click.option(
    "--mode",
    type=click.Choice([mode.value for mode in SamplingMode]),
    default=SamplingMode.REAL01.value,
    show_default=True,
)
@click.option(
    "--json",
    "json_path",
    type=click.Path(dir_okay=False, writable=True, path_type=Path),
    help="Write the parameter file here instead of stdout.",
)
@click.pass_obj
def sample_params(settings, m, seed, mode, json_path):
    """Draw a generic exponent set and print it as a JSON parameter file."""
    defaults, tolerances = settings.config.defaults, settings.config.tolerances
    E = _run(
        lambda: sample_parameters(
            defaults.m if m is None else m,
            defaults.seed if seed is None else seed,
            SamplingMode(mode),
            delta_sep=tolerances.delta_sep,
            eps_int=tolerances.eps_int,
        )
    )
    content = json.dumps(exponent_set_to_json(E), indent=2)
    if json_path is None:
        click.echo(content)
        return
    json_path.write_text(content)
    echo_success(f"Wrote parameters to {json_path}.")
