"""cli for the reactivity checker.

Usage:

    python -m reactivity_checker solve threeway
    python -m reactivity_checker check threeway threeway-decomposition-bad

Models and certificates are given as file paths or as names of bundled
fixtures. Use

    python -m reactivity_checker fixtures

to list the bundled fixtures and chain families.
"""

from __future__ import annotations

import functools
import json
import pathlib
import sys
from fractions import Fraction
from typing import Any, Callable, Optional, TypeVar

import click

import reactivity_checker
from reactivity_checker._common.reactivity_common import (
    BadParameter,
    ReactivityError,
    configure_logging,
    eprint,
    format_number,
    parse_fraction,
    sort_states,
)
from reactivity_checker.approx import simulation, truncation
from reactivity_checker.certificates.checks import Window
from reactivity_checker.certificates.functions import (
    builtin_value_function,
    casino_return_probability,
)
from reactivity_checker.chain import families
from reactivity_checker.chain.markov import dirac
from reactivity_checker.io import model_format
from reactivity_checker.omega.product import product as product_chain
from reactivity_checker.oracle import exact
from reactivity_checker.synthesis import regions as synthesis
from reactivity_checker.tools import convert_report

F = TypeVar("F", bound=Callable[..., Any])


def _reports_errors(command: F) -> F:
    """Turn a ReactivityError into a one-line diagnostic and exit code 2."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except ReactivityError as err:
            eprint(f"error: {err}")
            sys.exit(2)

    return wrapper  # type: ignore[return-value]


def _read_document(reference: str) -> str:
    path = pathlib.Path(reference)
    if not path.is_file():
        path = reactivity_checker.model_path(reference)
    return path.read_text(encoding="utf-8")


def _load_model(reference: str) -> model_format.Model:
    return model_format.load_model(_read_document(reference))


def _parse_grid(text: Optional[str]) -> Optional[list[Fraction]]:
    if text is None:
        return None
    return [parse_fraction(part.strip()) for part in text.split(",") if part.strip()]


@click.group()
@click.option("--verbose", is_flag=True, help="Log debug messages to stderr.")
def cli(verbose: bool) -> None:
    configure_logging(verbose)


@cli.command()
@click.argument("model")
@click.option("--per-state", is_flag=True, help="Print the probability from every state.")
@_reports_errors
def solve(model: str, per_state: bool) -> None:
    """Print the exact probability that MODEL satisfies its Streett condition."""
    loaded = _load_model(model)
    if per_state:
        values = exact.per_state_streett(loaded.chain, loaded.condition)
        for state in sort_states(values):
            click.echo(f"{model_format.state_name(state)}\t{format_number(values[state])}")
        return
    click.echo(format_number(exact.streett_probability(loaded.chain, loaded.condition)))


@cli.command()
@click.argument("model")
@click.argument("certificate")
@click.option("--window", default=None, help="Finite window a..b for generated chains.")
@click.option("--r-grid", default=None, help="Comma separated levels r, e.g. 0,1,2.")
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["text", "json", "jsonl"]),
    default="text",
    show_default=True,
)
@_reports_errors
def check(
    model: str,
    certificate: str,
    window: Optional[str],
    r_grid: Optional[str],
    output_format: str,
) -> None:
    """Check CERTIFICATE against MODEL; exit 1 when a condition fails."""
    loaded = _load_model(model)
    document = model_format.parse_certificate(_read_document(certificate))
    report = model_format.check_certificate(
        loaded,
        document,
        window=Window.parse(window) if window is not None else None,
        r_grid=_parse_grid(r_grid),
    )
    if output_format == "json":
        click.echo(json.dumps(report.asdict(), indent=2))
    elif output_format == "jsonl":
        for entry in report.entries:
            entry.display()
    else:
        click.echo(report.render())
    sys.exit(report.exit_code)


@cli.command()
@click.argument("model")
@click.option(
    "--rule",
    type=click.Choice(["decomposition", "rule1", "rule2"]),
    default="decomposition",
    show_default=True,
)
@click.option("--threshold", default="1/2", show_default=True, help="Return-probability threshold for J.")
@click.option("--k", "k", type=int, default=None, help="Use the invariant I_k.")
@click.option("--out", type=click.File("w", encoding="utf-8"), default="-")
@_reports_errors
def synthesize(model: str, rule: str, threshold: str, k: Optional[int], out: Any) -> None:
    """Synthesize a certificate for the finite chain of MODEL."""
    loaded = _load_model(model)
    chain, cond = loaded.chain, loaded.condition
    level = parse_fraction(threshold)
    if k is not None:
        invariant = synthesis.synthesize_invariant(chain, cond, k)
    else:
        invariant = synthesis.search_invariant(chain, cond, Fraction(0), threshold=level).invariant
    if rule == "decomposition":
        absorbing = [synthesis.synthesize_absorbing(chain, invariant, a, level) for a, _ in cond]
        document = model_format.certificate_document(
            rule, loaded, invariant=invariant, absorbing=absorbing
        )
    elif rule == "rule1":
        bundle = synthesis.synthesize_rule1_bundle(chain, cond, invariant, level)
        document = model_format.certificate_document(rule, loaded, bundle=bundle)
    else:
        bundle = synthesis.synthesize_rule2_bundle(chain, cond, invariant, level)
        document = model_format.certificate_document(rule, loaded, bundle=bundle)
    out.write(model_format.serialize_certificate(document))


@cli.command()
@click.argument("model")
@click.argument("output", type=click.File("w", encoding="utf-8"))
@_reports_errors
def product(model: str, output: Any) -> None:
    """Write the product of MODEL's chain and automaton to OUTPUT as a model."""
    loaded = _load_model(model)
    if loaded.automaton is None:
        raise BadParameter(f"{model} has no automaton section")
    chain, cond = product_chain(loaded.chain, loaded.automaton)
    named = {}
    for a, b in cond:
        named[a.name] = a
        named[b.name] = b
    document = model_format.document_from_chain(
        chain,
        named,
        [(a.name, b.name) for a, b in cond],
        description=f"product of {model} with its automaton",
    )
    output.write(model_format.serialize_model(document))


@cli.command()
@click.argument("family")
@click.option("--steps", type=int, required=True)
@click.option("--trajectories", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--stride", type=int, default=100, show_default=True)
@click.option("--statistic", default=None, help="Builtin state function to record.")
@click.option("--out", type=click.File("w", encoding="utf-8"), default="-")
@_reports_errors
def simulate(
    family: str,
    steps: int,
    trajectories: int,
    seed: int,
    stride: int,
    statistic: Optional[str],
    out: Any,
) -> None:
    """Simulate FAMILY, e.g. 'lending-casino(1/20)', and write the series as CSV."""
    name, parameters = families.parse_family_call(family)
    model = families.builtin(name, parameters)
    if statistic is not None:
        recorded = builtin_value_function(statistic)
    elif name == "lending-casino":
        recorded = casino_return_probability(model.chain.kernel.parameters["epsilon"], exact=False)
    else:
        raise BadParameter(f"{name} needs --statistic")
    series = simulation.simulate_return_probability(
        model.chain,
        recorded,
        steps,
        trajectories,
        seed,
        stride=stride,
        parameters={"family": family},
    )
    simulation.write_csv(series, out)


@cli.command()
@click.argument("family")
@click.option("--target", required=True, help="Name of a region of the family.")
@click.option("--window", required=True, help="Window a..b of integer states.")
@click.option("--from", "start", type=int, default=None, help="Start state instead of the initial one.")
@click.option("--exit-bound", default=None, help="Builtin upper bound on reach values outside the window.")
@_reports_errors
def bound(
    family: str,
    target: str,
    window: str,
    start: Optional[int],
    exit_bound: Optional[str],
) -> None:
    """Bracket the probability of reaching TARGET in FAMILY using a finite window."""
    model = families.builtin_from_text(family)
    interval = truncation.bounded_reach_interval(
        model.chain,
        model.region(target),
        Window.parse(window),
        initial=dirac(start) if start is not None else None,
        exit_bound=builtin_value_function(exit_bound) if exit_bound is not None else None,
    )
    click.echo(json.dumps(interval.asdict()))


@cli.command()
@click.argument("model")
@click.option("--pair", type=int, default=1, show_default=True, help="1-based Streett pair.")
@_reports_errors
def orey(model: str, pair: int) -> None:
    """Print whether A is recurrent only alongside B, and the infimum return probability."""
    loaded = _load_model(model)
    if not 1 <= pair <= len(loaded.condition):
        raise BadParameter(f"pair must lie in 1..{len(loaded.condition)}, got {pair}")
    a, b = loaded.condition[pair - 1]
    holds, infimum = exact.check_orey(loaded.chain, a, b)
    click.echo(f"{str(holds).lower()} {format_number(infimum)}")


@cli.command()
def fixtures() -> None:
    """List bundled models, certificates and chain families."""
    for name, path in sorted(reactivity_checker.available_models().items()):
        click.echo(f"{name}\t{path.name}")
    for name in families.available_families():
        family = families.FAMILIES[name]
        args = ", ".join(family.parameters)
        click.echo(f"family {name}({args})\t{family.description}")


@cli.command()
@click.argument("input", type=click.File("r", encoding="utf-8"))
@click.argument("output", type=click.File("w", encoding="utf-8"))
@_reports_errors
def to_document(input: Any, output: Any) -> None:
    """Convert check entries in JSON lines (INPUT) to a report document (OUTPUT)."""
    entries = convert_report.load_entries(input)
    document = convert_report.produce_document(entries)
    json.dump(document, output, indent=2)


if __name__ == "__main__":
    cli()
