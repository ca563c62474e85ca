"""Provide the ``hamsquare`` command line interface."""

import logging
from pathlib import Path

import click
from requests.exceptions import RequestException

from hamsquare import __version__
from hamsquare.campaign.records import (
    CampaignMode,
    CampaignResult,
    Outcome,
    contradictions,
    read_certificates,
    write_certificates,
)
from hamsquare.campaign.runner import (
    DEFAULT_COUNT,
    DEFAULT_SEED,
    CampaignSpec,
    SubsetPolicy,
    exit_code,
    run_campaign,
)
from hamsquare.errors import Graph6FormatError, MalformedRecordError, PreconditionError
from hamsquare.search.constructions import DEFAULT_T
from hamsquare.search.oracle import DEFAULT_TIMEOUT

_VERIFY_MODES = [
    CampaignMode.H_PROPERTY,
    CampaignMode.F_PROPERTY,
    CampaignMode.STRONG_F3,
    CampaignMode.THM3,
    CampaignMode.THM4,
]


def _report(result: CampaignResult) -> None:
    click.echo(f"mode:           {result.mode}")
    click.echo(f"seed:           {result.seed}")
    click.echo(f"corpus:         {result.corpus_digest}")
    click.echo(f"instances:      {len(result.records)}")
    for outcome, count in result.counts().items():
        click.echo(f"{outcome + ':':<16}{count}")
    click.echo(f"contradictions: {contradictions(result)}")
    click.echo(f"max elapsed:    {result.max_elapsed:.3f}s")
    unknown = result.counts()[Outcome.UNKNOWN]
    if unknown:
        click.echo(f"WARNING: {unknown} instances timed out and are undecided", err=True)


def _run(ctx: click.Context, mode: CampaignMode, **overrides: int) -> None:
    options = ctx.obj
    timeout_ms = options["timeout_ms"]
    spec = CampaignSpec(
        mode=mode,
        k=options["k"],
        corpus=options["corpus"],
        policy=SubsetPolicy.ALL if options["sample"] is None else SubsetPolicy.SAMPLE,
        sample=options["sample"] or 1,
        seed=options["seed"],
        timeout=None if timeout_ms == 0 else timeout_ms / 1000,
        jobs=options["jobs"],
        max_n=options["n"],
        biconnected_only=options["biconnected_only"],
        **overrides,
    )
    try:
        result = run_campaign(spec)
    except (PreconditionError, Graph6FormatError, OSError, RequestException) as e:
        raise click.ClickException(str(e)) from e
    if options["out"] is not None:
        write_certificates(result, Path(options["out"]))
    _report(result)
    ctx.exit(exit_code(result))


@click.group()
@click.version_option(__version__)
@click.option("--corpus", help="graph6 file, http(s) URL or 'atlas'.")
@click.option("--n", "n", type=int, default=None, help="Skip graphs with more vertices.")
@click.option("--k", type=int, default=4, show_default=True, help="Number of prescribed vertices.")
@click.option(
    "--timeout-ms",
    type=int,
    default=int(DEFAULT_TIMEOUT * 1000),
    show_default=True,
    help="Per-instance search budget; 0 disables it.",
)
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Certificate file to write.")
@click.option("--sample", type=int, default=None, help="Sample this many subsets per graph.")
@click.option("--biconnected-only", is_flag=True, help="Keep only 2-connected graphs.")
@click.option("--verbose", "-v", count=True, help="Repeat for debug output.")
@click.pass_context
def cli(ctx: click.Context, verbose: int, **options: object) -> None:
    """Certify hamiltonian cycles and paths in squares of 2-connected graphs."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    ctx.obj = options


@cli.command()
@click.option(
    "--mode",
    type=click.Choice([str(m) for m in _VERIFY_MODES]),
    default=str(CampaignMode.H_PROPERTY),
    show_default=True,
)
@click.pass_context
def verify(ctx: click.Context, mode: str) -> None:
    """Verify a hamiltonicity theorem exhaustively over a corpus."""
    _run(ctx, CampaignMode(mode))


@cli.command()
@click.option("--t", "t", type=int, default=DEFAULT_T, show_default=True, help="Added vertices.")
@click.pass_context
def counterexample(ctx: click.Context, t: int) -> None:
    """Confirm that the H_5 counterexample family has no certificate."""
    _run(ctx, CampaignMode.COUNTEREXAMPLE, t=t)


@cli.command()
@click.pass_context
def corollary(ctx: click.Context) -> None:
    """Certify G^2 hamiltonian for graphs whose block structure is a star."""
    _run(ctx, CampaignMode.COROLLARY)


@cli.command()
@click.option("--count", type=int, default=DEFAULT_COUNT, show_default=True)
@click.pass_context
def construct(ctx: click.Context, count: int) -> None:
    """Glue blockchain paths on seeded random blockchains."""
    _run(ctx, CampaignMode.BLOCKCHAIN_PATH, count=count)


@cli.command()
@click.option("--eps", is_flag=True, help="Also build an EPS-graph around each sound cycle.")
@click.pass_context
def soundness(ctx: click.Context, eps: bool) -> None:
    """Find W-sound cycles for every 5-subset W."""
    _run(ctx, CampaignMode.EPS if eps else CampaignMode.W_SOUND)


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def check(ctx: click.Context, path: str) -> None:
    """Re-validate every certified record of a certificate file."""
    try:
        result = read_certificates(Path(path))
    except MalformedRecordError as e:
        raise click.ClickException(str(e)) from e
    _report(result)
    ctx.exit(exit_code(result))
