import click
from pydantic import BaseModel

from jointmaj.commands.loaders import load_many
from jointmaj.config import settings
from jointmaj.core.verification import run_suite
from jointmaj.schemas.matrix_schema import FamilySchema
from jointmaj.utils.io import emit


class InjectedPair(BaseModel):
    famA: FamilySchema
    famB: FamilySchema


@click.command("suite")
@click.option("--count", type=click.IntRange(min=0), default=200, show_default=True)
@click.option("--dmax", type=click.IntRange(min=2), default=12, show_default=True)
@click.option("--nmax", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--battery", type=click.IntRange(min=0), default=128, show_default=True,
              help="Random convex functions per instance, on top of the fixed ones.")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--timings", is_flag=True, help="Record wall-clock seconds per instance.")
@click.option("--inject", "inject_file", type=click.Path(dir_okay=False), default=None,
              help="JSON pair (or list of pairs) {famA, famB} checked alongside the random ones.")
def suite(count: int, dmax: int, nmax: int, battery: int, workers: int, timings: bool, inject_file: str | None):
    """Cross-check the LP, the convex battery, the 1-D oracle and the kernel map."""
    injected = []
    if inject_file:
        injected = [(p.famA.to_domain(), p.famB.to_domain()) for p in load_many(inject_file, InjectedPair)]

    emit(run_suite(count, dmax, nmax, settings.SEED, battery, workers, timings, injected))
