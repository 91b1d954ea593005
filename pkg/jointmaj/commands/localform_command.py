import logging

import click

from jointmaj.commands.loaders import load
from jointmaj.config import settings
from jointmaj.core.localform import local_form_approximate
from jointmaj.schemas.map_schema import MapSchema
from jointmaj.schemas.matrix_schema import FamilySchema
from jointmaj.schemas.scheme_schema import LocalFormReport, LocalFormRun
from jointmaj.utils.io import emit
from jointmaj.utils.plotting import save_error_curve

logger = logging.getLogger(__name__)


def is_monotone(runs: list[LocalFormRun], tol: float) -> bool:
    """Worst member error does not grow as r increases, up to ``tol``."""
    ordered = sorted(runs, key=lambda run: run.r)
    worst = [max(run.errors) for run in ordered]
    return all(later <= earlier + tol for earlier, later in zip(worst, worst[1:]))


@click.command("localform")
@click.argument("map_file", type=click.Path(dir_okay=False))
@click.argument("fam_a_file", type=click.Path(dir_okay=False))
@click.argument("fam_b_file", type=click.Path(dir_okay=False))
@click.option("--r", "resolutions", type=int, multiple=True, default=(1, 2, 4), show_default=True,
              help="Resolution; repeat for an error curve.")
@click.option("--svg", "svg_path", type=click.Path(dir_okay=False), default=None,
              help="Write the error-vs-r curve here.")
@click.option("--include-rho", is_flag=True, help="Serialize every unitary of each approximation.")
def localform(map_file: str, fam_a_file: str, fam_b_file: str, resolutions: tuple[int, ...],
              svg_path: str | None, include_rho: bool):
    """Approximate T on the family b by mixtures of unitary conjugations."""
    famA = load(fam_a_file, FamilySchema).to_domain()
    famB = load(fam_b_file, FamilySchema).to_domain()
    T = load(map_file, MapSchema).to_domain(famA, famB)

    runs = []
    for r in sorted(set(resolutions)):
        result = local_form_approximate(T, famA, famB, r, settings.SEED)
        logger.info("r=%d: %d terms, max error %.3e", r, len(result.rho), max(result.errors))
        runs.append(LocalFormRun.from_domain(result, include_rho))

    if svg_path:
        save_error_curve(svg_path, [run.r for run in runs], [run.errors for run in runs], [run.bound for run in runs])

    emit(
        LocalFormReport(
            seed=settings.SEED,
            version=settings.VERSION,
            runs=runs,
            monotone=is_monotone(runs, settings.TOL_FC * max(1.0, famB.max_norm)),
        )
    )
