import click

from jointmaj.commands.loaders import load
from jointmaj.core.localform import build_partition_scheme, diffuse_refinement, refine_atom
from jointmaj.schemas.measure_schema import HybridMeasureSchema, MeasureSchema, PiecewiseUniformSchema
from jointmaj.schemas.scheme_schema import SchemeSchema
from jointmaj.utils.io import emit


@click.command("refine")
@click.argument("measure_file", type=click.Path(dir_okay=False))
@click.option("--atom", type=int, default=None, help="Refine only this atom (0-based).")
@click.option("--alpha", type=float, default=None)
@click.option("--beta", type=float, default=None)
def refine(measure_file: str, atom: int | None, alpha: float | None, beta: float | None):
    """
    Replace atoms by uniform densities: one atom onto [alpha, beta], or
    every atom i onto its own interval near 1.
    """
    mu = load(measure_file, MeasureSchema).to_domain()
    if atom is None:
        emit(HybridMeasureSchema.from_domain(diffuse_refinement(mu)))
        return
    if alpha is None or beta is None:
        raise click.UsageError("--atom needs --alpha and --beta")
    emit(HybridMeasureSchema.from_domain(refine_atom(mu, atom, alpha, beta)))


@click.command("scheme")
@click.argument("density_file", type=click.Path(dir_okay=False))
@click.option("--r", "r", type=int, required=True, help="Resolution.")
@click.option("--m", "m", type=int, default=None, help="Cells per partition; prescribed when omitted.")
def scheme(density_file: str, r: int, m: int | None):
    """Equal-mass partition scheme of a piecewise-uniform density."""
    mu = load(density_file, PiecewiseUniformSchema).to_domain()
    emit(SchemeSchema.from_domain(build_partition_scheme(mu, r, m)))
