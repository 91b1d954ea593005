import click

from jointmaj.commands.loaders import load
from jointmaj.core.birkhoff import birkhoff_decompose
from jointmaj.schemas.birkhoff_schema import BirkhoffSchema, DSMatrixSchema
from jointmaj.utils.io import emit


@click.command("birkhoff")
@click.argument("matrix_file", type=click.Path(dir_okay=False))
def birkhoff(matrix_file: str):
    """Write a doubly stochastic matrix as a convex sum of permutations."""
    D = load(matrix_file, DSMatrixSchema).to_domain()
    dec = birkhoff_decompose(D)
    emit(BirkhoffSchema.from_domain(dec, residual=dec.residual(D)))
