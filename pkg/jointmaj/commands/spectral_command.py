import click

from jointmaj.commands.loaders import load
from jointmaj.config import settings
from jointmaj.core.speclin import approx_unitarily_equivalent, joint_spectral_measure
from jointmaj.schemas.matrix_schema import FamilySchema, MatrixSchema
from jointmaj.schemas.measure_schema import MeasureSchema
from jointmaj.utils.io import emit


@click.command("spectral")
@click.argument("family_file", type=click.Path(dir_okay=False))
@click.option("--compare", "other_file", type=click.Path(dir_okay=False), default=None,
              help="Second family; report approximate unitary equivalence instead.")
def spectral(family_file: str, other_file: str | None):
    """Joint spectral measure of a commuting family."""
    fam = load(family_file, FamilySchema).to_domain()
    if other_file is None:
        emit(MeasureSchema.from_domain(joint_spectral_measure(fam, settings.SEED)))
        return

    other = load(other_file, FamilySchema).to_domain()
    result = approx_unitarily_equivalent(fam, other, settings.SEED)
    emit({
        "equivalent": result.equivalent,
        "witness": None if result.witness is None else MatrixSchema.from_array(result.witness).model_dump(),
    })
