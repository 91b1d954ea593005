import click

from jointmaj.commands.loaders import load
from jointmaj.core.speclin import pinch as pinch_family
from jointmaj.schemas.matrix_schema import FamilySchema, PartitionSchema
from jointmaj.utils.io import emit


@click.command("pinch")
@click.argument("family_file", type=click.Path(dir_okay=False))
@click.argument("partition_file", type=click.Path(dir_okay=False))
def pinch(family_file: str, partition_file: str):
    """Apply the conditional expectation of a projection partition."""
    fam = load(family_file, FamilySchema).to_domain()
    part = load(partition_file, PartitionSchema).to_domain()
    emit(FamilySchema.from_domain(pinch_family(fam, part)))
