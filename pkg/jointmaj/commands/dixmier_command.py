import click
import numpy as np

from jointmaj.commands.loaders import load
from jointmaj.core.localform import block_dixmier, dixmier_average
from jointmaj.core.speclin import trace
from jointmaj.schemas.map_schema import MapSchema
from jointmaj.schemas.matrix_schema import MatrixSchema, PartitionSchema
from jointmaj.utils.io import emit


@click.command("dixmier")
@click.argument("matrix_file", type=click.Path(dir_okay=False))
@click.option("--partition", "partition_file", type=click.Path(dir_okay=False), default=None,
              help="Average block by block instead of onto tau(b) I.")
@click.option("--include-mixture", is_flag=True, help="Also print the unitaries.")
def dixmier(matrix_file: str, partition_file: str | None, include_mixture: bool):
    """Unitary mixture averaging a Hermitian matrix onto scalars (per block)."""
    b = load(matrix_file, MatrixSchema).to_domain()
    if partition_file is None:
        mixed = dixmier_average(b)
        target = trace(b.data) * np.eye(b.d)
    else:
        part = load(partition_file, PartitionSchema).to_domain()
        mixed = block_dixmier(b, part)
        target = part.expectation(b.data)

    emit({
        "result": MatrixSchema.from_array(mixed.result).model_dump(),
        "terms": len(mixed.mixture),
        "residual": float(np.max(np.abs(mixed.result - target))),
        "mixture": MapSchema.from_mixture(mixed.mixture).model_dump() if include_mixture else None,
    })
