import click

from jointmaj.commands.loaders import load
from jointmaj.core.transport import synthesize_kernel_partition
from jointmaj.schemas.kernel_schema import KernelSchema
from jointmaj.schemas.measure_schema import MeasureSchema
from jointmaj.utils.io import emit


@click.command("kernel")
@click.argument("mu_file", type=click.Path(dir_okay=False))
@click.argument("nu_file", type=click.Path(dir_okay=False))
@click.option("--cell-diameter", type=float, default=0.0, show_default=True,
              help="Atoms of MU closer than this share one row of the kernel.")
def kernel(mu_file: str, nu_file: str, cell_diameter: float):
    """Kernel witness built from a split of NU over cells of MU's support."""
    mu = load(mu_file, MeasureSchema).to_domain()
    nu = load(nu_file, MeasureSchema).to_domain()
    emit(KernelSchema.from_domain(synthesize_kernel_partition(mu, nu, cell_diameter)))
