import click

from jointmaj.commands.loaders import load
from jointmaj.core.transport import decide_majorization
from jointmaj.errors import NotMajorizedError
from jointmaj.schemas.kernel_schema import CheckResult, KernelSchema
from jointmaj.schemas.measure_schema import MeasureSchema
from jointmaj.utils.io import emit


# --------------------------------------------------
# DECIDE mu ≺ nu
# --------------------------------------------------
@click.command("check")
@click.argument("mu_file", type=click.Path(dir_okay=False))
@click.argument("nu_file", type=click.Path(dir_okay=False))
def check(mu_file: str, nu_file: str):
    """Print a kernel witness if MU is majorized by NU; exit 1 otherwise."""
    mu = load(mu_file, MeasureSchema).to_domain()
    nu = load(nu_file, MeasureSchema).to_domain()

    result = decide_majorization(mu, nu)
    if not result.feasible:
        raise NotMajorizedError()

    residuals = result.witness.residuals()
    emit(
        CheckResult(
            majorized=True,
            kernel=KernelSchema.from_domain(result.witness),
            residuals=residuals._asdict(),
        )
    )
