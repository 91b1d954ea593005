import json
import logging
import sys

import click
from pydantic import ValidationError

from jointmaj.config import Settings, settings
from jointmaj.errors import JointMajError
from jointmaj.schemas.report_schema import RunConfig

# Commands
from jointmaj.commands import (
    birkhoff_command,
    check_command,
    dixmier_command,
    kernel_command,
    localform_command,
    pinch_command,
    refine_command,
    spectral_command,
    suite_command,
)

logger = logging.getLogger("jointmaj")


# -----------------------
# LOGGING (stderr only; stdout carries JSON)
# -----------------------
def configure_logging(level: str) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.handlers[:] = [handler]
    logger.setLevel(level.upper())
    logger.propagate = False


# -----------------------
# ERROR -> EXIT CODE
# -----------------------
class JointMajGroup(click.Group):
    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except JointMajError as exc:
            click.echo(json.dumps({"error": exc.detail}), err=True)
            ctx.exit(exc.exit_code)
        except ValidationError as exc:
            first = exc.errors()[0]
            where = ".".join(str(part) for part in first["loc"])
            detail = f"invalid input at {where}: {first['msg']}" if where else f"invalid input: {first['msg']}"
            click.echo(json.dumps({"error": detail}), err=True)
            ctx.exit(2)


# -----------------------
# CREATE CLI
# -----------------------
@click.group(cls=JointMajGroup)
@click.version_option(settings.VERSION, prog_name=settings.PROJECT_NAME)
@click.option("--seed", type=int, default=None, help="Seed for every random choice.")
@click.option("--tol-lp", type=float, default=None, help="LP feasibility tolerance.")
@click.option("--tol-fc", type=float, default=None, help="Functional-calculus tolerance.")
@click.option("--tol-recon", type=float, default=None, help="Birkhoff reconstruction tolerance.")
@click.option("--cap-d", type=int, default=None, help="Largest accepted matrix dimension.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the JSON result here.")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None)
def cli(seed, tol_lp, tol_fc, tol_recon, cap_d, out, log_level):
    """Joint majorization of commuting Hermitian families and discrete measures."""
    try:
        config = RunConfig(
            seed=Settings.SEED if seed is None else seed,
            tol_lp=tol_lp,
            tol_fc=tol_fc,
            tol_recon=tol_recon,
            cap_d=cap_d,
            out=out,
            log_level=log_level,
        )
    except ValidationError as exc:
        raise click.BadParameter(exc.errors()[0]["msg"]) from exc
    config.apply(settings)
    configure_logging(settings.LOG_LEVEL)
    logger.debug("settings: seed=%d tol_lp=%g cap_d=%d", settings.SEED, settings.TOL_LP, settings.CAP_D)


# -----------------------
# ROUTES
# -----------------------
cli.add_command(check_command.check)
cli.add_command(kernel_command.kernel)
cli.add_command(birkhoff_command.birkhoff)
cli.add_command(spectral_command.spectral)
cli.add_command(pinch_command.pinch)
cli.add_command(dixmier_command.dixmier)
cli.add_command(localform_command.localform)
cli.add_command(suite_command.suite)
cli.add_command(refine_command.refine)
cli.add_command(refine_command.scheme)


if __name__ == "__main__":
    cli()
