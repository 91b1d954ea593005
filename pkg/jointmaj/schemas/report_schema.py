from typing import Literal, Optional

from pydantic import BaseModel, Field, PositiveFloat

from jointmaj.config import Settings


# ---------------------------------------------------------
# RUN CONFIG
# ---------------------------------------------------------
class RunConfig(BaseModel):
    seed: int
    tol_lp: Optional[PositiveFloat] = None
    tol_fc: Optional[PositiveFloat] = None
    tol_recon: Optional[PositiveFloat] = None
    cap_d: Optional[int] = Field(default=None, ge=2)
    out: Optional[str] = None
    log_level: Optional[str] = None

    def apply(self, settings: Settings) -> None:
        """Write the overrides onto the shared settings object; unset flags restore the defaults."""
        defaults = Settings()
        settings.SEED = self.seed
        settings.TOL_LP = defaults.TOL_LP if self.tol_lp is None else self.tol_lp
        settings.TOL_FC = defaults.TOL_FC if self.tol_fc is None else self.tol_fc
        settings.TOL_RECON = defaults.TOL_RECON if self.tol_recon is None else self.tol_recon
        settings.CAP_D = defaults.CAP_D if self.cap_d is None else self.cap_d
        settings.OUT = defaults.OUT if self.out is None else self.out
        settings.LOG_LEVEL = defaults.LOG_LEVEL if self.log_level is None else self.log_level


# ---------------------------------------------------------
# VERIFICATION REPORT
# ---------------------------------------------------------
class VerificationRecord(BaseModel):
    digest: str
    kind: str
    n: int
    d: int
    lp_feasible: bool
    battery_pass: bool
    oracle_1d: Optional[bool] = None
    roundtrip_residual: Optional[float] = None
    agreement: bool
    status: Literal["ok", "disagreement", "battery_incomplete"]
    seconds: Optional[float] = None
    # full inputs, only for records needing triage
    famA: Optional[dict] = None
    famB: Optional[dict] = None


class SuiteSummary(BaseModel):
    instances: int = 0
    feasible: int = 0
    disagreements: int = 0
    battery_incomplete: int = 0


class VerificationReport(BaseModel):
    tool: str
    version: str
    generator: dict
    parameters: dict
    summary: SuiteSummary
    records: list[VerificationRecord]
