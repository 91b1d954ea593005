from typing import Optional

from pydantic import BaseModel

from jointmaj.core.localform import LocalFormApproximation, PartitionScheme
from jointmaj.schemas.map_schema import MapSchema


# ---------------------------------------------------------
# PARTITION SCHEME
# ---------------------------------------------------------
class SchemeSchema(BaseModel):
    r: int
    m: int
    k: int
    n1: int
    cells: list[list[list[list[float]]]]  # partition -> cell -> [left, right] pieces

    @classmethod
    def from_domain(cls, scheme: PartitionScheme) -> "SchemeSchema":
        return cls(
            r=scheme.r,
            m=scheme.m,
            k=scheme.k,
            n1=scheme.n1,
            cells=[[cell.to_list() for cell in part] for part in scheme.cells],
        )


# ---------------------------------------------------------
# LOCAL-FORM PIPELINE REPORT
# ---------------------------------------------------------
class LocalFormRun(BaseModel):
    r: int
    errors: list[float]
    bound: float
    within_bound: bool
    terms: int
    metadata: dict
    rho: Optional[MapSchema] = None

    @classmethod
    def from_domain(cls, result: LocalFormApproximation, include_rho: bool = False) -> "LocalFormRun":
        return cls(
            r=result.r,
            errors=list(result.errors),
            bound=result.bound,
            within_bound=result.within_bound,
            terms=len(result.rho),
            metadata=result.metadata,
            rho=MapSchema.from_mixture(result.rho) if include_rho else None,
        )


class LocalFormReport(BaseModel):
    seed: int
    version: str
    runs: list[LocalFormRun]
    monotone: bool
