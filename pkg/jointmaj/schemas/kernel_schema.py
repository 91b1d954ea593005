from pydantic import BaseModel, model_validator

from jointmaj.core.transport import TransportKernel
from jointmaj.schemas.measure_schema import MeasureSchema


class KernelSchema(BaseModel):
    mu: MeasureSchema
    nu: MeasureSchema
    K: list[list[float]]

    @model_validator(mode="after")
    def check_shape(self):
        rows, cols = len(self.mu.atoms), len(self.nu.atoms)
        if len(self.K) != rows or any(len(row) != cols for row in self.K):
            raise ValueError(f"K must be {rows}x{cols}")
        return self

    def to_domain(self) -> TransportKernel:
        return TransportKernel(self.mu.to_domain(), self.nu.to_domain(), self.K)

    @classmethod
    def from_domain(cls, kernel: TransportKernel) -> "KernelSchema":
        return cls(
            mu=MeasureSchema.from_domain(kernel.mu),
            nu=MeasureSchema.from_domain(kernel.nu),
            K=(kernel.K + 0.0).tolist(),
        )


class CheckResult(BaseModel):
    majorized: bool
    kernel: KernelSchema | None = None
    residuals: dict[str, float] | None = None
