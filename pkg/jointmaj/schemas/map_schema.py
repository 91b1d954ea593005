from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, model_validator

from jointmaj.core.maps import IdentityMap, LinearMap, PinchingMap, UnitaryMixture
from jointmaj.core.speclin import CommutingFamily
from jointmaj.core.transport import ds_map_from_kernel
from jointmaj.errors import InputError
from jointmaj.schemas.kernel_schema import KernelSchema
from jointmaj.schemas.matrix_schema import MatrixSchema, PartitionSchema


class MapSchema(BaseModel):
    """
    A map on d x d matrices. A kernel map is rebuilt from its kernel and
    the two families it was made for.
    """

    kind: Literal["kernel", "unitary_mixture", "identity", "pinching"]
    d: Optional[int] = None
    kernel: Optional[KernelSchema] = None
    weights: Optional[list[float]] = None
    unitaries: Optional[list[MatrixSchema]] = None
    partition: Optional[PartitionSchema] = None

    @model_validator(mode="after")
    def check_fields(self):
        needed = {
            "kernel": ("kernel",),
            "unitary_mixture": ("weights", "unitaries"),
            "identity": ("d",),
            "pinching": ("partition",),
        }[self.kind]
        missing = [name for name in needed if getattr(self, name) is None]
        if missing:
            raise ValueError(f"map kind '{self.kind}' needs {', '.join(missing)}")
        return self

    def to_domain(self, famA: CommutingFamily | None = None, famB: CommutingFamily | None = None) -> LinearMap:
        if self.kind == "identity":
            return IdentityMap(self.d)
        if self.kind == "pinching":
            return PinchingMap(self.partition.to_domain())
        if self.kind == "unitary_mixture":
            return UnitaryMixture(self.weights, np.array([u.to_array() for u in self.unitaries]))
        if famA is None or famB is None:
            raise InputError("a kernel map needs both families")
        return ds_map_from_kernel(self.kernel.to_domain(), famA, famB)

    @classmethod
    def from_mixture(cls, rho: UnitaryMixture) -> "MapSchema":
        return cls(
            kind="unitary_mixture",
            d=rho.d,
            weights=rho.weights.tolist(),
            unitaries=[MatrixSchema.from_array(u) for u in rho.unitaries],
        )
