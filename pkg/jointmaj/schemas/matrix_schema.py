from typing import Optional

import numpy as np
from pydantic import BaseModel, model_validator

from jointmaj.core.speclin import CommutingFamily, HermitianMatrix, ProjectionPartition


# ---------------------------------------------------------
# MATRIX
# ---------------------------------------------------------
class MatrixSchema(BaseModel):
    d: int
    re: list[list[float]]
    im: Optional[list[list[float]]] = None

    @model_validator(mode="after")
    def check_shape(self):
        for name, rows in (("re", self.re), ("im", self.im)):
            if rows is None:
                continue
            if len(rows) != self.d or any(len(row) != self.d for row in rows):
                raise ValueError(f"{name} must be {self.d}x{self.d}")
        return self

    def to_array(self) -> np.ndarray:
        a = np.array(self.re, dtype=complex)
        if self.im is not None:
            a += 1j * np.array(self.im, dtype=float)
        return a

    def to_domain(self) -> HermitianMatrix:
        return HermitianMatrix(self.to_array())

    @classmethod
    def from_array(cls, a) -> "MatrixSchema":
        a = a.data if isinstance(a, HermitianMatrix) else np.asarray(a, dtype=complex)
        # negative zero would make otherwise equal reports differ
        return cls(d=a.shape[0], re=(a.real + 0.0).tolist(), im=(a.imag + 0.0).tolist())


# ---------------------------------------------------------
# FAMILY
# ---------------------------------------------------------
class FamilySchema(BaseModel):
    n: int
    members: list[MatrixSchema]

    @model_validator(mode="after")
    def check_count(self):
        if len(self.members) != self.n:
            raise ValueError(f"expected {self.n} members, got {len(self.members)}")
        return self

    def to_domain(self) -> CommutingFamily:
        return CommutingFamily([m.to_domain() for m in self.members])

    @classmethod
    def from_domain(cls, fam: CommutingFamily) -> "FamilySchema":
        return cls(n=fam.n, members=[MatrixSchema.from_array(m) for m in fam.members])


# ---------------------------------------------------------
# PARTITION
# ---------------------------------------------------------
class PartitionSchema(BaseModel):
    """Either explicit projection blocks or groups of coordinate indices."""

    d: int
    blocks: Optional[list[MatrixSchema]] = None
    groups: Optional[list[list[int]]] = None

    @model_validator(mode="after")
    def check_one_form(self):
        if (self.blocks is None) == (self.groups is None):
            raise ValueError("give exactly one of 'blocks' or 'groups'")
        return self

    def to_domain(self) -> ProjectionPartition:
        if self.groups is not None:
            return ProjectionPartition.coordinate(self.d, self.groups)
        return ProjectionPartition([b.to_array() for b in self.blocks])

    @classmethod
    def from_domain(cls, part: ProjectionPartition) -> "PartitionSchema":
        return cls(d=part.d, blocks=[MatrixSchema.from_array(b) for b in part.blocks])
