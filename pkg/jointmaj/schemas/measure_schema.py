from pydantic import BaseModel, model_validator

from jointmaj.core.measures import DiscreteMeasure, HybridMeasure, PiecewiseUniformMeasure


# ---------------------------------------------------------
# DISCRETE
# ---------------------------------------------------------
class AtomSchema(BaseModel):
    point: list[float]
    mass: float


class MeasureSchema(BaseModel):
    dim: int
    atoms: list[AtomSchema]

    @model_validator(mode="after")
    def check_dims(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        for atom in self.atoms:
            if len(atom.point) != self.dim:
                raise ValueError(f"atom point {atom.point} is not {self.dim}-dimensional")
        return self

    def to_domain(self) -> DiscreteMeasure:
        return DiscreteMeasure([a.point for a in self.atoms], [a.mass for a in self.atoms])

    @classmethod
    def from_domain(cls, m: DiscreteMeasure) -> "MeasureSchema":
        return cls(
            dim=m.dim,
            atoms=[AtomSchema(point=list(p), mass=w) for p, w in m.atoms],
        )


# ---------------------------------------------------------
# PIECEWISE UNIFORM
# ---------------------------------------------------------
class IntervalSchema(BaseModel):
    left: float
    right: float
    density: float


class PiecewiseUniformSchema(BaseModel):
    intervals: list[IntervalSchema]

    def to_domain(self) -> PiecewiseUniformMeasure:
        return PiecewiseUniformMeasure([(i.left, i.right, i.density) for i in self.intervals])

    @classmethod
    def from_domain(cls, m: PiecewiseUniformMeasure) -> "PiecewiseUniformSchema":
        return cls(intervals=[IntervalSchema(left=a, right=b, density=c) for a, b, c in m.intervals])


# ---------------------------------------------------------
# HYBRID (refinement output)
# ---------------------------------------------------------
class FibreSchema(BaseModel):
    point: list[float]
    density: PiecewiseUniformSchema


class HybridMeasureSchema(BaseModel):
    atoms: MeasureSchema | None = None
    fibres: list[FibreSchema] = []
    total_mass: float

    @classmethod
    def from_domain(cls, h: HybridMeasure) -> "HybridMeasureSchema":
        return cls(
            atoms=None if h.atoms is None else MeasureSchema.from_domain(h.atoms),
            fibres=[
                FibreSchema(point=list(f.point), density=PiecewiseUniformSchema.from_domain(f.density))
                for f in h.fibres
            ],
            total_mass=h.total_mass,
        )
