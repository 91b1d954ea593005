from pydantic import BaseModel

from jointmaj.core.birkhoff import BirkhoffDecomposition, DoublyStochasticMatrix


class DSMatrixSchema(BaseModel):
    D: list[list[float]]

    def to_domain(self) -> DoublyStochasticMatrix:
        return DoublyStochasticMatrix(self.D)


class BirkhoffTermSchema(BaseModel):
    eta: float
    sigma: list[int]  # images, 1-indexed


class BirkhoffSchema(BaseModel):
    terms: list[BirkhoffTermSchema]
    residual: float | None = None

    @classmethod
    def from_domain(cls, dec: BirkhoffDecomposition, residual: float | None = None) -> "BirkhoffSchema":
        return cls(
            terms=[BirkhoffTermSchema(eta=eta, sigma=[j + 1 for j in sigma]) for eta, sigma in dec.terms],
            residual=residual,
        )
