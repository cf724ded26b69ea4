"""Sparse hierarchical coefficient storage"""
from enum import Enum
from typing import Iterator, Tuple

import numpy as np

from mra.index import ElementKey, key_from_indices
from mra.space import AdaptiveSpace, KeyLike


class BasisFamily(str, Enum):
    ALPERT = "alpert"
    INTERPOLATORY = "interpolatory"


class HierCoeffField:
    """Dense (degree+1)^d coefficient block per active element.

    `coeffs` has shape (elements, degree+1, ..., degree+1) with rows in the
    order of `space.indices`.
    """

    def __init__(self, space: AdaptiveSpace, coeffs: np.ndarray, degree: int,
                 family: BasisFamily = BasisFamily.ALPERT):
        block = (degree + 1,) * space.dim
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if coeffs.shape != (space.size,) + block:
            raise ValueError(f"Coefficient array of shape {coeffs.shape} does not match "
                             f"{space.size} elements with blocks {block}")
        self.space = space
        self.coeffs = coeffs
        self.degree = degree
        self.family = BasisFamily(family)

    @classmethod
    def zeros(cls, space: AdaptiveSpace, degree: int,
              family: BasisFamily = BasisFamily.ALPERT) -> "HierCoeffField":
        return cls(space, np.zeros((space.size,) + (degree + 1,) * space.dim), degree, family)

    def __repr__(self) -> str:
        return (f"HierCoeffField({self.family.value}, degree={self.degree}, "
                f"elements={self.space.size}, dim={self.space.dim})")

    @property
    def dof(self) -> int:
        return self.coeffs.size

    def block(self, key: KeyLike) -> np.ndarray:
        return self.coeffs[self.space.row_of(key)]

    def blocks(self) -> Iterator[Tuple[ElementKey, np.ndarray]]:
        for row, indices in enumerate(self.space.indices):
            yield key_from_indices(indices), self.coeffs[row]

    def copy(self) -> "HierCoeffField":
        return HierCoeffField(self.space, self.coeffs.copy(), self.degree, self.family)

    def with_coeffs(self, coeffs: np.ndarray) -> "HierCoeffField":
        return HierCoeffField(self.space, coeffs, self.degree, self.family)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.coeffs).all())

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.coeffs ** 2)))

    def block_norms(self) -> np.ndarray:
        return np.sqrt(np.sum(self.coeffs.reshape(self.space.size, -1) ** 2, axis=1))

    def transfer(self, space: AdaptiveSpace) -> "HierCoeffField":
        """Copy onto another space; new elements start at zero, missing ones are dropped"""
        if space.dim != self.space.dim:
            raise ValueError("Cannot transfer between spaces of different dimension")
        result = HierCoeffField.zeros(space, self.degree, self.family)
        rows = self.space.rows_of(space.indices)
        present = rows >= 0
        result.coeffs[present] = self.coeffs[rows[present]]
        return result

    # arithmetic on a shared space

    def _check_compatible(self, other: "HierCoeffField") -> None:
        if other.family != self.family or other.degree != self.degree:
            raise ValueError("Fields belong to different basis families or degrees")
        if other.space is not self.space and other.space != self.space:
            raise ValueError("Fields live on different spaces")

    def __add__(self, other: "HierCoeffField") -> "HierCoeffField":
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "HierCoeffField") -> "HierCoeffField":
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "HierCoeffField":
        return self.with_coeffs(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "HierCoeffField":
        return self.with_coeffs(-self.coeffs)


def inner_product(u: HierCoeffField, v: HierCoeffField) -> float:
    """L2 inner product of two Alpert expansions (Euclidean over shared keys)"""
    if u.family != BasisFamily.ALPERT or v.family != BasisFamily.ALPERT:
        raise ValueError("Inner product is defined for Alpert fields only")
    if u.degree != v.degree or u.space.dim != v.space.dim:
        raise ValueError("Fields differ in degree or dimension")
    rows = v.space.rows_of(u.space.indices)
    shared = np.flatnonzero(rows >= 0)
    if not shared.size:
        return 0.0
    lhs = u.coeffs[shared].reshape(shared.size, -1)
    rhs = v.coeffs[rows[shared]].reshape(shared.size, -1)
    return float(np.sum(np.einsum('ij,ij->i', lhs, rhs)))
