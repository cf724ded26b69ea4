"""Dimension-wise application of tensorized 1D operators on an active set.

A 1D table maps (cell, degree) pairs to (cell, degree) pairs, with cells
numbered by heap index. Applying it along one axis sums only over elements
that are present in the space. Full tensor operators are applied with the
lower/upper split of each 1D factor: the lower part couples a cell to its
ancestors, the upper part to its descendants, and the two are applied in
the order that keeps every intermediate result on the active set.
"""
from typing import Optional, Sequence

import numpy as np

from mra.field import BasisFamily, HierCoeffField
from mra.index import ancestor_mask, pack
from mra.space import AdaptiveSpace


class Table1D:
    """Dense 1D operator over all cells up to a maximum level"""

    def __init__(self, matrix: np.ndarray, in_width: int, out_width: int, name: str = ""):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape[1] % in_width or matrix.shape[0] % out_width:
            raise ValueError(f"Table {name!r} of shape {matrix.shape} is not blocked by "
                             f"({out_width}, {in_width})")
        if matrix.shape[0] // out_width != matrix.shape[1] // in_width:
            raise ValueError(f"Table {name!r} has different row and column cell counts")
        self.matrix = matrix
        self.in_width = in_width
        self.out_width = out_width
        self.name = name
        self._split = None

    def __repr__(self) -> str:
        return f"Table1D({self.name!r}, cells={self.n_cells}, {self.in_width}->{self.out_width})"

    @property
    def n_cells(self) -> int:
        return self.matrix.shape[1] // self.in_width

    def block(self, row_cell: int, col_cell: int) -> np.ndarray:
        q, p = self.out_width, self.in_width
        return self.matrix[row_cell * q:(row_cell + 1) * q, col_cell * p:(col_cell + 1) * p]

    def transpose(self) -> "Table1D":
        return Table1D(self.matrix.T.copy(), self.out_width, self.in_width, f"{self.name}^T")

    def restricted(self, max_level: int) -> "Table1D":
        n = 1 << max_level
        if n > self.n_cells:
            raise ValueError(f"Table {self.name!r} only covers {self.n_cells} cells")
        return Table1D(self.matrix[:n * self.out_width, :n * self.in_width],
                       self.in_width, self.out_width, self.name)

    def _split_parts(self):
        if self._split is None:
            mask = np.kron(ancestor_mask(self.n_cells), np.ones((self.out_width, self.in_width), dtype=bool))
            lower = Table1D(np.where(mask, self.matrix, 0.0), self.in_width, self.out_width, f"{self.name}/L")
            upper_matrix = np.where(mask, 0.0, self.matrix)
            upper = None
            if np.any(upper_matrix):
                upper = Table1D(upper_matrix, self.in_width, self.out_width, f"{self.name}/U")
            self._split = (lower, upper)
        return self._split

    @property
    def lower(self) -> "Table1D":
        """Entries coupling a row cell to its ancestors and itself"""
        return self._split_parts()[0]

    @property
    def upper(self) -> Optional["Table1D"]:
        """Remaining entries (row cell is a strict ancestor of the column cell), None if zero"""
        return self._split_parts()[1]


def _fibers(indices: np.ndarray, axis: int, bits: int):
    others = np.delete(indices, axis, axis=1)
    if others.shape[1] == 0:
        return np.zeros(indices.shape[0], dtype=np.int64), 1
    _, fiber = np.unique(pack(others, bits), return_inverse=True)
    fiber = fiber.reshape(-1)
    return fiber, int(fiber.max()) + 1


def apply_along_axis(table: Table1D, coeffs: np.ndarray, indices: np.ndarray, axis: int,
                     bits: int) -> np.ndarray:
    """Raw-array form of unidirectional_apply; block widths may differ per axis"""
    n, dim = indices.shape
    if not 0 <= axis < dim:
        raise IndexError(f"Axis {axis} out of range for dimension {dim}")
    if coeffs.shape[1 + axis] != table.in_width:
        raise ValueError(f"Table {table.name!r} expects width {table.in_width} along axis {axis}, "
                         f"got {coeffs.shape[1 + axis]}")
    p, q = table.in_width, table.out_width

    fiber, n_fibers = _fibers(indices, axis, bits)
    cells = indices[:, axis]
    present = np.unique(cells)
    if present[-1] >= table.n_cells:
        raise ValueError(f"Table {table.name!r} does not reach cell {present[-1]}")
    position = np.searchsorted(present, cells)

    rows = (present[:, None] * q + np.arange(q)).ravel()
    cols = (present[:, None] * p + np.arange(p)).ravel()
    sub = table.matrix[np.ix_(rows, cols)]

    moved = np.moveaxis(coeffs, 1 + axis, 1)
    rest = moved.shape[2:]
    width = int(np.prod(rest)) if rest else 1
    scattered = np.zeros((present.size, p, n_fibers, width))
    scattered[position, :, fiber, :] = moved.reshape(n, p, width)

    product = sub @ scattered.reshape(present.size * p, n_fibers * width)
    gathered = product.reshape(present.size, q, n_fibers, width)[position, :, fiber, :]
    return np.moveaxis(gathered.reshape((n, q) + rest), 1, 1 + axis)


def apply_tensor(tables: Sequence[Optional[Table1D]], coeffs: np.ndarray, indices: np.ndarray,
                 bits: int, axes: Optional[Sequence[int]] = None) -> np.ndarray:
    """Apply the tensor product of per-axis tables (None is the identity)"""
    if axes is None:
        axes = [axis for axis, table in enumerate(tables) if table is not None]
    if not axes:
        return coeffs
    axis, remaining = axes[0], list(axes[1:])
    table = tables[axis]

    result = apply_along_axis(table.lower, apply_tensor(tables, coeffs, indices, bits, remaining),
                              indices, axis, bits)
    if table.upper is not None:
        upward = apply_along_axis(table.upper, coeffs, indices, axis, bits)
        result = result + apply_tensor(tables, upward, indices, bits, remaining)
    return result


def unidirectional_apply(table: Table1D, u: HierCoeffField, space: AdaptiveSpace, axis: int,
                         family: Optional[BasisFamily] = None) -> HierCoeffField:
    """Apply a 1D table along `axis`, identity in the other dimensions"""
    if u.space is not space and u.space != space:
        raise ValueError("Field is not defined on the given space")
    if not 0 <= axis < space.dim:
        raise IndexError(f"Axis {axis} out of range for dimension {space.dim}")
    if table.in_width != table.out_width:
        raise ValueError("A single-axis application must preserve the block width")
    coeffs = apply_along_axis(table, u.coeffs, space.indices, axis, space.bits)
    return HierCoeffField(space, coeffs, u.degree, family or u.family)


def tensor_apply(tables: Sequence[Optional[Table1D]], u: HierCoeffField, space: AdaptiveSpace,
                 degree: int, family: BasisFamily) -> HierCoeffField:
    """Apply a full tensor operator, producing a field of the given degree and family"""
    if len(tables) != space.dim:
        raise ValueError(f"Expected {space.dim} tables, got {len(tables)}")
    coeffs = apply_tensor(tables, u.coeffs, space.indices, space.bits)
    return HierCoeffField(space, coeffs, degree, family)
