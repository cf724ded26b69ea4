"""Active element sets with hierarchical completeness"""
import itertools
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Union

import numpy as np

from mra.index import (
    ElementKey,
    child_indices,
    indices_from_key,
    key_from_indices,
    levels_array,
    pack,
    parent_index,
    translations_array,
)

KeyLike = Union[ElementKey, Sequence[int]]


class AdaptiveSpace:
    """Sorted set of active elements, each stored as a row of 1D heap indices.

    Rows are kept in lexicographic order of the index tuples, which fixes the
    summation order of every operation built on top of the space.
    """

    def __init__(self, dim: int, max_level: int, indices: Optional[np.ndarray] = None):
        if dim < 1:
            raise ValueError(f"Dimension must be positive, got {dim}")
        if max_level < 0:
            raise ValueError(f"Maximum level must be nonnegative, got {max_level}")
        self.dim = dim
        self.max_level = max_level
        self.bits = max(max_level, 1)

        if indices is None:
            indices = np.zeros((1, dim), dtype=np.int64)
        indices = np.asarray(indices, dtype=np.int64).reshape(-1, dim)
        if indices.size and (indices.min() < 0 or indices.max() >= (1 << max_level)):
            raise ValueError(f"Element index outside the level range 0..{max_level}")

        indices = np.unique(indices, axis=0)
        order = np.lexsort(indices.T[::-1])
        self.indices = indices[order]
        self.indices.setflags(write=False)
        self._packed = pack(self.indices, self.bits)
        self._rows: Dict[int, int] = {int(key): row for row, key in enumerate(self._packed)}

    # construction

    @classmethod
    def root(cls, dim: int, max_level: int) -> "AdaptiveSpace":
        return cls(dim, max_level)

    @classmethod
    def full_grid(cls, dim: int, level: int) -> "AdaptiveSpace":
        """All elements with |l|_inf <= level"""
        return cls(dim, level, cls._levelled_indices(dim, level, lambda levels: max(levels) <= level))

    @classmethod
    def sparse_grid(cls, dim: int, level: int) -> "AdaptiveSpace":
        """All elements with |l|_1 <= level"""
        return cls(dim, level, cls._levelled_indices(dim, level, lambda levels: sum(levels) <= level))

    @staticmethod
    def _levelled_indices(dim: int, level: int, accept) -> np.ndarray:
        per_level = [np.array([0])] + [np.arange(1 << (l - 1), 1 << l) for l in range(1, level + 1)]
        blocks = []
        for levels in itertools.product(range(level + 1), repeat=dim):
            if not accept(levels):
                continue
            grids = np.meshgrid(*[per_level[l] for l in levels], indexing='ij')
            blocks.append(np.stack([g.ravel() for g in grids], axis=1))
        return np.concatenate(blocks, axis=0)

    # queries

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[ElementKey]:
        return iter(self.keys())

    def __eq__(self, other) -> bool:
        if not isinstance(other, AdaptiveSpace):
            return NotImplemented
        return (self.dim == other.dim and self.max_level == other.max_level
                and np.array_equal(self.indices, other.indices))

    def __repr__(self) -> str:
        return f"AdaptiveSpace(dim={self.dim}, max_level={self.max_level}, elements={self.size})"

    def keys(self) -> List[ElementKey]:
        return [key_from_indices(row) for row in self.indices]

    @property
    def levels(self) -> np.ndarray:
        return levels_array(self.indices)

    @property
    def translations(self) -> np.ndarray:
        return translations_array(self.indices)

    def finest_level(self) -> int:
        """Largest |l|_inf over the active elements"""
        return int(self.levels.max()) if self.size else 0

    def dof(self, degree: int) -> int:
        return self.size * (degree + 1) ** self.dim

    def _as_indices(self, key: KeyLike) -> tuple:
        if isinstance(key, ElementKey):
            return indices_from_key(key)
        return tuple(int(i) for i in key)

    def row_of(self, key: KeyLike) -> int:
        indices = self._as_indices(key)
        if len(indices) != self.dim:
            raise ValueError(f"Key {key} does not have dimension {self.dim}")
        packed = int(pack(np.array([indices]), self.bits)[0]) if max(indices) < (1 << self.bits) else -1
        try:
            return self._rows[packed]
        except KeyError:
            raise KeyError(f"Element {key} is not active") from None

    def __contains__(self, key: KeyLike) -> bool:
        try:
            self.row_of(key)
            return True
        except (KeyError, ValueError):
            return False

    def rows_of(self, indices: np.ndarray) -> np.ndarray:
        """Row numbers of index rows, -1 for inactive ones"""
        indices = np.asarray(indices, dtype=np.int64).reshape(-1, self.dim)
        result = np.full(indices.shape[0], -1, dtype=np.int64)
        if not indices.size:
            return result
        in_range = (indices < (1 << self.bits)).all(axis=1)
        packed = pack(indices[in_range], self.bits)
        result[in_range] = [self._rows.get(int(p), -1) for p in packed]
        return result

    # hierarchy

    def parent_rows(self) -> List[np.ndarray]:
        """Per axis, the parent index rows of every element (root axes map to themselves)"""
        result = []
        for axis in range(self.dim):
            parents = self.indices.copy()
            column = parents[:, axis]
            parents[:, axis] = np.where(column >= 2, column // 2, 0)
            result.append(parents)
        return result

    def is_complete(self) -> bool:
        """Every parent of every active element is active and the root is present"""
        if self.rows_of(np.zeros((1, self.dim)))[0] < 0:
            return False
        return all((self.rows_of(parents) >= 0).all() for parents in self.parent_rows())

    def child_mask(self) -> np.ndarray:
        """True for elements that have at least one active child"""
        has_child = np.zeros(self.size, dtype=bool)
        for axis, parents in enumerate(self.parent_rows()):
            moved = self.indices[:, axis] > 0
            rows = self.rows_of(parents[moved])
            has_child[rows[rows >= 0]] = True
        return has_child

    def leaf_mask(self) -> np.ndarray:
        return ~self.child_mask()

    # modification (returns new spaces)

    def with_elements(self, indices: Iterable) -> "AdaptiveSpace":
        """Union with the given index rows and all their ancestors"""
        extra = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices,
                           dtype=np.int64).reshape(-1, self.dim)
        merged = np.concatenate([self.indices, extra], axis=0)
        return AdaptiveSpace(self.dim, self.max_level, _close_under_parents(merged))

    def without_rows(self, rows: np.ndarray) -> "AdaptiveSpace":
        keep = np.ones(self.size, dtype=bool)
        keep[np.asarray(rows, dtype=np.int64)] = False
        return AdaptiveSpace(self.dim, self.max_level, self.indices[keep])

    def children_indices(self, rows: np.ndarray) -> np.ndarray:
        """Index rows of all children, in every dimension, of the given elements"""
        blocks = []
        for row in np.asarray(rows, dtype=np.int64):
            base = self.indices[row]
            for axis in range(self.dim):
                for child in child_indices(int(base[axis])):
                    if child >= (1 << self.max_level):
                        continue
                    refined = base.copy()
                    refined[axis] = child
                    blocks.append(refined)
        if not blocks:
            return np.zeros((0, self.dim), dtype=np.int64)
        return np.stack(blocks)


def _close_under_parents(indices: np.ndarray) -> np.ndarray:
    """Add every ancestor needed for hierarchical completeness"""
    known = {tuple(row) for row in indices.tolist()}
    pending = list(known)
    while pending:
        row = pending.pop()
        for axis, index in enumerate(row):
            parent = parent_index(index)
            if parent is None:
                continue
            coarse = row[:axis] + (parent,) + row[axis + 1:]
            if coarse not in known:
                known.add(coarse)
                pending.append(coarse)
    dim = indices.shape[1]
    known.add((0,) * dim)
    return np.array(sorted(known), dtype=np.int64).reshape(-1, dim)
