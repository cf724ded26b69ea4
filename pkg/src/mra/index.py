"""Dyadic index arithmetic for hierarchical elements.

Each 1D detail element (l, j) is stored as a single heap-style index:
0 for the level-0 element and 2^(l-1) + j for l >= 1, so the indices of
levels 0..N fill [0, 2^N). A d-dimensional element is a tuple of d such
indices; packed into one integer it serves as a hash key.
"""
from typing import Iterable, List, NamedTuple, Optional, Tuple

import numpy as np


class ElementKey(NamedTuple):
    """Level and translation vectors of one tensor detail element"""
    l: Tuple[int, ...]
    j: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.l)

    def level_sum(self) -> int:
        return sum(self.l)

    def level_max(self) -> int:
        return max(self.l) if self.l else 0


def level_of(index: int) -> int:
    return 0 if index == 0 else int(index).bit_length()


def translation_of(index: int) -> int:
    if index == 0:
        return 0
    return int(index) - (1 << (level_of(index) - 1))


def index_of(level: int, translation: int) -> int:
    """Heap index of the 1D element (level, translation)"""
    if level < 0:
        raise ValueError(f"Negative level {level}")
    upper = max((1 << (level - 1)) - 1, 0) if level > 0 else 0
    if not 0 <= translation <= upper:
        raise ValueError(f"Translation {translation} outside [0, {upper}] at level {level}")
    return 0 if level == 0 else (1 << (level - 1)) + translation


def parent_index(index: int) -> Optional[int]:
    if index == 0:
        return None
    if index == 1:
        return 0
    return index // 2


def child_indices(index: int) -> List[int]:
    if index == 0:
        return [1]
    return [2 * index, 2 * index + 1]


def ancestors(index: int) -> List[int]:
    """Strict ancestors, nearest first"""
    chain = []
    parent = parent_index(index)
    while parent is not None:
        chain.append(parent)
        parent = parent_index(parent)
    return chain


def levels_array(indices: np.ndarray) -> np.ndarray:
    """Vectorized level_of over an integer array"""
    indices = np.asarray(indices, dtype=np.int64)
    levels = np.zeros(indices.shape, dtype=np.int64)
    positive = indices > 0
    levels[positive] = np.frexp(indices[positive].astype(np.float64))[1]
    return levels


def translations_array(indices: np.ndarray) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    levels = levels_array(indices)
    offsets = np.where(levels > 0, np.left_shift(1, np.maximum(levels - 1, 0)), 0)
    return indices - offsets


def ancestor_mask(n_cells: int) -> np.ndarray:
    """mask[a, e] is True when e is an ancestor of a or a itself"""
    mask = np.zeros((n_cells, n_cells), dtype=bool)
    for a in range(n_cells):
        mask[a, a] = True
        for e in ancestors(a):
            mask[a, e] = True
    return mask


def key_from_indices(indices: Iterable[int]) -> ElementKey:
    indices = [int(i) for i in indices]
    return ElementKey(tuple(level_of(i) for i in indices),
                      tuple(translation_of(i) for i in indices))


def indices_from_key(key: ElementKey) -> Tuple[int, ...]:
    if len(key.l) != len(key.j):
        raise ValueError(f"Level and translation vectors differ in length: {key}")
    return tuple(index_of(l, j) for l, j in zip(key.l, key.j))


def pack(indices: np.ndarray, bits: int) -> np.ndarray:
    """Pack rows of per-dimension indices into int64 keys"""
    indices = np.atleast_2d(np.asarray(indices, dtype=np.int64))
    if bits * indices.shape[1] > 62:
        raise ValueError(f"Cannot pack {indices.shape[1]} dimensions with {bits} bits each")
    packed = np.zeros(indices.shape[0], dtype=np.int64)
    for axis in range(indices.shape[1]):
        packed |= np.left_shift(indices[:, axis], bits * axis)
    return packed


def children(key: ElementKey, axis: int, max_level: int) -> List[ElementKey]:
    """Elements one level finer along `axis` whose supports meet that of `key`"""
    if not 0 <= axis < key.dim:
        raise IndexError(f"Axis {axis} out of range for dimension {key.dim}")
    if key.l[axis] + 1 > max_level:
        return []
    base = list(indices_from_key(key))
    result = []
    for child in child_indices(base[axis]):
        refined = list(base)
        refined[axis] = child
        result.append(key_from_indices(refined))
    return result


def parents(key: ElementKey) -> List[ElementKey]:
    """Parents along every dimension with a positive level"""
    base = list(indices_from_key(key))
    result = []
    for axis, index in enumerate(base):
        parent = parent_index(index)
        if parent is not None:
            coarse = list(base)
            coarse[axis] = parent
            result.append(key_from_indices(coarse))
    return result
