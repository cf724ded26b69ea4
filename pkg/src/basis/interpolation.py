"""Nested interface point sets and Lagrange interpolatory multiwavelets.

The coarse set X_0 holds the equispaced abscissae i/M of [0, 1]. A point
carries the side of the cell it belongs to: cell left endpoints are RIGHT
traces, every other point is a LEFT trace, so an abscissa shared by two
cells appears once per cell. X_1 is X_0 mapped to both halves of [0, 1],
and the detail points are X_1 minus X_0.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Tuple

import numpy as np
from scipy import linalg

from basis.hierarchy import LEFT, RIGHT, HierarchicalBasis1D, PiecewisePolynomial
from mra.index import level_of, translation_of

logger = logging.getLogger(__name__)

MAX_INTERP_DEGREE = 5

Point = Tuple[Fraction, int]


def _cell_points(M: int, origin: Fraction, width: Fraction) -> List[Point]:
    points = [(origin, RIGHT)]
    points += [(origin + width * Fraction(i, M), LEFT) for i in range(1, M + 1)]
    return points


@dataclass(frozen=True)
class InterpPointSet1D:
    """Coarse points X_0 and detail points of the first refinement"""
    M: int
    coarse: Tuple[Point, ...]
    detail: Tuple[Point, ...]
    family: str = "interface"

    def level_points(self, level: int) -> List[Point]:
        """X_level as the per-cell multiset of (abscissa, side) pairs"""
        width = Fraction(1, 1 << level)
        points = []
        for cell in range(1 << level):
            points += _cell_points(self.M, cell * width, width)
        return points

    @staticmethod
    def as_arrays(points) -> Tuple[np.ndarray, np.ndarray]:
        x = np.array([float(p) for p, _ in points], dtype=np.float64)
        sides = np.array([side for _, side in points], dtype=np.int64)
        return x, sides


@lru_cache(maxsize=None)
def build_interface_points(M: int) -> InterpPointSet1D:
    if not 1 <= M <= MAX_INTERP_DEGREE:
        raise ValueError(f"Unsupported interpolation degree M={M}; supported range is 1..{MAX_INTERP_DEGREE}")
    coarse = _cell_points(M, Fraction(0), Fraction(1))
    fine = _cell_points(M, Fraction(0), Fraction(1, 2)) + _cell_points(M, Fraction(1, 2), Fraction(1, 2))
    known = set(coarse)
    detail = sorted(p for p in fine if p not in known)
    if len(detail) != M + 1:
        raise RuntimeError(f"Point family for M={M} is not nested")
    return InterpPointSet1D(M, tuple(coarse), tuple(detail))


class InterpWavelets1D(HierarchicalBasis1D):
    """Lagrange scaling functions on X_0 and wavelets vanishing on X_0.

    Wavelets are not rescaled across levels: psi of element (n, j) equals
    the mother wavelet composed with the affine map of its support.
    """

    def __init__(self, points: InterpPointSet1D):
        self.points = points
        M = points.M
        x0, _ = InterpPointSet1D.as_arrays(points.coarse)

        vandermonde = np.vander(x0, M + 1, increasing=True)
        lagrange = linalg.solve(vandermonde, np.eye(M + 1))
        scaling = [PiecewisePolynomial.smooth(lagrange[:, i]) for i in range(M + 1)]

        conditions = list(points.coarse) + list(points.detail)
        x, sides = InterpPointSet1D.as_arrays(conditions)
        monomials = []
        for c in range(M + 1):
            unit = np.zeros(M + 1)
            unit[c] = 1.0
            monomials.append(PiecewisePolynomial(unit, np.zeros(M + 1)))
            monomials.append(PiecewisePolynomial(np.zeros(M + 1), unit))
        system = np.stack([f(x, sides) for f in monomials], axis=-1)
        rhs = np.zeros((2 * (M + 1), M + 1))
        rhs[M + 1:] = np.eye(M + 1)
        solution = linalg.solve(system, rhs)
        wavelets = []
        for i in range(M + 1):
            left, right = solution[0::2, i], solution[1::2, i]
            wavelets.append(PiecewisePolynomial(left, right))

        super().__init__(M, scaling, wavelets)

    def amplitude(self, level: int) -> float:
        return 1.0

    def points_of(self, index: int) -> Tuple[np.ndarray, np.ndarray]:
        """Interpolation points (abscissae, sides) owned by a heap cell"""
        level = level_of(index)
        if level == 0:
            return InterpPointSet1D.as_arrays(self.points.coarse)
        width = Fraction(1, 1 << (level - 1))
        origin = translation_of(index) * width
        return InterpPointSet1D.as_arrays([(origin + width * p, side) for p, side in self.points.detail])

    def all_points(self, max_level: int) -> Tuple[np.ndarray, np.ndarray]:
        """Points of every cell up to `max_level`, shape (cells, M+1) each"""
        x, sides = zip(*(self.points_of(index) for index in range(1 << max_level)))
        return np.stack(x), np.stack(sides)


@lru_cache(maxsize=None)
def build_interp_wavelets(M: int) -> InterpWavelets1D:
    logger.debug(f"Building interpolatory multiwavelets for M={M}")
    return InterpWavelets1D(build_interface_points(M))
