"""Piecewise polynomials on the reference interval and 1D hierarchical bases.

Functions of a hierarchical basis are polynomial on [0, 1/2] and [1/2, 1] of
the reference interval and are mapped to the support of a heap cell. Point
values at breakpoints are one-sided traces: a point carries a side, LEFT for
the limit from below and RIGHT for the limit from above.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from mra.index import level_of, translation_of

LEFT = -1
RIGHT = 1


def gauss_legendre(n: int, a: float = 0.0, b: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes and weights on [a, b]"""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (nodes + 1.0), half * weights


def split_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """n Gauss points on each half of [0, 1]"""
    left_nodes, left_weights = gauss_legendre(n, 0.0, 0.5)
    right_nodes, right_weights = gauss_legendre(n, 0.5, 1.0)
    return np.concatenate([left_nodes, right_nodes]), np.concatenate([left_weights, right_weights])


def uniform_rule(n: int, level: int) -> Tuple[np.ndarray, np.ndarray]:
    """n Gauss points in every cell of the uniform level-`level` mesh, cell by cell"""
    nodes, weights = gauss_legendre(n)
    width = 2.0 ** -level
    offsets = np.arange(1 << level)[:, None] * width
    return (offsets + width * nodes[None, :]).ravel(), np.tile(width * weights, 1 << level)


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Monomial coefficients in t of the two halves of [0, 1]"""
    left: np.ndarray
    right: np.ndarray

    @classmethod
    def smooth(cls, coeffs: np.ndarray) -> "PiecewisePolynomial":
        coeffs = np.asarray(coeffs, dtype=np.float64)
        return cls(coeffs, coeffs.copy())

    def __call__(self, t: np.ndarray, sides=RIGHT) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        sides = np.broadcast_to(np.asarray(sides), t.shape)
        inside = ((t > 0.0) | ((t == 0.0) & (sides == RIGHT))) & ((t < 1.0) | ((t == 1.0) & (sides == LEFT)))
        use_right = (t > 0.5) | ((t == 0.5) & (sides == RIGHT))
        values = np.where(use_right, P.polyval(t, self.right), P.polyval(t, self.left))
        return np.where(inside, values, 0.0)

    def derivative(self) -> "PiecewisePolynomial":
        return PiecewisePolynomial(P.polyder(self.left), P.polyder(self.right))

    def scaled(self, factor: float) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self.left * factor, self.right * factor)

    def __add__(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        return PiecewisePolynomial(P.polyadd(self.left, other.left), P.polyadd(self.right, other.right))

    def __sub__(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        return PiecewisePolynomial(P.polysub(self.left, other.left), P.polysub(self.right, other.right))


def locate(x: np.ndarray, sides: np.ndarray, level: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Heap cell at `level` owning each point, reference coordinate, validity mask"""
    x = np.asarray(x, dtype=np.float64)
    sides = np.broadcast_to(np.asarray(sides), x.shape)
    if level == 0:
        valid = ((x > 0) | ((x == 0) & (sides == RIGHT))) & ((x < 1) | ((x == 1) & (sides == LEFT)))
        return np.zeros(x.shape, dtype=np.int64), x, valid
    scale = float(1 << (level - 1))
    s = x * scale
    j = np.floor(s).astype(np.int64)
    j = np.where((s == j) & (sides == LEFT), j - 1, j)
    valid = (j >= 0) & (j < (1 << (level - 1)))
    t = s - j
    cells = (1 << (level - 1)) + np.clip(j, 0, (1 << (level - 1)) - 1)
    return cells, t, valid


class HierarchicalBasis1D(ABC):
    """Scaling functions on level 0, mother wavelets mapped to every finer cell"""

    def __init__(self, degree: int, scaling: List[PiecewisePolynomial], wavelets: List[PiecewisePolynomial]):
        if len(scaling) != degree + 1 or len(wavelets) != degree + 1:
            raise ValueError(f"Expected {degree + 1} scaling functions and wavelets")
        self.degree = degree
        self.width = degree + 1
        self.scaling = scaling
        self.wavelets = wavelets
        self._scaling_derivatives = [f.derivative() for f in scaling]
        self._wavelet_derivatives = [f.derivative() for f in wavelets]

    @abstractmethod
    def amplitude(self, level: int) -> float:
        """Factor applied to the mother wavelet at `level` >= 1"""

    def functions(self, level: int, derivative: bool = False) -> List[PiecewisePolynomial]:
        if level == 0:
            return self._scaling_derivatives if derivative else self.scaling
        return self._wavelet_derivatives if derivative else self.wavelets

    def evaluate(self, index: int, x: np.ndarray, sides=RIGHT, derivative: bool = False) -> np.ndarray:
        """Values of the degree+1 functions of heap cell `index`, shape (points, degree+1)"""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        level = level_of(index)
        if level == 0:
            t, factor = x, 1.0
        else:
            scale = float(1 << (level - 1))
            t = x * scale - translation_of(index)
            factor = self.amplitude(level) * (scale if derivative else 1.0)
        return np.stack([f(t, sides) for f in self.functions(level, derivative)], axis=-1) * factor

    def evaluation_matrix(self, x: np.ndarray, sides, max_level: int, derivative: bool = False) -> np.ndarray:
        """Values of every basis function up to `max_level` at the points.

        Shape (points, 2^max_level * (degree+1)); columns are ordered by
        heap cell, then degree.
        """
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        sides = np.broadcast_to(np.asarray(sides), x.shape)
        n_cells = 1 << max_level
        result = np.zeros((x.size, n_cells, self.width))
        points = np.arange(x.size)
        for level in range(max_level + 1):
            cells, t, valid = locate(x, sides, level)
            if level == 0:
                factor = 1.0
            else:
                factor = self.amplitude(level) * (float(1 << (level - 1)) if derivative else 1.0)
            values = np.stack([f(t, sides) for f in self.functions(level, derivative)], axis=-1) * factor
            result[points[valid], cells[valid], :] = values[valid]
        return result.reshape(x.size, n_cells * self.width)
