"""Normalized shifted Legendre polynomials, Alpert multiwavelets, L2 projection"""
import logging
from functools import lru_cache
from typing import Callable, List

import numpy as np
from numpy.polynomial import Legendre, Polynomial
from scipy.special import eval_legendre

from basis.hierarchy import RIGHT, HierarchicalBasis1D, PiecewisePolynomial, split_rule
from mra.field import BasisFamily, HierCoeffField
from mra.space import AdaptiveSpace
from utils.errors import NumericalInstabilityError

logger = logging.getLogger(__name__)

MAX_DEGREE = 3


def eval_scaling(i: int, x, k: int = MAX_DEGREE) -> np.ndarray:
    """sqrt(2i+1) P_i(2x-1), the orthonormal Legendre polynomial on [0, 1]"""
    if not 0 <= i <= k:
        raise ValueError(f"Degree {i} outside [0, {k}]")
    return np.sqrt(2 * i + 1) * eval_legendre(i, 2.0 * np.asarray(x, dtype=np.float64) - 1.0)


def _legendre_on(i: int, a: float, b: float) -> np.ndarray:
    """Monomial coefficients of the orthonormal degree-i Legendre polynomial on [a, b]"""
    poly = Legendre.basis(i, domain=[a, b]).convert(kind=Polynomial)
    return poly.coef * np.sqrt((2 * i + 1) / (b - a))


class AlpertBasis1D(HierarchicalBasis1D):
    """Orthonormal multiwavelets v_{i,l}^j(x) = 2^((l-1)/2) h_i(2^(l-1) x - j)"""

    def __init__(self, k: int):
        scaling = [PiecewisePolynomial.smooth(_legendre_on(i, 0.0, 1.0)) for i in range(k + 1)]
        super().__init__(k, scaling, _gram_schmidt_wavelets(k, scaling))

    def amplitude(self, level: int) -> float:
        return 2.0 ** (0.5 * (level - 1))

    def reference_tables(self, n: int):
        """Split-rule nodes, weights and scaling/wavelet values on the reference interval"""
        nodes, weights = split_rule(n)
        scaling = np.stack([f(nodes) for f in self.scaling], axis=-1)
        wavelets = np.stack([f(nodes) for f in self.wavelets], axis=-1)
        return nodes, weights, scaling, wavelets


def _gram_schmidt_wavelets(k: int, scaling: List[PiecewisePolynomial]) -> List[PiecewisePolynomial]:
    """Orthonormal complement of V_0 in V_1, right-half leading coefficient positive"""
    width = k + 1
    nodes, weights = split_rule(k + 3)
    left = nodes < 0.5

    def vector(f: PiecewisePolynomial) -> np.ndarray:
        return np.concatenate([np.pad(f.left, (0, width - f.left.size)),
                               np.pad(f.right, (0, width - f.right.size))])

    def values(v: np.ndarray) -> np.ndarray:
        return np.where(left, np.polynomial.polynomial.polyval(nodes, v[:width]),
                        np.polynomial.polynomial.polyval(nodes, v[width:]))

    def inner(u: np.ndarray, v: np.ndarray) -> float:
        return float(np.sum(weights * values(u) * values(v)))

    accepted = [vector(f) for f in scaling]
    wavelets = []
    for r in range(width):
        candidate = vector(PiecewisePolynomial(np.zeros(1), _legendre_on(r, 0.5, 1.0)))
        for _ in range(2):
            for basis_vector in accepted:
                candidate = candidate - inner(candidate, basis_vector) * basis_vector
        candidate = candidate / np.sqrt(inner(candidate, candidate))

        right = candidate[width:]
        significant = np.flatnonzero(np.abs(right) > 1e-10 * np.abs(right).max())
        if right[significant[-1]] < 0:
            candidate = -candidate
        accepted.append(candidate)
        wavelets.append(PiecewisePolynomial(candidate[:width].copy(), candidate[width:].copy()))
    return wavelets


@lru_cache(maxsize=None)
def build_mother_wavelets(k: int) -> AlpertBasis1D:
    if not 0 <= k <= MAX_DEGREE:
        raise ValueError(f"Unsupported degree k={k}; supported range is 0..{MAX_DEGREE}")
    logger.debug(f"Building Alpert multiwavelets for k={k}")
    return AlpertBasis1D(k)


def project_L2(f: Callable[[np.ndarray], np.ndarray], space: AdaptiveSpace, k: int,
               quadrature_points: int = None, max_points: int = 2_000_000) -> HierCoeffField:
    """Coefficients <f, v> of every active basis function.

    `f` maps points of shape (..., d) to values of shape (...). Each element
    is integrated with Gauss points on the two halves of its support in
    every dimension.
    """
    basis = build_mother_wavelets(k)
    n = quadrature_points or k + 3
    nodes, weights, scaling, wavelets = basis.reference_tables(n)
    scaling_rule = weights[:, None] * scaling
    wavelet_rule = weights[:, None] * wavelets

    dim = space.dim
    levels = space.levels
    translations = space.translations
    q = nodes.size
    chunk = max(1, max_points // q ** dim)
    result = np.zeros((space.size,) + (k + 1,) * dim)

    for start in range(0, space.size, chunk):
        stop = min(start + chunk, space.size)
        lv = levels[start:stop]
        tr = translations[start:stop]
        widths = np.where(lv > 0, 2.0 ** -np.maximum(lv - 1, 0), 1.0)
        origins = tr * widths

        axes = []
        for axis in range(dim):
            coords = origins[:, axis, None] + widths[:, axis, None] * nodes[None, :]
            shape = [stop - start] + [1] * dim
            shape[1 + axis] = q
            axes.append(np.broadcast_to(coords.reshape(shape), (stop - start,) + (q,) * dim))
        points = np.stack(axes, axis=-1)
        values = np.asarray(f(points), dtype=np.float64)
        if not np.isfinite(values).all():
            bad = np.unique(np.nonzero(~np.isfinite(values))[0]) + start
            raise NumericalInstabilityError(
                f"Projected function is not finite on {bad.size} element(s)",
                elements=space.indices[bad])

        for axis in range(dim):
            factor = np.where(lv[:, axis] > 0, 2.0 ** (-0.5 * np.maximum(lv[:, axis] - 1, 0)), 1.0)
            rule = np.where((lv[:, axis] > 0)[:, None, None], wavelet_rule[None], scaling_rule[None])
            values = np.einsum('nq...,nqi->n...i', values, rule * factor[:, None, None])
        result[start:stop] = values

    return HierCoeffField(space, result, k, BasisFamily.ALPERT)


def reconstruct(u: HierCoeffField, points: np.ndarray, sides=RIGHT) -> np.ndarray:
    """Direct summation of an Alpert field at scattered points of shape (n, d)"""
    basis = build_mother_wavelets(u.degree)
    points = np.atleast_2d(points)
    values = np.zeros(points.shape[0])
    for row, indices in enumerate(u.space.indices):
        product = np.broadcast_to(u.coeffs[row], (points.shape[0],) + u.coeffs.shape[1:])
        for axis in range(u.space.dim):
            local = basis.evaluate(int(indices[axis]), points[:, axis], sides)
            product = np.einsum('ni,ni...->n...', local, product)
        values += product
    return values
