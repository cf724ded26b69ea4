"""Precomputed 1D operator tables over all cells up to a maximum level.

Every table is a Table1D with rows and columns ordered by heap cell, then
degree. Integrals are evaluated with Gauss points on the cells of the
uniform finest mesh, where all integrands are polynomial.
"""
import logging
import os
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import linalg

from basis.alpert import build_mother_wavelets
from basis.hierarchy import LEFT, RIGHT, uniform_rule
from basis.interpolation import build_interp_wavelets
from mra.index import ancestor_mask
from mra.unidirectional import Table1D
from utils.helpers import atomic_write

CACHE_VERSION = 1
MAX_TABLE_LEVEL = 10


class BoundaryCondition(str, Enum):
    PERIODIC = "periodic"
    OUTFLOW = "outflow"


def build_flux_deriv_table(tau: int, max_level: int, k: int, bc) -> Table1D:
    """Weak LDG derivative with the one-sided flux of side `tau`.

    Row a, column b holds -int(phi_b w_a') + sum over faces of
    hat(phi_b) (w_a(x-) - w_a(x+)), where hat is the trace from below for
    tau=1 and from above for tau=2. Outflow boundary faces use the interior
    trace for both sides.
    """
    if tau not in (1, 2):
        raise ValueError(f"Flux side must be 1 or 2, got {tau}")
    if not 0 <= max_level <= MAX_TABLE_LEVEL:
        raise ValueError(f"Table level {max_level} outside 0..{MAX_TABLE_LEVEL}")
    bc = BoundaryCondition(bc)
    basis = build_mother_wavelets(k)

    nodes, weights = uniform_rule(k + 2, max_level)
    derivative = basis.evaluation_matrix(nodes, RIGHT, max_level, derivative=True)
    values = basis.evaluation_matrix(nodes, RIGHT, max_level)
    volume = derivative.T @ (weights[:, None] * values)

    faces = np.arange(1, 1 << max_level) / float(1 << max_level)
    minus = basis.evaluation_matrix(faces, LEFT, max_level)
    plus = basis.evaluation_matrix(faces, RIGHT, max_level)
    flux = minus if tau == 1 else plus

    at_one = basis.evaluation_matrix(np.array([1.0]), LEFT, max_level)
    at_zero = basis.evaluation_matrix(np.array([0.0]), RIGHT, max_level)
    zero = np.zeros_like(at_one)
    if bc is BoundaryCondition.PERIODIC:
        minus = np.vstack([minus, at_one])
        plus = np.vstack([plus, at_zero])
        flux = np.vstack([flux, at_one if tau == 1 else at_zero])
    else:
        minus = np.vstack([minus, at_one, zero])
        plus = np.vstack([plus, zero, at_zero])
        flux = np.vstack([flux, at_one, at_zero])

    matrix = -volume + (minus - plus).T @ flux
    return Table1D(matrix, k + 1, k + 1, f"flux{tau}-{bc.value}")


def point_coordinates(M: int, max_level: int) -> Tuple[np.ndarray, np.ndarray]:
    """Abscissae and sides of the interpolation points of every cell, shape (cells, M+1)"""
    return build_interp_wavelets(M).all_points(max_level)


def alpert_point_table(k: int, M: int, max_level: int) -> Table1D:
    """Values of Alpert functions at the interpolation points, one-sided at interfaces"""
    x, sides = point_coordinates(M, max_level)
    matrix = build_mother_wavelets(k).evaluation_matrix(x.ravel(), sides.ravel(), max_level)
    return Table1D(matrix, k + 1, M + 1, "alpert-points")


def interp_point_table(M: int, max_level: int) -> Table1D:
    """Values of interpolatory functions at the interpolation points (unit lower triangular)"""
    x, sides = point_coordinates(M, max_level)
    matrix = build_interp_wavelets(M).evaluation_matrix(x.ravel(), sides.ravel(), max_level)
    return Table1D(matrix, M + 1, M + 1, "interp-points")


def interp_inverse_table(M: int, max_level: int) -> Table1D:
    """Point values to hierarchical interpolation coefficients"""
    forward = interp_point_table(M, max_level)
    inverse = linalg.solve_triangular(forward.matrix, np.eye(forward.matrix.shape[0]),
                                      lower=True, unit_diagonal=True)
    mask = np.kron(ancestor_mask(forward.n_cells), np.ones((M + 1, M + 1), dtype=bool))
    return Table1D(np.where(mask, inverse, 0.0), M + 1, M + 1, "interp-inverse")


def coupling_table(k: int, M: int, max_level: int) -> Table1D:
    """int psi_(n,j,i) v_(l,j',i') dx with Alpert rows and interpolatory columns"""
    nodes, weights = uniform_rule((k + M) // 2 + 2, max_level)
    alpert = build_mother_wavelets(k).evaluation_matrix(nodes, RIGHT, max_level)
    interp = build_interp_wavelets(M).evaluation_matrix(nodes, RIGHT, max_level)
    return Table1D(alpert.T @ (weights[:, None] * interp), M + 1, k + 1, "coupling")


class BasisTables:
    """Lazily built tables for one (k, M, N_max, bc) configuration.

    Flux tables are optionally cached on disk as .npz files keyed by
    (k, N_max, tau, bc) with a format version entry.
    """

    def __init__(self, k: int, M: int, max_level: int, bc, cache_dir: Optional[str] = None):
        if M < k:
            raise ValueError(f"Interpolation degree M={M} must not be below k={k}")
        self.k = k
        self.M = M
        self.max_level = max_level
        self.bc = BoundaryCondition(bc)
        self.cache_dir = cache_dir
        self.logger = logging.getLogger(__name__)
        self._tables: Dict[str, Table1D] = {}

    def __repr__(self) -> str:
        return f"BasisTables(k={self.k}, M={self.M}, max_level={self.max_level}, bc={self.bc.value})"

    def _get(self, name: str, build) -> Table1D:
        if name not in self._tables:
            self._tables[name] = build()
        return self._tables[name]

    def flux(self, tau: int) -> Table1D:
        return self._get(f"flux{tau}", lambda: self._cached_flux(tau))

    @property
    def alpert_points(self) -> Table1D:
        return self._get("alpert_points", lambda: alpert_point_table(self.k, self.M, self.max_level))

    @property
    def interp_points(self) -> Table1D:
        return self._get("interp_points", lambda: interp_point_table(self.M, self.max_level))

    @property
    def interp_inverse(self) -> Table1D:
        return self._get("interp_inverse", lambda: interp_inverse_table(self.M, self.max_level))

    @property
    def coupling(self) -> Table1D:
        return self._get("coupling", lambda: coupling_table(self.k, self.M, self.max_level))

    @property
    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        return point_coordinates(self.M, self.max_level)

    def _cache_path(self, tau: int) -> str:
        return os.path.join(self.cache_dir, f"flux_k{self.k}_N{self.max_level}_tau{tau}_{self.bc.value}.npz")

    def _cached_flux(self, tau: int) -> Table1D:
        if not self.cache_dir:
            return build_flux_deriv_table(tau, self.max_level, self.k, self.bc)

        path = self._cache_path(tau)
        if os.path.exists(path):
            with np.load(path) as stored:
                if int(stored['version']) == CACHE_VERSION:
                    self.logger.debug(f"Loaded flux table from {path}")
                    return Table1D(stored['matrix'], self.k + 1, self.k + 1, f"flux{tau}-{self.bc.value}")
            self.logger.warning(f"Ignoring flux table cache {path} with a different format version")

        table = build_flux_deriv_table(tau, self.max_level, self.k, self.bc)
        os.makedirs(self.cache_dir, exist_ok=True)
        with atomic_write(path) as stream:
            np.savez(stream, version=CACHE_VERSION, matrix=table.matrix)
        self.logger.info(f"Cached flux table {table.name} ({table.n_cells} cells) at {path}")
        return table
