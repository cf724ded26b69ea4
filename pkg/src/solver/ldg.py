"""Semi-discrete LDG operator for phi_t + H(grad phi, x) = 0.

The pipeline for L_h(phi) is: one-sided gradient reconstructions per
dimension, their values at the interpolation points of every active
element, the Lax-Friedrichs flux at those points, hierarchical
interpolation of the flux, and the L2 pairing of the interpolant with the
Alpert basis.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from basis.tables import BasisTables
from mra.field import BasisFamily, HierCoeffField
from mra.space import AdaptiveSpace
from mra.unidirectional import apply_tensor, unidirectional_apply
from solver.hamiltonian import HamiltonianSpec, estimate_alpha, lax_friedrichs_hamiltonian
from utils.errors import NumericalInstabilityError

GradientPair = Tuple[HierCoeffField, HierCoeffField]


def reconstruct_gradients(phi: HierCoeffField, space: AdaptiveSpace, tables: BasisTables) -> List[GradientPair]:
    """(p_m^1, p_m^2) for every dimension m"""
    if phi.family != BasisFamily.ALPERT:
        raise ValueError("Gradients are reconstructed from Alpert fields only")
    return [(unidirectional_apply(tables.flux(1), phi, space, axis),
             unidirectional_apply(tables.flux(2), phi, space, axis))
            for axis in range(space.dim)]


def eval_at_points(u: HierCoeffField, space: AdaptiveSpace, tables: BasisTables) -> np.ndarray:
    """Values at the interpolation points of each element, shape (elements, M+1, ..., M+1)"""
    table = tables.alpert_points if u.family == BasisFamily.ALPERT else tables.interp_points
    return apply_tensor([table] * space.dim, u.coeffs, space.indices, space.bits)


def point_values_to_hier(values: np.ndarray, space: AdaptiveSpace, tables: BasisTables) -> HierCoeffField:
    """Hierarchical interpolation coefficients reproducing the point values"""
    expected = (space.size,) + (tables.M + 1,) * space.dim
    values = np.asarray(values, dtype=np.float64)
    if values.shape != expected:
        raise ValueError(f"Point values of shape {values.shape} do not cover the {expected} "
                         f"interpolation points of the space")
    coeffs = apply_tensor([tables.interp_inverse] * space.dim, values, space.indices, space.bits)
    return HierCoeffField(space, coeffs, tables.M, BasisFamily.INTERPOLATORY)


def interp_to_alpert_volume(b: HierCoeffField, space: AdaptiveSpace, tables: BasisTables) -> HierCoeffField:
    """Alpert coefficients of the L2 projection of an interpolant onto the active space"""
    if b.family != BasisFamily.INTERPOLATORY:
        raise ValueError("Expected an interpolatory field")
    coeffs = apply_tensor([tables.coupling] * space.dim, b.coeffs, space.indices, space.bits)
    return HierCoeffField(space, coeffs, tables.k, BasisFamily.ALPERT)


def point_coordinates(space: AdaptiveSpace, tables: BasisTables) -> np.ndarray:
    """Coordinates of the interpolation points, shape (elements, M+1, ..., M+1, d)"""
    abscissae, _ = tables.coordinates
    n, width, dim = space.size, tables.M + 1, space.dim
    axes = []
    for axis in range(dim):
        shape = [n] + [1] * dim
        shape[1 + axis] = width
        local = abscissae[space.indices[:, axis]].reshape(shape)
        axes.append(np.broadcast_to(local, (n,) + (width,) * dim))
    return np.stack(axes, axis=-1)


def gradient_point_values(phi: HierCoeffField, space: AdaptiveSpace,
                          tables: BasisTables) -> Tuple[np.ndarray, np.ndarray]:
    """p^1 and p^2 at all interpolation points, each shaped (elements, M+1, ..., M+1, d)"""
    gradients = reconstruct_gradients(phi, space, tables)
    p1 = np.stack([eval_at_points(pair[0], space, tables) for pair in gradients], axis=-1)
    p2 = np.stack([eval_at_points(pair[1], space, tables) for pair in gradients], axis=-1)
    return p1, p2


def semidiscrete_rhs(phi: HierCoeffField, space: AdaptiveSpace, spec: HamiltonianSpec, tables: BasisTables,
                     alpha: Optional[Sequence[float]] = None, alpha_mode: str = "analytic") -> HierCoeffField:
    """L_h(phi) = -(projection of I_h(H_hat) onto the active Alpert space)"""
    return SemiDiscreteOperator(spec, tables, alpha_mode)(phi, space, alpha)


class SemiDiscreteOperator:
    """L_h for a fixed Hamiltonian and table set"""

    def __init__(self, spec: HamiltonianSpec, tables: BasisTables, alpha_mode: str = "analytic",
                 alpha_safety: float = 1.1, alpha_floor: float = 1e-12):
        self.spec = spec
        self.tables = tables
        self.alpha_mode = alpha_mode
        self.alpha_safety = alpha_safety
        self.alpha_floor = alpha_floor
        self.logger = logging.getLogger(__name__)

    def alpha(self, phi: HierCoeffField, space: AdaptiveSpace) -> np.ndarray:
        """Dissipation coefficients from the current state"""
        if self.alpha_mode == "analytic" and self.spec.alpha is not None:
            return np.asarray(self.spec.alpha, dtype=np.float64)
        p1, p2 = gradient_point_values(phi, space, self.tables)
        return estimate_alpha(p1, p2, self.spec, point_coordinates(space, self.tables),
                              self.alpha_mode, self.alpha_safety, self.alpha_floor)

    def __call__(self, phi: HierCoeffField, space: AdaptiveSpace,
                 alpha: Optional[Sequence[float]] = None) -> HierCoeffField:
        if phi.space is not space and phi.space != space:
            raise ValueError("Field is not defined on the given space")
        p1, p2 = gradient_point_values(phi, space, self.tables)
        return self.from_gradients(p1, p2, space, alpha)

    def from_gradients(self, p1: np.ndarray, p2: np.ndarray, space: AdaptiveSpace,
                       alpha: Optional[Sequence[float]] = None) -> HierCoeffField:
        """L_h from the one-sided gradients at the interpolation points of `space`"""
        x = point_coordinates(space, self.tables)
        if alpha is None:
            alpha = estimate_alpha(p1, p2, self.spec, x, self.alpha_mode, self.alpha_safety, self.alpha_floor)

        try:
            flux = lax_friedrichs_hamiltonian(p1, p2, self.spec, alpha, x)
        except NumericalInstabilityError as error:
            raise self._diagnose(error, p1, p2, x, alpha, space) from None

        b = point_values_to_hier(flux, space, self.tables)
        return -interp_to_alpert_volume(b, space, self.tables)

    def _diagnose(self, error: NumericalInstabilityError, p1, p2, x, alpha,
                  space: AdaptiveSpace) -> NumericalInstabilityError:
        with np.errstate(all='ignore'):
            average = 0.5 * (p1 + p2)
            values = self.spec(average, x) - 0.5 * np.sum(np.asarray(alpha) * (p2 - p1), axis=-1)
            per_element = np.abs(values.reshape(space.size, -1))
            gradients = np.sqrt(np.sum(average ** 2, axis=-1)).reshape(space.size, -1)
        bad = np.flatnonzero(~np.isfinite(per_element).all(axis=1))
        self.logger.error(f"{error} on {bad.size} element(s)")
        return NumericalInstabilityError(
            str(error), elements=space.indices[bad],
            max_abs_flux=np.max(per_element[bad], axis=1) if bad.size else [],
            max_gradient=np.max(gradients[bad], axis=1) if bad.size else [])
