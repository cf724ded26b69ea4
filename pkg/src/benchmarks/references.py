"""Reference solutions by the method of characteristics.

Before characteristics cross, the solution of phi_t + H(grad phi) = 0 is
phi(x0 + t H'(p0), t) = phi0(x0) + t (p0 . H'(p0) - H(p0)) with p0 the
initial gradient at the foot x0.
"""
import logging
from typing import Callable, List, Tuple

import numpy as np
from scipy import optimize

from utils.errors import ReferenceSolutionError

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-13
NEWTON_MAXITER = 60

Scalar = Callable[[np.ndarray], np.ndarray]


class ReducedProblem:
    """A problem whose solution depends on xi = sum(x) only.

    psi_t + h(psi_xi) = 0 with psi(xi, 0) = psi0(xi), 1-periodic in xi.
    """

    def __init__(self, psi0: Scalar, psi0_prime: Scalar, psi0_second: Scalar,
                 h: Scalar, h_prime: Scalar, h_second: Scalar):
        self.psi0 = psi0
        self.psi0_prime = psi0_prime
        self.psi0_second = psi0_second
        self.h = h
        self.h_prime = h_prime
        self.h_second = h_second

    def foot_map(self, xi0: np.ndarray, t: float) -> np.ndarray:
        return xi0 + t * self.h_prime(self.psi0_prime(xi0))

    def foot_map_prime(self, xi0: np.ndarray, t: float) -> np.ndarray:
        return 1.0 + t * self._compression(xi0)

    def _compression(self, xi0: np.ndarray) -> np.ndarray:
        return self.h_second(self.psi0_prime(xi0)) * self.psi0_second(xi0)

    def crossing_time(self, samples: int = 4096) -> float:
        """First time at which the foot map stops being monotone"""
        most_negative = self._compression(np.arange(samples) / samples).min()
        return np.inf if most_negative >= 0 else -1.0 / most_negative

    def onset_location(self, t: float, samples: int = 4096) -> float:
        """xi in [0, 1) reached at time t by the characteristic that crosses first"""
        xi0 = np.arange(samples) / samples
        first = xi0[np.argmin(self._compression(xi0))]
        return float(np.mod(self.foot_map(first, t), 1.0))

    def kink_intervals(self, t: float, resolution: int = 4096) -> List[Tuple[float, float]]:
        """Multivalued intervals once characteristics cross; the onset point while they are too thin to resolve"""
        if t < self.crossing_time():
            return []
        intervals = self.multivalued_intervals(t, resolution)
        if intervals:
            return intervals
        xi = self.onset_location(t)
        return [(xi, xi)]

    def solve(self, xi: np.ndarray, t: float) -> np.ndarray:
        xi = np.asarray(xi, dtype=np.float64)
        if t == 0:
            return self.psi0(xi)
        if t >= self.crossing_time():
            raise ReferenceSolutionError(f"Characteristics cross before t={t}; no smooth reference")

        flat = xi.ravel()
        roots, converged = self._newton(flat, t)
        residual = np.abs(self.foot_map(roots, t) - flat)
        failed = np.flatnonzero(~converged | (residual > 1e-10))
        if failed.size:
            logger.warning(f"Newton did not converge at {failed.size} point(s), using bracketing")
            spread = t * np.max(np.abs(self.h_prime(self.psi0_prime(np.linspace(0, 1, 1025))))) + 1e-8
            for i in failed:
                roots[i] = optimize.brentq(lambda z: self.foot_map(z, t) - flat[i],
                                           flat[i] - spread, flat[i] + spread, xtol=NEWTON_TOL)

        p0 = self.psi0_prime(roots)
        values = self.psi0(roots) + t * (p0 * self.h_prime(p0) - self.h(p0))
        return values.reshape(xi.shape)

    def _newton(self, flat: np.ndarray, t: float):
        if flat.size > 1:
            roots, converged, _ = optimize.newton(lambda z: self.foot_map(z, t) - flat, flat.copy(),
                                                  fprime=lambda z: self.foot_map_prime(z, t),
                                                  tol=NEWTON_TOL, maxiter=NEWTON_MAXITER, full_output=True)
            return np.asarray(roots, dtype=np.float64), np.asarray(converged, dtype=bool)
        target = float(flat[0]) if flat.size else 0.0
        root, info = optimize.newton(lambda z: self.foot_map(z, t) - target, target,
                                     fprime=lambda z: self.foot_map_prime(z, t),
                                     tol=NEWTON_TOL, maxiter=NEWTON_MAXITER, full_output=True, disp=False)
        return np.full(flat.size, float(root)), np.full(flat.size, bool(info.converged))

    def multivalued_intervals(self, t: float, resolution: int = 4096) -> List[Tuple[float, float]]:
        """Intervals of xi in [0, 1) reached by more than one characteristic at time t"""
        xi0 = np.arange(resolution + 1) / resolution
        feet = self.foot_map(xi0, t)
        targets = (np.arange(resolution) + 0.5) / resolution
        shifted = np.floor(feet[None, :] - targets[:, None])
        counts = np.sum(np.abs(np.diff(shifted, axis=1)), axis=1)
        covered = counts > 1
        intervals = []
        start = None
        for i, flag in enumerate(covered):
            if flag and start is None:
                start = i
            if not flag and start is not None:
                intervals.append((start / resolution, i / resolution))
                start = None
        if start is not None:
            intervals.append((start / resolution, 1.0))
        return intervals


def boxes_near_kinks(lower: np.ndarray, upper: np.ndarray, intervals: List[Tuple[float, float]],
                     margin: float = 0.0) -> np.ndarray:
    """True where sum(x) over the box [lower, upper] comes within `margin` of an interval, modulo 1"""
    low = np.sum(np.asarray(lower, dtype=np.float64), axis=-1)
    high = np.sum(np.asarray(upper, dtype=np.float64), axis=-1)
    mask = np.zeros(low.shape, dtype=bool)
    if not intervals:
        return mask
    mask |= high - low >= 1.0
    for shift in range(int(np.floor(low.min(initial=0.0))) - 1, int(np.ceil(high.max(initial=0.0))) + 1):
        for a, b in intervals:
            mask |= (low <= b + margin + shift) & (high >= a - margin + shift)
    return mask


def planar_characteristics(x: np.ndarray, t: float, grad0: Callable, hessian0: Callable,
                           velocity: Callable, velocity_jacobian: Callable) -> np.ndarray:
    """Feet x0 of characteristics x = x0 + t*velocity(grad0(x0)) through the points x.

    Newton on the d x d system with a fixed-point fallback.
    """
    x = np.asarray(x, dtype=np.float64)
    flat = x.reshape(-1, x.shape[-1])
    feet = flat.copy()
    for _ in range(NEWTON_MAXITER):
        q = grad0(feet)
        residual = feet + t * velocity(q) - flat
        if np.max(np.abs(residual)) < NEWTON_TOL:
            break
        jacobian = np.eye(flat.shape[1])[None] + t * np.einsum('nij,njk->nik', velocity_jacobian(q), hessian0(feet))
        feet = feet - np.linalg.solve(jacobian, residual[..., None])[..., 0]
    else:
        logger.warning("Newton did not converge for planar characteristics, using fixed-point iteration")
        feet = flat.copy()
        for _ in range(2000):
            updated = flat - t * velocity(grad0(feet))
            if np.max(np.abs(updated - feet)) < NEWTON_TOL:
                break
            feet = updated
        else:
            raise ReferenceSolutionError(f"Characteristic feet did not converge at t={t}")
    return feet.reshape(x.shape)
