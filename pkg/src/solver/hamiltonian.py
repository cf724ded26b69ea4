"""Hamiltonians, their C1 regularization and the global Lax-Friedrichs flux.

A Hamiltonian is written against a pair of kernels, an absolute value
and a Euclidean norm. The exact kernels are used by default; regularizing
swaps in quadratic blends that agree with the exact ones outside a
neighborhood of zero of radius delta.
"""
import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from utils.errors import NumericalInstabilityError

logger = logging.getLogger(__name__)

ALPHA_SAFETY = 1.1
ALPHA_FLOOR = 1e-12


@dataclass(frozen=True)
class Kernels:
    """|z| and ||q|| with optional smoothing radius `delta`"""
    delta: float = 0.0

    def abs(self, z: np.ndarray) -> np.ndarray:
        magnitude = np.abs(z)
        if self.delta <= 0:
            return magnitude
        return np.where(magnitude >= self.delta, magnitude, z ** 2 / (2 * self.delta) + self.delta / 2)

    def abs_prime(self, z: np.ndarray) -> np.ndarray:
        if self.delta <= 0:
            return np.sign(z)
        return np.where(np.abs(z) >= self.delta, np.sign(z), z / self.delta)

    def norm(self, q: np.ndarray) -> np.ndarray:
        """Norm over the last axis"""
        magnitude = np.sqrt(np.sum(q ** 2, axis=-1))
        if self.delta <= 0:
            return magnitude
        return np.where(magnitude >= self.delta, magnitude, magnitude ** 2 / (2 * self.delta) + self.delta / 2)

    def norm_gradient(self, q: np.ndarray) -> np.ndarray:
        magnitude = np.sqrt(np.sum(q ** 2, axis=-1, keepdims=True))
        if self.delta > 0:
            return np.where(magnitude >= self.delta, q / np.maximum(magnitude, self.delta), q / self.delta)
        return np.divide(q, magnitude, out=np.zeros_like(q), where=magnitude > 0)


HamiltonianFn = Callable[[np.ndarray, np.ndarray, Kernels], np.ndarray]


@dataclass(frozen=True)
class HamiltonianSpec:
    """H(q, x) for gradients q of shape (..., d) at points x of shape (..., d).

    `gradient` returns dH/dq with the shape of q; without it, derivatives are
    taken by central differences. `alpha` holds analytic per-dimension
    bounds of |dH/dq_m| over the whole domain.
    """
    name: str
    dim: int
    hamiltonian: HamiltonianFn
    gradient: Optional[HamiltonianFn] = None
    alpha: Optional[Sequence[float]] = None
    needs_regularization: bool = False
    kernels: Kernels = Kernels()

    def __call__(self, q: np.ndarray, x: Optional[np.ndarray] = None) -> np.ndarray:
        q = np.asarray(q, dtype=np.float64)
        if x is None:
            x = np.zeros_like(q)
        return self.hamiltonian(q, x, self.kernels)

    def grad(self, q: np.ndarray, x: Optional[np.ndarray] = None) -> np.ndarray:
        q = np.asarray(q, dtype=np.float64)
        if x is None:
            x = np.zeros_like(q)
        if self.gradient is not None:
            return np.broadcast_to(self.gradient(q, x, self.kernels), q.shape)
        result = np.empty_like(q)
        for m in range(q.shape[-1]):
            step = 1e-6 * (1.0 + np.abs(q[..., m]))
            shift = np.zeros_like(q)
            shift[..., m] = step
            result[..., m] = (self.hamiltonian(q + shift, x, self.kernels)
                              - self.hamiltonian(q - shift, x, self.kernels)) / (2 * step)
        return result

    @property
    def delta(self) -> float:
        return self.kernels.delta


def regularize(spec: HamiltonianSpec, h: float, factor: float = 2.0) -> HamiltonianSpec:
    """C1 version of a norm- or absolute-value-type Hamiltonian with delta = factor*h"""
    if not spec.needs_regularization:
        return spec
    delta = factor * h
    logger.debug(f"Regularizing {spec.name} with delta={delta:.3e}")
    return replace(spec, kernels=Kernels(delta))


def lax_friedrichs_hamiltonian(p1: np.ndarray, p2: np.ndarray, spec: HamiltonianSpec,
                               alpha: Sequence[float], x: Optional[np.ndarray] = None) -> np.ndarray:
    """H(pbar) - sum_m alpha_m/2 (p2_m - p1_m) at every point.

    `p1` and `p2` have shape (..., d) with the gradient components last.
    """
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    average = 0.5 * (p1 + p2)
    values = spec(average, x) - 0.5 * np.sum(alpha * (p2 - p1), axis=-1)
    if not np.all(np.isfinite(values)):
        raise NumericalInstabilityError(
            f"Numerical Hamiltonian {spec.name} is not finite at {int(np.sum(~np.isfinite(values)))} point(s)")
    return values


def estimate_alpha(p1: np.ndarray, p2: np.ndarray, spec: HamiltonianSpec, x: Optional[np.ndarray] = None,
                   mode: str = "analytic", safety: float = ALPHA_SAFETY,
                   floor: float = ALPHA_FLOOR) -> np.ndarray:
    """Per-dimension dissipation coefficients.

    Analytic bounds take precedence in analytic mode. Otherwise the bound is
    `safety` times the largest |dH/dq_m| over all points, evaluated at both
    one-sided gradients and their average, and at least `floor`.
    """
    if mode == "analytic" and spec.alpha is not None:
        return np.asarray(spec.alpha, dtype=np.float64)
    if mode not in ("analytic", "sampled"):
        raise ValueError(f"Unknown alpha mode {mode!r}")

    p1 = np.asarray(p1, dtype=np.float64).reshape(-1, spec.dim)
    p2 = np.asarray(p2, dtype=np.float64).reshape(-1, spec.dim)
    points = None if x is None else np.asarray(x, dtype=np.float64).reshape(-1, spec.dim)
    bound = np.zeros(spec.dim)
    for q in (p1, p2, 0.5 * (p1 + p2)):
        if q.size:
            bound = np.maximum(bound, np.max(np.abs(spec.grad(q, points)), axis=0))
    return np.maximum(safety * bound, floor)
