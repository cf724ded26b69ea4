"""The benchmark problems and their registry"""
from typing import Dict, Type

import numpy as np

from benchmarks.base import BenchmarkCase, RadialCase, SumReducedCase
from benchmarks.references import ReducedProblem, planar_characteristics
from solver.hamiltonian import HamiltonianSpec
from utils.errors import ConfigurationError, ReferenceSolutionError

TWO_PI = 2 * np.pi


def _cosine_profile() -> dict:
    """psi0(xi) = -cos(2 pi xi) / (2 pi) and its derivatives"""
    return dict(psi0=lambda xi: -np.cos(TWO_PI * xi) / TWO_PI,
                psi0_prime=lambda xi: np.sin(TWO_PI * xi),
                psi0_second=lambda xi: TWO_PI * np.cos(TWO_PI * xi))


class BurgersCase(SumReducedCase):
    """phi_t + (sum_m phi_x_m)^2 / 2 = 0"""
    name = "burgers"
    final_times = {2: 0.01, 3: 0.005, 4: 0.005}
    post_kink_time = 0.04

    def hamiltonian(self) -> HamiltonianSpec:
        return HamiltonianSpec(
            name=self.name, dim=self.dim,
            hamiltonian=lambda q, x, kernels: 0.5 * np.sum(q, axis=-1) ** 2,
            gradient=lambda q, x, kernels: np.repeat(np.sum(q, axis=-1, keepdims=True), q.shape[-1], axis=-1),
            alpha=[float(self.dim)] * self.dim)

    def reduced(self) -> ReducedProblem:
        d2 = float(self.dim ** 2)
        return ReducedProblem(**_cosine_profile(),
                              h=lambda p: 0.5 * d2 * p ** 2,
                              h_prime=lambda p: d2 * p,
                              h_second=lambda p: d2 + 0.0 * p)


class CosineCase(SumReducedCase):
    """phi_t - cos(sum_m phi_x_m + 1) = 0, a nonconvex Hamiltonian"""
    name = "cos"
    final_times = {2: 0.01, 3: 0.005, 4: 0.005}
    post_kink_time = 0.06

    def hamiltonian(self) -> HamiltonianSpec:
        return HamiltonianSpec(
            name=self.name, dim=self.dim,
            hamiltonian=lambda q, x, kernels: -np.cos(np.sum(q, axis=-1) + 1.0),
            gradient=lambda q, x, kernels: np.repeat(np.sin(np.sum(q, axis=-1, keepdims=True) + 1.0),
                                                     q.shape[-1], axis=-1),
            alpha=[1.0] * self.dim)

    def reduced(self) -> ReducedProblem:
        d = float(self.dim)
        return ReducedProblem(**_cosine_profile(),
                              h=lambda p: -np.cos(d * p + 1.0),
                              h_prime=lambda p: d * np.sin(d * p + 1.0),
                              h_second=lambda p: d * d * np.cos(d * p + 1.0))


class NonlinearCase(BenchmarkCase):
    """phi_t + phi_x1 phi_x2 = 0 in two dimensions"""
    name = "nonlinear2d"
    dims = (2,)
    default_final_time = 0.03
    post_kink_time = 0.2
    # det(I + t J H0) = 1 - t^2 ab vanishes first where ab = 4 pi^2
    crossing_time = 1.0 / TWO_PI

    def hamiltonian(self) -> HamiltonianSpec:
        return HamiltonianSpec(
            name=self.name, dim=2,
            hamiltonian=lambda q, x, kernels: q[..., 0] * q[..., 1],
            gradient=lambda q, x, kernels: q[..., ::-1],
            alpha=[1.0, 1.0])

    def initial_condition(self, x: np.ndarray) -> np.ndarray:
        return -(np.sin(TWO_PI * x[..., 0]) + np.cos(TWO_PI * x[..., 1])) / TWO_PI

    @staticmethod
    def _grad0(x: np.ndarray) -> np.ndarray:
        return np.stack([-np.cos(TWO_PI * x[..., 0]), np.sin(TWO_PI * x[..., 1])], axis=-1)

    @staticmethod
    def _hessian0(x: np.ndarray) -> np.ndarray:
        hessian = np.zeros(x.shape + (2,))
        hessian[..., 0, 0] = TWO_PI * np.sin(TWO_PI * x[..., 0])
        hessian[..., 1, 1] = TWO_PI * np.cos(TWO_PI * x[..., 1])
        return hessian

    @property
    def has_reference(self) -> bool:
        return True

    def reference(self, x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if t == 0:
            return self.initial_condition(x)
        if t >= self.crossing_time:
            raise ReferenceSolutionError(f"Characteristics cross before t={t}; no smooth reference")
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        feet = planar_characteristics(
            x, t, self._grad0, self._hessian0,
            velocity=lambda q: q[..., ::-1],
            velocity_jacobian=lambda q: np.broadcast_to(swap, q.shape[:-1] + (2, 2)))
        q = self._grad0(feet)
        return self.initial_condition(feet) + t * q[..., 0] * q[..., 1]


class EikonalCase(RadialCase):
    """phi_t + |grad phi| = 0 with outflow boundaries"""
    name = "eikonal"
    m_offset = 1

    def hamiltonian(self) -> HamiltonianSpec:
        return HamiltonianSpec(
            name=self.name, dim=self.dim,
            hamiltonian=lambda q, x, kernels: kernels.norm(q),
            gradient=lambda q, x, kernels: kernels.norm_gradient(q),
            alpha=[1.0] * self.dim,
            needs_regularization=True)

    def exact(self, x: np.ndarray, t: float) -> np.ndarray:
        distance = np.linalg.norm(np.asarray(x, dtype=np.float64) - self.center, axis=-1)
        return self.g(np.maximum(distance - t, 0.0))


class HJBCase(RadialCase):
    """phi_t + sum_m |phi_x_m| = 0, the HJB equation with 2^d bang-bang controls"""
    name = "hjb"
    m_offset = 2

    def hamiltonian(self) -> HamiltonianSpec:
        return HamiltonianSpec(
            name=self.name, dim=self.dim,
            hamiltonian=lambda q, x, kernels: np.sum(kernels.abs(q), axis=-1),
            gradient=lambda q, x, kernels: kernels.abs_prime(q),
            alpha=[1.0] * self.dim,
            needs_regularization=True)

    def exact(self, x: np.ndarray, t: float) -> np.ndarray:
        c = np.asarray(x, dtype=np.float64) - self.center
        contracted = np.minimum(np.maximum(0.0, c - t), c + t)
        return self.g(np.linalg.norm(contracted, axis=-1))


class ControlCase(BenchmarkCase):
    """Optimal cost determination; sign(phi_x2) phi_x2 is written as |phi_x2|"""
    name = "control"
    dims = (2,)
    m_offset = 2
    default_final_time = 0.15
    post_kink_time = 0.15

    def hamiltonian(self) -> HamiltonianSpec:
        def hamiltonian(q, x, kernels):
            s1, s2 = np.sin(TWO_PI * x[..., 0]), np.sin(TWO_PI * x[..., 1])
            return (-s2 * q[..., 0] - s1 * q[..., 1] - kernels.abs(q[..., 1])
                    - 0.5 * s2 ** 2 - np.cos(TWO_PI * x[..., 0]) - 1.0)

        def gradient(q, x, kernels):
            s1, s2 = np.sin(TWO_PI * x[..., 0]), np.sin(TWO_PI * x[..., 1])
            return np.stack([-s2 + 0.0 * q[..., 0], -s1 - kernels.abs_prime(q[..., 1])], axis=-1)

        return HamiltonianSpec(name=self.name, dim=2, hamiltonian=hamiltonian, gradient=gradient,
                               alpha=[1.0, 2.0], needs_regularization=True)

    def initial_condition(self, x: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(x)[:-1])

    def controls(self, p2: np.ndarray) -> np.ndarray:
        """Optimal control sign(phi_x2)"""
        return np.sign(p2)


CASES: Dict[str, Type[BenchmarkCase]] = {
    case.name: case for case in (BurgersCase, CosineCase, NonlinearCase, EikonalCase, HJBCase, ControlCase)
}


def make_case(name: str, dim: int) -> BenchmarkCase:
    try:
        return CASES[name](dim)
    except KeyError:
        raise ConfigurationError(f"Unknown case {name!r}; choose from {', '.join(CASES)}") from None
