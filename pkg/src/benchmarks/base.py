"""Base classes for benchmark problems"""
from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple

import numpy as np

from solver.hamiltonian import HamiltonianSpec
from utils.errors import ConfigurationError, ReferenceSolutionError


class BenchmarkCase(ABC):
    """Abstract base class for HJ benchmark problems on [0, 1]^d"""

    name: str = ""
    bc: str = "periodic"
    dims: Tuple[int, ...] = (1, 2, 3, 4)
    m_offset: int = 0
    final_times: Dict[int, float] = {}
    default_final_time: float = 0.01
    post_kink_time: Optional[float] = None

    def __init__(self, dim: int):
        if dim not in self.dims:
            raise ConfigurationError(f"Case {self.name!r} is not defined for d={dim}; "
                                     f"supported: {', '.join(map(str, self.dims))}")
        self.dim = dim

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"

    @abstractmethod
    def hamiltonian(self) -> HamiltonianSpec:
        """Hamiltonian with analytic alpha bounds"""
        pass

    @abstractmethod
    def initial_condition(self, x: np.ndarray) -> np.ndarray:
        """phi(x, 0) for points of shape (..., d)"""
        pass

    def default_m(self, k: int) -> int:
        return min(max(k + self.m_offset, 1), 5)

    def t_final(self) -> float:
        return self.final_times.get(self.dim, self.default_final_time)

    @property
    def has_exact(self) -> bool:
        return False

    @property
    def has_reference(self) -> bool:
        return self.has_exact

    def exact(self, x: np.ndarray, t: float) -> np.ndarray:
        raise ReferenceSolutionError(f"Case {self.name!r} has no closed-form solution")

    def reference(self, x: np.ndarray, t: float) -> np.ndarray:
        """Closed form where available, otherwise the characteristics reference"""
        return self.exact(x, t)

    def kink_intervals(self, t: float):
        """Intervals of sum(x) mod 1 where kinks can sit at time t, None if unknown"""
        return None


class SumReducedCase(BenchmarkCase):
    """Cases whose solution depends on xi = sum(x) through a 1D problem"""

    def initial_condition(self, x: np.ndarray) -> np.ndarray:
        return self.reduced().psi0(np.sum(x, axis=-1))

    @abstractmethod
    def reduced(self):
        """ReducedProblem in the variable xi"""
        pass

    @property
    def has_reference(self) -> bool:
        return True

    def reference(self, x: np.ndarray, t: float) -> np.ndarray:
        return self.reduced().solve(np.sum(np.asarray(x, dtype=np.float64), axis=-1), t)

    def kink_intervals(self, t: float):
        return self.reduced().kink_intervals(t)


class RadialCase(BenchmarkCase):
    """phi(x, 0) = g(|x - a|) with g(z) = (z^2 - r0^2) / (2 r0), a the center of the cube"""

    bc = "outflow"
    r0 = 1.0 / 8.0
    default_final_time = 0.1

    @property
    def center(self) -> np.ndarray:
        return np.full(self.dim, 0.5)

    def g(self, z: np.ndarray) -> np.ndarray:
        return (z ** 2 - self.r0 ** 2) / (2 * self.r0)

    def initial_condition(self, x: np.ndarray) -> np.ndarray:
        return self.g(np.linalg.norm(np.asarray(x, dtype=np.float64) - self.center, axis=-1))

    @property
    def has_exact(self) -> bool:
        return True
