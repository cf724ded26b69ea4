import numpy as np
import pytest

from benchmarks.cases import make_case
from solver.hamiltonian import (HamiltonianSpec, Kernels, estimate_alpha, lax_friedrichs_hamiltonian,
                                regularize)
from utils.errors import NumericalInstabilityError


def quadratic(dim=1):
    return HamiltonianSpec("quadratic", dim, lambda q, x, kernels: 0.5 * np.sum(q ** 2, axis=-1),
                           gradient=lambda q, x, kernels: q)


def linear(c):
    c = np.asarray(c, dtype=np.float64)
    return HamiltonianSpec("linear", c.size, lambda q, x, kernels: q @ c,
                           gradient=lambda q, x, kernels: np.broadcast_to(c, q.shape),
                           alpha=np.abs(c))


class TestLaxFriedrichs:

    def test_quadratic_example(self):
        value = lax_friedrichs_hamiltonian(np.array([2.0]), np.array([-2.0]), quadratic(), [2.0])
        assert float(value) == pytest.approx(4.0)

    def test_consistent(self, rng):
        spec = make_case('burgers', 3).hamiltonian()
        q = rng.standard_normal((50, 3))
        np.testing.assert_allclose(lax_friedrichs_hamiltonian(q, q, spec, [3.0] * 3), spec(q), atol=1e-13)

    def test_linear_is_upwind(self, rng):
        c = np.array([0.7, 1.3])
        p1, p2 = rng.standard_normal((2, 40, 2))
        value = lax_friedrichs_hamiltonian(p1, p2, linear(c), np.abs(c))
        np.testing.assert_allclose(value, p1 @ c, atol=1e-13)

    def test_monotone(self, rng):
        spec = quadratic(2)
        p1, p2 = rng.uniform(-1, 1, (2, 30, 2))
        step = np.zeros_like(p1)
        step[:, 0] = 1e-3
        alpha = [2.5, 2.5]
        base = lax_friedrichs_hamiltonian(p1, p2, spec, alpha)
        assert np.all(lax_friedrichs_hamiltonian(p1 + step, p2, spec, alpha) >= base)
        assert np.all(lax_friedrichs_hamiltonian(p1, p2 + step, spec, alpha) <= base)

    def test_non_finite_values(self):
        with pytest.raises(NumericalInstabilityError):
            lax_friedrichs_hamiltonian(np.array([np.inf]), np.array([0.0]), quadratic(), [1.0])


class TestRegularization:

    def test_norm_blend(self):
        kernels = Kernels(0.1)
        assert float(kernels.norm(np.zeros(2))) == pytest.approx(0.05)
        assert float(kernels.norm(np.array([0.06, 0.08]))) == pytest.approx(0.1)
        assert float(kernels.norm(np.array([0.6, 0.8]))) == pytest.approx(1.0)

    def test_norm_is_c1(self):
        kernels = Kernels(0.1)
        direction = np.array([0.6, 0.8])
        inside, outside = (0.1 - 1e-9) * direction, (0.1 + 1e-9) * direction
        assert float(kernels.norm(inside)) == pytest.approx(float(kernels.norm(outside)), abs=1e-8)
        np.testing.assert_allclose(kernels.norm_gradient(inside), kernels.norm_gradient(outside), atol=1e-7)

    def test_abs_blend(self):
        kernels = Kernels(0.2)
        np.testing.assert_allclose(kernels.abs(np.array([0.0, 0.2, -0.2, 2.0])), [0.1, 0.2, 0.2, 2.0])
        np.testing.assert_allclose(kernels.abs_prime(np.array([0.1, -0.2, 3.0])), [0.5, -1.0, 1.0])

    def test_exact_kernels(self):
        kernels = Kernels()
        assert float(kernels.norm(np.array([3.0, 4.0]))) == 5.0
        np.testing.assert_allclose(kernels.norm_gradient(np.zeros((1, 2))), 0.0)

    def test_width_is_twice_the_mesh_size(self):
        spec = regularize(make_case('eikonal', 2).hamiltonian(), 1.0 / 64)
        assert spec.delta == pytest.approx(1.0 / 32)
        assert float(spec(np.zeros(2))) == pytest.approx(1.0 / 64)

    def test_smooth_hamiltonians_are_unchanged(self):
        spec = make_case('burgers', 2).hamiltonian()
        assert regularize(spec, 0.01) is spec


class TestAlpha:

    def test_analytic_bound_wins(self, rng):
        spec = make_case('burgers', 2).hamiltonian()
        p = rng.standard_normal((10, 2))
        np.testing.assert_allclose(estimate_alpha(p, p, spec), [2.0, 2.0])

    def test_linear_hamiltonian(self, rng):
        spec = linear([0.5, -2.0])
        p1, p2 = rng.standard_normal((2, 10, 2))
        np.testing.assert_allclose(estimate_alpha(p1, p2, spec), [0.5, 2.0])
        np.testing.assert_allclose(estimate_alpha(p1, p2, spec, mode='sampled'), [0.55, 2.2])

    def test_sampled_quadratic(self):
        p1 = np.array([[1.0, -3.0]])
        p2 = np.array([[2.0, 0.0]])
        np.testing.assert_allclose(estimate_alpha(p1, p2, quadratic(2), mode='sampled', safety=1.0), [2.0, 3.0])

    def test_floor(self):
        zero = np.zeros((5, 2))
        np.testing.assert_allclose(estimate_alpha(zero, zero, quadratic(2), mode='sampled'), 1e-12)

    def test_finite_difference_gradient(self):
        spec = HamiltonianSpec("cubic", 1, lambda q, x, kernels: q[..., 0] ** 3 / 3.0)
        np.testing.assert_allclose(estimate_alpha(np.array([[2.0]]), np.array([[-1.0]]), spec,
                                                  mode='sampled', safety=1.0), [4.0], rtol=1e-6)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            estimate_alpha(np.zeros((1, 1)), np.zeros((1, 1)), quadratic(), mode='guess')
