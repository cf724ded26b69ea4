import numpy as np
import pytest

from analyzers.convergence import ConvergenceRow, evaluate_on_grid, l2_error, rates, rows_to_frame
from basis.alpert import project_L2, reconstruct
from mra.field import HierCoeffField
from mra.space import AdaptiveSpace

TWO_PI = 2 * np.pi


def wave(x):
    return np.sin(TWO_PI * x[..., 0]) * np.cos(TWO_PI * x[..., 1])


class TestRates:

    def test_by_eps(self):
        rows = rates([ConvergenceRow(1e-3, 448, 1.56e-3), ConvergenceRow(1e-4, 1376, 6.92e-4)], mode='by_eps')
        assert rows[1].rate_eps == pytest.approx(0.35, abs=0.01)
        assert rows[1].rate_dof == pytest.approx(0.73, abs=0.01)
        assert rows[0].rate_eps is None

    def test_by_eps_example(self):
        rows = rates([ConvergenceRow(1e-4, 1000, 1e-3), ConvergenceRow(1e-5, 2000, 4.46e-4)], mode='by_eps')
        assert rows[1].rate_eps == pytest.approx(0.35, abs=0.01)
        assert rows[1].rate_dof == pytest.approx(1.165, abs=0.01)

    def test_by_level(self):
        rows = rates([ConvergenceRow(3, 100, 1.176e-2), ConvergenceRow(4, 200, 5.88e-3),
                      ConvergenceRow(5, 400, 2.42e-3)])
        assert rows[1].order == pytest.approx(1.0)
        assert rows[2].order == pytest.approx(1.28, abs=0.01)

    def test_level_gaps(self):
        rows = rates([ConvergenceRow(3, 100, 0.4), ConvergenceRow(5, 200, 0.025)])
        assert rows[1].order == pytest.approx(2.0)

    def test_unchanged_dof(self):
        rows = rates([ConvergenceRow(1e-3, 100, 0.1), ConvergenceRow(1e-4, 100, 0.05)], mode='by_eps')
        assert np.isnan(rows[1].rate_dof)

    def test_invalid_input(self):
        with pytest.raises(ValueError):
            rates([ConvergenceRow(3, 100, 0.1)])
        with pytest.raises(ValueError):
            rates([ConvergenceRow(3, 100, 0.1), ConvergenceRow(4, 200, 0.0)])
        with pytest.raises(ValueError):
            rates([ConvergenceRow(3, 100, 0.1), ConvergenceRow(4, 200, 0.05)], mode='by_dof')

    def test_frames(self):
        rows = rates([ConvergenceRow(3, 100, 0.1), ConvergenceRow(4, 200, 0.05)])
        assert list(rows_to_frame(rows).columns) == ['N', 'dof', 'L2_error', 'order']
        rows = rates([ConvergenceRow(1e-3, 100, 0.1), ConvergenceRow(1e-4, 200, 0.05)], mode='by_eps')
        assert list(rows_to_frame(rows, 'by_eps').columns) == ['eps', 'dof', 'L2_error', 'R_eps', 'R_DoF']


class TestGridEvaluation:

    def test_matches_direct_summation(self, rng, random_field):
        u = random_field(AdaptiveSpace.root(2, 3).with_elements([[5, 1], [2, 3], [4, 0]]), 2)
        nodes = [rng.random(7), rng.random(5)]
        values = evaluate_on_grid(u, nodes)
        grid = np.stack(np.meshgrid(*nodes, indexing='ij'), axis=-1).reshape(-1, 2)
        np.testing.assert_allclose(values.ravel(), reconstruct(u, grid), atol=1e-12)

    def test_three_dimensions(self, rng, random_field):
        u = random_field(AdaptiveSpace.sparse_grid(3, 2), 1)
        nodes = [rng.random(3), rng.random(4), rng.random(2)]
        values = evaluate_on_grid(u, nodes)
        assert values.shape == (3, 4, 2)
        grid = np.stack(np.meshgrid(*nodes, indexing='ij'), axis=-1).reshape(-1, 3)
        np.testing.assert_allclose(values.ravel(), reconstruct(u, grid), atol=1e-12)

    def test_right_boundary_uses_left_traces(self):
        u = HierCoeffField(AdaptiveSpace.full_grid(1, 1), np.array([[0.5], [-0.5]]), 0)
        np.testing.assert_allclose(evaluate_on_grid(u, [np.array([0.0, 1.0])]), [1.0, 0.0], atol=1e-14)

    def test_wrong_number_of_axes(self, random_field):
        with pytest.raises(ValueError):
            evaluate_on_grid(random_field(AdaptiveSpace.sparse_grid(2, 2), 1), [np.zeros(3)])


class TestL2Error:

    def test_own_reconstruction(self, random_field):
        u = random_field(AdaptiveSpace.sparse_grid(2, 3), 1)
        reference = lambda x: reconstruct(u, x.reshape(-1, 2)).reshape(x.shape[:-1])
        assert l2_error(u, reference) == pytest.approx(0.0, abs=1e-12)

    def test_constant_reference(self):
        phi = HierCoeffField.zeros(AdaptiveSpace.sparse_grid(2, 2), 1)
        assert l2_error(phi, lambda x: np.ones(x.shape[:-1])) == pytest.approx(1.0)

    def test_matches_orthogonality(self):
        space = AdaptiveSpace.sparse_grid(2, 4)
        phi = project_L2(wave, space, 1, quadrature_points=8)
        expected = np.sqrt(0.25 - phi.norm() ** 2)
        assert l2_error(phi, wave, quadrature_points=8) == pytest.approx(expected, rel=1e-6)

    def test_zero_elements_change_nothing(self):
        space = AdaptiveSpace.sparse_grid(2, 3)
        phi = project_L2(wave, space, 1)
        enlarged = space.with_elements([[2, 2]])
        assert l2_error(phi.transfer(enlarged), wave) == pytest.approx(l2_error(phi, wave), rel=1e-12)

    def test_enriched_space_fallback(self, caplog):
        space = AdaptiveSpace.sparse_grid(2, 3)
        phi = project_L2(wave, space, 1)
        error = l2_error(phi, wave, max_points=100)
        assert 'enriched space' in caplog.text
        assert error == pytest.approx(l2_error(phi, wave), rel=0.2)
