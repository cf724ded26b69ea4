import numpy as np
import pytest

from benchmarks.cases import CASES, make_case
from benchmarks.references import boxes_near_kinks
from utils.errors import ConfigurationError, ReferenceSolutionError

TWO_PI = 2 * np.pi


def pde_residual(case, x, t, step=1e-4):
    """phi_t + H(grad phi) by central differences of the reference"""
    phi_t = (case.reference(x, t + step) - case.reference(x, t - step)) / (2 * step)
    gradient = []
    for m in range(case.dim):
        shift = np.zeros(case.dim)
        shift[m] = step
        gradient.append((case.reference(x + shift, t) - case.reference(x - shift, t)) / (2 * step))
    return phi_t + case.hamiltonian()(np.stack(gradient, axis=-1), x)


class TestRegistry:

    def test_all_cases_registered(self):
        assert set(CASES) == {'burgers', 'cos', 'nonlinear2d', 'eikonal', 'hjb', 'control'}

    def test_unknown_case(self):
        with pytest.raises(ConfigurationError):
            make_case('wave', 2)

    def test_unsupported_dimension(self):
        with pytest.raises(ConfigurationError):
            make_case('nonlinear2d', 3)

    def test_default_interpolation_degree(self):
        assert make_case('burgers', 2).default_m(1) == 1
        assert make_case('eikonal', 2).default_m(2) == 3
        assert make_case('hjb', 2).default_m(3) == 5
        assert make_case('control', 2).default_m(0) == 2

    def test_defaults(self):
        assert make_case('burgers', 3).t_final() == 0.005
        assert make_case('eikonal', 2).bc == 'outflow'
        assert make_case('cos', 2).bc == 'periodic'
        assert not make_case('control', 2).has_reference


class TestClosedForms:

    def test_eikonal_at_center(self):
        assert float(make_case('eikonal', 2).exact(np.array([0.5, 0.5]), 0.0)) == pytest.approx(-1.0 / 16)

    def test_eikonal_inside_the_front(self):
        case = make_case('eikonal', 3)
        assert float(case.exact(np.array([0.55, 0.5, 0.5]), 0.1)) == pytest.approx(-1.0 / 16)

    def test_hjb_example(self):
        assert float(make_case('hjb', 2).exact(np.array([0.9, 0.5]), 0.1)) == pytest.approx(0.2975)

    @pytest.mark.parametrize("name", ['eikonal', 'hjb'])
    def test_initial_time(self, rng, name):
        case = make_case(name, 3)
        x = rng.random((20, 3))
        np.testing.assert_allclose(case.exact(x, 0.0), case.initial_condition(x), atol=1e-15)

    def test_control_has_no_solution(self):
        case = make_case('control', 2)
        with pytest.raises(ReferenceSolutionError):
            case.reference(np.zeros((1, 2)), 0.1)

    def test_control_initial_state_and_controls(self):
        case = make_case('control', 2)
        np.testing.assert_allclose(case.initial_condition(np.ones((3, 4, 2))), np.zeros((3, 4)))
        np.testing.assert_allclose(case.controls(np.array([-0.2, 0.0, 3.0])), [-1.0, 0.0, 1.0])


class TestCharacteristicReferences:

    @pytest.mark.parametrize("name", ['burgers', 'cos', 'nonlinear2d'])
    def test_initial_time(self, rng, name):
        case = make_case(name, 2)
        x = rng.random((20, 2))
        np.testing.assert_allclose(case.reference(x, 0.0), case.initial_condition(x))

    def test_burgers_along_characteristics(self, rng):
        case = make_case('burgers', 1)
        t = 0.1
        x0 = rng.random(30)
        p0 = np.sin(TWO_PI * x0)
        x = x0 + t * p0
        expected = -np.cos(TWO_PI * x0) / TWO_PI + 0.5 * t * p0 ** 2
        np.testing.assert_allclose(case.reference(x[:, None], t), expected, atol=1e-12)

    def test_depends_on_the_sum_only(self, rng):
        case = make_case('cos', 3)
        x = rng.random((10, 3))
        shifted = x + np.array([0.2, -0.3, 0.1])
        np.testing.assert_allclose(case.reference(x, 0.004), case.reference(x[:, ::-1], 0.004), atol=1e-13)
        np.testing.assert_allclose(case.reference(x, 0.004), case.reference(shifted, 0.004), atol=1e-13)

    @pytest.mark.parametrize("name", ['burgers', 'cos', 'nonlinear2d'])
    def test_solves_the_equation(self, rng, name):
        case = make_case(name, 2)
        x = rng.random((10, 2))
        np.testing.assert_allclose(pde_residual(case, x, 0.01), 0.0, atol=1e-4)

    def test_crossed_characteristics(self):
        case = make_case('burgers', 2)
        assert case.reduced().crossing_time() == pytest.approx(1.0 / (8 * np.pi), rel=1e-6)
        with pytest.raises(ReferenceSolutionError):
            case.reference(np.full((1, 2), 0.3), case.post_kink_time)

    def test_planar_characteristics_cross(self):
        case = make_case('nonlinear2d', 2)
        assert case.crossing_time < case.post_kink_time
        with pytest.raises(ReferenceSolutionError):
            case.reference(np.full((1, 2), 0.3), case.post_kink_time)

    def test_kink_at_onset(self):
        case = make_case('burgers', 2)
        assert case.kink_intervals(0.01) == []
        (a, b), = case.kink_intervals(case.post_kink_time)
        assert a == pytest.approx(0.5, abs=1e-3)
        assert b == pytest.approx(0.5, abs=1e-3)

    def test_kink_interval_after_crossing(self):
        intervals = make_case('burgers', 2).kink_intervals(0.08)
        assert len(intervals) == 1
        a, b = intervals[0]
        assert a < 0.5 < b

    def test_boxes_near_kinks(self):
        lower = np.array([[0.0, 0.0], [0.5, 0.5], [0.0, 0.5], [0.75, 0.0]])
        upper = np.array([[0.125, 0.125], [0.625, 0.625], [1.0, 0.625], [0.875, 0.125]])
        # sum(x) ranges: [0, 0.25], [1, 1.25], [0.5, 1.625], [0.75, 1.0]
        near = boxes_near_kinks(lower, upper, [(0.5, 0.5)], margin=0.1)
        assert near.tolist() == [False, False, True, False]
        assert boxes_near_kinks(lower, upper, [(0.1, 0.2)]).tolist() == [True, True, True, False]
        assert not boxes_near_kinks(lower, upper, []).any()
