"""Solver-scale runs against published error levels; run with `pytest -m slow`"""
import numpy as np
import pandas as pd
import pytest

import main as cli
from analyzers.convergence import ConvergenceRow, rates
from benchmarks.cases import make_case
from benchmarks.references import boxes_near_kinks
from config.settings import Config
from processors.dumps import heap_indices, read_samples, support_bounds
from utils.errors import NumericalInstabilityError

pytestmark = pytest.mark.slow


def run(**values):
    config = Config().apply(values)
    config.parallel_processing = False
    return cli.HJSGPipeline(config, configure_logging=False).run()


def sweep(levels=(), thresholds=(), **values):
    config = Config().apply(values)
    config.parallel_processing = False
    return cli.run_sweep(config, list(levels), list(thresholds))


@pytest.mark.parametrize("k,m,published", [
    (1, 2, [1.99e-2, 5.88e-3, 2.42e-3, 8.27e-4]),
    (2, 3, [2.84e-3, 3.75e-4, 1.42e-4, 1.97e-5]),
])
def test_burgers_sparse_grid_table(k, m, published):
    table = sweep(levels=range(3, 7), case='burgers', dim=2, k=k, m=m, mode='sparse', t_final=0.01)
    errors = table['L2_error'].to_numpy()
    assert np.all(errors < 3 * np.asarray(published))
    assert np.all(errors > np.asarray(published) / 3)
    if k == 1:
        reference = rates([ConvergenceRow(n, 1, e) for n, e in zip(range(3, 7), published)])
        expected = [row.order for row in reference[1:]]
        np.testing.assert_allclose(table['order'].to_numpy()[1:], expected, atol=0.5)


@pytest.mark.parametrize("k,dof_at_1e5", [(1, 3520), (2, 1548)])
def test_burgers_adaptive_bands(k, dof_at_1e5):
    table = sweep(levels=[7], thresholds=[1e-3, 1e-4, 1e-5, 1e-6, 1e-7], case='burgers', dim=2, k=k, m=k,
                  t_final=0.01)
    errors = table['L2_error'].to_numpy()
    assert np.all(np.diff(errors) < 0)
    assert np.all((table['R_eps'].iloc[1:] > 0.1) & (table['R_eps'].iloc[1:] < 1.3))
    dof = int(table.loc[np.isclose(table['eps'], 1e-5), 'dof'].iloc[0])
    assert dof_at_1e5 / 4 < dof < 4 * dof_at_1e5


def test_eikonal_adaptive():
    summary = run(case='eikonal', dim=2, k=2, m=3, mode='adaptive', eps=1e-5, max_level=7, t_final=0.1)
    assert summary.L2_error <= 3 * 1.09e-3


def test_hjb_three_dimensions():
    summary = run(case='hjb', dim=3, k=2, m=4, mode='adaptive', eps=1e-5, max_level=6, t_final=0.1)
    assert summary.L2_error <= 3 * 7.89e-4


def test_hjb_four_dimensions():
    summary = run(case='hjb', dim=4, k=1, m=3, mode='adaptive', eps=1e-4, max_level=5, t_final=0.1)
    assert summary.L2_error <= 3 * 2.60e-3


def test_reference_matches_fine_full_grid():
    summary = run(case='burgers', dim=1, k=2, mode='full', max_level=10, t_final=0.01)
    assert summary.L2_error <= 1e-6


def test_control_run_completes(tmp_path):
    controls = str(tmp_path / 'controls.txt')
    summary = run(case='control', dim=2, k=2, m=4, mode='adaptive', eps=1e-5, max_level=6,
                  dump_controls=controls, dump_active=str(tmp_path / 'active.csv'))
    assert summary.L2_error is None
    assert summary.elements > 1
    assert (tmp_path / 'controls.txt').exists()


@pytest.mark.parametrize("case,dim,t_final", [
    ('burgers', 2, 0.04),
    ('cos', 2, 0.06),
    ('nonlinear2d', 2, 0.2),
    ('control', 2, 0.15),
])
def test_dumps_stay_finite_past_the_kink(tmp_path, case, dim, t_final):
    solution, active = str(tmp_path / 'solution.txt'), str(tmp_path / 'active.csv')
    summary = run(case=case, dim=dim, k=1, mode='adaptive', eps=1e-4, max_level=6, t_final=t_final,
                  dump_solution=solution, dump_active=active)
    assert np.isfinite(read_samples(solution, dim)['value']).all()
    frame = pd.read_csv(active)
    assert len(frame) == summary.elements
    assert np.isfinite(frame['indicator']).all()
    assert frame[['l1', 'l2']].max().max() > 1


@pytest.mark.parametrize("case,t_final", [('burgers', 0.04), ('cos', 0.06)])
def test_finest_elements_gather_at_the_kink(tmp_path, case, t_final):
    active = str(tmp_path / 'active.csv')
    run(case=case, dim=2, k=2, m=2, mode='adaptive', eps=1e-5, max_level=6, t_final=t_final, dump_active=active)
    frame = pd.read_csv(active)
    levels, translations = frame[['l1', 'l2']].to_numpy(), frame[['j1', 'j2']].to_numpy()
    finest = levels.max(axis=1) == 6
    assert finest.any()
    lower, upper = support_bounds(heap_indices(levels[finest], translations[finest]))
    intervals = make_case(case, 2).kink_intervals(t_final)
    assert intervals
    assert boxes_near_kinks(lower, upper, intervals, margin=2.0 ** -4).mean() >= 0.6


def test_regularization_keeps_the_eikonal_run_finite():
    values = dict(case='eikonal', dim=2, k=2, m=3, mode='adaptive', eps=1e-5, max_level=6, t_final=0.1)
    summary = run(**values)
    assert summary.L2_error is not None and np.isfinite(summary.L2_error)
    with pytest.raises(NumericalInstabilityError):
        run(regularize=False, **values)
