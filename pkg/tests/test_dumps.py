import numpy as np
import pandas as pd
import pytest

from basis.alpert import project_L2
from basis.tables import build_flux_deriv_table
from config.settings import Config
from mra.field import HierCoeffField
from mra.index import levels_array, translations_array
from mra.space import AdaptiveSpace
from processors.dumps import (ResultWriter, active_frame, field_frame, heap_indices, read_field, read_samples,
                              sample_axes, support_bounds, support_centers, table_frame)


@pytest.fixture
def writer():
    return ResultWriter(Config())


class TestFrames:

    def test_heap_indices_invert_the_split(self):
        indices = np.arange(64).reshape(32, 2)
        np.testing.assert_array_equal(heap_indices(levels_array(indices), translations_array(indices)), indices)

    def test_field_frame_layout(self, random_field):
        u = random_field(AdaptiveSpace.sparse_grid(2, 2), 1)
        frame = field_frame(u)
        assert list(frame.columns) == ['l1', 'l2', 'j1', 'j2', 'i1', 'i2', 'coefficient']
        assert len(frame) == u.dof
        assert frame.iloc[1][['i1', 'i2']].tolist() == [0, 1]

    def test_field_round_trip(self, tmp_path, writer, random_field):
        u = random_field(AdaptiveSpace.root(2, 4).with_elements([[9, 3], [1, 6]]), 2)
        path = str(tmp_path / 'field.csv')
        writer.write_field(u, path)
        v = read_field(path, 4, 2)
        np.testing.assert_array_equal(v.space.indices, u.space.indices)
        np.testing.assert_array_equal(v.coeffs, u.coeffs)

    def test_active_frame(self):
        space = AdaptiveSpace.sparse_grid(2, 3)
        phi = HierCoeffField.zeros(space, 0)
        phi.coeffs[space.row_of((2, 1)), 0, 0] = -0.25
        frame = active_frame(phi)
        assert list(frame.columns) == ['l1', 'l2', 'j1', 'j2', 'indicator']
        row = frame[(frame['l1'] == 2) & (frame['l2'] == 1) & (frame['j1'] == 0)]
        assert row['indicator'].tolist() == [0.25]

    def test_table_frame_keeps_nonzeros(self):
        table = build_flux_deriv_table(1, 2, 0, 'periodic')
        frame = table_frame(table)
        assert len(frame) == np.count_nonzero(table.matrix)
        assert set(frame['row_degree']) == {0}
        dense = np.zeros_like(table.matrix)
        dense[frame['row_cell'], frame['col_cell']] = frame['value']
        np.testing.assert_array_equal(dense, table.matrix)

    def test_support_centers(self):
        centers = support_centers(np.array([[0, 1], [2, 5]]))
        np.testing.assert_allclose(centers, [[0.5, 0.5], [0.25, 0.375]])

    def test_support_bounds(self):
        lower, upper = support_bounds(np.array([[0, 1], [2, 5]]))
        np.testing.assert_allclose(lower, [[0.0, 0.0], [0.0, 0.25]])
        np.testing.assert_allclose(upper, [[1.0, 1.0], [0.5, 0.5]])


class TestSamples:

    def test_axes(self):
        axes = sample_axes(3, 5)
        np.testing.assert_allclose(axes[0], [0.0, 0.25, 0.5, 0.75, 1.0])
        np.testing.assert_allclose(axes[2], [0.0])

    def test_two_dimensional_dump(self, tmp_path, writer):
        phi = project_L2(lambda x: x[..., 0] + 2 * x[..., 1], AdaptiveSpace.sparse_grid(2, 3), 1)
        path = str(tmp_path / 'solution.txt')
        writer.write_solution(phi, path)
        samples = read_samples(path, 2)
        assert len(samples) == 129 ** 2
        np.testing.assert_allclose(samples['value'], samples['x1'] + 2 * samples['x2'], atol=1e-9)

    def test_three_dimensional_cut(self, writer):
        phi = project_L2(lambda x: x[..., 2] + x[..., 0], AdaptiveSpace.sparse_grid(3, 2), 1)
        samples = writer.sample(phi, points=17)
        assert list(samples.columns) == ['x1', 'x2', 'x3', 'value']
        assert len(samples) == 17 ** 2
        assert (samples['x3'] == 0.0).all()
        np.testing.assert_allclose(samples['value'], samples['x1'], atol=1e-12)

    def test_controls(self, tmp_path, writer):
        space = AdaptiveSpace.sparse_grid(2, 2)
        p = project_L2(lambda x: x[..., 1] - 0.5, space, 1)
        path = str(tmp_path / 'controls.txt')
        writer.write_controls(p, p, path)
        samples = read_samples(path, 2)
        expected = np.sign(samples['x2'] - 0.5)
        np.testing.assert_allclose(samples['value'][samples['x2'] != 0.5], expected[samples['x2'] != 0.5])

    def test_trace_and_table(self, tmp_path, writer):
        trace = pd.DataFrame({'step': [1, 2], 't': [0.1, 0.2]})
        path = str(tmp_path / 'out' / 'trace.csv')
        writer.write_trace(trace, path)
        pd.testing.assert_frame_equal(pd.read_csv(path), trace)
