"""CSV and whitespace dumps of fields, active sets, traces and tables"""
import logging
import os
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from analyzers.convergence import evaluate_on_grid
from mra.field import BasisFamily, HierCoeffField
from mra.index import levels_array, translations_array
from mra.space import AdaptiveSpace
from mra.unidirectional import Table1D
from solver.adaptivity import block_indicators
from utils.errors import element_frame
from utils.helpers import atomic_write


def sample_axes(dim: int, points: int = 129) -> Tuple[np.ndarray, ...]:
    """1D sample abscissae per axis; axes beyond the second are cut at x = 0"""
    line = np.linspace(0.0, 1.0, points)
    return tuple(line if axis < 2 else np.zeros(1) for axis in range(dim))


def heap_indices(levels: np.ndarray, translations: np.ndarray) -> np.ndarray:
    """Inverse of the (level, translation) split"""
    levels = np.asarray(levels, dtype=np.int64)
    translations = np.asarray(translations, dtype=np.int64)
    return np.where(levels == 0, 0, (np.int64(1) << np.maximum(levels - 1, 0)) + translations)


def field_frame(u: HierCoeffField) -> pd.DataFrame:
    """One row per (element, degree multi-index) in sorted key order"""
    space, dim = u.space, u.space.dim
    width = u.degree + 1
    n_local = width ** dim
    frame = element_frame(np.repeat(space.indices, n_local, axis=0))
    degrees = np.indices((width,) * dim).reshape(dim, -1).T
    for axis in range(dim):
        frame[f'i{axis + 1}'] = np.tile(degrees[:, axis], space.size)
    frame['coefficient'] = u.coeffs.reshape(-1)
    return frame


def field_from_frame(frame: pd.DataFrame, max_level: int, degree: int,
                     family: BasisFamily = BasisFamily.ALPERT) -> HierCoeffField:
    """Rebuild a field written by field_frame"""
    dim = sum(1 for column in frame.columns if column.startswith('l') and column[1:].isdigit())
    levels = frame[[f'l{m + 1}' for m in range(dim)]].to_numpy()
    translations = frame[[f'j{m + 1}' for m in range(dim)]].to_numpy()
    indices = heap_indices(levels, translations)
    space = AdaptiveSpace(dim, max_level, np.unique(indices, axis=0))

    field = HierCoeffField.zeros(space, degree, family)
    rows = space.rows_of(indices)
    degrees = tuple(frame[f'i{m + 1}'].to_numpy() for m in range(dim))
    field.coeffs[(rows,) + degrees] = frame['coefficient'].to_numpy()
    return field


def active_frame(phi: HierCoeffField, scaled: bool = False) -> pd.DataFrame:
    """Level vector, translation vector and refinement indicator per element"""
    return element_frame(phi.space.indices, indicator=block_indicators(phi, scaled))


def table_frame(table: Table1D) -> pd.DataFrame:
    """Nonzero entries of a 1D operator table in long form"""
    n = table.n_cells
    blocks = table.matrix.reshape(n, table.out_width, n, table.in_width)
    row_cell, row_degree, col_cell, col_degree = np.nonzero(blocks)
    return pd.DataFrame({'row_cell': row_cell, 'row_degree': row_degree,
                         'col_cell': col_cell, 'col_degree': col_degree,
                         'value': blocks[row_cell, row_degree, col_cell, col_degree]})


class ResultWriter:
    """Writes run outputs; every file is replaced atomically"""

    def __init__(self, config):
        self.config = config
        self.logger = logging.getLogger(__name__)

    def _write_csv(self, frame: pd.DataFrame, path: str, **kwargs) -> str:
        with atomic_write(path, 'w') as stream:
            frame.to_csv(stream, index=False, **kwargs)
        self.logger.info(f"Wrote {len(frame)} rows to {path}")
        return path

    def sample(self, u: HierCoeffField, points: Optional[int] = None) -> pd.DataFrame:
        """Values on the uniform sample grid with columns x1..xd, value"""
        axes = sample_axes(u.space.dim, points or self.config.output.sample_points)
        values = evaluate_on_grid(u, axes)
        grids = np.meshgrid(*axes, indexing='ij')
        frame = pd.DataFrame({f'x{m + 1}': grid.ravel() for m, grid in enumerate(grids)})
        frame['value'] = values.ravel()
        return frame

    def write_solution(self, phi: HierCoeffField, path: str) -> str:
        """Whitespace-separated x1 ... xd value"""
        return self._write_csv(self.sample(phi), path, sep=' ', header=False, float_format='%.10e')

    def write_controls(self, p1: HierCoeffField, p2: HierCoeffField, path: str) -> str:
        """sign of the averaged x2-derivative on the sample grid"""
        average = 0.5 * (p1 + p2)
        frame = self.sample(average)
        frame['value'] = np.sign(frame['value'])
        return self._write_csv(frame, path, sep=' ', header=False, float_format='%.10e')

    def write_active(self, phi: HierCoeffField, path: str) -> str:
        return self._write_csv(active_frame(phi, self.config.adapt.scaled_indicator), path)

    def write_field(self, u: HierCoeffField, path: str) -> str:
        return self._write_csv(field_frame(u), path, float_format='%.17e')

    def write_trace(self, trace: pd.DataFrame, path: str) -> str:
        return self._write_csv(trace, path)

    def write_table(self, frame: pd.DataFrame, path: str) -> str:
        return self._write_csv(frame, path)

    def write_operator_tables(self, tables, folder: str) -> List[str]:
        """One long-form CSV per 1D operator table of a BasisTables"""
        named = {'flux1': tables.flux(1), 'flux2': tables.flux(2), 'alpert_points': tables.alpert_points,
                 'interp_points': tables.interp_points, 'interp_inverse': tables.interp_inverse,
                 'coupling': tables.coupling}
        return [self._write_csv(table_frame(table), os.path.join(folder, f'{name}.csv'))
                for name, table in named.items()]


def read_field(path: str, max_level: int, degree: int) -> HierCoeffField:
    return field_from_frame(pd.read_csv(path, float_precision='round_trip'), max_level, degree)


def read_samples(path: str, dim: int) -> pd.DataFrame:
    """Read a whitespace sample dump back into x1..xd, value"""
    return pd.read_csv(path, sep=r'\s+', header=None, names=[f'x{m + 1}' for m in range(dim)] + ['value'])


def support_centers(indices: np.ndarray) -> np.ndarray:
    """Midpoints of the element supports, shape (elements, d)"""
    levels = levels_array(indices)
    translations = translations_array(indices)
    return np.where(levels == 0, 0.5, (translations + 0.5) / 2.0 ** np.maximum(levels - 1, 0))


def support_bounds(indices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Lower and upper corners of the element supports, each of shape (elements, d)"""
    levels = levels_array(indices)
    width = 2.0 ** -np.maximum(levels - 1, 0)
    lower = np.where(levels == 0, 0.0, translations_array(indices) * width)
    return lower, lower + width
