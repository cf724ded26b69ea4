"""L2 errors, tensor-grid evaluation and convergence rates"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd

from basis.alpert import build_mother_wavelets, project_L2
from basis.hierarchy import LEFT, RIGHT, uniform_rule
from mra.field import HierCoeffField
from mra.space import AdaptiveSpace

logger = logging.getLogger(__name__)

Reference = Callable[[np.ndarray], np.ndarray]


def grid_size(space: AdaptiveSpace, degree: int, counts: Sequence[int]) -> int:
    """Largest intermediate array built by evaluate_on_grid"""
    width = degree + 1
    largest, points = space.size * width ** space.dim, 1
    for axis, count in enumerate(counts):
        points *= count
        groups = np.unique(space.indices[:, axis + 1:], axis=0).shape[0] if axis + 1 < space.dim else 1
        largest = max(largest, groups * points * width ** (space.dim - axis - 1))
    return largest


def evaluate_on_grid(u: HierCoeffField, nodes: Sequence[np.ndarray],
                     sides: Optional[Sequence[np.ndarray]] = None) -> np.ndarray:
    """Values of an Alpert field on the tensor grid nodes[0] x ... x nodes[d-1].

    One axis at a time, the coefficients are contracted with the 1D basis
    values and summed over elements that share their remaining indices.
    """
    dim = u.space.dim
    if len(nodes) != dim:
        raise ValueError(f"Expected {dim} node arrays, got {len(nodes)}")
    basis = build_mother_wavelets(u.degree)
    level = u.space.finest_level()

    data = u.coeffs
    keys = u.space.indices
    for axis in range(dim):
        x = np.asarray(nodes[axis], dtype=np.float64)
        side = (np.where(x >= 1.0, LEFT, RIGHT) if sides is None else sides[axis])
        table = basis.evaluation_matrix(x, side, level).reshape(x.size, 1 << level, basis.width)

        # data: (rows, P_0, ..., P_{axis-1}, w_axis, ..., w_{d-1})
        moved = np.moveaxis(data, 1 + axis, 1)
        local = table[:, keys[:, 0], :].transpose(1, 0, 2)
        contributions = np.einsum('npi,ni...->np...', local, moved)
        contributions = np.moveaxis(contributions, 1, 1 + axis)

        remaining = keys[:, 1:]
        if remaining.shape[1]:
            groups, inverse = np.unique(remaining, axis=0, return_inverse=True)
            inverse = inverse.reshape(-1)
        else:
            groups, inverse = np.zeros((1, 0), dtype=np.int64), np.zeros(keys.shape[0], dtype=np.int64)
        order = np.argsort(inverse, kind='stable')
        starts = np.flatnonzero(np.r_[True, np.diff(inverse[order]) != 0])
        data = np.add.reduceat(contributions[order], starts, axis=0)
        keys = groups
    return data[0]


def l2_error(phi: HierCoeffField, reference: Reference, max_points: int = 5_000_000,
             quadrature_points: Optional[int] = None) -> float:
    """||phi - reference||_L2 over [0, 1]^d.

    Tensor Gauss rule with k+3 points per cell of the uniform mesh at the
    finest active level. Above `max_points` the error is measured on the
    space enriched by one level of children.
    """
    space = phi.space
    q = quadrature_points or phi.degree + 3
    level = max(space.finest_level(), 1)
    nodes, weights = uniform_rule(q, level)
    counts = [nodes.size] * space.dim

    if grid_size(space, phi.degree, counts) <= max_points and nodes.size ** space.dim <= max_points:
        values = evaluate_on_grid(phi, [nodes] * space.dim)
        grids = np.meshgrid(*([nodes] * space.dim), indexing='ij')
        exact = np.asarray(reference(np.stack(grids, axis=-1)), dtype=np.float64)
        weight = weights
        for _ in range(space.dim - 1):
            weight = np.multiply.outer(weight, weights)
        return float(np.sqrt(np.sum(weight * (values - exact) ** 2)))

    logger.warning(f"Error quadrature exceeds {max_points} points; measuring on the enriched space")
    enriched = space.with_elements(space.children_indices(np.arange(space.size)))
    projected = project_L2(reference, enriched, phi.degree, quadrature_points)
    difference = phi.transfer(enriched) - projected
    return difference.norm()


@dataclass
class ConvergenceRow:
    """One row of a convergence table; `control` is N or eps"""
    control: float
    dof: int
    error: float
    order: Optional[float] = None
    rate_eps: Optional[float] = None
    rate_dof: Optional[float] = None


def rates(rows: List[ConvergenceRow], mode: str = "by_N") -> List[ConvergenceRow]:
    """Fill observed orders from consecutive rows.

    by_N: order = log2(e_{l-1}/e_l). by_eps: R_eps = log(e_{l-1}/e_l)/log(eps_{l-1}/eps_l)
    and R_DoF = log(e_{l-1}/e_l)/log(DoF_l/DoF_{l-1}).
    """
    if len(rows) < 2:
        raise ValueError("At least two rows are needed to compute rates")
    if mode not in ("by_N", "by_eps"):
        raise ValueError(f"Unknown rate mode {mode!r}")
    for row in rows:
        if not row.error > 0:
            raise ValueError(f"Errors must be positive, got {row.error}")

    for previous, row in zip(rows, rows[1:]):
        ratio = math.log(previous.error / row.error)
        if mode == "by_N":
            row.order = ratio / math.log(2.0) / (row.control - previous.control)
        else:
            row.rate_eps = ratio / math.log(previous.control / row.control)
            row.rate_dof = ratio / math.log(row.dof / previous.dof) if row.dof != previous.dof else math.nan
    return rows


def rows_to_frame(rows: List[ConvergenceRow], mode: str = "by_N") -> pd.DataFrame:
    """Convergence table with the columns used for reporting"""
    frame = pd.DataFrame([asdict(r) for r in rows])
    if mode == "by_N":
        return frame.rename(columns={'control': 'N', 'error': 'L2_error'})[['N', 'dof', 'L2_error', 'order']]
    return frame.rename(columns={'control': 'eps', 'error': 'L2_error', 'rate_eps': 'R_eps',
                                 'rate_dof': 'R_DoF'})[['eps', 'dof', 'L2_error', 'R_eps', 'R_DoF']]
