"""Refinement and coarsening driven by Alpert coefficient block norms"""
import logging
from typing import Callable, Tuple

import numpy as np

from basis.alpert import project_L2
from mra.field import HierCoeffField
from mra.space import AdaptiveSpace, KeyLike

logger = logging.getLogger(__name__)


def block_indicators(phi: HierCoeffField, scaled: bool = False) -> np.ndarray:
    """Per-element L2 norms of the coefficient blocks"""
    norms = phi.block_norms()
    if scaled:
        # sup-norm scale of a detail block
        levels = phi.space.levels
        norms = norms * np.prod(2.0 ** (0.5 * np.maximum(levels - 1, 0)), axis=1)
    return norms


def element_indicator(phi: HierCoeffField, e: KeyLike, scaled: bool = False) -> float:
    """L2 norm of the detail contribution of one active element"""
    row = phi.space.row_of(e)
    block = phi.coeffs[row]
    value = float(np.sqrt(np.sum(block ** 2)))
    if scaled:
        levels = phi.space.levels[row]
        value *= float(np.prod(2.0 ** (0.5 * np.maximum(levels - 1, 0))))
    return value


def refine(phi: HierCoeffField, space: AdaptiveSpace, cfg) -> Tuple[HierCoeffField, AdaptiveSpace]:
    """Activate every child of each element whose indicator exceeds eps"""
    if not cfg.enabled:
        return phi, space
    current, field = space, phi
    while True:
        indicators = block_indicators(field, cfg.scaled_indicator)
        below_cap = current.levels.max(axis=1) < current.max_level
        marked = np.flatnonzero((indicators > cfg.eps) & below_cap)
        candidates = current.children_indices(marked)
        missing = candidates[current.rows_of(candidates) < 0] if candidates.size else candidates
        if not missing.size:
            break
        current = current.with_elements(missing)
        field = field.transfer(current)
    if current.size != space.size:
        logger.debug(f"Refined {space.size} -> {current.size} elements")
    return field, current


def coarsen(phi: HierCoeffField, space: AdaptiveSpace, cfg) -> Tuple[HierCoeffField, AdaptiveSpace]:
    """Remove leaves with indicator below eta until none remain; the root stays"""
    if not cfg.enabled:
        return phi, space
    eta = cfg.coarsen_threshold
    current, field = space, phi
    while True:
        indicators = block_indicators(field, cfg.scaled_indicator)
        not_root = current.indices.any(axis=1)
        removable = np.flatnonzero(current.leaf_mask() & (indicators < eta) & not_root)
        if not removable.size:
            break
        current = current.without_rows(removable)
        field = field.transfer(current)
    if current.size != space.size:
        logger.debug(f"Coarsened {space.size} -> {current.size} elements")
    return field, current


def adaptive_initial_projection(f: Callable[[np.ndarray], np.ndarray], dim: int, k: int, max_level: int,
                                cfg, quadrature_points: int = None) -> Tuple[HierCoeffField, AdaptiveSpace]:
    """Project onto a space grown from the root until refinement stops, then coarsen once"""
    space = AdaptiveSpace.root(dim, max_level)
    while True:
        phi = project_L2(f, space, k, quadrature_points)
        _, refined = refine(phi, space, cfg)
        if refined.size == space.size:
            break
        space = refined
    phi, space = coarsen(phi, space, cfg)
    logger.info(f"Initial adaptive projection: {space.size} elements, finest level {space.finest_level()}")
    return phi, space
