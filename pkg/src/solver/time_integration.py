"""Third-order SSP Runge-Kutta time stepping with the predict/step/coarsen cycle"""
import logging
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from mra.field import HierCoeffField
from mra.space import AdaptiveSpace
from solver.adaptivity import coarsen, element_indicator, refine
from utils.errors import NumericalInstabilityError

logger = logging.getLogger(__name__)

Operator = Callable[..., HierCoeffField]


@dataclass
class StepRecord:
    """One row of the time trace"""
    step: int
    t: float
    dt: float
    dof: int
    elements: int
    alpha_sum: float
    error: Optional[float] = None


def _check_finite(u: HierCoeffField, stage: str, start: HierCoeffField) -> None:
    if u.is_finite():
        return
    rows = np.flatnonzero(~np.isfinite(u.coeffs.reshape(u.space.size, -1)).all(axis=1))
    keys = u.space.indices[rows]
    raise NumericalInstabilityError(f"Non-finite coefficients after RK stage {stage}", elements=keys,
                                    indicator_at_step_start=[element_indicator(start, key) for key in keys])


def ssp_rk3_step(phi: HierCoeffField, space: AdaptiveSpace, operator: Operator, dt: float,
                 alpha: Optional[Sequence[float]] = None) -> HierCoeffField:
    """Shu-Osher form; all stages on `space` and with the same alpha"""
    if dt <= 0:
        raise ValueError(f"Time step must be positive, got {dt}")

    u1 = phi + dt * operator(phi, space, alpha)
    _check_finite(u1, "1", phi)
    u2 = 0.75 * phi + 0.25 * (u1 + dt * operator(u1, space, alpha))
    _check_finite(u2, "2", phi)
    result = (1.0 / 3.0) * phi + (2.0 / 3.0) * (u2 + dt * operator(u2, space, alpha))
    _check_finite(result, "3", phi)
    return result


def choose_dt(space: AdaptiveSpace, alpha: Sequence[float], cfg, remaining: Optional[float] = None) -> float:
    """cfl * 2^-L / sum(alpha) with L the finest active level, clipped to the remaining time"""
    h = 2.0 ** -space.finest_level()
    if cfg.dt_override is not None:
        dt = float(cfg.dt_override)
    else:
        total = float(np.sum(alpha))
        dt = cfg.cfl * h / total if total > 1e-10 else cfg.cfl * h
    if remaining is not None:
        dt = min(dt, remaining)
    return dt


def predict_space(phi: HierCoeffField, space: AdaptiveSpace, operator, time_cfg, adapt_cfg,
                  remaining: Optional[float] = None) -> Tuple[HierCoeffField, AdaptiveSpace]:
    """Refine by the current coefficients, then by those of a forward Euler trial step until stable.

    The trial field is discarded; only the space it selects is kept. With
    `adapt_cfg.predictor` off this is a plain `refine`.
    """
    phi, space = refine(phi, space, adapt_cfg)
    if not adapt_cfg.enabled or not adapt_cfg.predictor:
        return phi, space
    while True:
        alpha = operator.alpha(phi, space)
        dt = choose_dt(space, alpha, time_cfg, remaining)
        trial = phi + dt * operator(phi, space, alpha)
        _, predicted = refine(trial, space, adapt_cfg)
        if predicted.size == space.size:
            return phi, space
        logger.debug(f"Trial step added {predicted.size - space.size} elements")
        space = predicted
        phi = phi.transfer(space)


def evolve(phi0: HierCoeffField, space0: AdaptiveSpace, operator, time_cfg, adapt_cfg,
           t_final: Optional[float] = None,
           hooks: Iterable[Callable[[StepRecord, HierCoeffField, AdaptiveSpace], None]] = (),
           error_fn: Optional[Callable[[float, HierCoeffField, AdaptiveSpace], float]] = None,
           t_start: float = 0.0) -> Tuple[HierCoeffField, AdaptiveSpace, pd.DataFrame]:
    """Advance from t_start to t_final with predict -> step -> coarsen per step.

    `operator` provides `alpha(phi, space)` and `__call__(phi, space, alpha)`.
    DoF and element counts in the trace are those of the space the step ran
    on. Hooks receive every StepRecord with the coarsened state; `error_fn`,
    when given, fills the error column of the trace.
    """
    t_final = t_final if t_final is not None else time_cfg.t_final
    if t_final is None or t_final <= t_start:
        raise ValueError(f"Final time must exceed the start time {t_start}, got {t_final}")
    hooks = list(hooks)

    phi, space = phi0, space0
    t, step = t_start, 0
    records: List[StepRecord] = []
    while t_final - t > 1e-14 * max(1.0, t_final):
        remaining = t_final - t
        phi, space = predict_space(phi, space, operator, time_cfg, adapt_cfg, remaining)
        alpha = operator.alpha(phi, space)
        dt = choose_dt(space, alpha, time_cfg, remaining)
        phi = ssp_rk3_step(phi, space, operator, dt, alpha)
        t = t_final if dt >= remaining else t + dt
        step += 1
        record = StepRecord(step, t, dt, space.dof(phi.degree), space.size, float(np.sum(alpha)))
        phi, space = coarsen(phi, space, adapt_cfg)

        if error_fn is not None:
            record.error = error_fn(t, phi, space)
        records.append(record)
        logger.debug(f"step {step}: t={t:.6g} dt={dt:.3e} DoF={record.dof} sum(alpha)={record.alpha_sum:.4g}")
        for hook in hooks:
            hook(record, phi, space)

    logger.info(f"Reached t={t:.6g} in {step} steps, {space.size} elements")
    trace = pd.DataFrame([asdict(r) for r in records],
                         columns=['step', 't', 'dt', 'dof', 'elements', 'alpha_sum', 'error'])
    return phi, space, trace
