"""Main entry point for the hjsg solver"""
import argparse
import copy
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

# Add src to path for imports
src_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'src')
sys.path.insert(0, src_path)

import numpy as np
import pandas as pd
import logging

from config.settings import AdaptConfig, Config
from analyzers.convergence import ConvergenceRow, l2_error, rates, rows_to_frame
from analyzers.plots import ResultPlotter
from basis.alpert import project_L2
from basis.tables import BasisTables
from benchmarks.cases import make_case
from mra.space import AdaptiveSpace
from processors.dumps import ResultWriter, active_frame, read_field
from solver.adaptivity import adaptive_initial_projection
from solver.hamiltonian import regularize
from solver.ldg import SemiDiscreteOperator, reconstruct_gradients
from solver.time_integration import evolve
from utils.errors import ConfigurationError, HJSGError, NumericalInstabilityError, ReferenceSolutionError
from utils.helpers import create_output_directory, format_number, format_rate, setup_logging


@dataclass
class RunSummary:
    """One solver run as reported in result tables"""
    case: str
    dim: int
    k: int
    m: int
    mode: str
    max_level: int
    eps: float
    t_final: float
    steps: int
    elements: int
    dof: int
    L2_error: Optional[float]


class HJSGPipeline:
    """Set up, run and report one benchmark case"""

    def __init__(self, config: Config, configure_logging: bool = True):
        self.config = config
        self.logger = setup_logging(config) if configure_logging else logging.getLogger(__name__)
        np.random.seed(config.seed)

        self.case = make_case(config.case, config.discretization.dim)
        self._resolve_defaults()
        config.validate()

        self.writer = ResultWriter(config)
        self.plotter = ResultPlotter(config)

    def _resolve_defaults(self):
        """Fill case-dependent defaults left open in the configuration"""
        d = self.config.discretization
        if d.m is None:
            d.m = self.case.default_m(d.k)
        if d.bc is None:
            d.bc = self.case.bc
        if self.config.time.t_final is None:
            self.config.time.t_final = self.case.t_final()

    @property
    def adaptive(self) -> bool:
        return self.config.discretization.mode == "adaptive"

    def adapt_config(self) -> AdaptConfig:
        if self.adaptive:
            return self.config.adapt
        return AdaptConfig(eps=math.inf)

    def operator(self) -> SemiDiscreteOperator:
        d, h = self.config.discretization, self.config.hamiltonian
        spec = self.case.hamiltonian()
        if spec.needs_regularization and h.regularize:
            spec = regularize(spec, 2.0 ** -d.max_level, h.delta_factor)
            self.logger.info(f"Regularized Hamiltonian with delta={spec.delta:.3e}")
        tables = BasisTables(d.k, d.m, d.max_level, d.bc, cache_dir=self.config.output.table_cache)
        return SemiDiscreteOperator(spec, tables, h.alpha_mode, h.alpha_safety, h.alpha_floor)

    def initial_state(self):
        d = self.config.discretization
        if self.config.output.restart:
            return self.restart_state(self.config.output.restart)
        if self.adaptive:
            return adaptive_initial_projection(self.case.initial_condition, d.dim, d.k, d.max_level,
                                               self.config.adapt, d.quadrature_points)
        if d.mode == "full":
            space = AdaptiveSpace.full_grid(d.dim, d.max_level)
        else:
            space = AdaptiveSpace.sparse_grid(d.dim, d.max_level)
        phi = project_L2(self.case.initial_condition, space, d.k, d.quadrature_points)
        return phi, space

    def restart_state(self, path: str):
        """Field snapshot written by --dump-field, checked against the configuration"""
        d = self.config.discretization
        if not os.path.exists(path):
            raise ConfigurationError(f"Restart file {path} not found")
        phi = read_field(path, d.max_level, d.k)
        if phi.space.dim != d.dim:
            raise ConfigurationError(f"Restart file {path} holds a {phi.space.dim}D field, expected {d.dim}D")
        self.logger.info(f"Restarting from {path} at t={self.config.time.t_start}: {phi.space.size} elements")
        return phi, phi.space

    def _reference_at(self, t: float):
        return lambda x: self.case.reference(x, t)

    def error(self, phi, t: float) -> Optional[float]:
        """L2 error against the reference, None when there is none at time t"""
        if not self.case.has_reference:
            return None
        try:
            return l2_error(phi, self._reference_at(t), self.config.discretization.max_error_points,
                            self.config.discretization.quadrature_points)
        except ReferenceSolutionError as e:
            self.logger.warning(f"No error reported: {e}")
            return None

    def run(self) -> RunSummary:
        """Evolve the case to its final time and write the requested outputs"""
        d, t_final = self.config.discretization, self.config.time.t_final
        self.logger.info(f"Running {self.case!r}: k={d.k} M={d.m} N={d.max_level} mode={d.mode} "
                         f"bc={d.bc} T={t_final}")

        operator = self.operator()
        phi, space = self.initial_state()
        initial_dof = space.dof(d.k)
        self.logger.info(f"Initial space: {space.size} elements, {initial_dof} DoF")

        error_fn = None
        if self.config.output.trace_error and self.case.has_reference:
            error_fn = lambda t, u, s: self.error(u, t)
        phi, space, trace = evolve(phi, space, operator, self.config.time, self.adapt_config(),
                                   t_final=t_final, error_fn=error_fn, t_start=self.config.time.t_start)

        error = self.error(phi, t_final)
        dof = int(max(initial_dof, trace['dof'].max() if len(trace) else 0))
        summary = RunSummary(self.case.name, d.dim, d.k, d.m, d.mode, d.max_level,
                             self.config.adapt.eps if self.adaptive else math.nan, t_final,
                             len(trace), space.size, dof, error)
        self.logger.info(f"Finished: {summary.steps} steps, DoF={dof}, L2 error={format_number(error)}")

        self.write_outputs(summary, phi, space, operator, trace)
        return summary

    def write_outputs(self, summary: RunSummary, phi, space, operator, trace: pd.DataFrame):
        out = self.config.output
        if out.output:
            self.writer.write_table(pd.DataFrame([asdict(summary)]), out.output)
        if out.trace:
            self.writer.write_trace(trace, out.trace)
        if out.dump_solution:
            self.writer.write_solution(phi, out.dump_solution)
        if out.dump_active:
            self.writer.write_active(phi, out.dump_active)
        if out.dump_field:
            self.writer.write_field(phi, out.dump_field)
        if out.dump_tables:
            self.writer.write_operator_tables(operator.tables, out.dump_tables)
        if out.dump_controls:
            if not hasattr(self.case, 'controls') or space.dim < 2:
                self.logger.warning(f"Case {self.case.name!r} has no control field; skipping controls dump")
            else:
                p1, p2 = reconstruct_gradients(phi, space, operator.tables)[1]
                self.writer.write_controls(p1, p2, out.dump_controls)
        if out.plot_folder:
            title = f"{summary.case} d={summary.dim} k={summary.k} M={summary.m} T={summary.t_final}"
            self.plotter.plot_solution(self.writer.sample(phi), title)
            self.plotter.plot_active(active_frame(phi), space.indices, title)


def parse_levels(text: str) -> List[int]:
    """'3..6' or '3,4,5' or '4'"""
    try:
        if '..' in text:
            first, last = (int(part) for part in text.split('..'))
            step = 1 if last >= first else -1
            return list(range(first, last + step, step))
        return [int(part) for part in text.split(',')]
    except ValueError:
        raise ConfigurationError(f"Cannot parse levels {text!r}") from None


def parse_thresholds(text: str) -> List[float]:
    """'1e-3..1e-7' in decades, or '1e-3,1e-4', or a single value"""
    try:
        if '..' in text:
            first, last = (float(part) for part in text.split('..'))
            if first <= 0 or last <= 0:
                raise ValueError("thresholds must be positive")
            decades = int(round(math.log10(first / last)))
            sign = 1 if decades >= 0 else -1
            return [first * 10.0 ** (-sign * i) for i in range(abs(decades) + 1)]
        return [float(part) for part in text.split(',')]
    except ValueError as e:
        raise ConfigurationError(f"Cannot parse thresholds {text!r}: {e}") from None


def _run_one(config: Config) -> RunSummary:
    return HJSGPipeline(config, configure_logging=False).run()


def run_sweep(config: Config, levels: Sequence[int], thresholds: Sequence[float]) -> pd.DataFrame:
    """Convergence table over N (full/sparse) or over eps (adaptive)"""
    logger = setup_logging(config)
    by_eps = len(thresholds) > 1
    if by_eps:
        config.discretization.mode = "adaptive"
        eta = config.adapt.eta
        if eta is not None and eta >= min(thresholds):
            raise ConfigurationError(f"Coarsening threshold {eta} must lie below every eps of the sweep")
    if config.output.restart:
        raise ConfigurationError("A sweep starts every run from the initial condition; drop --restart")

    configs = []
    for value in (thresholds if by_eps else levels):
        variant = copy.deepcopy(config)
        if by_eps:
            variant.adapt.eps = value
            variant.discretization.max_level = levels[-1]
        else:
            variant.discretization.max_level = value
        for name in ('output', 'trace', 'dump_solution', 'dump_active', 'dump_controls', 'dump_field',
                     'dump_tables', 'plot_folder'):
            setattr(variant.output, name, None)
        configs.append(variant)
    logger.info(f"Sweep over {'eps' if by_eps else 'N'}: {len(configs)} runs")

    if config.parallel_processing and config.max_workers > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=config.max_workers) as executor:
            summaries = list(executor.map(_run_one, configs))
    else:
        summaries = [_run_one(variant) for variant in configs]

    mode = "by_eps" if by_eps else "by_N"
    rows = [ConvergenceRow(s.eps if by_eps else s.max_level, s.dof, s.L2_error) for s in summaries]
    if any(row.error is None for row in rows):
        raise ConfigurationError(f"Case {config.case!r} has no reference solution at T={summaries[0].t_final}; "
                                 "cannot compute rates")
    table = rows_to_frame(rates(rows, mode), mode)

    writer = ResultWriter(config)
    if config.output.output:
        writer.write_table(table, config.output.output)
    if config.output.plot_folder:
        ResultPlotter(config).plot_convergence(table, f"{config.case} d={config.discretization.dim} "
                                                      f"k={config.discretization.k}")
    return table


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help='Path to configuration file')
    common.add_argument('--case', type=str, help='Benchmark case')
    common.add_argument('--dim', type=int, help='Spatial dimension')
    common.add_argument('--k', type=int, help='Alpert polynomial degree')
    common.add_argument('--m', type=int, help='Interpolation degree (default depends on the case)')
    common.add_argument('--max-level', type=str, help='Maximum level N (sweep: range such as 3..6)')
    common.add_argument('--mode', choices=['full', 'sparse', 'adaptive'], help='Approximation space')
    common.add_argument('--eps', type=str, help='Refinement threshold (sweep: range such as 1e-3..1e-7)')
    common.add_argument('--eta', type=float, help='Coarsening threshold (default eps/10)')
    common.add_argument('--no-predictor', action='store_true', help='Refine by current coefficients only')
    common.add_argument('--cfl', type=float, help='CFL number (default 0.1)')
    common.add_argument('--t-final', type=float, help='Final time (default depends on the case)')
    common.add_argument('--bc', choices=['periodic', 'outflow'], help='Boundary condition override')
    common.add_argument('--alpha', choices=['analytic', 'sampled'], help='Lax-Friedrichs constants')
    common.add_argument('--output', type=str, help='Result table CSV')
    common.add_argument('--dump-solution', type=str, help='Solution samples (whitespace separated)')
    common.add_argument('--dump-active', type=str, help='Active elements CSV')
    common.add_argument('--dump-controls', type=str, help='Control field samples (control case)')
    common.add_argument('--dump-field', type=str, help='Final coefficient field CSV (restart snapshot)')
    common.add_argument('--dump-tables', type=str, help='Folder for CSV dumps of the 1D operator tables')
    common.add_argument('--restart', type=str, help='Start from a coefficient field CSV')
    common.add_argument('--t-start', type=float, help='Time of the restart snapshot (default 0)')
    common.add_argument('--trace', type=str, help='Per-step trace CSV')
    common.add_argument('--seed', type=int, help='Random seed')
    common.add_argument('--plot-dir', type=str, help='Folder for figures')
    common.add_argument('--table-cache', type=str, help='Folder for cached operator tables')
    common.add_argument('--log-level', type=str, help='Logging level')
    common.add_argument('--no-parallel', action='store_true', help='Run sweeps sequentially')

    parser = argparse.ArgumentParser(prog='hjsg', description='Adaptive sparse-grid LDG solver for '
                                                              'Hamilton-Jacobi equations')
    commands = parser.add_subparsers(dest='command', required=True)
    commands.add_parser('run', parents=[common], help='Run one case')
    commands.add_parser('sweep', parents=[common], help='Convergence sweep over N or eps')
    return parser


def load_config(args: argparse.Namespace) -> Config:
    """Configuration file first, then command-line overrides"""
    config = Config.from_file(args.config) if args.config else Config()
    overrides = {key: value for key, value in vars(args).items()
                 if key not in ('command', 'config', 'no_parallel', 'no_predictor', 'max_level', 'eps')}
    config.apply(overrides)
    if args.no_parallel:
        config.parallel_processing = False
    if args.no_predictor:
        config.adapt.predictor = False
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = load_config(args)
        if args.command == 'run':
            if args.max_level is not None:
                config.apply({'max_level': args.max_level})
            if args.eps is not None:
                config.apply({'eps': args.eps})
            summary = HJSGPipeline(config).run()

            print("\n=== Run Results ===")
            for key, value in asdict(summary).items():
                print(f"  {key}: {format_number(value) if key == 'L2_error' else value}")
        else:
            levels = parse_levels(args.max_level) if args.max_level else [config.discretization.max_level]
            thresholds = parse_thresholds(args.eps) if args.eps else [config.adapt.eps]
            if len(levels) < 2 and len(thresholds) < 2:
                raise ConfigurationError("A sweep needs a range in --max-level or --eps")
            table = run_sweep(config, levels, thresholds)

            print("\n=== Convergence ===")
            print(table.to_string(index=False, formatters={'L2_error': format_number, 'order': format_rate,
                                                           'R_eps': format_rate, 'R_DoF': format_rate}))
        return 0

    except KeyboardInterrupt:
        print("\nRun interrupted by user")
        return 1
    except ConfigurationError as e:
        logging.getLogger(__name__).error(f"Invalid configuration: {e}")
        print(f"Invalid configuration: {e}", file=sys.stderr)
        return e.exit_code
    except NumericalInstabilityError as e:
        logging.getLogger(__name__).error(f"Numerical failure: {e}")
        if not e.diagnostics.empty:
            path = os.path.join('logs', 'diagnostics.csv')
            create_output_directory(path)
            e.diagnostics.to_csv(path, index=False)
            print(f"Element diagnostics written to {path}", file=sys.stderr)
        print(f"Numerical failure: {e}", file=sys.stderr)
        return e.exit_code
    except HJSGError as e:
        logging.getLogger(__name__).error(f"Run failed: {e}")
        print(f"Run failed: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
