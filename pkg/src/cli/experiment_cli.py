"""
Command-line entry point: calibration, eta, tau curve, synthesis,
Monte-Carlo experiments and the privacy sweep over one shared config.
"""
import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from .. import __version__
from .base_cli import BaseCLI
from ..models.control_models import Controller, ExperimentSpec, TauSearchReport
from ..models.interfaces import Mechanism
from ..models.privacy_models import AmbiguityBounds, InvalidBudget, KlRadius
from ..models.problem_models import ModelValidationError, ProblemSetup
from ..services.ambiguity_service import DomainError, admissible_grid, radius_eta
from ..services.experiment_store import ExperimentStore
from ..services.privacy_service import gaussian_sigma_lower, laplace_b_lower
from ..services.riccati_service import tau_curve
from ..services.simulation_service import (
    STATS_COLUMNS,
    SWEEP_COLUMNS,
    dominance_counts,
    monte_carlo,
    privacy_sweep,
    stats_frame,
)
from ..services.synthesis_service import (
    NoFeasibleTau,
    build_dr_controller,
    optimize_tau,
    synthesize_lqg,
)
from ..utils.config import ConfigManager
from ..utils.config_validator import ConfigValidationError, ConfigValidator
from ..utils.logging_config import log_exceptions, logger

FIG1_COLUMNS = ["tau", "objective"]


@dataclass
class RunConfig:
    """Resolved command-line options shared by every subcommand."""
    config_path: Optional[str] = None
    overrides: List[str] = field(default_factory=list)
    out_dir: Path = Path("results")
    master_seed: Optional[int] = None
    trials: Optional[int] = None
    grid_points: Optional[int] = None
    workers: Optional[int] = None
    verbosity: int = 0

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunConfig':
        return cls(
            config_path=args.config,
            overrides=list(args.set or []),
            out_dir=Path(args.out),
            master_seed=args.seed,
            trials=args.trials,
            grid_points=args.grid,
            workers=args.workers,
            verbosity=args.verbose - args.quiet,
        )

    def resolve(self) -> ConfigManager:
        """Load the config, apply overrides and flags, and validate the result."""
        manager = ConfigManager(self.config_path)
        manager.apply_overrides(self.overrides)
        flags = {
            "experiment.master_seed": self.master_seed,
            "experiment.trials": self.trials,
            "experiment.grid_points": self.grid_points,
            "experiment.workers": self.workers,
        }
        for key_path, value in flags.items():
            if value is not None:
                manager.set(key_path, value)
        validator = ConfigValidator(manager)
        validator.raise_for_errors()
        for warning in validator.validation_warnings:
            logger.warning(f"Config warning: {warning}")
        return manager


class ExperimentRunner:
    """Pipeline stages over one validated problem setup."""

    def __init__(self, manager: ConfigManager, progress: bool = False):
        self.manager = manager
        self.experiment = manager.get_experiment_config()
        self.setup = ProblemSetup.from_config(manager.to_dict(), self.experiment)
        self.progress = progress
        self._bounds: Optional[AmbiguityBounds] = None
        self._eta: Optional[KlRadius] = None

    @property
    def plant(self):
        return self.setup.plant

    @property
    def weights(self):
        return self.setup.weights

    @property
    def master_seed(self) -> int:
        return int(self.experiment["master_seed"])

    def bounds(self) -> AmbiguityBounds:
        if self._bounds is None:
            C = self.plant.C
            sigma2_lo = gaussian_sigma_lower(self.setup.privacy_spec(Mechanism.GAUSSIAN), C)
            b_lo = laplace_b_lower(self.setup.privacy_spec(Mechanism.LAPLACE), C)
            self._bounds = AmbiguityBounds.from_ratios(
                sigma2_lo, b_lo, self.setup.sigma2_ratio, self.setup.b_ratio, self.plant.L
            )
        return self._bounds

    def eta(self) -> KlRadius:
        if self._eta is None:
            self._eta = radius_eta(self.bounds())
        return self._eta

    def tau_curve(self) -> pd.DataFrame:
        taus = np.geomspace(self.experiment["tau_curve_min"], self.experiment["tau_curve_max"],
                            int(self.experiment["tau_curve_points"]))
        curve = tau_curve(self.eta(), self.plant, self.weights, self.bounds().sigma2_lo, taus)
        return pd.DataFrame(curve, columns=FIG1_COLUMNS)

    def search_tau(self) -> TauSearchReport:
        return optimize_tau(self.eta(), self.plant, self.weights, self.bounds().sigma2_lo,
                            grid_size=int(self.experiment["tau_grid_size"]),
                            refine_iters=int(self.experiment["refine_iters"]))

    def controllers(self, report: TauSearchReport) -> List[Controller]:
        sigma2_lo = self.bounds().sigma2_lo
        return [
            build_dr_controller(self.plant, self.weights, sigma2_lo, report.tau_star),
            synthesize_lqg(self.plant, self.weights, sigma2_lo),
        ]

    def figure2(self, controllers: List[Controller], mechanism: Mechanism):
        grid = admissible_grid(self.bounds(), mechanism, int(self.experiment["grid_points"]))
        spec = ExperimentSpec(self.plant, self.weights, controllers, grid,
                              int(self.experiment["trials"]), self.master_seed, self.bounds())
        return monte_carlo(spec, workers=int(self.experiment["workers"]), progress=self.progress)

    def privacy_sweep(self) -> pd.DataFrame:
        return privacy_sweep(
            self.setup,
            self.experiment["sweep_epsilons"],
            self.experiment["sweep_deltas"],
            ratio=self.setup.sigma2_ratio,
            trials=int(self.experiment["trials"]),
            master_seed=self.master_seed,
            workers=int(self.experiment["workers"]),
            grid_size=int(self.experiment["tau_grid_size"]),
            refine_iters=int(self.experiment["refine_iters"]),
            progress=self.progress,
        )


def _manifest(command: str, manager: ConfigManager, outputs: List[str]) -> Dict[str, Any]:
    return {
        "command": command,
        "version": __version__,
        "master_seed": manager.get("experiment.master_seed"),
        "config": manager.to_dict(),
        "outputs": sorted(outputs),
    }


def _format_summary(values: Dict[str, Any]) -> str:
    lines = []
    for name, value in values.items():
        lines.append(f"{name} {float(value)!r}" if isinstance(value, float) else f"{name} {value}")
    return "\n".join(lines) + "\n"


def _timed_stage(name: str, func, *args, **kwargs):
    logger.log_stage_start(name)
    start = time.perf_counter()
    result = func(*args, **kwargs)
    logger.log_stage_complete(name, time.perf_counter() - start)
    return result


def reproduce_paper(out_dir: Path, seed: Optional[int] = None,
                    manager: Optional[ConfigManager] = None,
                    progress: bool = False) -> Dict[str, Any]:
    """
    End-to-end benchmark: calibration, eta, tau curve, both controllers,
    the Gaussian and Laplace grids and the privacy sweep.

    Writes fig1.csv, fig2_gaussian.csv, fig2_laplace.csv, fig3.csv,
    summary.txt and manifest.json once everything has been computed.
    """
    manager = manager or ConfigManager()
    if seed is not None:
        manager.set("experiment.master_seed", int(seed))
    ConfigValidator(manager).raise_for_errors()
    runner = ExperimentRunner(manager, progress=progress)

    bounds = _timed_stage("calibrate", runner.bounds)
    eta = _timed_stage("eta", runner.eta)
    fig1 = _timed_stage("tau_curve", runner.tau_curve)
    report = _timed_stage("tau_search", runner.search_tau)
    controllers = _timed_stage("synthesize", runner.controllers, report)
    gaussian = _timed_stage("fig2_gaussian", runner.figure2, controllers, Mechanism.GAUSSIAN)
    laplace = _timed_stage("fig2_laplace", runner.figure2, controllers, Mechanism.LAPLACE)
    fig3 = _timed_stage("privacy_sweep", runner.privacy_sweep)

    counts = dominance_counts(gaussian + laplace)
    summary: Dict[str, Any] = {
        "sigma2_lo": bounds.sigma2_lo,
        "b_lo": bounds.b_lo,
        "eta": eta.eta,
        "tau_star": report.tau_star,
        "objective_star": report.objective_star,
        "fig1_min_objective": float(fig1["objective"].min()) if not fig1.empty else float("nan"),
    }
    for mechanism, entry in counts.items():
        for key, value in entry.items():
            summary[f"{mechanism}_{key}"] = value

    store = ExperimentStore(out_dir)
    store.add_table("fig1.csv", fig1, FIG1_COLUMNS)
    store.add_table("fig2_gaussian.csv", stats_frame(gaussian), STATS_COLUMNS)
    store.add_table("fig2_laplace.csv", stats_frame(laplace), STATS_COLUMNS)
    store.add_table("fig3.csv", fig3, SWEEP_COLUMNS)
    store.add_text("summary.txt", _format_summary(summary))
    store.add_json("manifest.json", _manifest("reproduce-paper", manager, store.pending + ["manifest.json"]))
    store.flush()
    return summary


class ExperimentCLI(BaseCLI):
    """Subcommand dispatcher over the shared configuration."""

    error_statuses = (
        (NoFeasibleTau, 2),
        (OSError, 3),
        (ConfigValidationError, 1),
        (ModelValidationError, 1),
        (InvalidBudget, 1),
        (DomainError, 1),
        (ValueError, 1),
    )

    def setup_parser(self) -> None:
        """Setup command line argument parser."""
        self.parser.add_argument(
            '--version',
            action='version',
            version=f'dpcontrol {__version__}'
        )

        common = argparse.ArgumentParser(add_help=False)
        common.add_argument('--config', type=str, help='Path to a JSON configuration file')
        common.add_argument('--out', type=str, default='results', help='Output directory')
        common.add_argument('--seed', type=int, help='Master seed for Monte-Carlo stages')
        common.add_argument('--set', action='append', metavar='KEY=VALUE',
                            help='Override a config value (repeatable)')
        common.add_argument('--trials', type=int, help='Monte-Carlo trials per grid point')
        common.add_argument('--grid', type=int, help='Points of each admissible parameter grid')
        common.add_argument('--workers', type=int, help='Worker processes for Monte-Carlo trials')
        common.add_argument('-v', '--verbose', action='count', default=0, help='More logging')
        common.add_argument('-q', '--quiet', action='count', default=0, help='Less logging')

        subparsers = self.parser.add_subparsers(
            dest='command',
            help='Available commands',
            metavar='COMMAND'
        )
        subparsers.add_parser('calibrate', parents=[common],
                              help='Print the calibrated noise lower bounds')
        subparsers.add_parser('eta', parents=[common],
                              help='Print the KL radius and its branches')
        subparsers.add_parser('tau-curve', parents=[common],
                              help='Write tau versus the outer objective')
        subparsers.add_parser('synthesize', parents=[common],
                              help='Write the robust and baseline controllers')
        simulate_parser = subparsers.add_parser('simulate', parents=[common],
                                                help='Monte-Carlo costs over the admissible grids')
        simulate_parser.add_argument('--mechanism', choices=['gaussian', 'laplace', 'both'],
                                     default='both', help='Noise family to sweep')
        subparsers.add_parser('sweep-privacy', parents=[common],
                              help='Mean cost over privacy budgets')
        subparsers.add_parser('reproduce-paper', parents=[common],
                              help='Run the full benchmark pipeline')

    def execute_command(self, args: argparse.Namespace) -> int:
        """Execute the parsed command."""
        if not args.command:
            self.parser.print_help()
            return 0

        run_config = RunConfig.from_args(args)
        self._configure_logging(run_config.verbosity)
        manager = run_config.resolve()

        handlers = {
            'calibrate': self._handle_calibrate,
            'eta': self._handle_eta,
            'tau-curve': self._handle_tau_curve,
            'synthesize': self._handle_synthesize,
            'simulate': self._handle_simulate,
            'sweep-privacy': self._handle_sweep_privacy,
            'reproduce-paper': self._handle_reproduce,
        }
        return handlers[args.command](args, run_config, manager)

    def suggestions_for(self, error: BaseException) -> Optional[List[str]]:
        if isinstance(error, NoFeasibleTau):
            return ["Increase the noise lower bounds or reduce the weights Q and Q_N",
                    "Run 'tau-curve' with -v to see which condition fails"]
        if isinstance(error, ConfigValidationError):
            return ["Compare the file against config/benchmark.json"]
        return None

    @staticmethod
    def _configure_logging(verbosity: int) -> None:
        if verbosity > 0:
            logger.set_level("DEBUG")
        elif verbosity < 0:
            logger.set_level("WARNING")

    def _finish(self, store: ExperimentStore, command: str, manager: ConfigManager) -> int:
        store.add_json("manifest.json", _manifest(command, manager, store.pending + ["manifest.json"]))
        store.flush()
        return 0

    @log_exceptions
    def _handle_calibrate(self, args, run_config: RunConfig, manager: ConfigManager) -> int:
        bounds = ExperimentRunner(manager).bounds()
        self.display_values({"sigma2_lo": bounds.sigma2_lo, "b_lo": bounds.b_lo})
        return self._finish(ExperimentStore(run_config.out_dir), 'calibrate', manager)

    @log_exceptions
    def _handle_eta(self, args, run_config: RunConfig, manager: ConfigManager) -> int:
        eta = ExperimentRunner(manager).eta()
        self.display_values({
            "eta": eta.eta,
            "eta1": eta.eta1,
            "eta2": eta.eta2,
            "branch": eta.active_branch.value,
        })
        return self._finish(ExperimentStore(run_config.out_dir), 'eta', manager)

    @log_exceptions
    def _handle_tau_curve(self, args, run_config: RunConfig, manager: ConfigManager) -> int:
        curve = ExperimentRunner(manager).tau_curve()
        if curve.empty:
            self.display_warning("every tau on the curve grid is infeasible")
        else:
            best = curve.loc[curve["objective"].idxmin()]
            self.display_values({"tau_min": float(best["tau"]),
                                 "objective_min": float(best["objective"])})
        store = ExperimentStore(run_config.out_dir)
        store.add_table("fig1.csv", curve, FIG1_COLUMNS)
        return self._finish(store, 'tau-curve', manager)

    @log_exceptions
    def _handle_synthesize(self, args, run_config: RunConfig, manager: ConfigManager) -> int:
        runner = ExperimentRunner(manager)
        report = runner.search_tau()
        robust, baseline = runner.controllers(report)
        self.display_values({"tau_star": report.tau_star,
                             "objective_star": report.objective_star})
        store = ExperimentStore(run_config.out_dir)
        store.add_json("controller.json", {
            "eta": runner.eta().eta,
            "tau_search": report.to_dict(),
            robust.label: robust.to_dict(),
            baseline.label: baseline.to_dict(),
        })
        return self._finish(store, 'synthesize', manager)

    @log_exceptions
    def _handle_simulate(self, args, run_config: RunConfig, manager: ConfigManager) -> int:
        runner = ExperimentRunner(manager, progress=run_config.verbosity >= 0)
        controllers = runner.controllers(runner.search_tau())
        mechanisms = [Mechanism(args.mechanism)] if args.mechanism != 'both' else list(Mechanism)

        store = ExperimentStore(run_config.out_dir)
        table = []
        for mechanism in mechanisms:
            stats = runner.figure2(controllers, mechanism)
            table.extend(stats)
            store.add_table(f"fig2_{mechanism.value}.csv", stats_frame(stats), STATS_COLUMNS)

        for mechanism, entry in dominance_counts(table).items():
            self.display_values({f"{mechanism}_{key}": value for key, value in entry.items()})
        return self._finish(store, 'simulate', manager)

    @log_exceptions
    def _handle_sweep_privacy(self, args, run_config: RunConfig, manager: ConfigManager) -> int:
        sweep = ExperimentRunner(manager, progress=run_config.verbosity >= 0).privacy_sweep()
        store = ExperimentStore(run_config.out_dir)
        store.add_table("fig3.csv", sweep, SWEEP_COLUMNS)
        self.display_value("points", len(sweep))
        return self._finish(store, 'sweep-privacy', manager)

    @log_exceptions
    def _handle_reproduce(self, args, run_config: RunConfig, manager: ConfigManager) -> int:
        summary = reproduce_paper(run_config.out_dir, manager=manager,
                                  progress=run_config.verbosity >= 0)
        self.display_values({"tau_star": summary["tau_star"],
                             "objective_star": summary["objective_star"]})
        return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the CLI."""
    return ExperimentCLI().run(argv)


if __name__ == "__main__":
    sys.exit(main())
