"""
Experiment orchestration: sequences, algorithms, bounds and artifacts
"""

import itertools
import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.special import expit

from adversary import build_design, build_theory_grid, capacity_experiment, estimate_pe, sample_and_label
from baselines import KtPredictor, LearningRateSchedule, OnlineGradientDescent
from bounds import (
    BoundQuery,
    evaluate,
    gaussian_mixture_bound,
    gaussian_prior_variance,
    multilabel_lower_bound,
    theorem2_instance_bound,
    to_bits,
    upper_bound,
)
from comparators import ComparatorSolver, Norm, NormConstraint, project
from core import LabeledSequence, OnlineAlgorithm, ParamVector
from formatters import ArtifactWriter
from mixtures import BayesianMixture, PriorSpec, build_grid, default_spacing, refinement_delta
from parsers import ExampleCSVParser
from utils.config import Config, ExperimentConfig
from utils.errors import ConfigurationError, GridSizeError, InfeasibleDesignError
from utils.logger import log_execution_time
from utils.parallel import parallel_map
from utils.seeding import make_rng, trial_rng
from validators import ArtifactValidator

# Gaussian-prior runs report whether halving the lattice step moves every
# per-round prediction by less than this.
REFINEMENT_TOLERANCE = 1e-3

SWEEP_COLUMNS = [
    'd', 'T', 'B', 'norm', 'status', 'gamma', 'table_row',
    'lower_branch', 'lower_nats', 'upper_branch', 'upper_nats', 'lower_in_region',
    'measured_regret', 'theorem2_bound', 'grid_cardinality',
]


def random_sequence(
    rng: np.random.Generator, d: int, T: int, constraint: NormConstraint, unit_features: bool = False
) -> Tuple[ParamVector, LabeledSequence]:
    """
    Features uniform on [-1, 1]^d, labels from a random parameter in the ball.

    Args:
        rng: Seeded generator
        d: Dimension
        T: Horizon
        constraint: Ball the generating parameter is projected into
        unit_features: Use x_t = 1 in every coordinate instead

    Returns:
        (generating parameter, labeled sequence)
    """
    features = np.ones((T, d)) if unit_features else rng.uniform(-1.0, 1.0, size=(T, d))
    theta = project(ParamVector(rng.normal(0.0, constraint.radius_B, size=d)), constraint)
    labels = np.where(rng.random(T) < expit(features @ theta.weights), 1, -1)
    return theta, LabeledSequence(features, labels)


class RegretWorkbench:
    """
    Orchestrates every workbench command.

    Each command:
    1. Builds its inputs (sequence, grid, design) and validates them
    2. Runs the algorithm, Monte Carlo experiment or bound evaluation
    3. Renders every artifact in memory and validates the records
    4. Writes the artifacts atomically
    """

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize the workbench.

        Args:
            config_path: Path to configuration file (optional)
        """
        self.logger = logging.getLogger(__name__)
        self.config = Config(config_path)
        if not self.config.validate():
            raise ConfigurationError("Invalid configuration settings", path=config_path)
        self.parser = ExampleCSVParser()
        self.writer = ArtifactWriter(self.config)
        self.validator = ArtifactValidator(self.config)

    def experiment(self, **overrides: Any) -> ExperimentConfig:
        """Validated experiment configuration (flags override the config file)."""
        return self.config.experiment(**overrides)

    def execute(self, experiment: ExperimentConfig) -> Dict[str, Any]:
        """
        Run the experiment's command.

        Returns:
            The command's report record (with 'artifacts' listing written files)
        """
        commands = {
            'run': self.run_experiment,
            'bounds': self.bounds_report,
            'distinguish': self.distinguish,
            'capacity': self.capacity,
            'sweep': self.sweep,
        }
        return commands[experiment.command](experiment)

    # ------------------------------------------------------------------
    # run
    # ------------------------------------------------------------------

    @log_execution_time
    def run_experiment(self, experiment: ExperimentConfig) -> Dict[str, Any]:
        """
        Run one online algorithm and write its trace and summary.

        Args:
            experiment: Validated configuration

        Returns:
            Summary record
        """
        self.logger.info(
            f"Running {experiment.algorithm} on a {experiment.sequence} sequence "
            f"(d={experiment.d}, T={experiment.T}, {experiment.norm}, B={experiment.B:g})"
        )
        try:
            constraint = NormConstraint(Norm.parse(experiment.norm), experiment.B)
            sequence = self._build_sequence(experiment, constraint)
            algorithm, details = self._build_algorithm(experiment, constraint, sequence)

            d, T = sequence.dimension, len(sequence)
            if T:
                solver = ComparatorSolver(experiment.tol, self.config.get('solver.iteration_factor', 50))
                result = solver.solve(sequence, constraint)
                comparator, converged, iterations = result.theta_star, result.converged, result.iterations
            else:
                comparator, converged, iterations = ParamVector.zeros(d), True, 0
            if not converged:
                self.logger.warning("Comparator search stopped at its iteration cap")

            trace = algorithm.run(sequence, comparator=comparator)

            summary: Dict[str, Any] = {
                'kind': 'run',
                'algorithm': experiment.algorithm,
                'norm': experiment.norm,
                'd': d,
                'T': T,
                'B': experiment.B,
                'seed': experiment.seed,
                'sequence': experiment.sequence,
                'final_regret': trace.total_regret,
                'algorithm_loss': trace.algorithm_loss,
                'comparator_loss': trace.comparator_loss,
                'comparator': comparator.weights,
                'comparator_converged': converged,
                'comparator_iterations': iterations,
                'theorem2_bound': None,
                'upper_bound_formula': None,
                'upper_bound_branch': None,
            }
            summary.update(details)
            if details.get('gaussian_variance') is not None:
                summary['gaussian_bound'] = gaussian_mixture_bound(
                    float(comparator.weights @ comparator.weights), d, T, details['gaussian_variance']
                )
            if T >= 2:
                branch, value = upper_bound(BoundQuery(d, T, experiment.B, experiment.norm))
                summary['upper_bound_formula'] = value
                summary['upper_bound_branch'] = branch

            self._check_record(summary)
            path = self._output_path(experiment, 'run_trace', experiment.format)
            summary_path = path.with_name(f"{path.stem}.summary.json")
            written = self.writer.write_all({
                path: self.writer.render_trace(trace, experiment.format),
                summary_path: self.writer.render_record(summary, 'json'),
            })
            summary['artifacts'] = [str(p) for p in written]
            self.logger.info(f"Final regret {trace.total_regret:.6g} nats over {T} rounds")
            return summary

        except Exception as e:
            self.logger.error(f"Run failed: {str(e)}")
            raise

    def _build_sequence(self, experiment: ExperimentConfig, constraint: NormConstraint) -> LabeledSequence:
        if experiment.sequence == 'csv':
            sequence = self.parser.parse(str(experiment.input_path))
            if len(sequence) and sequence.dimension != experiment.d:
                self.logger.info(f"Using d={sequence.dimension} from {experiment.input_path}")
            return sequence

        if experiment.sequence == 'segmented':
            design = build_design(experiment.d, experiment.T, experiment.gamma_levels)
            grid = build_theory_grid(
                design,
                experiment.spacing_rule,
                experiment.eps_exponent,
                radius_B=experiment.radius_B,
                points_per_dimension=experiment.grid_points,
                max_points=experiment.max_grid_points,
            )
            _, sequence = sample_and_label(design, grid, make_rng(experiment.seed))
            return sequence

        _, sequence = random_sequence(
            make_rng(experiment.seed),
            experiment.d,
            experiment.T,
            constraint,
            unit_features=experiment.algorithm == 'kt',
        )
        return sequence

    def _build_algorithm(
        self, experiment: ExperimentConfig, constraint: NormConstraint, sequence: LabeledSequence
    ) -> Tuple[OnlineAlgorithm, Dict[str, Any]]:
        d, T = sequence.dimension, len(sequence)

        if experiment.algorithm == 'kt':
            return KtPredictor(), {}
        if experiment.algorithm == 'ogd':
            schedule = LearningRateSchedule(experiment.schedule, experiment.learning_rate)
            return OnlineGradientDescent(constraint, schedule), {}

        if experiment.algorithm == 'grid-mixture':
            spacing = experiment.spacing or default_spacing(max(T, 1))
            grid = build_grid(d, constraint, spacing, experiment.max_grid_points)
            details = {
                'grid_cardinality': grid.cardinality,
                'spacing': spacing,
                'theorem2_bound': theorem2_instance_bound(grid.cardinality, d, T, spacing),
            }
            return BayesianMixture(grid), details

        choice = gaussian_prior_variance(constraint, d)
        variance = experiment.prior_variance or choice.variance
        spacing = experiment.spacing or math.sqrt(choice.induced_spacing_sq(max(T, 1)))
        grid = build_grid(d, constraint, spacing, experiment.max_grid_points)
        prior = PriorSpec.gaussian(variance)

        delta: Optional[float] = None
        try:
            delta = refinement_delta(d, constraint, spacing, prior, sequence, experiment.max_grid_points)
        except GridSizeError as e:
            self.logger.warning(f"Skipping the refinement check: {e}")

        details = {
            'grid_cardinality': grid.cardinality,
            'spacing': spacing,
            'gaussian_variance': variance,
            'refinement_delta': delta,
            'refinement_accepted': None if delta is None else delta < REFINEMENT_TOLERANCE,
        }
        return BayesianMixture(grid, prior, name='gaussian-mixture'), details

    # ------------------------------------------------------------------
    # bounds
    # ------------------------------------------------------------------

    @log_execution_time
    def bounds_report(self, experiment: ExperimentConfig) -> Dict[str, Any]:
        """
        Evaluate the bound calculator for one (d, T, B, norm).

        Returns:
            Bound record
        """
        try:
            query = BoundQuery(
                experiment.d, experiment.T, experiment.B, experiment.norm, experiment.eps_exponent
            )
            report = evaluate(query, include_instance_bound=True)
            record: Dict[str, Any] = {'kind': 'bounds', **report.to_dict(bits=experiment.bits)}
            if experiment.labels_m is not None:
                value = multilabel_lower_bound(experiment.d, experiment.labels_m, experiment.T)
                record['labels_m'] = experiment.labels_m
                record['multilabel_lower'] = to_bits(value) if experiment.bits else value

            return self._write_record(experiment, record, 'bounds')
        except Exception as e:
            self.logger.error(f"Bound evaluation failed: {str(e)}")
            raise

    # ------------------------------------------------------------------
    # distinguish / capacity
    # ------------------------------------------------------------------

    def _design_and_grid(self, experiment: ExperimentConfig):
        design = build_design(experiment.d, experiment.T, experiment.gamma_levels)
        grid = build_theory_grid(
            design,
            experiment.spacing_rule,
            experiment.eps_exponent,
            radius_B=experiment.radius_B,
            points_per_dimension=experiment.grid_points,
            max_points=experiment.max_grid_points,
        )
        self.logger.info(f"Theory grid: {grid.cardinality} points, delta={grid.spacing_eps:.4g}")
        return design, grid

    def _design_record(self, experiment: ExperimentConfig, kind: str, grid) -> Dict[str, Any]:
        return {
            'kind': kind,
            'd': experiment.d,
            'T': experiment.T,
            'gamma_levels': experiment.gamma_levels,
            'spacing_rule': experiment.spacing_rule,
            'eps_exponent': experiment.eps_exponent,
            'spacing_delta': grid.spacing_eps,
            'seed': experiment.seed,
        }

    @log_execution_time
    def distinguish(self, experiment: ExperimentConfig) -> Dict[str, Any]:
        """
        Estimate the ML identification error on the segmented design.

        Returns:
            Distinguishability record
        """
        try:
            design, grid = self._design_and_grid(experiment)
            report = estimate_pe(design, grid, experiment.trials, experiment.seed, experiment.threads)
            record = {**self._design_record(experiment, 'distinguish', grid), **report.to_dict()}
            if experiment.bits:
                for key in ('expected_regret_lower', 'fano_regret_lower'):
                    record[key] = to_bits(record[key])
            record['units'] = 'bits' if experiment.bits else 'nats'
            return self._write_record(experiment, record, 'distinguish')
        except Exception as e:
            self.logger.error(f"Distinguishability experiment failed: {str(e)}")
            raise

    @log_execution_time
    def capacity(self, experiment: ExperimentConfig) -> Dict[str, Any]:
        """
        Measure expected regret on grid-labeled sequences against its lower bound.

        Returns:
            Capacity record
        """
        try:
            design, grid = self._design_and_grid(experiment)
            algorithm = self._capacity_algorithm(experiment, grid)
            report = capacity_experiment(
                algorithm, design, grid, experiment.trials, experiment.seed, experiment.threads
            )
            record = {**self._design_record(experiment, 'capacity', grid), **report.to_dict()}
            if experiment.bits:
                for key in ('measured_expected_regret', 'bound', 'standard_error'):
                    record[key] = to_bits(record[key])
            record['units'] = 'bits' if experiment.bits else 'nats'
            return self._write_record(experiment, record, 'capacity')
        except Exception as e:
            self.logger.error(f"Capacity experiment failed: {str(e)}")
            raise

    def _capacity_algorithm(self, experiment: ExperimentConfig, grid) -> OnlineAlgorithm:
        if experiment.algorithm == 'grid-mixture':
            return BayesianMixture(grid)
        if experiment.algorithm == 'gaussian-mixture':
            variance = experiment.prior_variance or grid.constraint.radius_B ** 2
            return BayesianMixture(grid, PriorSpec.gaussian(variance), name='gaussian-mixture')
        if experiment.algorithm == 'kt':
            if experiment.d != 1 or experiment.gamma_levels is not None:
                raise InfeasibleDesignError("The KT predictor needs the plain d = 1 design")
            return KtPredictor()
        schedule = LearningRateSchedule(experiment.schedule, experiment.learning_rate)
        return OnlineGradientDescent(grid.constraint, schedule)

    # ------------------------------------------------------------------
    # sweep
    # ------------------------------------------------------------------

    @log_execution_time
    def sweep(self, experiment: ExperimentConfig) -> Dict[str, Any]:
        """
        Bound table over the cartesian grid of (d, T, B).

        Every cell yields exactly one row; cells that cannot be evaluated
        carry status 'infeasible:<reason>'.

        Returns:
            Record with the row count and artifact path
        """
        try:
            d_values, T_values, B_values = experiment.sweep_axes()
            cells = list(enumerate(itertools.product(d_values, T_values, B_values)))
            self.logger.info(f"Sweeping {len(cells)} cells for the {experiment.norm} ball")

            rows = parallel_map(
                lambda cell: self._sweep_cell(experiment, *cell),
                cells,
                experiment.threads,
                'sweep cells',
            )
            table = pd.DataFrame(rows).reindex(columns=SWEEP_COLUMNS)
            if not experiment.measure:
                table = table.drop(columns=['measured_regret', 'theorem2_bound', 'grid_cardinality'])
            if experiment.bits:
                for column in ('lower_nats', 'upper_nats', 'measured_regret', 'theorem2_bound'):
                    if column in table:
                        table[column] = table[column] / math.log(2.0)
                table = table.rename(columns={'lower_nats': 'lower_bits', 'upper_nats': 'upper_bits'})

            path = self._output_path(experiment, 'sweep', experiment.format)
            written = self.writer.write_all({path: self.writer.render_table(table, experiment.format)})
            infeasible = int((table['status'] != 'ok').sum())
            return {
                'kind': 'sweep',
                'rows': int(len(table)),
                'infeasible': infeasible,
                'artifacts': [str(p) for p in written],
            }
        except Exception as e:
            self.logger.error(f"Sweep failed: {str(e)}")
            raise

    def _sweep_cell(self, experiment: ExperimentConfig, index: int, cell) -> Dict[str, Any]:
        d, T, B = cell
        row: Dict[str, Any] = {'d': d, 'T': T, 'B': B, 'norm': experiment.norm}
        try:
            report = evaluate(BoundQuery(d, T, B, experiment.norm, experiment.eps_exponent))
            row.update({
                'status': 'ok',
                'gamma': report.gamma,
                'table_row': report.table_row,
                'lower_branch': report.lower_branch,
                'lower_nats': report.lower_nats,
                'upper_branch': report.upper_branch,
                'upper_nats': report.upper_nats,
                'lower_in_region': report.lower_in_region,
            })
            if experiment.measure:
                row.update(self._measure_cell(experiment, index, d, T, B))
        except ValueError as e:
            row['status'] = f"infeasible:{e}"
        return row

    def _measure_cell(self, experiment: ExperimentConfig, index: int, d: int, T: int, B: float) -> Dict[str, Any]:
        constraint = NormConstraint(Norm.parse(experiment.norm), B)
        _, sequence = random_sequence(trial_rng(experiment.seed, index), d, T, constraint)
        spacing = default_spacing(T)
        grid = build_grid(d, constraint, spacing, experiment.max_grid_points)
        trace = BayesianMixture(grid).run(sequence)
        return {
            'measured_regret': trace.total_regret,
            'theorem2_bound': theorem2_instance_bound(grid.cardinality, d, T, spacing),
            'grid_cardinality': grid.cardinality,
        }

    # ------------------------------------------------------------------
    # output
    # ------------------------------------------------------------------

    def _output_path(self, experiment: ExperimentConfig, stem: str, extension: str) -> Path:
        if experiment.output_path is not None:
            return Path(experiment.output_path)
        return Path(f"{stem}.{extension}")

    def _check_record(self, record: Dict[str, Any]) -> None:
        result = self.validator.validate_record(record)
        if not result.is_valid:
            raise ValueError(f"Report record failed validation: {result.errors}")

    def _write_record(self, experiment: ExperimentConfig, record: Dict[str, Any], stem: str) -> Dict[str, Any]:
        """Validate and write a report; the format follows the output suffix (JSON by default)."""
        self._check_record(record)
        path = self._output_path(experiment, stem, 'json')
        format = 'csv' if path.suffix == '.csv' else 'json'
        written = self.writer.write_all({path: self.writer.render_record(record, format)})
        record['artifacts'] = [str(p) for p in written]
        return record

    def validate_output(self, path: str) -> bool:
        """
        Validate a written artifact.

        Args:
            path: Trace, report or sweep table

        Returns:
            True if valid
        """
        return self.validator.validate_path(path).is_valid
