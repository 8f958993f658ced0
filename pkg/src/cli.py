#!/usr/bin/env python
"""
Command-line interface for the regret workbench
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional

# Add src to path if running as script
if __name__ == "__main__":
    sys.path.insert(0, str(Path(__file__).parent))

from utils.config import ALGORITHMS
from utils.errors import error_record
from utils.logger import setup_logger
from workbench import RegretWorkbench

# argparse dest -> ExperimentConfig field
FLAG_FIELDS = {
    'algorithm': 'algorithm',
    'norm': 'norm',
    'B': 'B',
    'd': 'd',
    'T': 'T',
    'spacing': 'spacing',
    'trials': 'trials',
    'seed': 'seed',
    'output': 'output_path',
    'format': 'format',
    'sequence': 'sequence',
    'input': 'input_path',
    'gamma_levels': 'gamma_levels',
    'eps_exponent': 'eps_exponent',
    'spacing_rule': 'spacing_rule',
    'grid_points': 'grid_points',
    'radius_B': 'radius_B',
    'prior_variance': 'prior_variance',
    'learning_rate': 'learning_rate',
    'schedule': 'schedule',
    'm': 'labels_m',
    'bits': 'bits',
    'd_values': 'd_values',
    'T_values': 'T_values',
    'B_values': 'B_values',
    'measure': 'measure',
    'max_grid_points': 'max_grid_points',
    'tol': 'tol',
    'threads': 'threads',
}


def main(argv: Optional[list] = None) -> int:
    """Main CLI entry point."""
    parser = create_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return 1

    try:
        workbench = RegretWorkbench(config_path=args.config)
    except Exception as e:
        print(json.dumps(error_record(e)), file=sys.stderr)
        return 1

    # Set up logging
    log_level = workbench.config.get('logging.level', 'INFO')
    if args.verbose:
        log_level = 'DEBUG'
    if args.quiet:
        log_level = 'ERROR'
    logger = setup_logger(
        None,
        level=log_level,
        log_file=args.log_file or workbench.config.get('logging.file'),
        format_string=workbench.config.get('logging.format'),
    )

    if args.command == 'validate':
        return validate_command(args, workbench, logger)
    if args.command == 'config':
        return config_command(args, workbench, logger)
    return experiment_command(args, workbench, logger)


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    """Flags shared by every experiment command; unset flags default to None."""
    model = parser.add_argument_group('model')
    model.add_argument('--alg', '--algorithm', dest='algorithm', choices=ALGORITHMS,
                       help='Online algorithm (default: grid-mixture)')
    model.add_argument('--norm', help='Ball geometry: l1, l2 or linf (default: linf)')
    model.add_argument('--B', type=float, help='Ball radius (default: 1)')
    model.add_argument('--d', type=int, help='Dimension (default: 1)')
    model.add_argument('--T', type=int, help='Horizon (default: 16)')
    model.add_argument('--spacing', type=float, help='Lattice spacing (default: 4/sqrt(T))')
    model.add_argument('--prior-variance', type=float, help='Gaussian prior variance')
    model.add_argument('--learning-rate', type=float, help='OGD base learning rate')
    model.add_argument('--schedule', choices=['constant', 'inv_sqrt'], help='OGD learning-rate schedule')
    model.add_argument('--tol', type=float, help='Comparator solver tolerance')
    model.add_argument('--max-grid-points', type=int, help='Grid cardinality cap')

    data = parser.add_argument_group('sequence')
    data.add_argument('--sequence', choices=['random', 'segmented', 'csv'], help='Sequence source for run')
    data.add_argument('--input', help='Example CSV for --sequence csv')
    data.add_argument('--seed', type=int, help='Seed for every random stream (default: 0)')

    design = parser.add_argument_group('adversarial design')
    design.add_argument('--gamma-levels', type=int, help='Scaled design with this many levels')
    design.add_argument('--eps-exponent', type=float, help='Slack exponent in [0, 1)')
    design.add_argument('--spacing-rule', choices=['probability', 'logit'], help='Theory grid spacing rule')
    design.add_argument('--grid-points', type=int, help='Points per dimension of the theory grid')
    design.add_argument('--radius-B', type=float, help='First-coordinate value of the scaled grid')
    design.add_argument('--trials', type=int, help='Monte Carlo trials')

    report = parser.add_argument_group('report')
    report.add_argument('--m', type=int, help='Label count for the multi-label lower bound')
    report.add_argument('--d-values', help='Comma-separated sweep dimensions')
    report.add_argument('--T-values', help='Comma-separated sweep horizons')
    report.add_argument('--B-values', help='Comma-separated sweep radii')
    report.add_argument('--measure', action='store_true', default=None,
                        help='Run the grid mixture in every sweep cell')
    report.add_argument('--bits', action='store_true', default=None, help='Report bits instead of nats')

    output = parser.add_argument_group('output')
    output.add_argument('-o', '--output', help='Output file')
    output.add_argument('--format', choices=['csv', 'json'], help='Trace or table format')
    output.add_argument('--threads', type=int, help='Worker cap (default: REGRETLAB_THREADS or all cores)')


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser."""
    parser = argparse.ArgumentParser(
        prog='regretlab',
        description='Online logistic regression regret workbench',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Run the lattice mixture on a random sequence (trace CSV plus summary JSON)
  regretlab run --alg grid-mixture --norm l1 --B 1 --d 1 --T 16 --seed 7 -o trace.csv

  # Bound report for one (d, T, B)
  regretlab bounds --norm linf --d 2 --B 1 --T 100

  # ML identification error on the segmented design
  regretlab distinguish --d 2 --T 64 --trials 2000 --seed 1

  # Bound table over a grid of cells
  regretlab sweep --norm l2 --d-values 1,2,4 --T-values 64,1024 --B-values 1,4 -o sweep.csv

  # Validate a written artifact
  regretlab validate trace.csv

  # Write the merged configuration (defaults, environment, --config file)
  regretlab --config config.yaml config -o merged.yaml
        """
    )

    # Global options
    parser.add_argument('-v', '--verbose', action='store_true', help='Enable verbose output')
    parser.add_argument('-q', '--quiet', action='store_true', help='Suppress output except errors')
    parser.add_argument('--log-file', help='Log to file')
    parser.add_argument('--config', help='Path to configuration file')

    # Subcommands
    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    commands = {
        'run': 'Run an online algorithm and write its regret trace',
        'bounds': 'Evaluate the regret bounds for one (d, T, B, norm)',
        'distinguish': 'Estimate the ML identification error of the segmented design',
        'capacity': 'Compare measured expected regret with the capacity lower bound',
        'sweep': 'Tabulate bounds over a grid of (d, T, B)',
    }
    for name, help_text in commands.items():
        _add_experiment_flags(subparsers.add_parser(name, help=help_text))

    # Validate command
    validate_parser = subparsers.add_parser('validate', help='Validate a trace, report or sweep table')
    validate_parser.add_argument('path', help='Artifact to validate')

    # Config command
    config_parser = subparsers.add_parser('config', help='Write the merged configuration to a file')
    config_parser.add_argument(
        '-o', '--output', default='regretlab_config.yaml',
        help='Output file; JSON when it ends in .json, YAML otherwise',
    )

    return parser


def experiment_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """ExperimentConfig overrides from parsed flags."""
    overrides = {'command': args.command}
    for dest, field_name in FLAG_FIELDS.items():
        overrides[field_name] = getattr(args, dest, None)
    return overrides


def experiment_command(args: argparse.Namespace, workbench: RegretWorkbench, logger: logging.Logger) -> int:
    """Handle run, bounds, distinguish, capacity and sweep."""
    try:
        experiment = workbench.experiment(**experiment_overrides(args))
        record = workbench.execute(experiment)

        logger.info(f"[SUCCESS] {args.command} finished")
        for path in record.get('artifacts', []):
            logger.info(f"   - {path}")
        return 0

    except Exception as e:
        logger.error(f"[FAILED] {args.command} failed: {str(e)}")
        print(json.dumps(error_record(e)), file=sys.stderr)
        return 1


def validate_command(args: argparse.Namespace, workbench: RegretWorkbench, logger: logging.Logger) -> int:
    """Handle validate command."""
    logger.info(f"Validating {args.path}")

    try:
        if workbench.validate_output(args.path):
            logger.info(f"[VALID] {args.path} is a valid artifact")
            return 0
        logger.error(f"[INVALID] {args.path} validation failed")
        return 1

    except Exception as e:
        logger.error(f"[ERROR] Validation error: {str(e)}")
        print(json.dumps(error_record(e)), file=sys.stderr)
        return 1


def config_command(args: argparse.Namespace, workbench: RegretWorkbench, logger: logging.Logger) -> int:
    """Handle config command."""
    output_format = 'json' if Path(args.output).suffix == '.json' else 'yaml'
    try:
        workbench.config.save(args.output, format=output_format)
        logger.info(f"[SUCCESS] Configuration written to {args.output}")
        return 0

    except Exception as e:
        logger.error(f"[FAILED] Could not write configuration: {str(e)}")
        print(json.dumps(error_record(e)), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
