"""
Validation of written traces and report records
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import jsonschema
import numpy as np
import pandas as pd

from core.logistic import CUMULATIVE_ATOL
from formatters.artifact_writer import TRACE_COLUMNS


@dataclass
class ValidationResult:
    """Container for validation results."""
    is_valid: bool = True
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    info: Dict[str, Any] = field(default_factory=dict)


_NUMBER = {'type': 'number'}
_NULLABLE_NUMBER = {'type': ['number', 'null']}
_COUNT = {'type': 'integer', 'minimum': 0}

REPORT_SCHEMAS: Dict[str, Dict[str, Any]] = {
    'run': {
        'type': 'object',
        'required': ['kind', 'algorithm', 'norm', 'd', 'T', 'B', 'seed', 'final_regret',
                     'comparator_loss', 'theorem2_bound', 'upper_bound_formula'],
        'properties': {
            'kind': {'const': 'run'},
            'final_regret': _NUMBER,
            'comparator_loss': {'type': 'number', 'minimum': 0},
            'theorem2_bound': _NULLABLE_NUMBER,
            'upper_bound_formula': _NULLABLE_NUMBER,
            'd': {'type': 'integer', 'minimum': 1},
            'T': _COUNT,
            'seed': _COUNT,
        },
    },
    'bounds': {
        'type': 'object',
        'required': ['kind', 'd', 'T', 'B', 'norm', 'gamma', 'table_row', 'region_label',
                     'lower_branch', 'upper_branch', 'units'],
        'properties': {
            'kind': {'const': 'bounds'},
            'gamma': _NUMBER,
            'table_row': {'type': 'integer', 'minimum': 1, 'maximum': 8},
            'norm': {'enum': ['l1', 'l2', 'linf']},
            'units': {'enum': ['nats', 'bits']},
        },
    },
    'distinguish': {
        'type': 'object',
        'required': ['kind', 'grid_cardinality_M', 'trials', 'error_rate_Pe',
                     'expected_regret_lower', 'standard_error'],
        'properties': {
            'kind': {'const': 'distinguish'},
            'grid_cardinality_M': {'type': 'integer', 'minimum': 1},
            'trials': {'type': 'integer', 'minimum': 1},
            'error_rate_Pe': {'type': 'number', 'minimum': 0, 'maximum': 1},
            'expected_regret_lower': _NUMBER,
            'exact_error_rate': _NULLABLE_NUMBER,
        },
    },
    'capacity': {
        'type': 'object',
        'required': ['kind', 'measured_expected_regret', 'bound', 'standard_error',
                     'error_rate', 'violation', 'grid_cardinality', 'trials'],
        'properties': {
            'kind': {'const': 'capacity'},
            'measured_expected_regret': _NUMBER,
            'bound': _NUMBER,
            'standard_error': {'type': 'number', 'minimum': 0},
            'violation': {'type': 'boolean'},
        },
    },
}


def _scalar(value: Any) -> Any:
    if pd.isna(value):
        return None
    return value.item() if isinstance(value, np.generic) else value


class ArtifactValidator:
    """
    Validate workbench artifacts.

    Validates:
    - Trace files: exact header, consecutive rounds from 1, nonnegative
      losses, cumulative regret matching the per-round differences
    - Report records: JSON schema of the record kind
    - Sweep tables: one status per row
    """

    def __init__(self, config: Optional[Any] = None):
        self.logger = logging.getLogger(__name__)
        self.config = config or {}

    def validate_path(self, path: Union[str, Path]) -> ValidationResult:
        """
        Validate any artifact file, dispatching on suffix and content.

        Args:
            path: Trace CSV/JSON, report JSON or sweep table

        Returns:
            ValidationResult object
        """
        path = Path(path)
        result = ValidationResult(info={'path': str(path)})

        if not path.is_file():
            result.errors.append(f"Path does not exist: {path}")
            result.is_valid = False
            return result

        try:
            if path.suffix == '.json':
                with open(path, 'r') as f:
                    data = json.load(f)
                if isinstance(data, dict) and 'cum_regret_nats' in data and 'kind' not in data:
                    self._validate_trace_frame(self._json_trace_frame(data), result)
                elif isinstance(data, dict):
                    self.validate_record(data, result)
                elif isinstance(data, list):
                    self._validate_table(pd.DataFrame(data), result)
                else:
                    result.errors.append("JSON artifact must be an object or a list of rows")
            else:
                frame = pd.read_csv(path, float_precision='round_trip')
                if list(frame.columns) == TRACE_COLUMNS:
                    self._validate_trace_frame(frame, result)
                elif 'kind' in frame.columns and len(frame) == 1:
                    record = {k: _scalar(v) for k, v in frame.iloc[0].to_dict().items()}
                    self.validate_record(record, result)
                else:
                    self._validate_table(frame, result)
        except (OSError, ValueError) as e:
            result.errors.append(f"Failed to read {path}: {e}")

        result.is_valid = len(result.errors) == 0
        if result.is_valid:
            self.logger.info(f"{path} is a valid {result.info.get('artifact', 'artifact')}")
        else:
            self.logger.error(f"Validation failed with {len(result.errors)} errors")
            for error in result.errors:
                self.logger.error(f"  - {error}")
        for warning in result.warnings:
            self.logger.warning(f"  - {warning}")
        return result

    def validate_record(
        self, record: Dict[str, Any], result: Optional[ValidationResult] = None
    ) -> ValidationResult:
        """
        Check a report record against the schema of its kind.

        Args:
            record: Report dictionary with a 'kind' field
            result: Result to extend (a new one when omitted)

        Returns:
            ValidationResult object
        """
        result = result or ValidationResult()
        kind = record.get('kind')
        result.info['artifact'] = f"{kind} report"
        schema = REPORT_SCHEMAS.get(kind)
        if schema is None:
            result.errors.append(f"Unknown report kind: {kind!r}")
        else:
            validator = jsonschema.Draft7Validator(schema)
            for error in sorted(validator.iter_errors(record), key=lambda e: [str(p) for p in e.path]):
                location = '.'.join(str(p) for p in error.path) or 'record'
                result.errors.append(f"{location}: {error.message}")

        if kind == 'distinguish' and not result.errors:
            capacity = math.log(record['grid_cardinality_M'])
            if record.get('units') == 'bits':
                capacity /= math.log(2.0)
            if record['expected_regret_lower'] > capacity + 1e-12:
                result.errors.append("expected_regret_lower exceeds the log grid cardinality")
        if kind == 'capacity' and record.get('violation'):
            result.warnings.append("Measured regret fell below the capacity bound")

        result.is_valid = len(result.errors) == 0
        return result

    def _json_trace_frame(self, data: Dict[str, Any]) -> pd.DataFrame:
        missing = [c for c in TRACE_COLUMNS if c not in data]
        if missing:
            raise ValueError(f"Trace JSON is missing fields {missing}")
        return pd.DataFrame({c: data[c] for c in TRACE_COLUMNS})

    def _validate_trace_frame(self, frame: pd.DataFrame, result: ValidationResult) -> None:
        result.info['artifact'] = 'trace'
        result.info['rounds'] = int(len(frame))
        if list(frame.columns) != TRACE_COLUMNS:
            result.errors.append(f"Trace columns must be {TRACE_COLUMNS}, got {list(frame.columns)}")
            return
        if len(frame) == 0:
            return

        rounds = frame['round'].to_numpy()
        if not np.array_equal(rounds, np.arange(1, len(frame) + 1)):
            result.errors.append("Rounds must run 1, 2, ..., T")

        alg = frame['alg_loss_nats'].to_numpy(dtype=float)
        comp = frame['comparator_loss_nats'].to_numpy(dtype=float)
        cumulative = frame['cum_regret_nats'].to_numpy(dtype=float)
        if not (np.all(np.isfinite(alg)) and np.all(np.isfinite(comp)) and np.all(np.isfinite(cumulative))):
            result.errors.append("Trace contains non-finite values")
            return
        if alg.min() < 0 or comp.min() < 0:
            result.errors.append("Per-round losses must be nonnegative")
        if not np.allclose(cumulative, np.cumsum(alg - comp), rtol=1e-12, atol=CUMULATIVE_ATOL):
            result.errors.append("Cumulative regret disagrees with the per-round losses")

    def _validate_table(self, frame: pd.DataFrame, result: ValidationResult) -> None:
        result.info['artifact'] = 'sweep table'
        result.info['rows'] = int(len(frame))
        for column in ('d', 'T', 'B', 'status'):
            if column not in frame.columns:
                result.errors.append(f"Sweep table is missing column {column!r}")
        if result.errors:
            return
        statuses = frame['status'].astype(str)
        bad = statuses[~((statuses == 'ok') | statuses.str.startswith('infeasible:'))]
        if len(bad):
            result.errors.append(f"Unexpected status values: {sorted(set(bad))}")
        if frame.duplicated(subset=['d', 'T', 'B'] + (['norm'] if 'norm' in frame else [])).any():
            result.errors.append("Sweep table has duplicate (d, T, B) cells")
