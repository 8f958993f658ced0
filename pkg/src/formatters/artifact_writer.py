"""
Trace, report and table writers
"""

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np
import pandas as pd

from core.logistic import ParamVector, RegretTrace

TRACE_COLUMNS = ['round', 'alg_loss_nats', 'comparator_loss_nats', 'cum_regret_nats']
FORMATS = ('csv', 'json')

PathLike = Union[str, Path]


def format_float(value: float, digits: int = 17) -> str:
    """Shortest text with the requested significant digits."""
    return format(float(value), f'.{digits}g')


def _json_number(value: float, digits: int) -> str:
    value = float(value)
    if not math.isfinite(value):
        return 'null'
    return format_float(value, digits)


def _check_format(format: str) -> str:
    if format not in FORMATS:
        raise ValueError(f"Unknown output format {format!r}; expected one of {FORMATS}")
    return format


def _plain(value: Any) -> Any:
    """Convert numpy scalars, paths and non-finite floats for json."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, ParamVector):
        return _plain(value.weights)
    return value


class ArtifactWriter:
    """
    Render artifacts to text and move them into place atomically.

    Every artifact of a command is rendered in memory first, so a failure
    while computing or rendering leaves no file behind.
    """

    def __init__(self, config: Optional[Any] = None):
        self.logger = logging.getLogger(__name__)
        self.digits = 17
        if hasattr(config, 'get'):
            self.digits = int(config.get('output.float_digits', 17) or 17)

    def render_trace(self, trace: RegretTrace, format: str = 'csv') -> str:
        """
        Text of a regret trace.

        CSV has the columns round, alg_loss_nats, comparator_loss_nats and
        cum_regret_nats, rounds numbered from 1. JSON holds the same fields
        as parallel arrays plus the comparator.

        Args:
            trace: Regret trace
            format: 'csv' or 'json'

        Returns:
            File contents
        """
        _check_format(format)
        columns = (
            trace.per_round_alg_loss,
            trace.per_round_comparator_loss,
            trace.cumulative_regret,
        )

        if format == 'csv':
            buffer = io.StringIO()
            writer = csv.DictWriter(buffer, fieldnames=TRACE_COLUMNS, lineterminator='\n')
            writer.writeheader()
            for t in range(trace.rounds):
                writer.writerow({
                    'round': t + 1,
                    'alg_loss_nats': format_float(columns[0][t], self.digits),
                    'comparator_loss_nats': format_float(columns[1][t], self.digits),
                    'cum_regret_nats': format_float(columns[2][t], self.digits),
                })
            return buffer.getvalue()

        def array(values) -> str:
            return '[' + ', '.join(_json_number(v, self.digits) for v in values) + ']'

        comparator = 'null'
        if trace.comparator is not None:
            comparator = array(trace.comparator.weights)
        lines = [
            '{',
            f'  "round": [{", ".join(str(t + 1) for t in range(trace.rounds))}],',
            f'  "alg_loss_nats": {array(columns[0])},',
            f'  "comparator_loss_nats": {array(columns[1])},',
            f'  "cum_regret_nats": {array(columns[2])},',
            f'  "comparator": {comparator}',
            '}',
        ]
        return '\n'.join(lines) + '\n'

    def render_record(self, record: Mapping[str, Any], format: str = 'json') -> str:
        """Text of one report record (JSON object or single-row CSV)."""
        _check_format(format)
        record = _plain(dict(record))
        if format == 'json':
            return json.dumps(record, indent=2) + '\n'
        flat = {k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in record.items()}
        return self.render_table(pd.DataFrame([flat]), 'csv')

    def render_table(self, table: Union[pd.DataFrame, List[Dict[str, Any]]], format: str = 'csv') -> str:
        """Text of a long-format table."""
        _check_format(format)
        frame = table if isinstance(table, pd.DataFrame) else pd.DataFrame(table)
        if format == 'csv':
            return frame.to_csv(index=False, float_format=f'%.{self.digits}g', lineterminator='\n')
        records = _plain(frame.astype(object).where(frame.notna(), None).to_dict(orient='records'))
        return json.dumps(records, indent=2) + '\n'

    def write_all(self, artifacts: Mapping[PathLike, str]) -> List[Path]:
        """
        Write several files so that either all of them land or none.

        Each file is written to a temporary sibling and moved into place
        with os.replace once every temporary file is complete.

        Args:
            artifacts: Destination path -> contents

        Returns:
            Written paths

        Raises:
            OSError: On any I/O failure, with the offending path in the message
        """
        staged = []
        try:
            for destination, text in artifacts.items():
                destination = Path(destination)
                destination.parent.mkdir(parents=True, exist_ok=True)
                handle = tempfile.NamedTemporaryFile(
                    'w',
                    dir=destination.parent,
                    prefix=f'.{destination.name}.',
                    suffix='.tmp',
                    delete=False,
                    encoding='utf-8',
                    newline='',
                )
                staged.append((handle.name, destination))
                with handle:
                    handle.write(text)
            for temporary, destination in staged:
                os.replace(temporary, destination)
        except OSError as e:
            for temporary, _ in staged:
                if os.path.exists(temporary):
                    os.unlink(temporary)
            path = getattr(e, 'filename', None) or (staged[-1][1] if staged else '')
            raise OSError(e.errno, f"Failed to write artifact {path}: {e.strerror or e}") from e

        written = [destination for _, destination in staged]
        for path in written:
            self.logger.info(f"Wrote {path}")
        return written

    def emit_trace(self, trace: RegretTrace, path: PathLike, format: str = 'csv') -> Path:
        return self.write_all({path: self.render_trace(trace, format)})[0]

    def write_record(self, record: Mapping[str, Any], path: PathLike, format: str = 'json') -> Path:
        return self.write_all({path: self.render_record(record, format)})[0]

    def write_table(self, table: pd.DataFrame, path: PathLike, format: str = 'csv') -> Path:
        return self.write_all({path: self.render_table(table, format)})[0]


def emit_trace(trace: RegretTrace, path: PathLike, format: str = 'csv') -> Path:
    """
    Write a regret trace file.

    Args:
        trace: Regret trace
        path: Destination
        format: 'csv' or 'json'

    Returns:
        Written path
    """
    return ArtifactWriter().emit_trace(trace, path, format)


def read_trace(path: PathLike) -> RegretTrace:
    """
    Load a trace written by emit_trace.

    Args:
        path: CSV or JSON trace file (chosen by suffix)

    Returns:
        RegretTrace
    """
    path = Path(path)
    if path.suffix == '.json':
        with open(path, 'r') as f:
            data = json.load(f)
        comparator = data.get('comparator')
        return RegretTrace(
            data['alg_loss_nats'],
            data['comparator_loss_nats'],
            data['cum_regret_nats'],
            comparator=ParamVector(comparator) if comparator is not None else None,
        )

    frame = pd.read_csv(path, dtype={'round': np.int64}, float_precision='round_trip')
    if list(frame.columns) != TRACE_COLUMNS:
        raise ValueError(f"Unexpected trace columns in {path}: {list(frame.columns)}")
    return RegretTrace(
        frame['alg_loss_nats'].to_numpy(dtype=float),
        frame['comparator_loss_nats'].to_numpy(dtype=float),
        frame['cum_regret_nats'].to_numpy(dtype=float),
    )
