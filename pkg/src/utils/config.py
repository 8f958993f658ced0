"""
Configuration management module
"""

import copy
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from utils.errors import ConfigurationError
from utils.seeding import MAX_SEED

COMMANDS = ('run', 'bounds', 'distinguish', 'capacity', 'sweep')
ALGORITHMS = ('grid-mixture', 'gaussian-mixture', 'kt', 'ogd')
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')
NORM_ALIASES = {'inf': 'linf', 'l\u221e': 'linf'}


class ExperimentConfig(BaseModel):
    """
    Validated flag set of one workbench command.

    Every stochastic output is a function of these fields; seed drives
    all random streams.
    """

    model_config = ConfigDict(extra='forbid', frozen=True)

    command: Literal['run', 'bounds', 'distinguish', 'capacity', 'sweep'] = 'run'
    algorithm: Literal['grid-mixture', 'gaussian-mixture', 'kt', 'ogd'] = 'grid-mixture'
    norm: Literal['l1', 'l2', 'linf'] = 'linf'
    B: float = Field(1.0, gt=0)
    d: int = Field(1, ge=1)
    T: int = Field(16, ge=1)
    spacing: Optional[float] = Field(None, gt=0)
    trials: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0, lt=MAX_SEED)
    output_path: Optional[Path] = None
    format: Literal['csv', 'json'] = 'csv'

    sequence: Literal['random', 'segmented', 'csv'] = 'random'
    input_path: Optional[Path] = None
    gamma_levels: Optional[int] = Field(None, ge=1)
    eps_exponent: float = Field(0.0, ge=0, lt=1)
    spacing_rule: Literal['probability', 'logit'] = 'probability'
    grid_points: Optional[int] = Field(None, ge=1)
    radius_B: Optional[float] = Field(None, gt=0)
    prior_variance: Optional[float] = Field(None, gt=0)
    learning_rate: float = Field(1.0, ge=0)
    schedule: Literal['constant', 'inv_sqrt'] = 'inv_sqrt'
    labels_m: Optional[int] = Field(None, ge=2)
    bits: bool = False

    d_values: Optional[List[int]] = None
    T_values: Optional[List[int]] = None
    B_values: Optional[List[float]] = None
    measure: bool = False

    max_grid_points: int = Field(20_000_000, ge=1)
    tol: float = Field(1e-8, gt=0)
    threads: Optional[int] = Field(None, ge=1)

    @field_validator('norm', mode='before')
    @classmethod
    def _parse_norm(cls, value):
        key = str(getattr(value, 'value', value)).strip().lower()
        return NORM_ALIASES.get(key, key)

    @field_validator('d_values', 'T_values', 'B_values', mode='before')
    @classmethod
    def _split_values(cls, value):
        if isinstance(value, str):
            return [item.strip() for item in value.split(',') if item.strip()]
        if isinstance(value, (int, float)):
            return [value]
        return value

    @model_validator(mode='after')
    def _check_combination(self) -> 'ExperimentConfig':
        if self.command == 'run':
            if self.sequence == 'csv' and self.input_path is None:
                raise ValueError("sequence 'csv' needs an input path")
            if self.algorithm == 'kt' and self.d != 1:
                raise ValueError(f"Algorithm 'kt' needs d = 1, got d = {self.d}")
        if self.algorithm == 'gaussian-mixture' and self.norm == 'l1':
            raise ValueError("Algorithm 'gaussian-mixture' supports the l2 and linf balls only")
        for name in ('d_values', 'T_values', 'B_values'):
            values = getattr(self, name)
            if values is not None and len(values) == 0:
                raise ValueError(f"{name} must not be empty")
        return self

    def sweep_axes(self):
        """(d, T, B) value lists, defaulting to the single-point flags."""
        return (
            list(self.d_values or [self.d]),
            list(self.T_values or [self.T]),
            list(self.B_values or [self.B]),
        )


class Config:
    """
    Manage configuration settings for the workbench.

    Supports loading from:
    - YAML files
    - JSON files
    - key=value files (any other suffix)
    - Environment variables
    - Default values

    The working directory is never searched for a config file.
    """

    DEFAULT_CONFIG = {
        'experiment': {},
        'solver': {
            'tol': 1e-8,
            'iteration_factor': 50,
        },
        'grid': {
            'max_points': 20_000_000,
        },
        'monte_carlo': {
            'trials': 1000,
        },
        'execution': {
            'threads': None,
        },
        'output': {
            'format': 'csv',
            'float_digits': 17,
        },
        'logging': {
            'level': 'INFO',
            'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            'file': None,
        }
    }

    # Sections that supply ExperimentConfig fields before experiment.* and flags
    SECTION_FIELDS = {
        'solver.tol': 'tol',
        'grid.max_points': 'max_grid_points',
        'monte_carlo.trials': 'trials',
        'execution.threads': 'threads',
        'output.format': 'format',
    }

    ENV_MAPPINGS = {
        'REGRETLAB_THREADS': ['execution', 'threads'],
        'REGRETLAB_LOG_LEVEL': ['logging', 'level'],
    }

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize configuration.

        Args:
            config_path: Path to configuration file (optional)
        """
        self.logger = logging.getLogger(__name__)
        self.config = copy.deepcopy(self.DEFAULT_CONFIG)

        self.load_from_env()

        if config_path:
            self.load_from_file(config_path)

    def load_from_file(self, filepath: str) -> None:
        """
        Load configuration from file.

        Args:
            filepath: Path to configuration file

        Raises:
            ConfigurationError: If the file is missing or cannot be parsed
        """
        filepath = Path(filepath)

        if not filepath.exists():
            raise ConfigurationError(f"Config file not found: {filepath}", path=str(filepath))

        try:
            with open(filepath, 'r') as f:
                if filepath.suffix in ['.yaml', '.yml']:
                    data = yaml.safe_load(f) or {}
                elif filepath.suffix == '.json':
                    data = json.load(f)
                else:
                    data = self._parse_key_values(f.read())
        except (OSError, ValueError, yaml.YAMLError) as e:
            raise ConfigurationError(f"Failed to load config file: {e}", path=str(filepath)) from e

        if not isinstance(data, dict):
            raise ConfigurationError(
                f"Config file must contain a mapping, got {type(data).__name__}",
                path=str(filepath),
            )

        self.config = self._deep_merge(self.config, data)
        self.logger.debug(f"Loaded configuration from {filepath}")

    def _parse_key_values(self, text: str) -> Dict[str, Any]:
        """
        Parse key=value lines; bare keys address the experiment section.

        Args:
            text: File contents

        Returns:
            Nested dictionary
        """
        data: Dict[str, Any] = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ValueError(f"line {number}: expected key=value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split('=', 1))
            keys = key.split('.') if '.' in key else ['experiment', key]
            self._set_nested(data, keys, self._parse_value(value))
        return data

    def load_from_env(self) -> None:
        """Load execution and logging settings from environment variables."""
        for env_var, config_path in self.ENV_MAPPINGS.items():
            value = os.environ.get(env_var)
            if value:
                self._set_nested(self.config, config_path, self._parse_value(value))
                self.logger.debug(f"Set {'.'.join(config_path)} from {env_var}")

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value.

        Args:
            key: Configuration key (supports dot notation)
            default: Default value if key not found

        Returns:
            Configuration value
        """
        value = self.config
        for k in key.split('.'):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any) -> None:
        """
        Set configuration value.

        Args:
            key: Configuration key (supports dot notation)
            value: Value to set
        """
        self._set_nested(self.config, key.split('.'), value)

    def experiment(self, **overrides: Any) -> ExperimentConfig:
        """
        Build the validated experiment configuration.

        Precedence: overrides (CLI flags) > config file > environment >
        defaults. Overrides set to None are ignored.

        Raises:
            ConfigurationError: When the merged values do not validate
        """
        values: Dict[str, Any] = {}
        for key, field_name in self.SECTION_FIELDS.items():
            value = self.get(key)
            if value is not None:
                values[field_name] = value
        values.update(self.get('experiment', {}) or {})
        values.update({k: v for k, v in overrides.items() if v is not None})

        try:
            return ExperimentConfig(**values)
        except ValidationError as e:
            problems = '; '.join(
                f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
                for err in e.errors()
            )
            raise ConfigurationError(f"Invalid experiment configuration: {problems}") from e

    def _deep_merge(self, base: Dict, update: Dict) -> Dict:
        """
        Deep merge two dictionaries.

        Args:
            base: Base dictionary
            update: Dictionary with updates

        Returns:
            Merged dictionary
        """
        result = copy.deepcopy(base)

        for key, value in update.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = value

        return result

    def _set_nested(self, data: Dict, keys: list, value: Any) -> None:
        for key in keys[:-1]:
            if key not in data or not isinstance(data[key], dict):
                data[key] = {}
            data = data[key]

        data[keys[-1]] = value

    def _parse_value(self, value: str) -> Any:
        """
        Parse string value to appropriate type.

        Args:
            value: String value

        Returns:
            Parsed value
        """
        try:
            return json.loads(value)
        except ValueError:
            pass

        if value.lower() in ['true', 'yes']:
            return True
        elif value.lower() in ['false', 'no']:
            return False
        elif value.lower() in ['none', 'null']:
            return None

        return value

    def save(self, filepath: str, format: str = 'yaml') -> None:
        """
        Save current configuration to file.

        Args:
            filepath: Output file path
            format: Output format ('yaml' or 'json')
        """
        filepath = Path(filepath)

        with open(filepath, 'w') as f:
            if format == 'yaml':
                yaml.safe_dump(self.config, f, default_flow_style=False)
            elif format == 'json':
                json.dump(self.config, f, indent=2)
            else:
                raise ValueError(f"Unknown format: {format}")

        self.logger.info(f"Saved configuration to {filepath}")

    def validate(self) -> bool:
        """
        Validate configuration settings.

        Returns:
            True if valid
        """
        valid = True

        level = str(self.get('logging.level', '')).upper()
        if level not in LOG_LEVELS:
            self.logger.error(f"Invalid log level: {level}")
            valid = False

        output_format = self.get('output.format')
        if output_format not in ('csv', 'json'):
            self.logger.error(f"Invalid output format: {output_format}")
            valid = False

        threads = self.get('execution.threads')
        if threads is not None and (not isinstance(threads, int) or threads < 1):
            self.logger.error(f"Invalid thread count: {threads}")
            valid = False

        max_points = self.get('grid.max_points')
        if not isinstance(max_points, int) or max_points < 1:
            self.logger.error(f"Invalid grid cap: {max_points}")
            valid = False

        return valid
