"""
Parser for labeled example sequences stored as CSV
"""

import logging
import re
from typing import List

import numpy as np
import pandas as pd

from core.logistic import LabeledSequence
from utils.errors import FeatureBoundError


class ExampleCSVParser:
    """
    Parse a labeled sequence from a CSV file, one round per row.

    Expected CSV columns (flexible, will auto-detect):
    - label: +1/-1 (or 1/0) label, also accepted as y, target, class
    - x1..xd or feature_1..feature_d: feature coordinates in [-1, 1]

    Rows keep their file order, which is the round order.
    """

    # Common column name variations to look for
    COLUMN_MAPPINGS = {
        'label': ['label', 'y', 'target', 'class', 'outcome'],
    }

    FEATURE_PATTERN = re.compile(r'^(?:x|feature|feat|f)[_\s]?(\d+)$')

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def parse(self, filepath: str) -> LabeledSequence:
        """
        Parse a labeled sequence from a CSV file.

        Args:
            filepath: Path to CSV file

        Returns:
            LabeledSequence

        Raises:
            FeatureBoundError: For features outside [-1, 1] or invalid labels
            ValueError: If the label or feature columns cannot be found
        """
        self.logger.info(f"Parsing example CSV file: {filepath}")

        try:
            df = pd.read_csv(filepath, sep=None, engine='python')
            df = self._standardize_columns(df)
            feature_columns = self._feature_columns(df)
            labels = self._labels(df['label'])
            features = df[feature_columns].to_numpy(dtype=float)

            if not np.all(np.isfinite(features)):
                raise FeatureBoundError("Feature values must be finite numbers")

            sequence = LabeledSequence(features, labels)
            self.logger.info(
                f"Parsed {len(sequence)} rounds with {len(feature_columns)} features from CSV"
            )
            return sequence

        except Exception as e:
            self.logger.error(f"Failed to parse CSV file: {str(e)}")
            raise

    def _standardize_columns(self, df: pd.DataFrame) -> pd.DataFrame:
        """
        Standardize the label column name.

        Args:
            df: Input DataFrame

        Returns:
            DataFrame with a 'label' column
        """
        column_map = {}
        for standard_name, variations in self.COLUMN_MAPPINGS.items():
            for col in df.columns:
                if str(col).lower().strip() in variations:
                    column_map[col] = standard_name
                    break

        df = df.rename(columns=column_map)
        self.logger.debug(f"Column mapping: {column_map}")

        if 'label' not in df.columns:
            raise ValueError(
                "CSV must contain a label column (label, y, target, class). "
                f"Found columns: {list(df.columns)}"
            )
        return df

    def _feature_columns(self, df: pd.DataFrame) -> List[str]:
        """
        Feature columns in coordinate order.

        Numbered columns (x1, feature_2, ...) are sorted by their number;
        without any, every other numeric column is used in file order.
        """
        numbered = []
        for col in df.columns:
            match = self.FEATURE_PATTERN.match(str(col).lower().strip())
            if match and col != 'label':
                numbered.append((int(match.group(1)), col))

        if numbered:
            return [col for _, col in sorted(numbered)]

        columns = [
            col for col in df.columns
            if col != 'label' and pd.api.types.is_numeric_dtype(df[col])
        ]
        if not columns:
            raise ValueError(f"CSV has no feature columns. Found columns: {list(df.columns)}")
        return columns

    def _labels(self, column: pd.Series) -> np.ndarray:
        """Labels as -1/+1; a 0/1 coding is mapped to -1/+1."""
        values = pd.to_numeric(column, errors='coerce').to_numpy(dtype=float)
        if np.any(np.isnan(values)):
            raise FeatureBoundError("Labels must be numeric")

        observed = set(np.unique(values).tolist())
        if observed <= {0.0, 1.0} and 0.0 in observed:
            self.logger.info("Mapping 0/1 labels to -1/+1")
            values = 2.0 * values - 1.0
        elif not observed <= {-1.0, 1.0}:
            raise FeatureBoundError(f"Labels must be -1/+1 or 0/1, got {sorted(observed)}")
        return values.astype(np.int64)
