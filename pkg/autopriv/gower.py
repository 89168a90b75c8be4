"""
Gower distance for mixed-type tables.
Numeric columns contribute |a - b| / range, categorical columns a 0/1 mismatch;
the distance is the average over the selected columns.
"""
from typing import Dict, List, Sequence, Union

import numpy as np

from autopriv.tabular import Dataset, Row


class GowerEncoder:
    """Column encoding shared by every table compared under one distance.

    Ranges come from the reference table. Categorical tokens map to integer codes
    kept in one vocabulary per column, so codes agree across every transformed table.
    """

    def __init__(self, columns: Sequence[str], positions: Sequence[int], numeric: Sequence[bool],
                 ranges: Sequence[float]):
        self.columns = tuple(columns)
        self.positions = tuple(positions)
        self.numeric = tuple(numeric)
        self.ranges = tuple(ranges)
        self._vocab: List[Dict[str, int]] = [{} for _ in self.columns]

    @classmethod
    def fit(cls, reference: Dataset, columns: Sequence[str]) -> 'GowerEncoder':
        numeric, ranges = [], []
        positions = [reference.position(name) for name in columns]
        for name in columns:
            column = reference.column(name)
            numeric.append(column.is_numeric)
            if column.is_numeric:
                values = np.array([v for v in reference.values(name) if v is not None], dtype=float)
                ranges.append(float(values.max() - values.min()) if values.size else 0.0)
            else:
                ranges.append(0.0)
        return cls(columns, positions, numeric, ranges)

    def transform(self, table: Union[Dataset, Sequence[Row]]) -> np.ndarray:
        """Float matrix of the encoded columns; missing values become NaN.

        Datasets are read by column name, bare row sequences by the reference positions.
        """
        rows = table.rows if isinstance(table, Dataset) else table
        matrix = np.empty((len(rows), len(self.columns)), dtype=float)
        for j, name in enumerate(self.columns):
            p = table.position(name) if isinstance(table, Dataset) else self.positions[j]
            values = [row[p] for row in rows]
            if self.numeric[j]:
                matrix[:, j] = [np.nan if v is None else v for v in values]
                continue
            vocab = self._vocab[j]
            codes = []
            for value in values:
                if value is None:
                    codes.append(np.nan)
                else:
                    codes.append(float(vocab.setdefault(value, len(vocab))))
            matrix[:, j] = codes
        return matrix


def pairwise_gower(left: np.ndarray, right: np.ndarray, encoder: GowerEncoder) -> np.ndarray:
    """Distance matrix (len(left) x len(right)) between two encoded blocks."""
    n_cols = left.shape[1]
    if n_cols == 0:
        return np.zeros((left.shape[0], right.shape[0]))
    total = np.zeros((left.shape[0], right.shape[0]))
    for j in range(n_cols):
        a = left[:, j][:, None]
        b = right[:, j][None, :]
        if encoder.numeric[j]:
            spread = encoder.ranges[j]
            diff = np.abs(a - b)
            part = diff / spread if spread > 0 else (diff > 0).astype(float)
        else:
            part = (a != b).astype(float)
        both_missing = np.isnan(a) & np.isnan(b)
        one_missing = np.isnan(a) ^ np.isnan(b)
        part = np.where(both_missing, 0.0, np.where(one_missing, 1.0, part))
        total += part
    return total / n_cols


def k_nearest(distances: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest entries per row; ties go to the lower column index."""
    k = min(k, distances.shape[1])
    order = np.argsort(distances, axis=1, kind='stable')
    return order[:, :k]
