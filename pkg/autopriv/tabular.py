"""
Tabular dataset model
Typed binary-classification tables, CSV ingestion with kind inference,
and stratified holdout splitting.
"""
import csv
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from autopriv.errors import DatasetError, SchemaError
from autopriv.utils import format_float, round_half_up

logger = logging.getLogger(__name__)

NA_CATEGORY = '__NA__'
MISSING_TOKENS = frozenset({'', 'na', 'nan'})

Cell = Union[float, str, None]
Row = Tuple[Cell, ...]


class ColumnKind(str, Enum):
    NUMERIC = 'Numeric'
    CATEGORICAL = 'Categorical'


@dataclass(frozen=True)
class Column:
    name: str
    kind: ColumnKind

    @property
    def is_numeric(self) -> bool:
        return self.kind is ColumnKind.NUMERIC


@dataclass(frozen=True)
class Dataset:
    """Immutable table with a binary categorical target.

    Numeric cells are floats, categorical cells are strings, None marks a missing value.
    """
    name: str
    columns: Tuple[Column, ...]
    rows: Tuple[Row, ...]
    target: str

    def __post_init__(self):
        object.__setattr__(self, 'columns', tuple(self.columns))
        object.__setattr__(self, 'rows', tuple(tuple(row) for row in self.rows))
        self._validate()

    def _validate(self):
        names = [column.name for column in self.columns]
        if any(not name for name in names):
            raise DatasetError(f"Dataset '{self.name}': column names must be non-empty")
        if len(set(names)) != len(names):
            raise DatasetError(f"Dataset '{self.name}': duplicate column names")
        if self.target not in names:
            raise DatasetError(f"Dataset '{self.name}': target '{self.target}' not among columns")

        width = len(self.columns)
        for position, row in enumerate(self.rows):
            if len(row) != width:
                raise DatasetError(
                    f"Dataset '{self.name}': row {position} has {len(row)} values, expected {width}")
            for column, value in zip(self.columns, row):
                if value is None:
                    continue
                if column.is_numeric:
                    if isinstance(value, str) or not math.isfinite(value):
                        raise DatasetError(
                            f"Dataset '{self.name}': non-finite numeric cell in column '{column.name}'")
                elif not isinstance(value, str):
                    raise DatasetError(
                        f"Dataset '{self.name}': categorical cell in column '{column.name}' is not text")

        target_column = self.columns[self.target_position]
        if target_column.is_numeric:
            raise DatasetError(f"Dataset '{self.name}': target '{self.target}' must be categorical")
        if len(self.class_values) != 2:
            raise DatasetError(
                f"Dataset '{self.name}': non-binary target '{self.target}' "
                f"({len(self.class_values)} distinct values)")

    # Schema helpers
    @property
    def column_names(self) -> List[str]:
        return [column.name for column in self.columns]

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def target_position(self) -> int:
        return self.column_names.index(self.target)

    @property
    def predictors(self) -> List[Column]:
        return [column for column in self.columns if column.name != self.target]

    @property
    def predictor_names(self) -> List[str]:
        return [column.name for column in self.predictors]

    def position(self, name: str) -> int:
        try:
            return self.column_names.index(name)
        except ValueError:
            raise SchemaError(f"Dataset '{self.name}' has no column '{name}'") from None

    def column(self, name: str) -> Column:
        return self.columns[self.position(name)]

    def values(self, name: str) -> List[Cell]:
        position = self.position(name)
        return [row[position] for row in self.rows]

    @property
    def class_values(self) -> Tuple[str, ...]:
        """Sorted distinct non-missing target tokens; the last one is the positive class."""
        position = self.target_position
        return tuple(sorted({row[position] for row in self.rows if row[position] is not None}))

    @property
    def labels(self) -> np.ndarray:
        """Target as 0/1 integers (1 = positive class)."""
        positive = self.class_values[-1]
        position = self.target_position
        return np.array([1 if row[position] == positive else 0 for row in self.rows], dtype=int)

    def same_schema(self, other: 'Dataset') -> bool:
        return self.columns == other.columns and self.target == other.target

    # Derivations
    def take(self, indices: Sequence[int], name: Optional[str] = None) -> 'Dataset':
        """Sub-table with the given row indices, in the given order."""
        return Dataset(name or self.name, self.columns, [self.rows[i] for i in indices], self.target)

    def with_rows(self, rows: Sequence[Row], name: Optional[str] = None) -> 'Dataset':
        return Dataset(name or self.name, self.columns, rows, self.target)

    def numeric_matrix(self, names: Sequence[str]) -> np.ndarray:
        """Float matrix of the named numeric columns (missing as NaN)."""
        positions = [self.position(name) for name in names]
        return np.array(
            [[np.nan if row[p] is None else row[p] for p in positions] for row in self.rows],
            dtype=float,
        ).reshape(self.n_rows, len(positions))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.rows), columns=self.column_names)


@dataclass(frozen=True)
class Holdout:
    train_idx: Tuple[int, ...]
    test_idx: Tuple[int, ...]
    fraction: float
    seed: int

    def to_dict(self) -> Dict:
        return {'train_idx': list(self.train_idx), 'test_idx': list(self.test_idx),
                'fraction': self.fraction, 'seed': self.seed}

    @classmethod
    def from_dict(cls, payload: Dict) -> 'Holdout':
        return cls(tuple(payload['train_idx']), tuple(payload['test_idx']),
                   float(payload['fraction']), int(payload['seed']))


def is_missing(token: str) -> bool:
    return token.strip().lower() in MISSING_TOKENS


def _parses_as_real(token: str) -> bool:
    try:
        return math.isfinite(float(token))
    except ValueError:
        return False


def load_csv(path: Union[str, Path], target: str, name: Optional[str] = None,
             kinds: Optional[Dict[str, ColumnKind]] = None) -> Dataset:
    """Read a CSV file into a Dataset.

    A column is Numeric when every non-missing cell parses as a finite real number,
    unless `kinds` fixes the column kinds (as for partitions and variants of a known source).
    Missing numerics are replaced by the column median, missing categoricals by
    NA_CATEGORY. Rows with a missing target are dropped.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"CSV file not found: {path}")

    with open(path, 'r', newline='', encoding='utf-8') as csvfile:
        reader = csv.reader(csvfile)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file, header row is mandatory") from None
        header = [cell.strip() for cell in header]
        raw_rows = []
        for record in reader:
            if not record:
                continue
            if len(record) != len(header):
                raise DatasetError(
                    f"{path}: line {reader.line_num} has {len(record)} fields, expected {len(header)}")
            raw_rows.append(record)

    if target not in header:
        raise DatasetError(f"{path}: target column '{target}' not in header")

    target_position = header.index(target)
    kept = [row for row in raw_rows if not is_missing(row[target_position])]
    if len(kept) < len(raw_rows):
        logger.warning(f"[WARNING] {path.name}: dropped {len(raw_rows) - len(kept)} rows with missing target")

    columns = []
    parsed_columns = []
    for position, column_name in enumerate(header):
        cells = [row[position] for row in kept]
        present = [cell for cell in cells if not is_missing(cell)]
        if kinds is not None:
            if column_name not in kinds:
                raise SchemaError(f"{path}: unexpected column '{column_name}'")
            numeric = kinds[column_name] is ColumnKind.NUMERIC
            bad = [cell for cell in present if numeric and not _parses_as_real(cell)]
            if bad:
                raise DatasetError(f"{path}: non-numeric value '{bad[0]}' in numeric column '{column_name}'")
        else:
            numeric = position != target_position and all(_parses_as_real(cell) for cell in present)
        if numeric:
            values = [None if is_missing(cell) else float(cell) for cell in cells]
            observed = [value for value in values if value is not None]
            fill = float(np.median(observed)) if observed else 0.0
            parsed_columns.append([fill if value is None else value for value in values])
            columns.append(Column(column_name, ColumnKind.NUMERIC))
        else:
            if position == target_position:
                values = [cell.strip() for cell in cells]
            else:
                values = [NA_CATEGORY if is_missing(cell) else cell for cell in cells]
            parsed_columns.append(values)
            columns.append(Column(column_name, ColumnKind.CATEGORICAL))

    rows = list(zip(*parsed_columns)) if parsed_columns and kept else []
    return Dataset(name or path.stem, tuple(columns), rows, target)


def write_csv(ds: Dataset, path: Union[str, Path]) -> Path:
    """Write a Dataset as RFC-4180 CSV; floats use their shortest round-trip text."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as csvfile:
        writer = csv.writer(csvfile, lineterminator='\n')
        writer.writerow(ds.column_names)
        for row in ds.rows:
            writer.writerow(['' if value is None else format_float(value) if column.is_numeric else value
                             for column, value in zip(ds.columns, row)])
    return path


def stratified_counts(class_sizes: Sequence[int], fraction: float) -> List[int]:
    """Per-class sample sizes whose total is round(fraction * n).

    Largest-remainder allocation keeps every class within one row of fraction * size;
    classes with at least two members keep at least one row on each side. When that
    floor or ceiling moves the total, the difference is settled on the classes with
    slack, most over- (or under-) allocated first.
    """
    total = round_half_up(fraction * sum(class_sizes))
    quotas = [fraction * size for size in class_sizes]
    counts = [int(math.floor(quota)) for quota in quotas]
    order = sorted(range(len(quotas)), key=lambda c: (-(quotas[c] - counts[c]), c))
    for c in order[:max(0, total - sum(counts))]:
        counts[c] += 1
    low = [1 if size >= 2 else 0 for size in class_sizes]
    high = [size - 1 if size >= 2 else size for size in class_sizes]
    counts = [min(max(count, lo), hi) for count, lo, hi in zip(counts, low, high)]

    while sum(counts) != total:
        step = 1 if sum(counts) < total else -1
        slack = [c for c in range(len(counts)) if low[c] <= counts[c] + step <= high[c]]
        if not slack:
            break
        # surplus leaves the class furthest above its quota, deficit goes to the one furthest below
        c = min(slack, key=lambda c: (step * (counts[c] - quotas[c]), c))
        counts[c] += step
    return counts


def stratified_sample(labels: np.ndarray, fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Positions of a stratified random sample of the given fraction (sorted)."""
    labels = np.asarray(labels)
    classes = np.unique(labels)
    members = [np.flatnonzero(labels == value) for value in classes]
    counts = stratified_counts([len(m) for m in members], fraction)
    chosen = [rng.permutation(m)[:count] for m, count in zip(members, counts)]
    return np.sort(np.concatenate(chosen)) if chosen else np.array([], dtype=int)


def holdout_split(ds: Dataset, fraction: float, seed: int) -> Holdout:
    """Stratified train/test partition of the row indices."""
    if not 0.0 < fraction < 1.0:
        raise DatasetError(f"holdout fraction must lie in (0, 1), got {fraction}")
    labels = ds.labels
    if np.bincount(labels, minlength=2).min() < 2:
        raise DatasetError(f"Dataset '{ds.name}': holdout needs at least 2 rows per class")

    rng = np.random.default_rng(seed)
    test = stratified_sample(labels, fraction, rng)
    mask = np.zeros(ds.n_rows, dtype=bool)
    mask[test] = True
    return Holdout(
        train_idx=tuple(int(i) for i in np.flatnonzero(~mask)),
        test_idx=tuple(int(i) for i in test),
        fraction=fraction,
        seed=seed,
    )
