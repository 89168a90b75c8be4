"""
Privacy configurations and synthesis of highest-risk records
The canonical privacy-configuration grid, native epsilon-PrivateSMOTE, a marginal
baseline synthesizer, variant assembly and import of externally generated variants.
"""
import csv
import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from autopriv.errors import GridError, SchemaError, SynthesisError
from autopriv.gower import GowerEncoder, k_nearest, pairwise_gower
from autopriv.tabular import Dataset, Row, is_missing

logger = logging.getLogger(__name__)

MAX_REDRAWS = 32


class Technique(str, Enum):
    COPULA_GAN = 'CopulaGAN'
    TVAE = 'TVAE'
    CTGAN = 'CTGAN'
    DPGAN = 'DPGAN'
    PATEGAN = 'PATEGAN'
    PRIVATE_SMOTE = 'PrivateSMOTE'


TECHNIQUE_ORDER: Tuple[Technique, ...] = tuple(Technique)

_GAN_GRID = (('epochs', (100, 200)), ('batch_size', (50, 100)))
_DP_GAN_GRID = _GAN_GRID + (('epsilon', (0.1, 0.5, 1.0, 5.0)),)

PARAM_GRIDS: Dict[Technique, Tuple[Tuple[str, tuple], ...]] = {
    Technique.COPULA_GAN: _GAN_GRID,
    Technique.TVAE: _GAN_GRID,
    Technique.CTGAN: _GAN_GRID,
    Technique.DPGAN: _DP_GAN_GRID,
    Technique.PATEGAN: _DP_GAN_GRID,
    Technique.PRIVATE_SMOTE: (('N', (1, 2, 3)), ('knn', (1, 3, 5)), ('epsilon', (0.1, 0.5, 1.0, 5.0, 10.0))),
}


@dataclass(frozen=True)
class PrivacyConfig:
    technique: Technique
    params: Tuple[Tuple[str, Any], ...]
    config_id: int

    @property
    def param_dict(self) -> Dict[str, Any]:
        return dict(self.params)

    def param(self, name: str, default: Any = None) -> Any:
        return self.param_dict.get(name, default)

    @property
    def is_native(self) -> bool:
        return self.technique is Technique.PRIVATE_SMOTE

    def label(self) -> str:
        values = ', '.join(f"{key}={value}" for key, value in self.params)
        return f"{self.technique.value}({values})"

    def to_dict(self) -> Dict[str, Any]:
        return {'technique': self.technique.value, 'params': self.param_dict, 'config_id': self.config_id}


@lru_cache(maxsize=1)
def _grid() -> Tuple[PrivacyConfig, ...]:
    configs = []
    for technique in TECHNIQUE_ORDER:
        keys = [key for key, _ in PARAM_GRIDS[technique]]
        for values in itertools.product(*(choices for _, choices in PARAM_GRIDS[technique])):
            configs.append(PrivacyConfig(technique, tuple(zip(keys, values)), len(configs)))
    return tuple(configs)


def enumerate_config_grid() -> List[PrivacyConfig]:
    """All 89 privacy configurations in canonical order (config_id = position)."""
    return list(_grid())


def config_by_id(config_id: int) -> PrivacyConfig:
    grid = _grid()
    if not 0 <= config_id < len(grid):
        raise GridError(f"config_id {config_id} outside the privacy configuration grid")
    return grid[config_id]


def lookup_config(technique: Union[str, Technique], params: Dict[str, Any]) -> PrivacyConfig:
    """Canonical config for a technique and parameter assignment."""
    try:
        technique = Technique(technique)
    except ValueError:
        raise GridError(f"unknown technique '{technique}'") from None

    grid = PARAM_GRIDS[technique]
    expected = [key for key, _ in grid]
    if sorted(params) != sorted(expected):
        raise GridError(f"{technique.value} expects parameters {expected}, got {sorted(params)}")
    for key, choices in grid:
        if not any(math.isclose(float(params[key]), float(choice)) for choice in choices):
            raise GridError(f"parameter outside the privacy configuration grid: {key}={params[key]}")

    for config in _grid():
        if config.technique is technique and all(
                math.isclose(float(params[key]), float(value)) for key, value in config.params):
            return config
    raise GridError(f"no grid entry for {technique.value} {params}")  # pragma: no cover


@dataclass(frozen=True)
class Provenance:
    source: str
    qi_set: int
    config: PrivacyConfig
    seed: int = 0
    qi_columns: Tuple[str, ...] = ()


@dataclass(frozen=True)
class ProtectedVariant:
    data: Dataset
    source: str
    qi_set: int
    config: PrivacyConfig
    replaced: int
    synthesized: int
    seed: int = 0
    qi_columns: Tuple[str, ...] = ()

    def provenance_dict(self) -> Dict[str, Any]:
        return {
            'source': self.source,
            'qi_set': self.qi_set,
            'qi_columns': list(self.qi_columns),
            'technique': self.config.technique.value,
            'params': self.config.param_dict,
            'config_id': self.config.config_id,
            'replaced': self.replaced,
            'synthesized': self.synthesized,
            'seed': self.seed,
        }


# Synthesizers
def _column_bounds(ds: Dataset, positions: Sequence[int]) -> Dict[int, Tuple[float, float]]:
    bounds = {}
    for p in positions:
        values = [row[p] for row in ds.rows if row[p] is not None]
        bounds[p] = (min(values), max(values)) if values else (0.0, 0.0)
    return bounds


def _avoid_verbatim(row: List, forbidden: set, redraw: Callable[[], List], ds: Dataset,
                    categories: Dict[int, List[str]], bounds: Dict[int, Tuple[float, float]]) -> Tuple:
    """Return a replica that differs from every forbidden source row on at least one column."""
    attempts = 0
    while tuple(row) in forbidden and attempts < MAX_REDRAWS:
        row = redraw()
        attempts += 1
    if tuple(row) not in forbidden:
        return tuple(row)

    target = ds.target_position
    for p, column in enumerate(ds.columns):
        if p == target:
            continue
        if not column.is_numeric and len(categories.get(p, [])) > 1:
            for token in categories[p]:
                if token != row[p]:
                    candidate = list(row)
                    candidate[p] = token
                    if tuple(candidate) not in forbidden:
                        return tuple(candidate)
        if column.is_numeric and row[p] is not None:
            low, high = bounds[p]
            if high > low:
                step = (high - low) * 1e-6
                candidate = list(row)
                candidate[p] = row[p] - step if row[p] >= high else min(row[p] + step, high)
                if tuple(candidate) not in forbidden:
                    return tuple(candidate)
    logger.warning(f"[WARNING] Could not separate a replica from its source rows in '{ds.name}'")
    return tuple(row)


def private_smote(ds: Dataset, highrisk: Sequence[int], N: int, knn: int, epsilon: float, seed: int,
                  fixed_gap: Optional[float] = None) -> List[Row]:
    """epsilon-PrivateSMOTE replicas of the highest-risk records.

    Each highest-risk record t yields N replicas. A replica interpolates between t and
    a neighbour u drawn among t's knn nearest same-class highest-risk records (Gower
    distance on predictors), adds Laplace noise of scale range/epsilon to numeric
    attributes and clamps them to the observed column range; categorical attributes
    come from t or u with equal probability. The label is copied from t.
    `fixed_gap` pins the interpolation factor (testing aid).
    """
    highrisk = sorted(int(i) for i in highrisk)
    if not highrisk:
        raise SynthesisError("private_smote needs at least one highest-risk record")
    if N < 1:
        raise SynthesisError(f"N must be at least 1, got {N}")
    if knn < 1:
        raise SynthesisError(f"knn must be at least 1, got {knn}")
    if not epsilon > 0:
        raise SynthesisError(f"epsilon must be positive, got {epsilon}")

    rng = np.random.default_rng(seed)
    target = ds.target_position
    numeric = [p for p, c in enumerate(ds.columns) if c.is_numeric and p != target]
    categorical = [p for p, c in enumerate(ds.columns) if not c.is_numeric and p != target]
    bounds = _column_bounds(ds, numeric)
    categories = {p: sorted({row[p] for row in ds.rows if row[p] is not None}) for p in categorical}

    partition = [ds.rows[i] for i in highrisk]
    scales = {}
    for p in numeric:
        values = [row[p] for row in partition if row[p] is not None]
        spread = (max(values) - min(values)) if values else 0.0
        if spread == 0:
            spread = bounds[p][1] - bounds[p][0]
        scales[p] = spread / epsilon

    encoder = GowerEncoder.fit(ds, ds.predictor_names)
    block = encoder.transform(partition)
    distances = pairwise_gower(block, block, encoder)
    labels = ds.labels[highrisk]

    forbidden = set(partition)
    synthetic: List[Row] = []
    for local, t_index in enumerate(highrisk):
        t = ds.rows[t_index]
        same = np.flatnonzero((labels == labels[local]) & (np.arange(len(highrisk)) != local))
        k_eff = min(knn, len(same))
        neighbours = same[k_nearest(distances[local:local + 1, same], k_eff)[0]] if k_eff else np.array([], int)

        def replica() -> List:
            u = ds.rows[highrisk[int(neighbours[rng.integers(len(neighbours))])]] if len(neighbours) else t
            gap = rng.random() if fixed_gap is None else fixed_gap
            row = list(t)
            for p in numeric:
                if t[p] is None or u[p] is None:
                    continue
                value = t[p] + gap * (u[p] - t[p]) + rng.laplace(0.0, scales[p])
                low, high = bounds[p]
                row[p] = float(min(max(value, low), high))
            for p in categorical:
                row[p] = t[p] if rng.random() < 0.5 else u[p]
            return row

        for _ in range(N):
            synthetic.append(_avoid_verbatim(replica(), forbidden, replica, ds, categories, bounds))
    return synthetic


def marginal_baseline_synth(ds: Dataset, highrisk: Sequence[int], seed: int) -> List[Row]:
    """One replica per highest-risk record, each column drawn i.i.d. from the partition's marginal."""
    highrisk = sorted(int(i) for i in highrisk)
    if not highrisk:
        raise SynthesisError("marginal_baseline_synth needs at least one highest-risk record")
    rng = np.random.default_rng(seed)
    partition = [ds.rows[i] for i in highrisk]
    target = ds.target_position
    predictors = [p for p in range(len(ds.columns)) if p != target]
    pools = {p: [row[p] for row in partition] for p in predictors}

    synthetic = []
    for t_index in highrisk:
        row = list(ds.rows[t_index])
        for p in predictors:
            row[p] = pools[p][int(rng.integers(len(pools[p])))]
        synthetic.append(tuple(row))
    return synthetic


def assemble_variant(ds: Dataset, highrisk: Sequence[int], synthetic: Sequence[Row],
                     provenance: Provenance) -> ProtectedVariant:
    """Non-risk rows in source order followed by the synthetic rows."""
    width = len(ds.columns)
    for position, row in enumerate(synthetic):
        if len(row) != width:
            raise SchemaError(f"synthetic row {position} has {len(row)} values, expected {width}")
    removed = set(int(i) for i in highrisk)
    kept = [row for i, row in enumerate(ds.rows) if i not in removed]
    data = ds.with_rows(kept + [tuple(row) for row in synthetic],
                        name=f"{ds.name}-qi{provenance.qi_set}-c{provenance.config.config_id}")
    return ProtectedVariant(
        data=data,
        source=provenance.source,
        qi_set=provenance.qi_set,
        config=provenance.config,
        replaced=len(removed),
        synthesized=len(synthetic),
        seed=provenance.seed,
        qi_columns=tuple(provenance.qi_columns),
    )


def verbatim_survivors(ds: Dataset, highrisk: Sequence[int], variant: ProtectedVariant) -> int:
    """Number of variant rows equal on all columns to a replaced source row."""
    removed = {ds.rows[i] for i in highrisk}
    return sum(1 for row in variant.data.rows if row in removed)


def import_external_variant(path: Union[str, Path], provenance: Provenance, source: Dataset,
                            replaced: int = 0) -> ProtectedVariant:
    """Load a variant produced outside the pipeline (e.g. by a neural synthesizer)."""
    config = lookup_config(provenance.config.technique, provenance.config.param_dict)
    path = Path(path)
    if not path.is_file():
        raise SynthesisError(f"external variant not found: {path}")

    with open(path, 'r', newline='', encoding='utf-8') as csvfile:
        reader = csv.reader(csvfile)
        header = [cell.strip() for cell in next(reader, [])]
        expected = source.column_names
        for position, name in enumerate(expected):
            found = header[position] if position < len(header) else None
            if found != name:
                shown = 'nothing' if found is None else f"'{found}'"
                raise SchemaError(
                    f"{path.name}: column mismatch at position {position}: expected '{name}', found {shown}")
        if len(header) != len(expected):
            raise SchemaError(f"{path.name}: unexpected extra column '{header[len(expected)]}'")

        rows, unlabelled = [], 0
        target_position = source.target_position
        for record in reader:
            if not record:
                continue
            if len(record) != len(expected):
                raise SchemaError(f"{path.name}: line {reader.line_num} has {len(record)} fields")
            if is_missing(record[target_position]):
                unlabelled += 1
                continue
            row = []
            for column, cell in zip(source.columns, record):
                if is_missing(cell):
                    row.append(None)
                elif column.is_numeric:
                    try:
                        row.append(float(cell))
                    except ValueError:
                        raise SchemaError(
                            f"{path.name}: line {reader.line_num} column '{column.name}' is not numeric") from None
                else:
                    row.append(cell.strip() if column.name == source.target else cell)
            rows.append(tuple(row))

    if unlabelled:
        logger.warning(f"[WARNING] {path.name}: dropped {unlabelled} rows with missing target")
    data = source.with_rows(rows, name=f"{source.name}-qi{provenance.qi_set}-c{config.config_id}")
    return ProtectedVariant(
        data=data,
        source=provenance.source,
        qi_set=provenance.qi_set,
        config=config,
        replaced=replaced,
        synthesized=max(0, data.n_rows - (source.n_rows - replaced)),
        seed=provenance.seed,
        qi_columns=tuple(provenance.qi_columns),
    )


def generate_variant(ds: Dataset, highrisk: Sequence[int], provenance: Provenance) -> ProtectedVariant:
    """Native ε-PrivateSMOTE variant for one configuration."""
    config = provenance.config
    if not config.is_native:
        raise SynthesisError(f"{config.technique.value} is not synthesized natively; import its variant")
    synthetic = private_smote(ds, highrisk, N=config.param('N'), knn=config.param('knn'),
                              epsilon=config.param('epsilon'), seed=provenance.seed)
    return assemble_variant(ds, highrisk, synthetic, provenance)
