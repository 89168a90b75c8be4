"""
Bundled desk-scale corpus
Deterministic synthetic binary-classification tables with mixed predictor kinds,
coarse enough that some QI tuples repeat and others are unique.
"""
import logging
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from autopriv.utils import derive_seed

logger = logging.getLogger(__name__)

CORPUS_DATASETS = (
    ('desk_credit', 10),
    ('desk_clinic', 15),
    ('desk_census', 20),
)
CORPUS_ROWS = 1000
TARGET_COLUMN = 'label'


def synthetic_table(n_rows: int, n_predictors: int, seed: int) -> pd.DataFrame:
    """Mixed numeric/categorical predictors and a logistic 'yes'/'no' target (last column)."""
    rng = np.random.default_rng(seed)
    n_categorical = n_predictors // 3
    n_numeric = n_predictors - n_categorical
    columns = {}
    signal = np.zeros(n_rows)

    for j in range(n_numeric):
        kind = j % 3
        if kind == 0:
            values = np.clip(np.round(rng.normal(45, 15, n_rows)), 18, 90)
        elif kind == 1:
            values = np.round(rng.lognormal(3.0, 0.6, n_rows))
        else:
            values = rng.integers(0, 12, n_rows).astype(float)
        columns[f"num_{j}"] = values
        spread = values.std() or 1.0
        signal += rng.normal(0, 1) * (values - values.mean()) / spread

    for j in range(n_categorical):
        levels = [f"c{j}_{level}" for level in range(int(rng.integers(2, 6)))]
        weights = rng.dirichlet(np.ones(len(levels)) * 2.0)
        codes = rng.choice(len(levels), size=n_rows, p=weights)
        columns[f"cat_{j}"] = np.array(levels, dtype=object)[codes]
        effects = rng.normal(0, 1, len(levels))
        signal += effects[codes]

    signal = signal / np.sqrt(max(n_predictors, 1)) * 2.0
    probability = 1.0 / (1.0 + np.exp(-(signal - np.median(signal))))
    columns[TARGET_COLUMN] = np.where(rng.random(n_rows) < probability, 'yes', 'no')
    return pd.DataFrame(columns)


def generate_corpus(out_dir: Union[str, Path], seed: int = 0, n_rows: int = CORPUS_ROWS) -> List[Path]:
    """Write the bundled corpus CSVs; reruns with the same seed give identical files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, n_predictors in CORPUS_DATASETS:
        frame = synthetic_table(n_rows, n_predictors, derive_seed(seed, 'corpus', name))
        path = out_dir / f"{name}.csv"
        frame.to_csv(path, index=False, lineterminator='\n')
        written.append(path)
        logger.info(f"[SUCCESS] Wrote {path} ({n_rows} rows, {n_predictors} predictors)")
    return written
