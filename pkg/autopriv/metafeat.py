"""
Meta-feature extraction
A fixed 23-value description of a dataset (general, statistical, information-theoretic
and landmarking groups) and the 11-slot encoding of a privacy configuration.
"""
import hashlib
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import stats
from sklearn.metrics import mutual_info_score
from sklearn.neighbors import KNeighborsClassifier
from sklearn.tree import DecisionTreeClassifier

from autopriv.errors import GridError
from autopriv.learning import FeatureEncoder, auc
from autopriv.synth import TECHNIQUE_ORDER, PrivacyConfig, Technique
from autopriv.tabular import Dataset

logger = logging.getLogger(__name__)

MF_VERSION = 'mf-v1'
ENTROPY_BINS = 10
LANDMARK_TRAIN_FRACTION = 0.7

META_FEATURE_NAMES: Tuple[str, ...] = (
    'n_rows', 'n_predictors', 'dim_ratio', 'frac_numeric', 'frac_categorical', 'minority_fraction',
    'mean_of_means', 'sd_of_means', 'mean_of_sds', 'sd_of_sds',
    'mean_skewness', 'sd_skewness', 'mean_kurtosis', 'sd_kurtosis',
    'mean_abs_corr', 'sd_abs_corr',
    'class_entropy', 'mean_attr_entropy', 'sd_attr_entropy', 'mean_mutual_info', 'noise_signal_ratio',
    'nn1_auc', 'stump_auc',
)

CONFIG_PARAM_SLOTS: Tuple[str, ...] = ('epochs', 'batch_size', 'epsilon', 'N', 'knn')
CONFIG_ENCODING_NAMES: Tuple[str, ...] = tuple(f"tech_{t.value}" for t in TECHNIQUE_ORDER) + CONFIG_PARAM_SLOTS

FEATURE_NAMES: Tuple[str, ...] = META_FEATURE_NAMES + CONFIG_ENCODING_NAMES


@dataclass(frozen=True)
class MetaFeatureVector:
    values: Tuple[float, ...]

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(META_FEATURE_NAMES, self.values))

    def __getitem__(self, name: str) -> float:
        return self.values[META_FEATURE_NAMES.index(name)]


@dataclass(frozen=True)
class ConfigEncoding:
    values: Tuple[float, ...]

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(CONFIG_ENCODING_NAMES, self.values))


def _finite(value: float) -> float:
    value = float(value)
    return value if math.isfinite(value) else 0.0


def _mean_sd(values: Sequence[float]) -> Tuple[float, float]:
    values = [v for v in values if math.isfinite(v)]
    if not values:
        return 0.0, 0.0
    return float(np.mean(values)), float(np.std(values))


def _min_max(column: np.ndarray) -> np.ndarray:
    lo, hi = column.min(), column.max()
    if hi <= lo:
        return np.zeros_like(column)
    return (column - lo) / (hi - lo)


def _numeric(ds: Dataset, name: str) -> np.ndarray:
    """Numeric column with missing cells set to the column median."""
    column = np.array([np.nan if v is None else v for v in ds.values(name)], dtype=float)
    if np.isnan(column).any():
        column[np.isnan(column)] = np.nanmedian(column) if (~np.isnan(column)).any() else 0.0
    return column


def _discretize(ds: Dataset, name: str) -> np.ndarray:
    """Integer codes per row: 10 equal-width bins for numerics, category index otherwise."""
    values = ds.values(name)
    if ds.column(name).is_numeric:
        normalized = _min_max(_numeric(ds, name))
        return np.minimum((normalized * ENTROPY_BINS).astype(int), ENTROPY_BINS - 1)
    lookup = {token: i for i, token in enumerate(sorted(set(values), key=str))}
    return np.array([lookup[v] for v in values], dtype=int)


def _entropy_bits(codes: np.ndarray) -> float:
    return float(stats.entropy(np.bincount(codes), base=2)) if codes.size else 0.0


def _row_order(ds: Dataset, seed: int) -> np.ndarray:
    """Row positions sorted by a seeded hash of the row content."""
    keys = []
    for position, row in enumerate(ds.rows):
        digest = hashlib.blake2b(repr((seed, row)).encode('utf-8'), digest_size=8).digest()
        keys.append((digest, repr(row), position))
    return np.array([position for _, _, position in sorted(keys)], dtype=int)


def _landmarkers(ds: Dataset, seed: int) -> Tuple[float, float]:
    """Test AUC of a 1-nearest-neighbour scorer and of the best decision stump on a 70/30 row-hash split."""
    labels = ds.labels
    order = _row_order(ds, seed)
    cut = int(round(LANDMARK_TRAIN_FRACTION * len(order)))
    train, test = order[:cut], order[cut:]
    if len(np.unique(labels[train])) < 2 or len(np.unique(labels[test])) < 2:
        return 0.0, 0.0

    rows = ds.rows
    train_rows = [rows[i] for i in train]
    test_rows = [rows[i] for i in test]
    scaled = FeatureEncoder(ds.columns, ds.target_position, standardize=True).fit(train_rows)
    X_train, X_test = scaled.transform(train_rows), scaled.transform(test_rows)
    if X_train.shape[1] == 0:
        return 0.0, 0.0

    nearest = KNeighborsClassifier(n_neighbors=1).fit(X_train, labels[train])
    nn1 = auc(nearest.predict(X_test).astype(float), labels[test])

    raw = FeatureEncoder(ds.columns, ds.target_position, standardize=False).fit(train_rows)
    stump = DecisionTreeClassifier(max_depth=1, random_state=seed % (2 ** 32))
    stump.fit(raw.transform(train_rows), labels[train])
    stump_auc = auc(stump.predict_proba(raw.transform(test_rows))[:, -1], labels[test])
    return _finite(nn1), _finite(stump_auc)


def extract(ds: Dataset, seed: int = 0) -> MetaFeatureVector:
    """The 23 meta-features of `ds`; undefined statistics are reported as 0."""
    n = ds.n_rows
    predictors = ds.predictors
    p = len(predictors)
    numeric = [c.name for c in predictors if c.is_numeric]
    labels = ds.labels
    class_counts = np.bincount(labels, minlength=2)

    features: Dict[str, float] = {
        'n_rows': float(n),
        'n_predictors': float(p),
        'dim_ratio': p / n if n else 0.0,
        'frac_numeric': len(numeric) / p if p else 0.0,
        'frac_categorical': (p - len(numeric)) / p if p else 0.0,
        'minority_fraction': float(class_counts.min() / n) if n else 0.0,
    }

    normalized = [_min_max(_numeric(ds, name)) for name in numeric]
    means = [float(col.mean()) for col in normalized]
    sds = [float(col.std()) for col in normalized]
    with np.errstate(all='ignore'):
        skews = [float(stats.skew(col)) for col in normalized]
        kurts = [float(stats.kurtosis(col)) for col in normalized]
    features['mean_of_means'], features['sd_of_means'] = _mean_sd(means)
    features['mean_of_sds'], features['sd_of_sds'] = _mean_sd(sds)
    features['mean_skewness'], features['sd_skewness'] = _mean_sd(skews)
    features['mean_kurtosis'], features['sd_kurtosis'] = _mean_sd(kurts)

    correlations = []
    for i in range(len(normalized)):
        for j in range(i + 1, len(normalized)):
            if normalized[i].std() > 0 and normalized[j].std() > 0:
                correlations.append(abs(float(np.corrcoef(normalized[i], normalized[j])[0, 1])))
    features['mean_abs_corr'], features['sd_abs_corr'] = _mean_sd(correlations)

    features['class_entropy'] = _entropy_bits(labels)
    codes = [_discretize(ds, c.name) for c in predictors]
    entropies = [_entropy_bits(code) for code in codes]
    mutual = [mutual_info_score(labels, code) / math.log(2) for code in codes]
    features['mean_attr_entropy'], features['sd_attr_entropy'] = _mean_sd(entropies)
    features['mean_mutual_info'], _ = _mean_sd(mutual)
    features['noise_signal_ratio'] = (
        (features['mean_attr_entropy'] - features['mean_mutual_info']) / max(features['mean_mutual_info'], 1e-12)
    )

    features['nn1_auc'], features['stump_auc'] = _landmarkers(ds, seed)
    return MetaFeatureVector(tuple(_finite(features[name]) for name in META_FEATURE_NAMES))


def encode_config(config: PrivacyConfig) -> ConfigEncoding:
    """Technique one-hot followed by epochs, batch_size, epsilon, N, knn (0 when inapplicable)."""
    try:
        technique = Technique(config.technique)
    except ValueError:
        raise GridError(f"unknown technique '{config.technique}'") from None
    onehot = [1.0 if technique is t else 0.0 for t in TECHNIQUE_ORDER]
    params = config.param_dict
    return ConfigEncoding(tuple(onehot + [float(params.get(slot, 0.0)) for slot in CONFIG_PARAM_SLOTS]))


def feature_row(vector: MetaFeatureVector, encoding: ConfigEncoding) -> List[float]:
    """34-value predictor row of the meta-models."""
    return list(vector.values) + list(encoding.values)
