"""
Twin meta-models and the averaged-rank recommender
Linear (tiny-ridge) regressors predicting best AUC and linkability risk from the
34 meta-predictors, and the ranking that turns both predictions into an ordered
list of privacy configurations.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.stats import rankdata

from autopriv.errors import MetaModelError, NotFittedError
from autopriv.metafeat import FEATURE_NAMES, MF_VERSION, encode_config, extract, feature_row
from autopriv.synth import PrivacyConfig, enumerate_config_grid
from autopriv.tabular import Dataset

logger = logging.getLogger(__name__)

N_FEATURES = len(FEATURE_NAMES)
DEFAULT_RIDGE_LAMBDA = 1e-8


class MetaTarget(str, Enum):
    PERFORMANCE = 'Performance'
    LINKABILITY = 'Linkability'


@dataclass(frozen=True)
class MetaRow:
    dataset: str
    qi_id: int
    config_id: int
    features: Tuple[float, ...]
    y_perf: float
    y_link: float

    def __post_init__(self):
        object.__setattr__(self, 'features', tuple(float(v) for v in self.features))
        if len(self.features) != N_FEATURES:
            raise MetaModelError(f"meta row {self.dataset}/{self.qi_id}/{self.config_id} has "
                                 f"{len(self.features)} features, expected {N_FEATURES}")
        for name, value in (('y_perf', self.y_perf), ('y_link', self.y_link)):
            if not 0.0 <= value <= 1.0:
                raise MetaModelError(f"{name}={value} outside [0, 1] for {self.dataset}/{self.config_id}")

    def target(self, target: MetaTarget) -> float:
        return self.y_perf if target is MetaTarget.PERFORMANCE else self.y_link


@dataclass(frozen=True)
class MetaModel:
    """Standardized-feature linear model: y = ((x - mean) / sd) . coefficients + intercept."""
    target: MetaTarget
    intercept: float
    coefficients: Tuple[float, ...]
    feature_means: Tuple[float, ...]
    feature_sds: Tuple[float, ...]
    ridge_lambda: float
    mf_version: str = MF_VERSION

    def to_dict(self) -> Dict:
        return {
            'target': self.target.value,
            'mf_version': self.mf_version,
            'intercept': self.intercept,
            'coefficients': list(self.coefficients),
            'feature_means': list(self.feature_means),
            'feature_sds': list(self.feature_sds),
            'ridge_lambda': self.ridge_lambda,
        }

    @classmethod
    def from_dict(cls, payload: Dict) -> 'MetaModel':
        if payload.get('mf_version') != MF_VERSION:
            raise MetaModelError(f"meta-model built with meta-features '{payload.get('mf_version')}', "
                                 f"this build uses '{MF_VERSION}'")
        model = cls(MetaTarget(payload['target']), float(payload['intercept']),
                    tuple(payload['coefficients']), tuple(payload['feature_means']),
                    tuple(payload['feature_sds']), float(payload['ridge_lambda']), payload['mf_version'])
        if not len(model.coefficients) == len(model.feature_means) == len(model.feature_sds):
            raise MetaModelError("meta-model arrays have inconsistent lengths")
        return model

    def raw_coefficients(self) -> Tuple[np.ndarray, float]:
        """Coefficients and intercept on the unstandardized feature scale."""
        beta = np.asarray(self.coefficients) / np.asarray(self.feature_sds)
        return beta, float(self.intercept - beta @ np.asarray(self.feature_means))


def fit_meta(rows: Sequence[MetaRow], target, ridge_lambda: float = DEFAULT_RIDGE_LAMBDA) -> MetaModel:
    """Least squares with a ridge term, solved on the augmented system [Xs; sqrt(lambda) I]."""
    target = MetaTarget(target)
    if len(rows) < 2:
        raise MetaModelError(f"need at least 2 meta rows, got {len(rows)}")
    if ridge_lambda < 0:
        raise MetaModelError(f"ridge_lambda must be non-negative, got {ridge_lambda}")

    X = np.array([row.features for row in rows], dtype=float)
    y = np.array([row.target(target) for row in rows], dtype=float)
    means = X.mean(axis=0)
    sds = X.std(axis=0)
    sds = np.where(sds > 0, sds, 1.0)
    Xs = (X - means) / sds
    intercept = float(y.mean())

    d = X.shape[1]
    A = np.vstack([Xs, np.sqrt(ridge_lambda) * np.eye(d)])
    b = np.concatenate([y - intercept, np.zeros(d)])
    beta, *_ = linalg.lstsq(A, b)
    logger.debug(f"Fitted {target.value} meta-model on {len(rows)} rows (lambda={ridge_lambda})")
    return MetaModel(target, intercept, tuple(float(v) for v in beta), tuple(float(v) for v in means),
                     tuple(float(v) for v in sds), float(ridge_lambda))


def predict_meta(model: Optional[MetaModel], feature_rows: Sequence[Sequence[float]]) -> List[float]:
    """Raw linear predictions (not clipped)."""
    if model is None:
        raise NotFittedError("meta-model has not been fitted")
    X = np.asarray(feature_rows, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    width = len(model.coefficients)
    if X.shape[1] != width:
        raise MetaModelError(f"feature rows have {X.shape[1]} values, model expects {width}")
    Xs = (X - np.asarray(model.feature_means)) / np.asarray(model.feature_sds)
    return [float(v) for v in Xs @ np.asarray(model.coefficients) + model.intercept]


@dataclass(frozen=True)
class RankedConfig:
    config: PrivacyConfig
    pred_perf: float
    pred_link: float
    avg_rank: float
    pareto: bool = False

    def to_record(self) -> Dict:
        params = self.config.param_dict
        return {
            'technique': self.config.technique.value,
            'config_id': self.config.config_id,
            'epochs': params.get('epochs'),
            'batch_size': params.get('batch_size'),
            'N': params.get('N'),
            'knn': params.get('knn'),
            'epsilon': params.get('epsilon'),
            'performance_prediction': self.pred_perf,
            'linkability_prediction': self.pred_link,
            'averaged_rank': self.avg_rank,
            'pareto': self.pareto,
        }


@dataclass(frozen=True)
class Recommendation:
    dataset: str
    entries: Tuple[RankedConfig, ...]
    mf_version: str = MF_VERSION

    def __len__(self) -> int:
        return len(self.entries)

    def to_dict(self) -> Dict:
        return {'dataset': self.dataset, 'mf_version': self.mf_version,
                'recommendations': [entry.to_record() for entry in self.entries]}


def _pareto_flags(perf: np.ndarray, link: np.ndarray) -> np.ndarray:
    flags = np.ones(perf.size, dtype=bool)
    for i in range(perf.size):
        dominated = (perf >= perf[i]) & (link <= link[i]) & ((perf > perf[i]) | (link < link[i]))
        flags[i] = not dominated.any()
    return flags


def rank_configurations(configs: Sequence[PrivacyConfig], pred_perf: Sequence[float],
                        pred_link: Sequence[float], top_n: Optional[int] = None) -> List[RankedConfig]:
    """Averaged fractional rank; higher performance and lower linkability rank higher.

    Sorted by avg_rank descending, then pred_perf descending, then config_id.
    """
    perf = np.asarray(pred_perf, dtype=float)
    link = np.asarray(pred_link, dtype=float)
    if not len(configs) == perf.size == link.size:
        raise MetaModelError("configs and predictions differ in length")
    perf_rank = rankdata(perf, method='average')
    link_rank = rankdata(-link, method='average')
    avg = (perf_rank + link_rank) / 2.0
    pareto = _pareto_flags(perf, link)
    order = sorted(range(len(configs)), key=lambda i: (-avg[i], -perf[i], configs[i].config_id))
    if top_n is not None:
        order = order[:top_n]
    return [RankedConfig(configs[i], float(perf[i]), float(link[i]), float(avg[i]), bool(pareto[i]))
            for i in order]


def recommend(new_ds: Dataset, model_perf: Optional[MetaModel], model_link: Optional[MetaModel],
              top_n: int = 20, seed: int = 0, configs: Optional[Sequence[PrivacyConfig]] = None) -> Recommendation:
    """Rank privacy configurations for a dataset that has not been protected yet.

    Meta-features come from `new_ds` itself; `configs` defaults to the 89-config grid.
    """
    if model_perf is None or model_link is None:
        raise NotFittedError("both meta-models must be fitted before recommending")
    if top_n < 1:
        raise MetaModelError(f"top_n must be at least 1, got {top_n}")
    configs = list(configs) if configs is not None else enumerate_config_grid()
    if not configs:
        raise MetaModelError("no candidate configurations to rank")
    vector = extract(new_ds, seed)
    block = [feature_row(vector, encode_config(config)) for config in configs]
    ranked = rank_configurations(configs, predict_meta(model_perf, block), predict_meta(model_link, block), top_n)
    return Recommendation(new_ds.name, tuple(ranked))
