"""
k-anonymity risk profiling
Equivalence classes over a quasi-identifier set, selection of the highest-risk
records (QI tuple seen at most twice) and random QI-set sampling.
"""
import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from autopriv.errors import RiskProfileError
from autopriv.tabular import Dataset
from autopriv.utils import round_half_up

logger = logging.getLogger(__name__)

HIGHEST_RISK_MAX_K = 2


@dataclass(frozen=True)
class QISet:
    id: int
    columns: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, 'columns', tuple(self.columns))
        if not self.columns:
            raise RiskProfileError(f"QI set {self.id} is empty")
        if len(set(self.columns)) != len(self.columns):
            raise RiskProfileError(f"QI set {self.id} has duplicate columns")

    def validate_for(self, ds: Dataset):
        for name in self.columns:
            if name == ds.target:
                raise RiskProfileError(f"QI set {self.id} includes the target column '{name}'")
            if name not in ds.column_names:
                raise RiskProfileError(f"QI set {self.id} references unknown column '{name}'")

    def to_dict(self) -> Dict:
        return {'id': self.id, 'columns': list(self.columns)}

    @classmethod
    def from_dict(cls, payload: Dict) -> 'QISet':
        return cls(int(payload['id']), tuple(payload['columns']))


@dataclass(frozen=True)
class RiskProfile:
    qi_set: QISet
    k: Tuple[int, ...]
    highest_risk: Tuple[int, ...]
    k_histogram: Dict[int, int] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.k)

    def to_report(self) -> Dict:
        """JSON-ready summary used by the `profile` subcommand."""
        return {
            'qi_set': self.qi_set.to_dict(),
            'n': self.n,
            'k_histogram': {str(k): count for k, count in sorted(self.k_histogram.items())},
            'highest_risk_count': len(self.highest_risk),
            'highest_risk_fraction': len(self.highest_risk) / self.n if self.n else 0.0,
        }


def equivalence_classes(ds: Dataset, qis: QISet) -> RiskProfile:
    """Equivalence-class size of every record under exact QI-tuple matching."""
    qis.validate_for(ds)
    positions = [ds.position(name) for name in qis.columns]
    keys = [tuple(row[p] for p in positions) for row in ds.rows]
    # None == None, so missing matches missing
    sizes = Counter(keys)
    k = tuple(sizes[key] for key in keys)

    histogram: Dict[int, int] = {}
    for size in k:
        histogram[size] = histogram.get(size, 0) + 1
    highest_risk = tuple(i for i, size in enumerate(k) if size <= HIGHEST_RISK_MAX_K)
    return RiskProfile(qis, k, highest_risk, histogram)


def select_highest_risk(ds: Dataset, qis: QISet) -> Tuple[int, ...]:
    """Indices of records whose QI tuple occurs at most twice."""
    return equivalence_classes(ds, qis).highest_risk


def qi_set_size(n_predictors: int, fraction: float) -> int:
    return max(1, round_half_up(fraction * n_predictors))


def sample_qi_sets(ds: Dataset, count: int, fraction: float, seed: int) -> List[QISet]:
    """Draw `count` distinct random QI sets of max(1, round(fraction * p)) predictors."""
    if not 0.0 < fraction <= 1.0:
        raise RiskProfileError(f"QI fraction must lie in (0, 1], got {fraction}")
    if count < 1:
        raise RiskProfileError(f"QI set count must be at least 1, got {count}")

    predictors = ds.predictor_names
    p = len(predictors)
    if p == 0:
        raise RiskProfileError(f"Dataset '{ds.name}' has no predictor columns")
    size = min(qi_set_size(p, fraction), p)
    possible = math.comb(p, size)
    if count > possible:
        raise RiskProfileError(
            f"Requested {count} QI sets but only {possible} distinct sets of {size} columns exist")

    rng = np.random.default_rng(seed)
    if possible <= 10_000:
        candidates = list(itertools.combinations(range(p), size))
        picks = [candidates[i] for i in rng.choice(possible, size=count, replace=False)]
    else:
        seen = set()
        picks = []
        while len(picks) < count:
            subset = tuple(sorted(int(i) for i in rng.choice(p, size=size, replace=False)))
            if subset not in seen:
                seen.add(subset)
                picks.append(subset)

    qi_sets = [QISet(i, tuple(predictors[j] for j in subset)) for i, subset in enumerate(picks)]
    logger.debug(f"Sampled {count} QI sets of {size} columns for '{ds.name}'")
    return qi_sets

