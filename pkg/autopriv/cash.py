"""
Combined algorithm selection and hyperparameter search
Grid, random, successive halving and hyperband over the learner grid, plus the
oracle reference that picks by test AUC. Resource = stratified fraction of each
fold's training side.
"""
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from autopriv.errors import SearchError
from autopriv.learning import EvalResult, LearnerSpec, cross_validate, holdout_auc, learner_grid
from autopriv.tabular import Dataset
from autopriv.utils import derive_seed

logger = logging.getLogger(__name__)

OPTIMIZERS = ('grid', 'random', 'sh', 'hyperband', 'oracle')
RESERVED_OPTIMIZERS = {'bo': 'Bayesian optimisation'}

DEFAULT_FACTOR = 3
DEFAULT_MIN_RESOURCE = 1.0 / 9.0
DEFAULT_RANDOM_ITER = 10


@dataclass(frozen=True)
class SearchSpace:
    specs: Tuple[LearnerSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, 'specs', tuple(self.specs))

    @classmethod
    def default(cls, sgd_alpha: Optional[Sequence[float]] = None,
                algorithms: Optional[Sequence[str]] = None) -> 'SearchSpace':
        if sgd_alpha:
            return cls(tuple(learner_grid(sgd_alpha, algorithms)))
        return cls(tuple(learner_grid(algorithms=algorithms)))

    def __len__(self) -> int:
        return len(self.specs)

    def __iter__(self) -> Iterator[LearnerSpec]:
        return iter(self.specs)


@dataclass(frozen=True)
class LedgerEntry:
    spec_id: int
    resource_fraction: float
    cv_auc: float


@dataclass(frozen=True)
class SearchOutcome:
    """Winner of a search plus every evaluation it paid for.

    `schedule` lists (candidates, resource) per halving round; hyperband lists
    (n_s, r0) per bracket instead.
    """
    strategy: str
    best_spec: LearnerSpec
    best_result: EvalResult
    evaluations: Tuple[LedgerEntry, ...]
    schedule: Tuple[Tuple[int, float], ...] = ()
    search_seconds: float = 0.0

    @property
    def total_resource_units(self) -> float:
        return float(sum(entry.resource_fraction for entry in self.evaluations))


class Objective:
    """Evaluates a spec at a resource fraction; optionally scores it on a test table."""

    has_test = False

    def __call__(self, spec: LearnerSpec, resource_fraction: float) -> EvalResult:
        raise NotImplementedError

    def test_score(self, spec: LearnerSpec) -> float:
        raise SearchError("objective has no test table")


class CrossValidationObjective(Objective):
    """Repeated stratified CV on `train`; test AUC on `test` when given. Every spec sees the same folds."""

    def __init__(self, train: Dataset, test: Optional[Dataset] = None, folds: int = 5, repeats: int = 2,
                 seed: int = 0):
        self.train = train
        self.test = test
        self.folds = folds
        self.repeats = repeats
        self.seed = seed
        self.has_test = test is not None

    def __call__(self, spec: LearnerSpec, resource_fraction: float) -> EvalResult:
        return cross_validate(self.train, spec, self.folds, self.repeats, self.seed, resource_fraction)

    def test_score(self, spec: LearnerSpec) -> float:
        if self.test is None:
            return super().test_score(spec)
        return holdout_auc(self.train, spec, self.test, self.seed)


def _resolve(space: SearchSpace, ds: Optional[Dataset], objective: Optional[Objective], seed: int,
             test: Optional[Dataset], folds: int, repeats: int) -> Objective:
    if len(space) == 0:
        raise SearchError("search space is empty")
    if objective is not None:
        return objective
    if ds is None:
        raise SearchError("either a dataset or an objective is required")
    return CrossValidationObjective(ds, test, folds, repeats, seed)


def _evaluate_all(objective: Callable, specs: Sequence[LearnerSpec], resource: float,
                  workers: int) -> List[EvalResult]:
    if workers > 1 and len(specs) > 1:
        return Parallel(n_jobs=workers)(delayed(objective)(spec, resource) for spec in specs)
    return [objective(spec, resource) for spec in specs]


def _rank_key(pair):
    spec, result = pair
    return (-result.cv_auc_mean, spec.spec_id)


def _finalize(strategy: str, objective: Objective, spec: LearnerSpec, result: EvalResult,
              ledger: List[LedgerEntry], schedule, started: float) -> SearchOutcome:
    if objective.has_test and result.test_auc is None:
        result = result.with_test_auc(objective.test_score(spec))
    outcome = SearchOutcome(strategy, spec, result, tuple(ledger), tuple(schedule), time.perf_counter() - started)
    logger.debug(f"{strategy}: best {spec.label()} cv_auc={result.cv_auc_mean:.4f} "
                 f"units={outcome.total_resource_units:.3f}")
    return outcome


def grid_search(space: SearchSpace, ds: Optional[Dataset] = None, seed: int = 0, *,
                objective: Optional[Objective] = None, test: Optional[Dataset] = None,
                folds: int = 5, repeats: int = 2, workers: int = 1) -> SearchOutcome:
    """Every spec at full resource; best cv AUC, ties to the lower spec_id."""
    started = time.perf_counter()
    objective = _resolve(space, ds, objective, seed, test, folds, repeats)
    specs = list(space)
    results = _evaluate_all(objective, specs, 1.0, workers)
    ledger = [LedgerEntry(s.spec_id, 1.0, r.cv_auc_mean) for s, r in zip(specs, results)]
    best_spec, best_result = min(zip(specs, results), key=_rank_key)
    return _finalize('grid', objective, best_spec, best_result, ledger, [(len(specs), 1.0)], started)


def random_search(space: SearchSpace, ds: Optional[Dataset] = None, n_iter: int = DEFAULT_RANDOM_ITER,
                  seed: int = 0, *, objective: Optional[Objective] = None, test: Optional[Dataset] = None,
                  folds: int = 5, repeats: int = 2, workers: int = 1) -> SearchOutcome:
    """n_iter specs drawn without replacement, each at full resource."""
    if n_iter < 1:
        raise SearchError(f"n_iter must be at least 1, got {n_iter}")
    started = time.perf_counter()
    objective = _resolve(space, ds, objective, seed, test, folds, repeats)
    rng = np.random.default_rng(derive_seed(seed, 'random_search'))
    count = min(n_iter, len(space))
    specs = [space.specs[i] for i in rng.choice(len(space), size=count, replace=False)]
    results = _evaluate_all(objective, specs, 1.0, workers)
    ledger = [LedgerEntry(s.spec_id, 1.0, r.cv_auc_mean) for s, r in zip(specs, results)]
    best_spec, best_result = min(zip(specs, results), key=_rank_key)
    return _finalize('random', objective, best_spec, best_result, ledger, [(count, 1.0)], started)


def _halving(candidates: List[LearnerSpec], min_resource: float, factor: int, objective: Objective,
             workers: int, ledger: List[LedgerEntry]):
    """One successive-halving run. Returns (spec, full-resource result, rounds)."""
    if len(candidates) == 1:
        result = objective(candidates[0], 1.0)
        ledger.append(LedgerEntry(candidates[0].spec_id, 1.0, result.cv_auc_mean))
        return candidates[0], result, [(1, 1.0)]

    rounds = []
    resource, cap_hits = min_resource, 0
    while True:
        current = 1.0 if resource >= 1.0 - 1e-9 else resource
        if current == 1.0:
            cap_hits += 1
        results = _evaluate_all(objective, candidates, current, workers)
        rounds.append((len(candidates), current))
        ledger.extend(LedgerEntry(s.spec_id, current, r.cv_auc_mean) for s, r in zip(candidates, results))
        ranked = sorted(zip(candidates, results), key=_rank_key)
        if len(candidates) == 1 or cap_hits >= 2:
            spec, result = ranked[0]
            break
        candidates = [s for s, _ in ranked[:math.ceil(len(candidates) / factor)]]
        resource *= factor

    if current < 1.0:
        result = objective(spec, 1.0)
        ledger.append(LedgerEntry(spec.spec_id, 1.0, result.cv_auc_mean))
    return spec, result, rounds


def successive_halving(space: SearchSpace, ds: Optional[Dataset] = None, factor: int = DEFAULT_FACTOR,
                       min_resource: float = DEFAULT_MIN_RESOURCE, seed: int = 0, *,
                       objective: Optional[Objective] = None, test: Optional[Dataset] = None,
                       folds: int = 5, repeats: int = 2, workers: int = 1) -> SearchOutcome:
    """Keep the top ceil(count/factor) each round while the resource grows by `factor` (capped at 1).

    Stops when one candidate is left or after the second round at full resource.
    """
    if factor < 2:
        raise SearchError(f"factor must be at least 2, got {factor}")
    if not 0.0 < min_resource <= 1.0:
        raise SearchError(f"min_resource must lie in (0, 1], got {min_resource}")
    started = time.perf_counter()
    objective = _resolve(space, ds, objective, seed, test, folds, repeats)
    ledger: List[LedgerEntry] = []
    spec, result, rounds = _halving(list(space), min_resource, factor, objective, workers, ledger)
    return _finalize('sh', objective, spec, result, ledger, rounds, started)


def hyperband_brackets(max_resource: float = 1.0, factor: int = DEFAULT_FACTOR,
                       min_resource: float = DEFAULT_MIN_RESOURCE) -> List[Tuple[int, int, float]]:
    """(s, n_s, r0) per bracket, s = s_max down to 0."""
    if factor < 2:
        raise SearchError(f"factor must be at least 2, got {factor}")
    if not 0.0 < min_resource <= max_resource <= 1.0:
        raise SearchError(f"need 0 < min_resource <= max_resource <= 1, got {min_resource}, {max_resource}")
    s_max = 0
    while max_resource / factor ** (s_max + 1) >= min_resource * (1 - 1e-9):
        s_max += 1
    return [(s, max(2, factor ** s), max_resource / factor ** s) for s in range(s_max, -1, -1)]


def hyperband(space: SearchSpace, ds: Optional[Dataset] = None, max_resource: float = 1.0,
              factor: int = DEFAULT_FACTOR, seed: int = 0, *, min_resource: float = DEFAULT_MIN_RESOURCE,
              objective: Optional[Objective] = None, test: Optional[Dataset] = None,
              folds: int = 5, repeats: int = 2, workers: int = 1) -> SearchOutcome:
    """Successive halving in brackets from many cheap candidates to few full-resource ones."""
    brackets = hyperband_brackets(max_resource, factor, min_resource)
    started = time.perf_counter()
    objective = _resolve(space, ds, objective, seed, test, folds, repeats)
    ledger: List[LedgerEntry] = []
    finalists = []
    for s, n_s, r0 in brackets:
        rng = np.random.default_rng(derive_seed(seed, 'hyperband', s))
        picks = rng.choice(len(space), size=min(n_s, len(space)), replace=False)
        candidates = [space.specs[i] for i in picks]
        spec, result, _ = _halving(candidates, r0, factor, objective, workers, ledger)
        finalists.append((spec, result))
        logger.debug(f"hyperband bracket s={s}: n={n_s} r0={r0:.4f} -> {spec.label()}")
    best_spec, best_result = min(finalists, key=_rank_key)
    schedule = [(n_s, r0) for _, n_s, r0 in brackets]
    return _finalize('hyperband', objective, best_spec, best_result, ledger, schedule, started)


def oracle_best(space: SearchSpace, ds: Optional[Dataset] = None, holdout: Optional[Dataset] = None,
                seed: int = 0, *, objective: Optional[Objective] = None, folds: int = 5, repeats: int = 2,
                workers: int = 1) -> SearchOutcome:
    """Every spec at full resource, selected by TEST AUC (ties to the lower spec_id)."""
    started = time.perf_counter()
    objective = _resolve(space, ds, objective, seed, holdout, folds, repeats)
    if not objective.has_test:
        raise SearchError("oracle selection needs a holdout table")
    specs = list(space)
    results = _evaluate_all(objective, specs, 1.0, workers)
    results = [r.with_test_auc(objective.test_score(s)) for s, r in zip(specs, results)]
    ledger = [LedgerEntry(s.spec_id, 1.0, r.cv_auc_mean) for s, r in zip(specs, results)]
    best_spec, best_result = min(zip(specs, results), key=lambda pair: (-pair[1].test_auc, pair[0].spec_id))
    return _finalize('oracle', objective, best_spec, best_result, ledger, [(len(specs), 1.0)], started)


def check_optimizer(name: str) -> str:
    if name in RESERVED_OPTIMIZERS:
        raise SearchError(f"optimizer '{name}' ({RESERVED_OPTIMIZERS[name]}) is reserved and not implemented")
    if name not in OPTIMIZERS:
        raise SearchError(f"unknown optimizer '{name}'; choose one of {', '.join(OPTIMIZERS)}")
    return name


@dataclass
class SearchSettings:
    """Knobs shared by every strategy."""
    factor: int = DEFAULT_FACTOR
    min_resource: float = DEFAULT_MIN_RESOURCE
    random_iter: int = DEFAULT_RANDOM_ITER
    folds: int = 5
    repeats: int = 2
    workers: int = 1


def run_search(optimizer: str, space: SearchSpace, train: Dataset, test: Optional[Dataset], seed: int,
               settings: Optional[SearchSettings] = None) -> SearchOutcome:
    """Dispatch on the optimizer name; the chosen spec's test AUC is filled when `test` is given."""
    settings = settings or SearchSettings()
    check_optimizer(optimizer)
    objective = CrossValidationObjective(train, test, settings.folds, settings.repeats, seed)
    if optimizer == 'grid':
        return grid_search(space, seed=seed, objective=objective, workers=settings.workers)
    if optimizer == 'random':
        return random_search(space, n_iter=settings.random_iter, seed=seed, objective=objective,
                             workers=settings.workers)
    if optimizer == 'sh':
        return successive_halving(space, factor=settings.factor, min_resource=settings.min_resource, seed=seed,
                                  objective=objective, workers=settings.workers)
    if optimizer == 'hyperband':
        return hyperband(space, factor=settings.factor, min_resource=settings.min_resource, seed=seed,
                         objective=objective, workers=settings.workers)
    return oracle_best(space, seed=seed, objective=objective, workers=settings.workers)
