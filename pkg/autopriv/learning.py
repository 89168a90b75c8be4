"""
Native binary classifiers and their evaluation
Gradient-boosted trees (first-order and Newton flavours), a linear SGD classifier and
a one-hidden-layer MLP, scored by rank-based AUC under repeated stratified
cross-validation.
"""
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata
from sklearn.model_selection import RepeatedStratifiedKFold

from autopriv.errors import LearningError, SchemaError
from autopriv.tabular import Column, Dataset, Row, stratified_sample
from autopriv.utils import derive_seed

logger = logging.getLogger(__name__)

EARLY_STOPPING_ROUNDS = 10
VALIDATION_FRACTION = 0.1
MAX_THRESHOLDS = 64
MIN_SAMPLES_LEAF = 5
NEWTON_LAMBDA = 1.0
MLP_STEP = 0.01
SGD_BATCH_SIZE = 32
LOSS_TOLERANCE = 1e-7
CHECK_EVERY = 10


class Algorithm(str, Enum):
    BOOST_CLASSIC = 'BoostClassic'
    BOOST_NEWTON = 'BoostNewton'
    SGD_LINEAR = 'SGDLinear'
    MLP = 'MLP'


HIDDEN_SIZES = ('p', 'p/2', '2p/3')

DEFAULT_SGD_ALPHA = (100, 250, 500)

_BOOST_GRID = (('n_estimators', (100, 250, 500)), ('max_depth', (4, 7, 10)), ('learning_rate', (0.01, 0.1)))


def learner_param_grids(sgd_alpha: Sequence[float] = DEFAULT_SGD_ALPHA) -> Dict[Algorithm, tuple]:
    return {
        Algorithm.BOOST_CLASSIC: _BOOST_GRID,
        Algorithm.BOOST_NEWTON: _BOOST_GRID,
        Algorithm.SGD_LINEAR: (('alpha', tuple(sgd_alpha)), ('max_iter', (10000, 100000)), ('eta0', (0.01, 0.1))),
        Algorithm.MLP: (('hidden_size', HIDDEN_SIZES), ('alpha', (0.01, 0.1)), ('max_iter', (10000, 100000))),
    }


@dataclass(frozen=True)
class LearnerSpec:
    algorithm: Algorithm
    hyperparams: Tuple[Tuple[str, Any], ...]
    spec_id: int

    def param(self, name: str) -> Any:
        return dict(self.hyperparams)[name]

    def hidden_units(self, n_predictors: int) -> int:
        """Resolve the symbolic MLP width against the predictor count p."""
        token = self.param('hidden_size')
        p = max(1, n_predictors)
        return {'p': p, 'p/2': math.ceil(p / 2), '2p/3': math.ceil(2 * p / 3)}[token]

    def label(self) -> str:
        values = ', '.join(f"{key}={value}" for key, value in self.hyperparams)
        return f"{self.algorithm.value}({values})"


@lru_cache(maxsize=8)
def _learner_grid(sgd_alpha: Tuple[float, ...]) -> Tuple[LearnerSpec, ...]:
    specs = []
    for algorithm, grid in learner_param_grids(sgd_alpha).items():
        keys = [key for key, _ in grid]
        for values in itertools.product(*(choices for _, choices in grid)):
            specs.append(LearnerSpec(algorithm, tuple(zip(keys, values)), len(specs)))
    return tuple(specs)


def learner_grid(sgd_alpha: Sequence[float] = DEFAULT_SGD_ALPHA,
                 algorithms: Optional[Sequence[Union[str, Algorithm]]] = None) -> List[LearnerSpec]:
    """Canonical 60-spec learner grid; spec_id is the position in the full grid."""
    specs = _learner_grid(tuple(sgd_alpha))
    if algorithms:
        wanted = {Algorithm(a) for a in algorithms}
        specs = tuple(spec for spec in specs if spec.algorithm in wanted)
    return list(specs)


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney AUC: P(positive outscores negative), ties counted one half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(int)
    if scores.shape != labels.shape:
        raise LearningError(f"{scores.size} scores for {labels.size} labels")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise LearningError("AUC needs both classes among the labels")
    ranks = rankdata(scores, method='average')
    return float((ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


# Feature encoding
class FeatureEncoder:
    """One-hot categorical predictors; numeric predictors optionally standardized."""

    def __init__(self, columns: Sequence[Column], target_position: int, standardize: bool):
        self.columns = tuple(columns)
        self.target_position = target_position
        self.standardize = standardize
        self.positions = [p for p in range(len(self.columns)) if p != target_position]
        self.categories: Dict[int, List[str]] = {}
        self.means: Dict[int, float] = {}
        self.sds: Dict[int, float] = {}

    def fit(self, rows: Sequence[Row]) -> 'FeatureEncoder':
        for p in self.positions:
            values = [row[p] for row in rows]
            if self.columns[p].is_numeric:
                array = np.array([np.nan if v is None else v for v in values], dtype=float)
                mean = float(np.nanmean(array)) if np.isfinite(array).any() else 0.0
                sd = float(np.nanstd(array)) if np.isfinite(array).any() else 0.0
                self.means[p] = mean
                self.sds[p] = sd if sd > 0 else 1.0
            else:
                self.categories[p] = sorted({v for v in values if v is not None})
        return self

    @property
    def n_features(self) -> int:
        return sum(len(self.categories[p]) if p in self.categories else 1 for p in self.positions)

    def transform(self, rows: Sequence[Row]) -> np.ndarray:
        blocks = []
        for p in self.positions:
            values = [row[p] for row in rows]
            if self.columns[p].is_numeric:
                column = np.array([self.means[p] if v is None else v for v in values], dtype=float)
                if self.standardize:
                    column = (column - self.means[p]) / self.sds[p]
                blocks.append(column[:, None])
            else:
                lookup = {token: j for j, token in enumerate(self.categories[p])}
                onehot = np.zeros((len(rows), len(lookup)))
                for i, value in enumerate(values):
                    j = lookup.get(value)
                    if j is not None:
                        onehot[i, j] = 1.0
                blocks.append(onehot)
        if not blocks:
            return np.zeros((len(rows), 0))
        return np.hstack(blocks)


# Gradient-boosted trees
@dataclass
class RegressionTree:
    feature: List[int] = field(default_factory=list)
    threshold: List[float] = field(default_factory=list)
    left: List[int] = field(default_factory=list)
    right: List[int] = field(default_factory=list)
    value: List[float] = field(default_factory=list)
    depth: int = 0

    def _add_leaf(self, value: float) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.value) - 1

    def predict(self, X: np.ndarray) -> np.ndarray:
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left, right = np.asarray(self.left), np.asarray(self.right)
        node = np.zeros(X.shape[0], dtype=int)
        rows = np.arange(X.shape[0])
        for _ in range(self.depth):
            f = feature[node]
            internal = f >= 0
            if not internal.any():
                break
            go_left = X[rows, np.where(internal, f, 0)] <= threshold[node]
            node = np.where(internal, np.where(go_left, left[node], right[node]), node)
        return np.asarray(self.value)[node]


def _bin_features(X: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Quantile thresholds per feature and the matching bin index matrix (x <= edge[b] <=> bin <= b)."""
    edges = []
    binned = np.zeros(X.shape, dtype=np.int64)
    quantiles = np.linspace(0.0, 1.0, MAX_THRESHOLDS + 1)[1:-1]
    for j in range(X.shape[1]):
        column = X[:, j]
        cuts = np.unique(np.quantile(column, quantiles)) if column.size else np.array([])
        cuts = cuts[cuts < column.max()] if column.size else cuts
        edges.append(cuts)
        binned[:, j] = np.searchsorted(cuts, column, side='left')
    return binned, edges


def _grow_tree(binned: np.ndarray, edges: List[np.ndarray], targets: np.ndarray, weights: np.ndarray,
               lam: float, max_depth: int) -> Tuple[RegressionTree, np.ndarray]:
    """Greedy tree on gradient statistics; returns the tree and each training row's leaf value."""
    n, d = binned.shape
    width = MAX_THRESHOLDS + 1
    offsets = np.arange(d) * width
    n_cuts = np.array([len(e) for e in edges])
    tree = RegressionTree(depth=max_depth)
    fitted = np.zeros(n)

    stack = [(np.arange(n), 0, None)]
    while stack:
        idx, depth, attach = stack.pop()
        g, h = targets[idx], weights[idx]
        G, H = g.sum(), h.sum()
        node = tree._add_leaf(float(G / (H + lam)) if H + lam > 0 else 0.0)
        if attach is not None:
            parent, side = attach
            (tree.left if side == 'L' else tree.right)[parent] = node
        if depth >= max_depth or idx.size < 2 * MIN_SAMPLES_LEAF or d == 0:
            fitted[idx] = tree.value[node]
            continue

        flat = (binned[idx] + offsets).ravel()
        grad_hist = np.bincount(flat, weights=np.repeat(g, d), minlength=d * width).reshape(d, width)
        hess_hist = np.bincount(flat, weights=np.repeat(h, d), minlength=d * width).reshape(d, width)
        count_hist = np.bincount(flat, minlength=d * width).reshape(d, width)
        GL = np.cumsum(grad_hist, axis=1)[:, :-1]
        HL = np.cumsum(hess_hist, axis=1)[:, :-1]
        CL = np.cumsum(count_hist, axis=1)[:, :-1]
        GR, HR, CR = G - GL, H - HL, idx.size - CL
        valid = (CL >= MIN_SAMPLES_LEAF) & (CR >= MIN_SAMPLES_LEAF) & (HL + lam > 1e-12) & (HR + lam > 1e-12)
        valid &= np.arange(width - 1)[None, :] < n_cuts[:, None]
        with np.errstate(divide='ignore', invalid='ignore'):
            gain = GL ** 2 / (HL + lam) + GR ** 2 / (HR + lam) - G ** 2 / (H + lam)
        gain = np.where(valid, gain, -np.inf)
        best = int(np.argmax(gain))
        f, b = divmod(best, width - 1)
        if not np.isfinite(gain[f, b]) or gain[f, b] <= 1e-12:
            fitted[idx] = tree.value[node]
            continue

        tree.feature[node] = f
        tree.threshold[node] = float(edges[f][b])
        go_left = binned[idx, f] <= b
        stack.append((idx[~go_left], depth + 1, (node, 'R')))
        stack.append((idx[go_left], depth + 1, (node, 'L')))
    return tree, fitted


class GradientBoostedTrees:
    """Log-loss boosting. Newton flavour: leaf = sum(y - p) / (sum p(1-p) + lambda);
    classic flavour: leaves fit the residuals y - p by least squares."""

    def __init__(self, n_estimators: int, max_depth: int, learning_rate: float, newton: bool):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.newton = newton
        self.trees: List[RegressionTree] = []
        self.base_score = 0.0

    def fit(self, X: np.ndarray, y: np.ndarray, X_valid: Optional[np.ndarray] = None,
            y_valid: Optional[np.ndarray] = None, rng: Optional[np.random.Generator] = None):
        prior = float(np.clip(y.mean(), 1e-6, 1 - 1e-6))
        self.base_score = math.log(prior / (1 - prior))
        binned, edges = _bin_features(X)
        F = np.full(X.shape[0], self.base_score)
        watch = X_valid is not None and y_valid is not None and len(np.unique(y_valid)) == 2
        F_valid = np.full(X_valid.shape[0], self.base_score) if watch else None
        best, stale = -np.inf, 0
        lam = NEWTON_LAMBDA if self.newton else 0.0

        for _ in range(self.n_estimators):
            p = expit(F)
            residual = y - p
            weights = p * (1 - p) if self.newton else np.ones_like(p)
            tree, fitted = _grow_tree(binned, edges, residual, weights, lam, self.max_depth)
            self.trees.append(tree)
            F += self.learning_rate * fitted
            if watch:
                F_valid += self.learning_rate * tree.predict(X_valid)
                score = auc(F_valid, y_valid)
                if score > best:
                    best, stale = score, 0
                else:
                    stale += 1
                    if stale >= EARLY_STOPPING_ROUNDS:
                        break
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        F = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            F += self.learning_rate * tree.predict(X)
        return F


def _log_loss(z: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


class _Stopper:
    """Training-loss plateau (tolerance) and validation-AUC patience, checked every CHECK_EVERY epochs."""

    def __init__(self, X_valid, y_valid):
        self.watch = X_valid is not None and y_valid is not None and len(np.unique(y_valid)) == 2
        self.best_loss, self.loss_stale = np.inf, 0
        self.best_auc, self.auc_stale = -np.inf, 0

    def loss_plateaued(self, loss: float) -> bool:
        if loss > self.best_loss - LOSS_TOLERANCE:
            self.loss_stale += 1
        else:
            self.loss_stale = 0
        self.best_loss = min(self.best_loss, loss)
        return self.loss_stale >= EARLY_STOPPING_ROUNDS

    def validation_stalled(self, epoch: int, scores_fn) -> bool:
        if not self.watch or (epoch + 1) % CHECK_EVERY:
            return False
        score = scores_fn()
        if score > self.best_auc:
            self.best_auc, self.auc_stale = score, 0
        else:
            self.auc_stale += 1
        return self.auc_stale >= EARLY_STOPPING_ROUNDS


class LinearSGD:
    """Logistic-loss linear model trained by mini-batch SGD with a proximal L2 step."""

    def __init__(self, alpha: float, max_iter: int, eta0: float):
        self.alpha = alpha
        self.max_iter = max_iter
        self.eta0 = eta0
        self.coef = np.zeros(0)
        self.intercept = 0.0
        self.n_epochs = 0

    def fit(self, X, y, X_valid=None, y_valid=None, rng: Optional[np.random.Generator] = None):
        rng = rng or np.random.default_rng(0)
        n, d = X.shape
        w, b = np.zeros(d), 0.0
        stopper = _Stopper(X_valid, y_valid)
        for epoch in range(self.max_iter):
            order = rng.permutation(n)
            for start in range(0, n, SGD_BATCH_SIZE):
                batch = order[start:start + SGD_BATCH_SIZE]
                residual = expit(X[batch] @ w + b) - y[batch]
                w = (w - self.eta0 * (X[batch].T @ residual) / batch.size) / (1.0 + self.eta0 * self.alpha)
                b -= self.eta0 * residual.mean()
            self.n_epochs = epoch + 1
            loss = _log_loss(X @ w + b, y) + 0.5 * self.alpha * float(w @ w)
            if stopper.loss_plateaued(loss):
                break
            if stopper.validation_stalled(epoch, lambda: auc(X_valid @ w + b, y_valid)):
                break
        self.coef, self.intercept = w, b
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return X @ self.coef + self.intercept


def _unpack(theta: np.ndarray, d: int, hidden: int):
    W1 = theta[:d * hidden].reshape(d, hidden)
    b1 = theta[d * hidden:d * hidden + hidden]
    w2 = theta[d * hidden + hidden:d * hidden + 2 * hidden]
    b2 = theta[-1]
    return W1, b1, w2, b2


def mlp_loss_and_grad(theta: np.ndarray, X: np.ndarray, y: np.ndarray, hidden: int,
                      alpha: float) -> Tuple[float, np.ndarray]:
    """Mean log-loss plus alpha/(2n)·||W||² of a logistic one-hidden-layer network, and its gradient."""
    n, d = X.shape
    W1, b1, w2, b2 = _unpack(theta, d, hidden)
    H = expit(X @ W1 + b1)
    z = H @ w2 + b2
    penalty = alpha / (2.0 * n)
    loss = _log_loss(z, y) + penalty * (float(np.sum(W1 ** 2)) + float(w2 @ w2))

    dz = (expit(z) - y) / n
    grad_w2 = H.T @ dz + 2 * penalty * w2
    grad_b2 = dz.sum()
    dA = np.outer(dz, w2) * H * (1.0 - H)
    grad_W1 = X.T @ dA + 2 * penalty * W1
    grad_b1 = dA.sum(axis=0)
    return loss, np.concatenate([grad_W1.ravel(), grad_b1, grad_w2, [grad_b2]])


class MLPNetwork:
    """One hidden layer of logistic units trained by full-batch gradient descent (step 0.01)."""

    def __init__(self, hidden: int, alpha: float, max_iter: int, step: float = MLP_STEP):
        self.hidden = hidden
        self.alpha = alpha
        self.max_iter = max_iter
        self.step = step
        self.theta = np.zeros(0)
        self.n_inputs = 0
        self.n_epochs = 0

    def init_params(self, d: int, rng: np.random.Generator) -> np.ndarray:
        limit1 = math.sqrt(6.0 / (d + self.hidden))
        limit2 = math.sqrt(6.0 / (self.hidden + 1))
        return np.concatenate([
            rng.uniform(-limit1, limit1, size=d * self.hidden),
            np.zeros(self.hidden),
            rng.uniform(-limit2, limit2, size=self.hidden),
            [0.0],
        ])

    def fit(self, X, y, X_valid=None, y_valid=None, rng: Optional[np.random.Generator] = None):
        rng = rng or np.random.default_rng(0)
        self.n_inputs = X.shape[1]
        theta = self.init_params(self.n_inputs, rng)
        stopper = _Stopper(X_valid, y_valid)
        for epoch in range(self.max_iter):
            loss, grad = mlp_loss_and_grad(theta, X, y, self.hidden, self.alpha)
            theta = theta - self.step * grad
            self.n_epochs = epoch + 1
            if stopper.loss_plateaued(loss):
                break
            self.theta = theta
            if stopper.validation_stalled(epoch, lambda: auc(self.decision_function(X_valid), y_valid)):
                break
        self.theta = theta
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        W1, b1, w2, b2 = _unpack(self.theta, self.n_inputs, self.hidden)
        return expit(X @ W1 + b1) @ w2 + b2


# Models
@dataclass(frozen=True)
class Model:
    """Fitted learner bound to the training schema."""
    spec: LearnerSpec
    columns: Tuple[Column, ...]
    target: str
    encoder: FeatureEncoder
    estimator: Any

    def score_rows(self, rows: Sequence[Row]) -> np.ndarray:
        return self.estimator.decision_function(self.encoder.transform(rows))


def _build_estimator(spec: LearnerSpec, n_predictors: int):
    if spec.algorithm in (Algorithm.BOOST_CLASSIC, Algorithm.BOOST_NEWTON):
        return GradientBoostedTrees(spec.param('n_estimators'), spec.param('max_depth'),
                                    spec.param('learning_rate'), newton=spec.algorithm is Algorithm.BOOST_NEWTON)
    if spec.algorithm is Algorithm.SGD_LINEAR:
        return LinearSGD(spec.param('alpha'), spec.param('max_iter'), spec.param('eta0'))
    return MLPNetwork(spec.hidden_units(n_predictors), spec.param('alpha'), spec.param('max_iter'))


def _fit_rows(spec: LearnerSpec, columns: Tuple[Column, ...], target: str, train_rows: Sequence[Row],
              train_labels: np.ndarray, valid_rows: Optional[Sequence[Row]], valid_labels: Optional[np.ndarray],
              seed: int) -> Model:
    if len(np.unique(train_labels)) < 2:
        raise LearningError(f"{spec.label()}: training data holds a single class")
    target_position = [c.name for c in columns].index(target)
    standardize = spec.algorithm in (Algorithm.SGD_LINEAR, Algorithm.MLP)
    encoder = FeatureEncoder(columns, target_position, standardize).fit(train_rows)
    X = encoder.transform(train_rows)
    X_valid = encoder.transform(valid_rows) if valid_rows else None
    estimator = _build_estimator(spec, len(columns) - 1)
    estimator.fit(X, train_labels.astype(float), X_valid,
                  None if valid_labels is None else valid_labels.astype(float),
                  rng=np.random.default_rng(seed))
    return Model(spec, tuple(columns), target, encoder, estimator)


def fit(spec: LearnerSpec, train: Dataset, valid: Optional[Dataset] = None, seed: int = 0) -> Model:
    """Fit a learner; boosting, SGD and MLP stop early on `valid` when it is given."""
    if valid is not None and not valid.same_schema(train):
        raise SchemaError("validation table schema differs from the training table")
    return _fit_rows(spec, train.columns, train.target, train.rows, train.labels,
                     valid.rows if valid is not None else None,
                     valid.labels if valid is not None else None, seed)


def predict_scores(model: Model, rows: Union[Dataset, Sequence[Row]]) -> List[float]:
    """One real score per row; higher means more positive."""
    if isinstance(rows, Dataset):
        if rows.columns != model.columns or rows.target != model.target:
            raise SchemaError(f"table '{rows.name}' does not match the model's training schema")
        rows = rows.rows
    width = len(model.columns)
    for position, row in enumerate(rows):
        if len(row) != width:
            raise SchemaError(f"row {position} has {len(row)} values, model expects {width}")
    return [float(score) for score in model.score_rows(rows)]


# Evaluation
@dataclass(frozen=True)
class EvalResult:
    cv_auc_mean: float
    cv_auc_sd: float
    fold_scores: Tuple[float, ...]
    test_auc: Optional[float]
    fit_seconds: float
    resource_fraction: float

    def with_test_auc(self, test_auc: Optional[float]) -> 'EvalResult':
        return EvalResult(self.cv_auc_mean, self.cv_auc_sd, self.fold_scores, test_auc,
                          self.fit_seconds, self.resource_fraction)


def _carve_validation(labels: np.ndarray, positions: np.ndarray, rng: np.random.Generator):
    """Split a training side into (fit, validation) positions; no validation when a class is too small."""
    if np.bincount(labels[positions], minlength=2).min() < 2:
        return positions, None
    chosen = stratified_sample(labels[positions], VALIDATION_FRACTION, rng)
    mask = np.zeros(positions.size, dtype=bool)
    mask[chosen] = True
    fit_positions = positions[~mask]
    if len(np.unique(labels[fit_positions])) < 2 or len(np.unique(labels[positions[mask]])) < 2:
        return positions, None
    return fit_positions, positions[mask]


def _fit_with_validation(spec: LearnerSpec, ds: Dataset, positions: np.ndarray, seed: int) -> Model:
    labels = ds.labels
    rng = np.random.default_rng(derive_seed(seed, 'validation'))
    fit_positions, valid_positions = _carve_validation(labels, positions, rng)
    rows = ds.rows
    return _fit_rows(
        spec, ds.columns, ds.target,
        [rows[i] for i in fit_positions], labels[fit_positions],
        [rows[i] for i in valid_positions] if valid_positions is not None else None,
        labels[valid_positions] if valid_positions is not None else None,
        derive_seed(seed, 'fit'),
    )


def cross_validate(ds: Dataset, spec: LearnerSpec, folds: int = 5, repeats: int = 2, seed: int = 0,
                   resource_fraction: float = 1.0, test: Optional[Dataset] = None) -> EvalResult:
    """Repeated stratified k-fold AUC; each training side may be subsampled to `resource_fraction`."""
    if not 0.0 < resource_fraction <= 1.0:
        raise LearningError(f"resource_fraction must lie in (0, 1], got {resource_fraction}")
    if folds < 2 or repeats < 1:
        raise LearningError(f"need folds >= 2 and repeats >= 1, got {folds} and {repeats}")
    labels = ds.labels
    if np.bincount(labels, minlength=2).min() < folds:
        raise LearningError(f"Dataset '{ds.name}': a class has fewer than {folds} rows, cannot stratify")

    splitter = RepeatedStratifiedKFold(n_splits=folds, n_repeats=repeats, random_state=seed % (2 ** 32))
    rows = ds.rows
    scores = []
    started = time.perf_counter()
    for fold_no, (train_pos, test_pos) in enumerate(splitter.split(np.zeros(ds.n_rows), labels)):
        fold_seed = derive_seed(seed, fold_no)
        if resource_fraction < 1.0:
            keep = stratified_sample(labels[train_pos], resource_fraction, np.random.default_rng(fold_seed))
            train_pos = train_pos[keep]
        model = _fit_with_validation(spec, ds, train_pos, fold_seed)
        scores.append(auc(model.score_rows([rows[i] for i in test_pos]), labels[test_pos]))
    fit_seconds = time.perf_counter() - started

    test_auc = holdout_auc(ds, spec, test, seed) if test is not None else None
    return EvalResult(
        cv_auc_mean=float(np.mean(scores)),
        cv_auc_sd=float(np.std(scores, ddof=1)) if len(scores) > 1 else 0.0,
        fold_scores=tuple(float(s) for s in scores),
        test_auc=test_auc,
        fit_seconds=fit_seconds,
        resource_fraction=resource_fraction,
    )


def holdout_auc(train: Dataset, spec: LearnerSpec, test: Dataset, seed: int = 0) -> float:
    """Fit on the whole training table (10% carved for early stopping) and score the test table."""
    if test.columns != train.columns:
        raise SchemaError("test table schema differs from the training table")
    model = _fit_with_validation(spec, train, np.arange(train.n_rows), derive_seed(seed, 'holdout'))
    return auc(model.score_rows(test.rows), test.labels)
