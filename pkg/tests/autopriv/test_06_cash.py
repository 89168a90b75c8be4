"""
Test Case 6: Learner search strategies
"""
import numpy as np
import pytest

from autopriv.cash import (Objective, SearchSettings, SearchSpace, check_optimizer, grid_search, hyperband,
                           hyperband_brackets, oracle_best, random_search, run_search, successive_halving)
from autopriv.errors import SearchError
from autopriv.learning import EvalResult, learner_grid


class ScriptedObjective(Objective):
    """CV AUC grows with resource but keeps the per-spec quality order at every resource."""

    def __init__(self, quality, test_quality=None):
        self.quality = quality
        self.test_quality = test_quality
        self.has_test = test_quality is not None
        self.calls = []

    def __call__(self, spec, resource_fraction):
        self.calls.append((spec.spec_id, resource_fraction))
        value = self.quality[spec.spec_id] * (0.5 + 0.5 * resource_fraction)
        return EvalResult(value, 0.0, (value,), None, 0.0, resource_fraction)

    def test_score(self, spec):
        if not self.has_test:
            return super().test_score(spec)
        return self.test_quality[spec.spec_id]


def _random_quality(seed, n=60):
    rng = np.random.default_rng(seed)
    return {i: float(q) for i, q in enumerate(rng.uniform(0.5, 1.0, n))}


@pytest.fixture
def space():
    return SearchSpace.default()


@pytest.mark.smoke
class TestGridAndRandom:
    """Full-resource strategies"""

    def test_grid_evaluates_every_spec_once(self, space):
        quality = _random_quality(1)
        outcome = grid_search(space, objective=ScriptedObjective(quality))
        assert len(outcome.evaluations) == 60
        assert outcome.total_resource_units == 60.0
        assert outcome.best_spec.spec_id == max(quality, key=quality.get)
        assert outcome.best_result.test_auc is None

    def test_grid_ties_go_to_the_lower_spec_id(self, space):
        outcome = grid_search(space, objective=ScriptedObjective({i: 0.7 for i in range(60)}))
        assert outcome.best_spec.spec_id == 0

    def test_random_with_full_budget_covers_the_grid(self, space):
        outcome = random_search(space, n_iter=60, seed=3, objective=ScriptedObjective(_random_quality(2)))
        assert sorted(e.spec_id for e in outcome.evaluations) == list(range(60))

    def test_random_draws_without_replacement(self, space):
        outcome = random_search(space, n_iter=10, seed=3, objective=ScriptedObjective(_random_quality(2)))
        drawn = [e.spec_id for e in outcome.evaluations]
        assert len(drawn) == len(set(drawn)) == 10

    def test_random_subset_depends_on_seed(self, space):
        quality = _random_quality(2)
        first = random_search(space, n_iter=10, seed=1, objective=ScriptedObjective(quality))
        second = random_search(space, n_iter=10, seed=2, objective=ScriptedObjective(quality))
        repeat = random_search(space, n_iter=10, seed=1, objective=ScriptedObjective(quality))
        assert {e.spec_id for e in first.evaluations} != {e.spec_id for e in second.evaluations}
        assert first.evaluations == repeat.evaluations

    def test_random_needs_an_iteration(self, space):
        with pytest.raises(SearchError, match="n_iter"):
            random_search(space, n_iter=0, objective=ScriptedObjective(_random_quality(0)))


@pytest.mark.regression
class TestSuccessiveHalving:
    """Halving schedule and resource accounting"""

    def test_eight_candidates_halving_by_two(self, space):
        small = SearchSpace(space.specs[:8])
        outcome = successive_halving(small, factor=2, min_resource=0.25,
                                     objective=ScriptedObjective(_random_quality(4)))
        assert outcome.schedule == ((8, 0.25), (4, 0.5), (2, 1.0), (1, 1.0))
        assert len(outcome.evaluations) == 15
        assert outcome.total_resource_units == pytest.approx(7.0)

    def test_default_schedule_on_the_full_grid(self, space):
        outcome = successive_halving(space, objective=ScriptedObjective(_random_quality(5)))
        assert [count for count, _ in outcome.schedule] == [60, 20, 7, 3]
        assert outcome.total_resource_units == pytest.approx(60 / 9 + 20 / 3 + 7 + 3)
        assert outcome.total_resource_units < 60.0

    def test_single_candidate_is_evaluated_once_at_full_resource(self, space):
        objective = ScriptedObjective(_random_quality(6))
        outcome = successive_halving(SearchSpace(space.specs[5:6]), objective=objective)
        assert outcome.schedule == ((1, 1.0),)
        assert objective.calls == [(5, 1.0)]

    def test_winner_result_is_at_full_resource(self, space):
        outcome = successive_halving(space, factor=3, min_resource=1 / 27,
                                     objective=ScriptedObjective(_random_quality(7)))
        assert outcome.best_result.resource_fraction == 1.0

    def test_agrees_with_grid_when_ranking_is_resource_stable(self, space):
        for seed in range(20):
            quality = _random_quality(100 + seed)
            halving = successive_halving(space, objective=ScriptedObjective(quality))
            exhaustive = grid_search(space, objective=ScriptedObjective(quality))
            assert halving.best_spec == exhaustive.best_spec

    def test_argument_errors(self, space):
        objective = ScriptedObjective(_random_quality(0))
        with pytest.raises(SearchError, match="factor"):
            successive_halving(space, factor=1, objective=objective)
        with pytest.raises(SearchError, match="min_resource"):
            successive_halving(space, min_resource=0.0, objective=objective)
        with pytest.raises(SearchError, match="empty"):
            successive_halving(SearchSpace(()), objective=objective)


@pytest.mark.regression
class TestHyperband:
    """Bracketed halving"""

    def test_default_brackets(self):
        brackets = hyperband_brackets(1.0, 3, 1 / 9)
        assert [(s, n) for s, n, _ in brackets] == [(2, 9), (1, 3), (0, 2)]
        assert [r0 for _, _, r0 in brackets] == pytest.approx([1 / 9, 1 / 3, 1.0])

    def test_schedule_and_units(self, space):
        outcome = hyperband(space, seed=1, objective=ScriptedObjective(_random_quality(8)))
        assert [n for n, _ in outcome.schedule] == [9, 3, 2]
        assert outcome.total_resource_units == pytest.approx(8.0)
        assert outcome.best_result.resource_fraction == 1.0

    def test_single_spec_space(self, space):
        outcome = hyperband(SearchSpace(space.specs[:1]), objective=ScriptedObjective(_random_quality(9)))
        assert len(outcome.evaluations) == 3
        assert outcome.total_resource_units <= 9.0

    def test_brackets_reject_bad_resources(self):
        with pytest.raises(SearchError):
            hyperband_brackets(0.5, 3, 0.9)


@pytest.mark.regression
class TestOracle:
    """Selection by test AUC"""

    def test_oracle_beats_every_strategy_on_test_auc(self, space):
        quality, test_quality = _random_quality(10), _random_quality(11)
        oracle = oracle_best(space, objective=ScriptedObjective(quality, test_quality))
        assert oracle.best_result.test_auc == max(test_quality.values())
        others = [
            grid_search(space, objective=ScriptedObjective(quality, test_quality)),
            random_search(space, n_iter=10, seed=4, objective=ScriptedObjective(quality, test_quality)),
            successive_halving(space, objective=ScriptedObjective(quality, test_quality)),
            hyperband(space, seed=4, objective=ScriptedObjective(quality, test_quality)),
        ]
        for outcome in others:
            assert outcome.best_result.test_auc == test_quality[outcome.best_spec.spec_id]
            assert oracle.best_result.test_auc >= outcome.best_result.test_auc

    def test_oracle_needs_a_test_table(self, space):
        with pytest.raises(SearchError, match="holdout"):
            oracle_best(space, objective=ScriptedObjective(_random_quality(0)))


@pytest.mark.smoke
class TestOptimizerNames:
    """Optimizer dispatch names"""

    @pytest.mark.parametrize("name", ['grid', 'random', 'sh', 'hyperband', 'oracle'])
    def test_known(self, name):
        assert check_optimizer(name) == name

    def test_reserved_bayesian_optimisation(self):
        with pytest.raises(SearchError, match="reserved"):
            check_optimizer('bo')

    def test_unknown(self):
        with pytest.raises(SearchError, match="unknown optimizer 'tpe'"):
            check_optimizer('tpe')


@pytest.mark.slow
class TestRunSearch:
    """End-to-end search on real folds"""

    @pytest.mark.parametrize("optimizer", ['grid', 'sh', 'oracle'])
    def test_fills_the_test_auc(self, make_table, optimizer):
        train, test = make_table(n_rows=90, seed=1), make_table(n_rows=40, seed=2)
        space = SearchSpace(learner_grid(algorithms=['SGDLinear'])[:3])
        settings = SearchSettings(folds=2, repeats=1)
        outcome = run_search(optimizer, space, train, test, seed=0, settings=settings)
        assert outcome.strategy == optimizer
        assert outcome.best_spec in space.specs
        assert 0.0 <= outcome.best_result.test_auc <= 1.0
        assert outcome.search_seconds >= 0.0
