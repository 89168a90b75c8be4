"""
Test Case 11: Pipeline phases, recommendation, comparison and the command line
"""
import json
import os
import time

import pandas as pd
import pytest

from autopriv.cli import main
from autopriv.config import PipelineConfig
from autopriv.corpus import CORPUS_DATASETS, generate_corpus, synthetic_table
from autopriv.csv_data_manager import CSVDataManager
from autopriv.errors import PipelineError
from autopriv.pipeline import (BASELINE_ID, META_COLUMNS, ORIGINAL_TECHNIQUE, build_metadataset, cmd_recommend,
                               compare_evaluations, median_linkability, run_attack, run_evaluate, run_meta_fit,
                               run_protect, summarize_recommendation)
from autopriv.synth import Technique
from autopriv.utils import file_sha256, read_json

SMALL_RUN = {
    'qi_count': 1,
    'learners': 'SGDLinear',
    'sgd_alpha': '100',
    'cv_folds': 2,
    'cv_repeats': 1,
    'optimizer': 'sh',
    'n_targets': 50,
    'top_n': 5,
}


def _write_corpus(folder, seed=3):
    folder.mkdir(parents=True, exist_ok=True)
    synthetic_table(100, 5, seed).to_csv(folder / 'desk_small.csv', index=False, lineterminator='\n')
    return folder


def _full_run(cfg):
    run_protect(cfg)
    run_evaluate(cfg)
    run_attack(cfg)
    build_metadataset(cfg)
    run_meta_fit(cfg)
    return CSVDataManager(cfg.out_dir)


@pytest.fixture(scope='module')
def corpus_dir(tmp_path_factory):
    return _write_corpus(tmp_path_factory.mktemp('corpus'))


@pytest.fixture(scope='module')
def completed_run(tmp_path_factory, corpus_dir):
    cfg = PipelineConfig({**SMALL_RUN, 'corpus_dir': str(corpus_dir),
                          'out_dir': str(tmp_path_factory.mktemp('run_a'))})
    return cfg, _full_run(cfg)


@pytest.mark.slow
@pytest.mark.pipeline
class TestPhases:
    """protect, evaluate, attack, meta-build and meta-fit on a small corpus"""

    def test_protect_writes_one_variant_per_native_config(self, completed_run):
        cfg, manager = completed_run
        skipped = read_json(manager.manifest_path)['phases']['protect']['details'].get('skipped_qi_sets', [])
        variants = manager.list_variants('desk_small')
        assert len(variants) == 45 * (cfg.qi_count - len(skipped))
        assert {config_id for _, _, config_id in variants} <= set(range(44, 89))

    def test_external_slots_cover_the_non_native_configs(self, completed_run):
        _, manager = completed_run
        for qis in manager.load_qi_sets('desk_small'):
            slots_path = manager.variant_dir('desk_small', qis.id) / 'external_slots.json'
            if slots_path.is_file():
                slots = read_json(slots_path)
                assert [s['config_id'] for s in slots] == list(range(44))

    def test_partitions_are_disjoint_and_stratified(self, completed_run):
        _, manager = completed_run
        holdout = manager.load_holdout('desk_small')
        assert not set(holdout.train_idx) & set(holdout.test_idx)
        assert len(holdout.test_idx) == 20
        test = manager.load_partition('desk_small', 'test')
        assert set(test.labels) == {0, 1}

    def test_evaluation_rows(self, completed_run):
        cfg, manager = completed_run
        frame = manager.read_table(manager.evaluations_path(cfg.optimizer))
        assert len(frame) == len(manager.list_variants()) + 1
        baseline = frame[frame['qi_id'] == BASELINE_ID]
        assert baseline['technique'].tolist() == [ORIGINAL_TECHNIQUE]
        ok = frame[frame['status'] == 'ok']
        assert ok['test_auc'].between(0.0, 1.0).all()
        assert set(ok['algorithm']) == {'SGDLinear'}
        assert all(len(str(scores).split(';')) == 2 for scores in ok['fold_scores'])

    def test_search_ledgers_are_written(self, completed_run):
        cfg, manager = completed_run
        dataset, qi_id, config_id = manager.list_variants()[0]
        ledger = manager.read_table(manager.ledger_path(cfg.optimizer, dataset, qi_id, config_id))
        assert ledger['resource_fraction'].max() == 1.0
        assert len(ledger) >= 4

    def test_attack_risks(self, completed_run):
        _, manager = completed_run
        frame = manager.read_table(manager.attacks_path)
        assert len(frame) == len(manager.list_variants())
        ok = frame[frame['status'] == 'ok']
        assert not ok.empty
        for column in ('naive_rate', 'control_rate', 'adjusted_risk'):
            assert ok[column].between(0.0, 1.0).all()
        assert (ok['n_targets'] == 50).all() and (ok['k'] == 10).all()

    def test_attack_command_prints_the_reports(self, completed_run, tmp_path, capsys):
        cfg, manager = completed_run
        settings = tmp_path / 'run.cfg'
        lines = [f'{key} = {value}' for key, value in SMALL_RUN.items()]
        lines += [f'corpus_dir = {cfg.corpus_dir}', f'out_dir = {cfg.out_dir}']
        settings.write_text('\n'.join(lines) + '\n', encoding='utf-8')
        before = file_sha256(manager.attacks_path)
        capsys.readouterr()

        assert main(['--config', str(settings), 'attack']) == 0
        out = capsys.readouterr().out
        payload = json.loads(out[out.index('{\n'):])
        assert payload['phase'] == 'attack'
        assert len(payload['reports']) == payload['rows'] == len(manager.list_variants())
        ok = [r for r in payload['reports'] if r['status'] == 'ok']
        assert len(ok) == payload['rows'] - payload['failed']
        assert 0.0 <= payload['median_adjusted_risk'] <= 1.0
        assert all(0.0 <= r['adjusted_risk'] <= 1.0 for r in ok)
        assert file_sha256(manager.attacks_path) == before

    def test_phase_inputs_are_hashed(self, completed_run):
        _, manager = completed_run
        phases = read_json(manager.manifest_path)['phases']
        for phase in ('evaluate', 'attack'):
            inputs = phases[phase]['inputs']
            for dataset, qi_id, config_id in manager.list_variants():
                key = manager.variant_path(dataset, qi_id, config_id).relative_to(manager.out_dir).as_posix()
                assert inputs[key] == file_sha256(manager.variant_path(dataset, qi_id, config_id))
            assert 'datasets/desk_small/train.csv' in inputs and 'datasets/desk_small/test.csv' in inputs

    def test_meta_dataset(self, completed_run):
        _, manager = completed_run
        meta = manager.read_table(manager.meta_path)
        excluded = manager.read_table(manager.excluded_path)
        assert list(meta.columns) == META_COLUMNS
        assert len(META_COLUMNS) == 39
        assert len(meta) + len(excluded) == len(manager.list_variants())
        assert meta['y_perf'].between(0.0, 1.0).all()
        assert meta['y_link'].between(0.0, 1.0).all()
        assert manager.best_per_dataset_path.is_file()

    def test_models_and_manifest(self, completed_run):
        _, manager = completed_run
        for target in ('performance', 'linkability'):
            model = read_json(manager.out_dir / 'models' / f"{target}.json")
            assert len(model['coefficients']) == 34
            assert model['mf_version'] == 'mf-v1'
        phases = read_json(manager.manifest_path)['phases']
        assert {'protect', 'evaluate', 'attack', 'meta-build', 'meta-fit'} <= set(phases)
        assert all(entry['status'] == 'ok' for entry in phases.values())

    def test_recommendation_for_an_unseen_table(self, completed_run, tmp_path):
        cfg, manager = completed_run
        new_csv = tmp_path / 'fresh.csv'
        synthetic_table(60, 5, 99).to_csv(new_csv, index=False, lineterminator='\n')
        result = cmd_recommend(cfg, new_csv, xlsx=True)
        assert 1 <= len(result) <= cfg.top_n
        assert {entry.config.technique for entry in result.entries} == {Technique.PRIVATE_SMOTE}
        ranks = [entry.avg_rank for entry in result.entries]
        assert ranks == sorted(ranks, reverse=True)
        assert read_json(manager.recommendation_path('fresh'))['dataset'] == 'fresh'
        assert manager.recommendation_path('fresh', '.xlsx').is_file()
        lines = summarize_recommendation(result)
        assert len(lines) == len(result) + 2

    def test_rerun_is_byte_identical(self, completed_run, corpus_dir, tmp_path):
        cfg, manager = completed_run
        other = _full_run(cfg.with_overrides(out_dir=str(tmp_path / 'run_b')))
        assert file_sha256(other.meta_path) == file_sha256(manager.meta_path)
        for dataset, qi_id, config_id in manager.list_variants():
            first = manager.variant_path(dataset, qi_id, config_id)
            second = other.variant_path(dataset, qi_id, config_id)
            assert file_sha256(first) == file_sha256(second)
            assert file_sha256(first.with_suffix('.json')) == file_sha256(second.with_suffix('.json'))

    def test_evaluate_before_protect(self, tmp_path):
        cfg = PipelineConfig({**SMALL_RUN, 'out_dir': str(tmp_path / 'empty')})
        with pytest.raises(PipelineError, match="run protect first"):
            run_evaluate(cfg)
        with pytest.raises(PipelineError, match="corpus directory not found"):
            run_protect(cfg.with_overrides(corpus_dir=str(tmp_path / 'nothing')))


DESK_RUN = {
    'optimizer': 'sh',
    'learners': 'SGDLinear',
    'cv_folds': 2,
    'cv_repeats': 1,
    'top_n': 20,
}
DESK_BUDGET_SECONDS = 600


@pytest.mark.slow
@pytest.mark.pipeline
class TestDeskScaleCorpus:
    """Bundled corpus, PrivateSMOTE variants only, successive halving"""

    def test_end_to_end_budget_determinism_and_linkability(self, tmp_path):
        corpus = generate_corpus(tmp_path / 'corpus', seed=0)
        assert len(corpus) == len(CORPUS_DATASETS)
        cfg = PipelineConfig({**DESK_RUN, 'corpus_dir': str(tmp_path / 'corpus'),
                              'out_dir': str(tmp_path / 'run_a'),
                              'worker_count': min(8, os.cpu_count() or 1)})

        started = time.perf_counter()
        manager = _full_run(cfg)
        result = cmd_recommend(cfg, tmp_path / 'corpus' / 'desk_clinic.csv')
        elapsed = time.perf_counter() - started
        assert elapsed < DESK_BUDGET_SECONDS

        assert len(result) == 20
        median = median_linkability(manager, result)
        assert median is not None and median <= 0.02

        rerun = cfg.with_overrides(out_dir=str(tmp_path / 'run_b'))
        run_protect(rerun)
        run_evaluate(rerun)
        run_attack(rerun)
        build_metadataset(rerun)
        assert file_sha256(CSVDataManager(rerun.out_dir).meta_path) == file_sha256(manager.meta_path)


def _evaluation_table(path, test_aucs, techniques=None):
    rows = []
    for (qi_id, config_id), value in test_aucs.items():
        technique = ORIGINAL_TECHNIQUE if qi_id == BASELINE_ID else (techniques or {}).get(config_id, 'PrivateSMOTE')
        rows.append({'dataset': 'd', 'qi_id': qi_id, 'config_id': config_id, 'technique': technique,
                     'test_auc': value, 'cv_auc_mean': value, 'status': 'ok', 'error': ''})
    pd.DataFrame(rows).to_csv(path, index=False)
    return path


@pytest.mark.regression
class TestCompare:
    """Paired Bayes sign test over evaluation tables"""

    def test_uniform_improvement_is_a_win(self, tmp_path):
        base = {(0, 44 + i): 0.70 for i in range(20)}
        better = {key: 0.70 * 1.05 for key in base}
        result = compare_evaluations(_evaluation_table(tmp_path / 'b.csv', better),
                                     _evaluation_table(tmp_path / 'a.csv', base), mc_samples=5000)
        assert result['n_pairs'] == 20
        assert result['counts'] == {'lose': 0, 'draw': 0, 'win': 20}
        assert result['p_win'] > 0.95

    def test_against_original(self, tmp_path):
        table = {(BASELINE_ID, BASELINE_ID): 0.80, (0, 44): 0.80, (0, 45): 0.801, (0, 46): 0.60}
        result = compare_evaluations(_evaluation_table(tmp_path / 'e.csv', table), against_original=True,
                                     mc_samples=2000)
        assert result['n_pairs'] == 3
        assert result['counts'] == {'lose': 1, 'draw': 2, 'win': 0}

    def test_by_technique(self, tmp_path):
        base = {(0, 0): 0.7, (0, 1): 0.7, (0, 44): 0.7}
        other = {(0, 0): 0.6, (0, 1): 0.6, (0, 44): 0.8}
        techniques = {0: 'CopulaGAN', 1: 'CopulaGAN'}
        result = compare_evaluations(_evaluation_table(tmp_path / 'o.csv', other, techniques),
                                     _evaluation_table(tmp_path / 'b.csv', base, techniques),
                                     by='technique', mc_samples=2000)
        assert set(result['by_technique']) == {'CopulaGAN', 'PrivateSMOTE'}
        assert result['by_technique']['CopulaGAN']['counts']['lose'] == 2

    def test_nothing_to_pair(self, tmp_path):
        a = _evaluation_table(tmp_path / 'a.csv', {(0, 44): 0.7})
        b = _evaluation_table(tmp_path / 'b.csv', {(1, 44): 0.7})
        with pytest.raises(PipelineError, match="no paired rows"):
            compare_evaluations(a, b)
        with pytest.raises(PipelineError, match="two evaluation files"):
            compare_evaluations(a)


@pytest.mark.smoke
class TestCommandLine:
    """autopriv entry point"""

    def test_corpus_command(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(['corpus', '--out', str(tmp_path / 'corpus')]) == 0
        written = sorted(p.stem for p in (tmp_path / 'corpus').glob('*.csv'))
        assert written == sorted(name for name, _ in CORPUS_DATASETS)
        assert (tmp_path / 'out' / 'logs' / 'autopriv.log').is_file()

    def test_profile_command(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        path = _write_corpus(tmp_path / 'corpus') / 'desk_small.csv'
        assert main(['profile', str(path), '--qi', 'num_0,cat_0']) == 0
        out = capsys.readouterr().out
        payload = json.loads(out[out.index('{'):])
        assert payload['dataset'] == 'desk_small'
        (profile,) = payload['profiles']
        assert profile['qi_set']['columns'] == ['num_0', 'cat_0'] and profile['n'] == 100

    def test_missing_config_file(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(['--config', str(tmp_path / 'absent.cfg'), 'protect']) == 1

    def test_reserved_optimizer(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(['evaluate', '--optimizer', 'bo']) == 1

    def test_compare_needs_two_tables(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        table = _evaluation_table(tmp_path / 'a.csv', {(0, 44): 0.7})
        assert main(['compare', str(table)]) == 1
