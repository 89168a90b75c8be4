"""
AUTOPRIV pipeline phases
Protection (holdout, QI sets, variants), development (learner search, linkability,
meta-dataset, meta-models) and recommendation, each recorded in the run manifest.
"""
import csv
import logging
import time
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from autopriv.cash import SearchSettings, SearchSpace, run_search
from autopriv.config import PipelineConfig
from autopriv.csv_data_manager import ATTACK_COLUMNS, EVALUATION_COLUMNS, EXCLUDED_COLUMNS, CSVDataManager
from autopriv.errors import AutoprivError, PipelineError, StatsError
from autopriv.linkattack import linkability
from autopriv.metafeat import FEATURE_NAMES, MF_VERSION, encode_config, extract, feature_row
from autopriv.metamodel import MetaModel, MetaRow, MetaTarget, Recommendation, fit_meta, recommend
from autopriv.riskprofile import QISet, equivalence_classes, sample_qi_sets
from autopriv.stats import bayes_sign_test, pct_diff
from autopriv.synth import (PrivacyConfig, Provenance, config_by_id, enumerate_config_grid, generate_variant,
                            import_external_variant)
from autopriv.tabular import Dataset, holdout_split, load_csv
from autopriv.utils import derive_seed, file_sha256, format_float, read_json, write_json

logger = logging.getLogger(__name__)

BASELINE_ID = -1
ORIGINAL_TECHNIQUE = 'Original'
META_COLUMNS = ['dataset', 'qi_id', 'config_id'] + list(FEATURE_NAMES) + ['y_perf', 'y_link']
BEST_COLUMNS = ['dataset', 'qi_id', 'config_id', 'technique', 'test_auc', 'cv_auc_mean', 'adjusted_risk',
                'baseline_test_auc', 'pct_diff']

Unit = Tuple[str, int, int]


@dataclass
class PhaseRecord:
    """Manifest delta of one phase."""
    phase: str
    status: str = 'ok'
    seed: int = 0
    seconds: float = 0.0
    inputs: List[Path] = field(default_factory=list)
    outputs: List[Path] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)
    rows: List[Dict[str, Any]] = field(default_factory=list)


class RunManifest:
    """manifest.json: per-phase status, seed, timing, input and output hashes."""

    def __init__(self, manager: CSVDataManager):
        self.manager = manager
        self.path = manager.manifest_path
        self.payload: Dict[str, Any] = read_json(self.path) if self.path.is_file() else {'phases': {}}

    def _hashes(self, paths: Sequence[Path]) -> Dict[str, str]:
        hashes = {}
        for path in sorted(set(Path(p) for p in paths)):
            if not path.is_file():
                continue
            try:
                key = path.resolve().relative_to(self.manager.out_dir.resolve()).as_posix()
            except ValueError:
                key = str(path)
            hashes[key] = file_sha256(path)
        return hashes

    def record(self, record: PhaseRecord, cfg: PipelineConfig) -> Dict[str, Any]:
        entry = {
            'status': record.status,
            'seed': record.seed,
            'seconds': round(record.seconds, 3),
            'inputs': self._hashes(record.inputs),
            'outputs': self._hashes(record.outputs),
            'details': record.details,
        }
        self.payload['phases'][record.phase] = entry
        self.payload['config'] = cfg.to_dict()
        write_json(self.path, self.payload)
        return entry


def _finish(manager: CSVDataManager, cfg: PipelineConfig, record: PhaseRecord, started: float) -> PhaseRecord:
    record.seconds = time.perf_counter() - started
    RunManifest(manager).record(record, cfg)
    logger.info(f"[SUCCESS] {record.phase}: {len(record.outputs)} files in {record.seconds:.1f}s")
    return record


def corpus_files(cfg: PipelineConfig) -> List[Path]:
    if not cfg.corpus_dir.is_dir():
        raise PipelineError(f"corpus directory not found: {cfg.corpus_dir}")
    files = sorted(cfg.corpus_dir.glob('*.csv'))
    if not files:
        raise PipelineError(f"empty corpus: no CSV files in {cfg.corpus_dir}")
    return files


def resolve_target(path: Path, target: Optional[str]) -> str:
    """Configured target, or the last header column of the file."""
    if target:
        return target
    with open(path, 'r', newline='', encoding='utf-8') as csvfile:
        header = next(csv.reader(csvfile), [])
    if not header:
        raise PipelineError(f"{path}: empty file, cannot infer the target column")
    return header[-1].strip()


def _native_configs() -> List[PrivacyConfig]:
    return [config for config in enumerate_config_grid() if config.is_native]


def _external_configs() -> List[PrivacyConfig]:
    return [config for config in enumerate_config_grid() if not config.is_native]


# Protection phase
def _protect_dataset(cfg: PipelineConfig, manager: CSVDataManager, path: Path, record: PhaseRecord):
    source = load_csv(path, resolve_target(path, cfg.target))
    name = source.name
    holdout = holdout_split(source, cfg.holdout_fraction, derive_seed(cfg.master_seed, name, 'holdout'))
    train = source.take(holdout.train_idx)
    test = source.take(holdout.test_idx)
    record.outputs += manager.save_partitions(source, train, test, holdout)

    qi_sets = sample_qi_sets(train, cfg.qi_count, cfg.qi_fraction, derive_seed(cfg.master_seed, name, 'qi_sets'))
    profiles = [equivalence_classes(train, qis) for qis in qi_sets]
    record.outputs += manager.save_qi_sets(name, qi_sets, profiles)

    jobs = []
    for qis, profile in zip(qi_sets, profiles):
        if not profile.highest_risk:
            logger.warning(f"[SKIP] {name}/qi-{qis.id}: no highest-risk records, QI set skipped")
            record.details.setdefault('skipped_qi_sets', []).append({'dataset': name, 'qi_id': qis.id})
            continue
        for config in _native_configs():
            seed = derive_seed(cfg.master_seed, name, qis.id, config.config_id, 'protect')
            jobs.append((profile.highest_risk, Provenance(name, qis.id, config, seed, qis.columns)))
        _register_external(cfg, manager, train, qis, profile.highest_risk, record)

    variants = Parallel(n_jobs=cfg.worker_count)(
        delayed(generate_variant)(train, highrisk, provenance) for highrisk, provenance in jobs)
    for variant in variants:
        record.outputs += manager.save_variant(variant)
    record.details.setdefault('native_variants', 0)
    record.details['native_variants'] += len(variants)
    logger.info(f"[SUCCESS] Wrote {len(variants)} variants for {name}")


def _register_external(cfg: PipelineConfig, manager: CSVDataManager, train: Dataset, qis: QISet,
                       highrisk: Sequence[int], record: PhaseRecord):
    """Write the import slots of the non-native configurations and import any supplied files."""
    name = train.name
    slots = []
    for config in _external_configs():
        target_path = manager.variant_path(name, qis.id, config.config_id)
        slots.append({**config.to_dict(), 'path': target_path.as_posix()})
        if cfg.external_dir is None:
            continue
        supplied = cfg.external_dir / name / str(qis.id) / f"{config.config_id}.csv"
        if not supplied.is_file():
            continue
        provenance = Provenance(name, qis.id, config, 0, qis.columns)
        try:
            variant = import_external_variant(supplied, provenance, train, replaced=len(highrisk))
        except AutoprivError as exc:
            logger.warning(f"[WARNING] {name}/{qis.id}/{config.config_id}: external variant rejected: {exc}")
            record.details.setdefault('rejected_external', []).append(supplied.as_posix())
            continue
        record.inputs.append(supplied)
        record.outputs += manager.save_variant(variant)
        record.details['external_variants'] = record.details.get('external_variants', 0) + 1
    record.outputs.append(manager.save_external_slots(name, qis.id, slots))


def run_protect(cfg: PipelineConfig) -> PhaseRecord:
    """Holdout split, QI sets and all variants for every corpus dataset."""
    started = time.perf_counter()
    manager = CSVDataManager(cfg.out_dir)
    files = corpus_files(cfg)
    record = PhaseRecord('protect', seed=cfg.master_seed, inputs=list(files))
    for path in files:
        _protect_dataset(cfg, manager, path, record)
    return _finish(manager, cfg, record, started)


# Development phase
def _consumed_inputs(manager: CSVDataManager, units: Sequence[Unit]) -> List[Path]:
    """Partitions and variant CSVs a phase reads, for the manifest input hashes."""
    paths = []
    for dataset in sorted({unit[0] for unit in units}):
        paths += [manager.dataset_dir(dataset) / 'train.csv', manager.dataset_dir(dataset) / 'test.csv']
    paths += [manager.variant_path(*unit) for unit in units if unit[1] != BASELINE_ID]
    return paths


def _search_settings(cfg: PipelineConfig, nested: bool) -> SearchSettings:
    return SearchSettings(factor=cfg.sh_factor, min_resource=cfg.sh_min_resource, random_iter=cfg.random_iter,
                          folds=cfg.cv_folds, repeats=cfg.cv_repeats, workers=1 if nested else cfg.worker_count)


def _evaluation_units(manager: CSVDataManager) -> List[Unit]:
    units = [(name, BASELINE_ID, BASELINE_ID) for name in manager.list_datasets()]
    return units + manager.list_variants()


def _evaluate_unit(cfg: PipelineConfig, unit: Unit, settings: SearchSettings):
    """One evaluation row plus its ledger; failures become a failed row."""
    manager = CSVDataManager(cfg.out_dir)
    dataset, qi_id, config_id = unit
    row: Dict[str, Any] = {column: '' for column in EVALUATION_COLUMNS}
    row.update(dataset=dataset, qi_id=qi_id, config_id=config_id)
    try:
        test = manager.load_partition(dataset, 'test')
        if qi_id == BASELINE_ID:
            train, technique = manager.load_partition(dataset, 'train'), ORIGINAL_TECHNIQUE
        else:
            train, provenance = manager.load_variant(dataset, qi_id, config_id)
            technique = provenance['technique']
        row['technique'] = technique
        space = SearchSpace.default(cfg.sgd_alpha, cfg.learners or None)
        seed = derive_seed(cfg.master_seed, dataset, qi_id, config_id, 'evaluate')
        outcome = run_search(cfg.optimizer, space, train, test, seed, settings)
    except Exception as exc:
        logger.warning(f"[WARNING] evaluation failed for {dataset}/{qi_id}/{config_id}: {exc}")
        row.update(status='failed', error=str(exc))
        return row, []

    result = outcome.best_result
    row.update(
        spec_id=outcome.best_spec.spec_id,
        algorithm=outcome.best_spec.algorithm.value,
        fold_scores=';'.join(format_float(s) for s in result.fold_scores),
        cv_auc_mean=result.cv_auc_mean,
        cv_auc_sd=result.cv_auc_sd,
        test_auc=result.test_auc,
        fit_seconds=result.fit_seconds,
        resource_units=outcome.total_resource_units,
        search_seconds=outcome.search_seconds,
        status='ok',
    )
    ledger = [{'spec_id': e.spec_id, 'resource_fraction': e.resource_fraction, 'cv_auc': e.cv_auc}
              for e in outcome.evaluations]
    return row, ledger


def run_evaluate(cfg: PipelineConfig) -> PhaseRecord:
    """Learner search on every variant and every original training partition (the baselines)."""
    started = time.perf_counter()
    manager = CSVDataManager(cfg.out_dir)
    units = _evaluation_units(manager)
    if not any(qi_id != BASELINE_ID for _, qi_id, _ in units):
        raise PipelineError(f"no variants under {cfg.out_dir}; run protect first")

    nested = cfg.worker_count > 1
    settings = _search_settings(cfg, nested)
    results = Parallel(n_jobs=cfg.worker_count if nested else 1)(
        delayed(_evaluate_unit)(cfg, unit, settings) for unit in units)

    record = PhaseRecord('evaluate', seed=cfg.master_seed, inputs=_consumed_inputs(manager, units))
    rows = []
    for unit, (row, ledger) in zip(units, results):
        rows.append(row)
        if ledger:
            record.outputs.append(manager.save_ledger(cfg.optimizer, *unit, ledger))
    record.outputs.append(manager.write_table(manager.evaluations_path(cfg.optimizer), rows, EVALUATION_COLUMNS))
    record.details = {'optimizer': cfg.optimizer, 'rows': len(rows),
                      'failed': sum(1 for r in rows if r['status'] != 'ok')}
    return _finish(manager, cfg, record, started)


def _attack_unit(cfg: PipelineConfig, unit: Unit) -> Dict[str, Any]:
    manager = CSVDataManager(cfg.out_dir)
    dataset, qi_id, config_id = unit
    row: Dict[str, Any] = {column: '' for column in ATTACK_COLUMNS}
    row.update(dataset=dataset, qi_id=qi_id, config_id=config_id)
    try:
        original = manager.load_partition(dataset, 'train')
        control = manager.load_partition(dataset, 'test')
        variant, provenance = manager.load_variant(dataset, qi_id, config_id)
        row['technique'] = provenance['technique']
        seed = derive_seed(cfg.master_seed, dataset, qi_id, config_id, 'attack')
        report = linkability(original, variant, tuple(provenance['qi_columns']), control,
                             n_targets=cfg.n_targets, k=cfg.link_k, seed=seed)
    except Exception as exc:
        logger.warning(f"[WARNING] attack failed for {dataset}/{qi_id}/{config_id}: {exc}")
        row.update(status='failed', error=str(exc))
        return row
    row.update(
        n_targets=report.n_targets, k=report.k, naive_rate=report.naive_rate, control_rate=report.control_rate,
        adjusted_risk=report.adjusted_risk, aux_a=';'.join(report.aux_split[0]), aux_b=';'.join(report.aux_split[1]),
        status='ok',
    )
    return row


def run_attack(cfg: PipelineConfig) -> PhaseRecord:
    """Linkability of every variant against its training partition, with the test partition as control."""
    started = time.perf_counter()
    manager = CSVDataManager(cfg.out_dir)
    units = manager.list_variants()
    if not units:
        raise PipelineError(f"no variants under {cfg.out_dir}; run protect first")
    rows = Parallel(n_jobs=cfg.worker_count)(delayed(_attack_unit)(cfg, unit) for unit in units)
    record = PhaseRecord('attack', seed=cfg.master_seed, inputs=_consumed_inputs(manager, units), rows=rows)
    record.outputs.append(manager.write_table(manager.attacks_path, rows, ATTACK_COLUMNS))
    risks = [float(r['adjusted_risk']) for r in rows if r['status'] == 'ok']
    record.details = {'rows': len(rows), 'failed': len(rows) - len(risks),
                      'median_adjusted_risk': float(np.median(risks)) if risks else None}
    return _finish(manager, cfg, record, started)


def _index_rows(frame) -> Dict[Unit, Dict[str, Any]]:
    indexed = {}
    for record in frame.to_dict('records'):
        key = (str(record['dataset']), int(record['qi_id']), int(record['config_id']))
        indexed[key] = record
    return indexed


def _meta_features(cfg: PipelineConfig, unit: Unit) -> List[float]:
    manager = CSVDataManager(cfg.out_dir)
    data, _ = manager.load_variant(*unit)
    vector = extract(data, derive_seed(cfg.master_seed, *unit, 'metafeat'))
    return feature_row(vector, encode_config(config_by_id(unit[2])))


def build_metadataset(cfg: PipelineConfig) -> PhaseRecord:
    """Join meta-features, config encoding, best CV AUC and adjusted linkability per variant."""
    started = time.perf_counter()
    manager = CSVDataManager(cfg.out_dir)
    evaluations_path = manager.evaluations_path(cfg.optimizer)
    evaluations = _index_rows(manager.read_table(evaluations_path))
    attacks = _index_rows(manager.read_table(manager.attacks_path))

    joinable, excluded = [], []
    for unit in manager.list_variants():
        evaluation, attack = evaluations.get(unit), attacks.get(unit)
        if evaluation is None or evaluation['status'] != 'ok':
            reason = 'evaluation missing' if evaluation is None else f"evaluation failed: {evaluation['error']}"
        elif attack is None or attack['status'] != 'ok':
            reason = 'attack missing' if attack is None else f"attack failed: {attack['error']}"
        else:
            joinable.append((unit, float(evaluation['cv_auc_mean']), float(attack['adjusted_risk'])))
            continue
        logger.warning(f"[WARNING] meta-build excludes {'/'.join(map(str, unit))}: {reason}")
        excluded.append(dict(zip(EXCLUDED_COLUMNS, (*unit, reason))))
    if not joinable:
        raise PipelineError("no joinable variants: every variant lacks a successful evaluation or attack")

    features = Parallel(n_jobs=cfg.worker_count)(delayed(_meta_features)(cfg, unit) for unit, _, _ in joinable)
    rows = []
    for (unit, y_perf, y_link), values in zip(joinable, features):
        rows.append({'dataset': unit[0], 'qi_id': unit[1], 'config_id': unit[2],
                     **dict(zip(FEATURE_NAMES, values)), 'y_perf': y_perf, 'y_link': y_link})

    record = PhaseRecord('meta-build', seed=cfg.master_seed, inputs=[evaluations_path, manager.attacks_path])
    record.outputs += [
        manager.write_table(manager.meta_path, rows, META_COLUMNS),
        manager.write_table(manager.excluded_path, excluded, EXCLUDED_COLUMNS),
        write_json(manager.meta_dir / 'mf_version.json', {'mf_version': MF_VERSION,
                                                          'feature_names': list(FEATURE_NAMES)}),
        manager.write_table(manager.best_per_dataset_path, _best_per_dataset(evaluations, attacks),
                            BEST_COLUMNS),
    ]
    record.details = {'rows': len(rows), 'excluded': len(excluded)}
    return _finish(manager, cfg, record, started)


def _best_per_dataset(evaluations: Dict[Unit, Dict], attacks: Dict[Unit, Dict]) -> List[Dict[str, Any]]:
    """Variant with the highest test AUC per dataset, beside its linkability and the original's AUC."""
    by_dataset: Dict[str, List] = defaultdict(list)
    for unit, row in evaluations.items():
        if unit[1] != BASELINE_ID and row['status'] == 'ok':
            by_dataset[unit[0]].append((unit, row))
    best_rows = []
    for dataset in sorted(by_dataset):
        unit, row = min(by_dataset[dataset], key=lambda item: (-float(item[1]['test_auc']), item[0]))
        baseline = evaluations.get((dataset, BASELINE_ID, BASELINE_ID))
        baseline_auc = float(baseline['test_auc']) if baseline and baseline['status'] == 'ok' else None
        attack = attacks.get(unit)
        best_rows.append({
            'dataset': dataset, 'qi_id': unit[1], 'config_id': unit[2], 'technique': row['technique'],
            'test_auc': float(row['test_auc']), 'cv_auc_mean': float(row['cv_auc_mean']),
            'adjusted_risk': float(attack['adjusted_risk']) if attack and attack['status'] == 'ok' else None,
            'baseline_test_auc': baseline_auc,
            'pct_diff': pct_diff(float(row['test_auc']), baseline_auc) if baseline_auc else None,
        })
    return best_rows


def load_meta_rows(manager: CSVDataManager) -> List[MetaRow]:
    frame = manager.read_table(manager.meta_path)
    missing = [name for name in META_COLUMNS if name not in frame.columns]
    if missing:
        raise PipelineError(f"{manager.meta_path}: missing column '{missing[0]}'")
    return [MetaRow(str(r['dataset']), int(r['qi_id']), int(r['config_id']),
                    tuple(float(r[name]) for name in FEATURE_NAMES), float(r['y_perf']), float(r['y_link']))
            for r in frame.to_dict('records')]


def run_meta_fit(cfg: PipelineConfig) -> PhaseRecord:
    """Fit and persist the performance and linkability meta-models."""
    started = time.perf_counter()
    manager = CSVDataManager(cfg.out_dir)
    rows = load_meta_rows(manager)
    record = PhaseRecord('meta-fit', seed=cfg.master_seed, inputs=[manager.meta_path])
    for target in MetaTarget:
        model = fit_meta(rows, target, cfg.ridge_lambda)
        record.outputs.append(write_json(manager.model_path(target.value), model.to_dict()))
    record.details = {'rows': len(rows)}
    return _finish(manager, cfg, record, started)


def load_models(manager: CSVDataManager) -> Tuple[MetaModel, MetaModel]:
    models = []
    for target in MetaTarget:
        path = manager.model_path(target.value)
        if not path.is_file():
            raise PipelineError(f"missing meta-model {path}; run meta-fit first")
        models.append(MetaModel.from_dict(read_json(path)))
    return models[0], models[1]


def supported_configs(manager: CSVDataManager) -> List[PrivacyConfig]:
    """Configurations seen in the meta-dataset; the full grid when it is absent."""
    if not manager.meta_path.is_file():
        return enumerate_config_grid()
    seen = {int(v) for v in manager.read_table(manager.meta_path)['config_id']}
    return [config for config in enumerate_config_grid() if config.config_id in seen]


def cmd_recommend(cfg: PipelineConfig, new_csv: Union[str, Path], target: Optional[str] = None,
                  name: Optional[str] = None, xlsx: bool = False) -> Recommendation:
    """Rank privacy configurations for a new dataset and write the report."""
    started = time.perf_counter()
    manager = CSVDataManager(cfg.out_dir)
    new_csv = Path(new_csv)
    if all(manager.model_path(t.value).is_file() for t in MetaTarget):
        model_perf, model_link = load_models(manager)
    elif manager.meta_path.is_file():
        run_meta_fit(cfg)
        model_perf, model_link = load_models(manager)
    else:
        raise PipelineError(f"neither meta-models nor {manager.meta_path} exist; run meta-build first")

    new_ds = load_csv(new_csv, resolve_target(new_csv, target or cfg.target))
    name = name or new_ds.name
    seed = derive_seed(cfg.master_seed, name, 'recommend')
    result = recommend(new_ds, model_perf, model_link, cfg.top_n, seed, supported_configs(manager))

    record = PhaseRecord('recommend', seed=seed, inputs=[new_csv])
    record.outputs.append(write_json(manager.recommendation_path(name), result.to_dict()))
    if xlsx:
        records = [entry.to_record() for entry in result.entries]
        record.outputs.append(manager.export_xlsx(manager.recommendation_path(name, '.xlsx'), records))
    record.details = {'dataset': name, 'entries': len(result)}
    _finish(manager, cfg, record, started)
    return result


# Comparison
def _ok_rows(manager: CSVDataManager, path: Path, metric: str) -> Dict[Unit, Dict[str, Any]]:
    frame = manager.read_table(Path(path))
    if metric not in frame.columns:
        raise PipelineError(f"{path}: no column '{metric}'")
    return {unit: row for unit, row in _index_rows(frame).items() if row['status'] == 'ok'}


def _sign_summary(diffs: List[float], seed: int, lo: float, hi: float, mc_samples: int) -> Dict[str, Any]:
    result = bayes_sign_test(diffs, lo, hi, mc_samples=mc_samples, seed=seed)
    return {'n_pairs': len(diffs), **result.to_dict()}


def compare_evaluations(path_a: Union[str, Path], path_b: Optional[Union[str, Path]] = None,
                        metric: str = 'test_auc', by: Optional[str] = None, against_original: bool = False,
                        lo: float = -1.0, hi: float = 1.0, mc_samples: int = 50_000,
                        seed: int = 0) -> Dict[str, Any]:
    """Bayes sign test on percentage differences of `metric` between paired evaluation rows.

    Rows pair on (dataset, qi_id, config_id). With `against_original`, each variant in
    `path_a` is compared with its dataset's baseline row in the same file.
    """
    manager = CSVDataManager('.')
    rows_a = _ok_rows(manager, Path(path_a), metric)
    if against_original:
        rows_b = {unit: rows_a.get((unit[0], BASELINE_ID, BASELINE_ID)) for unit in rows_a}
    else:
        if path_b is None:
            raise PipelineError("compare needs two evaluation files unless --against-original is set")
        rows_b = _ok_rows(manager, Path(path_b), metric)

    groups: Dict[str, List[float]] = defaultdict(list)
    for unit in sorted(rows_a):
        partner = rows_b.get(unit)
        if partner is None or unit[1] == BASELINE_ID:
            continue
        try:
            diff = pct_diff(float(rows_a[unit][metric]), float(partner[metric]))
        except StatsError as exc:
            logger.warning(f"[WARNING] {'/'.join(map(str, unit))} skipped: {exc}")
            continue
        key = str(rows_a[unit]['technique']) if by == 'technique' else 'all'
        groups[key].append(diff)
    if not groups:
        raise PipelineError("no paired rows to compare")

    if by == 'technique':
        return {'metric': metric,
                'by_technique': {key: _sign_summary(groups[key], seed, lo, hi, mc_samples) for key in sorted(groups)}}
    return {'metric': metric, **_sign_summary(groups['all'], seed, lo, hi, mc_samples)}


def summarize_recommendation(result: Recommendation) -> List[str]:
    """Printable table lines in the report column order."""
    header = f"{'rank':>4}  {'technique':<12} {'N':>3} {'knn':>3} {'epsilon':>7} {'perf':>8} {'link':>8} {'avg_rank':>8}"
    lines = [header, '-' * len(header)]
    for position, entry in enumerate(result.entries, 1):
        params = entry.config.param_dict
        cells = [str(params.get(key, '-')) for key in ('N', 'knn', 'epsilon')]
        lines.append(f"{position:>4}  {entry.config.technique.value:<12} {cells[0]:>3} {cells[1]:>3} {cells[2]:>7} "
                     f"{entry.pred_perf:>8.4f} {entry.pred_link:>8.4f} {entry.avg_rank:>8.2f}"
                     f"{'  *' if entry.pareto else ''}")
    return lines


def median_linkability(manager: CSVDataManager, result: Recommendation) -> Optional[float]:
    """Median measured adjusted risk over the recommended configurations (None when unmeasured)."""
    frame = manager.read_table(manager.attacks_path)
    wanted = {entry.config.config_id for entry in result.entries}
    risks = [float(r['adjusted_risk']) for r in frame.to_dict('records')
             if r['status'] == 'ok' and int(r['config_id']) in wanted]
    return float(np.median(risks)) if risks else None
