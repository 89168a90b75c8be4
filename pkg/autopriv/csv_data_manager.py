"""
CSV Data Manager for AUTOPRIV runs
Owns every on-disk layout under the output directory: partitions, variants,
evaluation ledgers, attack reports, the meta-dataset, models and settings tables.
"""
import csv
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from autopriv.errors import ConfigError, PipelineError
from autopriv.riskprofile import QISet, RiskProfile
from autopriv.synth import ProtectedVariant
from autopriv.tabular import ColumnKind, Dataset, Holdout, load_csv, write_csv
from autopriv.utils import read_json, write_json

logger = logging.getLogger(__name__)

EVALUATION_COLUMNS = [
    'dataset', 'qi_id', 'config_id', 'technique', 'spec_id', 'algorithm', 'fold_scores',
    'cv_auc_mean', 'cv_auc_sd', 'test_auc', 'fit_seconds', 'resource_units', 'search_seconds',
    'status', 'error',
]
LEDGER_COLUMNS = ['spec_id', 'resource_fraction', 'cv_auc']
ATTACK_COLUMNS = [
    'dataset', 'qi_id', 'config_id', 'technique', 'n_targets', 'k', 'naive_rate', 'control_rate',
    'adjusted_risk', 'aux_a', 'aux_b', 'status', 'error',
]
EXCLUDED_COLUMNS = ['dataset', 'qi_id', 'config_id', 'reason']


def coerce_setting(value: Any) -> Any:
    """Settings-table coercion: true/false to bool, digits to int, decimals to float."""
    if not isinstance(value, str):
        return value
    text = value.strip()
    if text.lower() in ('true', 'false'):
        return text.lower() == 'true'
    if text.lstrip('-').isdigit():
        return int(text)
    try:
        number = float(text)
    except ValueError:
        return text
    return number if any(ch in text for ch in '.eE') else text


class CSVDataManager:
    """Reads and writes everything a run produces under `out_dir`."""

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)
        self._settings_cache: Dict[Path, Dict[str, Any]] = {}
        self._schema_cache: Dict[str, Tuple[str, Dict[str, ColumnKind]]] = {}

    # Paths
    def dataset_dir(self, dataset: str) -> Path:
        return self.out_dir / 'datasets' / dataset

    def variant_dir(self, dataset: str, qi_id: int) -> Path:
        return self.out_dir / 'variants' / dataset / str(qi_id)

    def variant_path(self, dataset: str, qi_id: int, config_id: int) -> Path:
        return self.variant_dir(dataset, qi_id) / f"{config_id}.csv"

    def evaluation_dir(self, optimizer: str) -> Path:
        return self.out_dir / 'evaluation' / optimizer

    def evaluations_path(self, optimizer: str) -> Path:
        return self.evaluation_dir(optimizer) / 'evaluations.csv'

    def ledger_path(self, optimizer: str, dataset: str, qi_id: int, config_id: int) -> Path:
        return self.evaluation_dir(optimizer) / 'ledgers' / dataset / str(qi_id) / f"{config_id}.csv"

    @property
    def attacks_path(self) -> Path:
        return self.out_dir / 'attacks.csv'

    @property
    def meta_dir(self) -> Path:
        return self.out_dir / 'meta'

    @property
    def meta_path(self) -> Path:
        return self.meta_dir / 'meta.csv'

    @property
    def excluded_path(self) -> Path:
        return self.meta_dir / 'meta_excluded.csv'

    @property
    def best_per_dataset_path(self) -> Path:
        return self.meta_dir / 'best_per_dataset.csv'

    def model_path(self, target: str) -> Path:
        return self.out_dir / 'models' / f"{target.lower()}.json"

    def recommendation_path(self, name: str, suffix: str = '.json') -> Path:
        return self.out_dir / 'recommendations' / f"{name}{suffix}"

    @property
    def manifest_path(self) -> Path:
        return self.out_dir / 'manifest.json'

    @property
    def log_dir(self) -> Path:
        return self.out_dir / 'logs'

    # Settings tables
    def load_settings(self, settings_file: Union[str, Path]) -> Dict[str, Any]:
        """Load a two-column `setting_name,setting_value` table."""
        settings_file = Path(settings_file)
        if settings_file not in self._settings_cache:
            if not settings_file.is_file():
                raise ConfigError(f"Settings file not found: {settings_file}")
            settings = {}
            with open(settings_file, 'r', newline='', encoding='utf-8') as csvfile:
                reader = csv.DictReader(csvfile)
                if reader.fieldnames is None or not {'setting_name', 'setting_value'} <= set(reader.fieldnames):
                    raise ConfigError(f"{settings_file}: expected columns setting_name,setting_value")
                for row in reader:
                    settings[row['setting_name'].strip()] = coerce_setting(row['setting_value'] or '')
            logger.debug(f"[SUCCESS] Loaded {len(settings)} settings from {settings_file}")
            self._settings_cache[settings_file] = settings
        return self._settings_cache[settings_file]

    # Datasets
    def save_partitions(self, source: Dataset, train: Dataset, test: Dataset, holdout: Holdout) -> List[Path]:
        folder = self.dataset_dir(source.name)
        schema = {'target': source.target,
                  'columns': [{'name': c.name, 'kind': c.kind.value} for c in source.columns]}
        written = [
            write_csv(train, folder / 'train.csv'),
            write_csv(test, folder / 'test.csv'),
            write_json(folder / 'holdout.json', holdout.to_dict()),
            write_json(folder / 'schema.json', schema),
        ]
        self._schema_cache.pop(source.name, None)
        return written

    def schema(self, dataset: str) -> Tuple[str, Dict[str, ColumnKind]]:
        """(target, column kinds) recorded when the partitions were written."""
        if dataset not in self._schema_cache:
            path = self.dataset_dir(dataset) / 'schema.json'
            if not path.is_file():
                raise PipelineError(f"no partitions for dataset '{dataset}'; run protect first")
            payload = read_json(path)
            kinds = {c['name']: ColumnKind(c['kind']) for c in payload['columns']}
            self._schema_cache[dataset] = (payload['target'], kinds)
        return self._schema_cache[dataset]

    def load_partition(self, dataset: str, part: str) -> Dataset:
        target, kinds = self.schema(dataset)
        return load_csv(self.dataset_dir(dataset) / f"{part}.csv", target, name=dataset, kinds=kinds)

    def load_holdout(self, dataset: str) -> Holdout:
        return Holdout.from_dict(read_json(self.dataset_dir(dataset) / 'holdout.json'))

    def list_datasets(self) -> List[str]:
        root = self.out_dir / 'datasets'
        if not root.is_dir():
            return []
        return sorted(p.name for p in root.iterdir() if (p / 'schema.json').is_file())

    def save_qi_sets(self, dataset: str, qi_sets: Sequence[QISet], profiles: Sequence[RiskProfile]) -> List[Path]:
        folder = self.dataset_dir(dataset)
        return [
            write_json(folder / 'qi_sets.json', [q.to_dict() for q in qi_sets]),
            write_json(folder / 'profiles.json', [p.to_report() for p in profiles]),
        ]

    def load_qi_sets(self, dataset: str) -> List[QISet]:
        path = self.dataset_dir(dataset) / 'qi_sets.json'
        if not path.is_file():
            raise PipelineError(f"no QI sets recorded for dataset '{dataset}'")
        return [QISet.from_dict(item) for item in read_json(path)]

    # Variants
    def save_variant(self, variant: ProtectedVariant) -> List[Path]:
        path = self.variant_path(variant.source, variant.qi_set, variant.config.config_id)
        return [write_csv(variant.data, path), write_json(path.with_suffix('.json'), variant.provenance_dict())]

    def save_external_slots(self, dataset: str, qi_id: int, slots: Sequence[Dict]) -> Path:
        return write_json(self.variant_dir(dataset, qi_id) / 'external_slots.json', list(slots))

    def list_variants(self, dataset: Optional[str] = None) -> List[Tuple[str, int, int]]:
        """(dataset, qi_id, config_id) of every variant with provenance, in sorted order."""
        root = self.out_dir / 'variants'
        names = [dataset] if dataset else self.list_datasets()
        found = []
        for name in names:
            base = root / name
            if not base.is_dir():
                continue
            for qi_dir in base.iterdir():
                if not qi_dir.is_dir() or not qi_dir.name.isdigit():
                    continue
                for provenance in qi_dir.glob('*.json'):
                    if provenance.stem.isdigit() and provenance.with_suffix('.csv').is_file():
                        found.append((name, int(qi_dir.name), int(provenance.stem)))
        return sorted(found)

    def load_variant(self, dataset: str, qi_id: int, config_id: int) -> Tuple[Dataset, Dict[str, Any]]:
        target, kinds = self.schema(dataset)
        path = self.variant_path(dataset, qi_id, config_id)
        data = load_csv(path, target, name=f"{dataset}-qi{qi_id}-c{config_id}", kinds=kinds)
        return data, read_json(path.with_suffix('.json'))

    # Tables
    def write_table(self, path: Path, records: Iterable[Dict[str, Any]], columns: Sequence[str]) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(list(records), columns=list(columns))
        frame.to_csv(path, index=False, lineterminator='\n')
        return path

    def read_table(self, path: Path) -> pd.DataFrame:
        if not path.is_file():
            raise PipelineError(f"missing table: {path}")
        return pd.read_csv(path, keep_default_na=False, na_values=[''])

    def save_ledger(self, optimizer: str, dataset: str, qi_id: int, config_id: int,
                    entries: Iterable[Dict[str, Any]]) -> Path:
        return self.write_table(self.ledger_path(optimizer, dataset, qi_id, config_id), entries, LEDGER_COLUMNS)

    def export_xlsx(self, path: Path, records: Sequence[Dict[str, Any]], sheet_name: str = 'recommendations') -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(list(records)).to_excel(path, index=False, sheet_name=sheet_name, engine='openpyxl')
        return path
