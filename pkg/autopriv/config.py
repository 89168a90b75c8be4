"""
AUTOPRIV pipeline configuration
Settings come from a flat key = value file (or a setting_name,setting_value CSV
table) and are exposed as typed properties with documented defaults.
"""
import configparser
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from autopriv.cash import OPTIMIZERS, RESERVED_OPTIMIZERS
from autopriv.csv_data_manager import CSVDataManager, coerce_setting
from autopriv.errors import ConfigError
from autopriv.learning import DEFAULT_SGD_ALPHA, Algorithm

logger = logging.getLogger(__name__)

_SECTION = 'autopriv'

DEFAULTS: Dict[str, Any] = {
    'corpus_dir': 'data/corpus',
    'out_dir': 'out',
    'master_seed': 0,
    'target': '',
    'qi_count': 3,
    'qi_fraction': 0.4,
    'optimizer': 'sh',
    'link_k': 10,
    'holdout_fraction': 0.2,
    'n_targets': '',
    'top_n': 20,
    'worker_count': 1,
    'cv_folds': 5,
    'cv_repeats': 2,
    'learners': '',
    'sgd_alpha': ','.join(str(a) for a in DEFAULT_SGD_ALPHA),
    'random_iter': 10,
    'external_dir': '',
    'sh_factor': 3,
    'sh_min_resource': 1.0 / 9.0,
    'ridge_lambda': 1e-8,
    'control_fraction': '',
}


def _split_list(value: Any) -> Tuple[str, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(str(v).strip() for v in value if str(v).strip())
    return tuple(part.strip() for part in str(value).split(',') if part.strip())


class PipelineConfig:
    """Data-driven configuration: one settings dict, typed read-only properties."""

    def __init__(self, settings: Optional[Dict[str, Any]] = None, source: Optional[Path] = None):
        self.source = source
        self.settings: Dict[str, Any] = {}
        for key, value in (settings or {}).items():
            if key not in DEFAULTS:
                origin = f" in {source}" if source else ''
                raise ConfigError(f"unknown configuration key '{key}'{origin}")
            self.settings[key] = coerce_setting(value)
        self.validate()

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> 'PipelineConfig':
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Configuration file not found: {path}")
        if path.suffix.lower() == '.csv':
            settings = dict(CSVDataManager(path.parent).load_settings(path))
        else:
            parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'))
            parser.optionxform = str
            try:
                parser.read_string(f"[{_SECTION}]\n" + path.read_text(encoding='utf-8'), source=str(path))
            except configparser.Error as exc:
                raise ConfigError(f"{path}: {exc}") from None
            settings = dict(parser.items(_SECTION))
        logger.debug(f"[SUCCESS] Configuration loaded from {path}")
        return cls(settings, source=path)

    def with_overrides(self, **overrides: Any) -> 'PipelineConfig':
        """Copy with the given keys replaced; None values are ignored."""
        settings = dict(self.settings)
        settings.update({key: value for key, value in overrides.items() if value is not None})
        return PipelineConfig(settings, self.source)

    def get_setting(self, setting_name: str, default_value: Any = None) -> Any:
        value = self.settings.get(setting_name, DEFAULTS.get(setting_name, default_value))
        return default_value if value is None else value

    def _int(self, name: str) -> int:
        value = self.get_setting(name)
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"'{name}' must be an integer, got '{value}'") from None

    def _float(self, name: str) -> float:
        value = self.get_setting(name)
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"'{name}' must be a number, got '{value}'") from None

    def _optional(self, name: str) -> Optional[str]:
        value = self.get_setting(name)
        return None if value in ('', None) else str(value)

    # Paths
    @property
    def corpus_dir(self) -> Path:
        return Path(str(self.get_setting('corpus_dir')))

    @property
    def out_dir(self) -> Path:
        return Path(str(self.get_setting('out_dir')))

    @property
    def external_dir(self) -> Optional[Path]:
        value = self._optional('external_dir')
        return Path(value) if value else None

    # Protocol
    @property
    def master_seed(self) -> int:
        return self._int('master_seed')

    @property
    def target(self) -> Optional[str]:
        """Target column name; None means the last header column of each corpus file."""
        return self._optional('target')

    @property
    def qi_count(self) -> int:
        return self._int('qi_count')

    @property
    def qi_fraction(self) -> float:
        return self._float('qi_fraction')

    @property
    def optimizer(self) -> str:
        return str(self.get_setting('optimizer'))

    @property
    def link_k(self) -> int:
        return self._int('link_k')

    @property
    def holdout_fraction(self) -> float:
        return self._float('holdout_fraction')

    @property
    def control_fraction(self) -> float:
        """Informational; the control set is the holdout test partition."""
        value = self._optional('control_fraction')
        return float(value) if value else self.holdout_fraction

    @property
    def n_targets(self) -> Optional[int]:
        value = self._optional('n_targets')
        return None if value is None else self._int('n_targets')

    @property
    def top_n(self) -> int:
        return self._int('top_n')

    @property
    def worker_count(self) -> int:
        return self._int('worker_count')

    # Learner search
    @property
    def cv_folds(self) -> int:
        return self._int('cv_folds')

    @property
    def cv_repeats(self) -> int:
        return self._int('cv_repeats')

    @property
    def learners(self) -> Tuple[str, ...]:
        """Learner families to search; empty means all four."""
        return _split_list(self.get_setting('learners'))

    @property
    def sgd_alpha(self) -> Tuple[float, ...]:
        values = _split_list(self.get_setting('sgd_alpha'))
        try:
            return tuple(float(v) for v in values)
        except ValueError:
            raise ConfigError(f"'sgd_alpha' must be a comma list of numbers, got '{self.get_setting('sgd_alpha')}'") \
                from None

    @property
    def random_iter(self) -> int:
        return self._int('random_iter')

    @property
    def sh_factor(self) -> int:
        return self._int('sh_factor')

    @property
    def sh_min_resource(self) -> float:
        return self._float('sh_min_resource')

    @property
    def ridge_lambda(self) -> float:
        return self._float('ridge_lambda')

    def validate(self):
        if self.optimizer in RESERVED_OPTIMIZERS:
            raise ConfigError(f"optimizer '{self.optimizer}' ({RESERVED_OPTIMIZERS[self.optimizer]}) "
                              f"is reserved and not implemented")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer '{self.optimizer}'; choose one of {', '.join(OPTIMIZERS)}")
        for name in ('qi_fraction', 'holdout_fraction'):
            value = self._float(name)
            if not 0.0 < value < 1.0 and not (name == 'qi_fraction' and value == 1.0):
                raise ConfigError(f"'{name}' must lie in (0, 1), got {value}")
        if not 0.0 < self.sh_min_resource <= 1.0:
            raise ConfigError(f"'sh_min_resource' must lie in (0, 1], got {self.sh_min_resource}")
        minimums = {'qi_count': 1, 'link_k': 1, 'top_n': 1, 'worker_count': 1, 'cv_folds': 2,
                    'cv_repeats': 1, 'random_iter': 1, 'sh_factor': 2}
        for name, minimum in minimums.items():
            if self._int(name) < minimum:
                raise ConfigError(f"'{name}' must be at least {minimum}, got {self._int(name)}")
        if self.n_targets is not None and self.n_targets < 1:
            raise ConfigError(f"'n_targets' must be at least 1, got {self.n_targets}")
        if self.ridge_lambda < 0:
            raise ConfigError(f"'ridge_lambda' must be non-negative, got {self.ridge_lambda}")
        for name in self.learners:
            if name not in {a.value for a in Algorithm}:
                raise ConfigError(f"unknown learner '{name}'; choose from {', '.join(a.value for a in Algorithm)}")
        if not self.sgd_alpha:
            raise ConfigError("'sgd_alpha' needs at least one value")

    def to_dict(self) -> Dict[str, Any]:
        """Every key with its effective value, for the run manifest."""
        resolved = {}
        for key in DEFAULTS:
            value = self.get_setting(key)
            resolved[key] = value if isinstance(value, (bool, int, float, str)) else str(value)
        return resolved
