"""
Linkability risk of a protected variant.
An attacker holding two disjoint slices (A and B) of a target's quasi-identifiers
finds the k nearest variant rows on each slice; the target is linked when the two
neighbour sets intersect. A control set of held-out original rows measures the
success that happens by chance.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from autopriv.errors import LinkageError
from autopriv.gower import GowerEncoder, k_nearest, pairwise_gower
from autopriv.riskprofile import QISet
from autopriv.synth import ProtectedVariant
from autopriv.tabular import Dataset

logger = logging.getLogger(__name__)

DEFAULT_MAX_TARGETS = 500
BLOCK_SIZE = 256


@dataclass(frozen=True)
class LinkabilityReport:
    n_targets: int
    k: int
    naive_rate: float
    control_rate: float
    adjusted_risk: float
    aux_split: Tuple[Tuple[str, ...], Tuple[str, ...]]
    targets: Tuple[int, ...] = field(default=(), repr=False)
    successes: Tuple[int, ...] = field(default=(), repr=False)

    def to_dict(self) -> Dict:
        return {
            'n_targets': self.n_targets,
            'k': self.k,
            'naive_rate': self.naive_rate,
            'control_rate': self.control_rate,
            'adjusted_risk': self.adjusted_risk,
            'aux_a': list(self.aux_split[0]),
            'aux_b': list(self.aux_split[1]),
        }


def split_aux_columns(qis: Union[QISet, Sequence[str]]) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    """Alternate QI columns into two auxiliary slices: even positions to A, odd to B."""
    columns = tuple(qis.columns if isinstance(qis, QISet) else qis)
    if len(columns) < 2:
        raise LinkageError(f"linkability needs at least 2 QI columns, got {len(columns)}")
    return columns[0::2], columns[1::2]


def adjusted_risk(naive_rate: float, control_rate: float) -> float:
    if control_rate >= 1.0:
        return 0.0
    return float(min(max((naive_rate - control_rate) / (1.0 - control_rate), 0.0), 1.0))


def _link_successes(table: Dataset, rows: np.ndarray, variant: Dataset, enc_a: GowerEncoder,
                    enc_b: GowerEncoder, k: int) -> np.ndarray:
    """Boolean success flag for each selected row of `table` used as a target."""
    var_a, var_b = enc_a.transform(variant), enc_b.transform(variant)
    tgt_a, tgt_b = enc_a.transform(table)[rows], enc_b.transform(table)[rows]
    flags = np.zeros(len(rows), dtype=bool)
    for start in range(0, len(rows), BLOCK_SIZE):
        stop = min(start + BLOCK_SIZE, len(rows))
        near_a = k_nearest(pairwise_gower(tgt_a[start:stop], var_a, enc_a), k)
        near_b = k_nearest(pairwise_gower(tgt_b[start:stop], var_b, enc_b), k)
        for offset in range(stop - start):
            flags[start + offset] = bool(np.intersect1d(near_a[offset], near_b[offset]).size)
    return flags


def linkability(original: Dataset, variant: Union[ProtectedVariant, Dataset], qis: Union[QISet, Sequence[str]],
                control: Dataset, n_targets: Optional[int] = None, k: int = 10, seed: int = 0) -> LinkabilityReport:
    """Naive, control and control-adjusted linkability of a variant."""
    data = variant.data if isinstance(variant, ProtectedVariant) else variant
    columns = tuple(qis.columns if isinstance(qis, QISet) else qis)
    if data.n_rows == 0:
        raise LinkageError("cannot attack an empty variant")
    if k < 1:
        raise LinkageError(f"k must be at least 1, got {k}")
    for table, label in ((original, 'original'), (data, 'variant'), (control, 'control')):
        missing = [name for name in columns if name not in table.column_names]
        if missing:
            raise LinkageError(f"QI column '{missing[0]}' missing from the {label} table")

    aux_a, aux_b = split_aux_columns(columns)
    if n_targets is None:
        n_targets = min(DEFAULT_MAX_TARGETS, original.n_rows)
    if not 1 <= n_targets <= original.n_rows:
        raise LinkageError(f"n_targets must lie in [1, {original.n_rows}], got {n_targets}")

    enc_a = GowerEncoder.fit(original, aux_a)
    enc_b = GowerEncoder.fit(original, aux_b)

    rng = np.random.default_rng(seed)
    target_idx = np.sort(rng.choice(original.n_rows, size=n_targets, replace=False))
    naive_flags = _link_successes(original, target_idx, data, enc_a, enc_b, k)
    naive_rate = float(naive_flags.mean())

    control_rate = 0.0
    if control.n_rows:
        n_control = min(n_targets, control.n_rows)
        control_idx = np.sort(rng.choice(control.n_rows, size=n_control, replace=False))
        control_rate = float(_link_successes(control, control_idx, data, enc_a, enc_b, k).mean())
    else:
        logger.warning("[WARNING] Empty control set; control rate taken as 0")

    return LinkabilityReport(
        n_targets=int(n_targets),
        k=int(k),
        naive_rate=naive_rate,
        control_rate=control_rate,
        adjusted_risk=adjusted_risk(naive_rate, control_rate),
        aux_split=(aux_a, aux_b),
        targets=tuple(int(i) for i in target_idx),
        successes=tuple(int(i) for i, hit in zip(target_idx, naive_flags) if hit),
    )

