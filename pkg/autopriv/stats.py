"""
Practical-equivalence comparison
Percentage differences, ROPE verdicts and the Bayes sign test.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Sequence, Tuple

import numpy as np

from autopriv.errors import StatsError

ROPE_LOW = -1.0
ROPE_HIGH = 1.0
DEFAULT_MC_SAMPLES = 50_000


class Verdict(str, Enum):
    LOSE = 'Lose'
    DRAW = 'Draw'
    WIN = 'Win'


@dataclass(frozen=True)
class RopeVerdict:
    verdict: Verdict
    diff_pct: float


@dataclass(frozen=True)
class SignTestResult:
    p_lose: float
    p_draw: float
    p_win: float
    counts: Tuple[int, int, int]
    mc_samples: int
    seed: int

    def to_dict(self) -> Dict:
        return {
            'counts': {'lose': self.counts[0], 'draw': self.counts[1], 'win': self.counts[2]},
            'p_lose': self.p_lose,
            'p_draw': self.p_draw,
            'p_win': self.p_win,
            'mc_samples': self.mc_samples,
            'seed': self.seed,
        }


def pct_diff(r_a: float, r_b: float) -> float:
    """(r_a - r_b) / r_b * 100."""
    if r_b == 0:
        raise StatsError("percentage difference undefined for a zero baseline")
    return (r_a - r_b) / r_b * 100.0


def rope_classify(diff_pct: float, lo: float = ROPE_LOW, hi: float = ROPE_HIGH) -> RopeVerdict:
    if lo >= hi:
        raise StatsError(f"ROPE bounds must satisfy lo < hi, got [{lo}, {hi}]")
    if diff_pct > hi:
        return RopeVerdict(Verdict.WIN, diff_pct)
    if diff_pct < lo:
        return RopeVerdict(Verdict.LOSE, diff_pct)
    return RopeVerdict(Verdict.DRAW, diff_pct)


def bayes_sign_test(diffs: Sequence[float], lo: float = ROPE_LOW, hi: float = ROPE_HIGH,
                    prior_weight: float = 1.0, mc_samples: int = DEFAULT_MC_SAMPLES,
                    seed: int = 0) -> SignTestResult:
    """Dirichlet posterior over (lose, draw, win) sampled by Monte Carlo.

    Prior: prior_weight spread evenly over the three regions plus one pseudo-observation
    on draw. A region's probability is the share of samples where it is the strict
    maximum; exact ties go to draw.
    """
    if len(diffs) == 0:
        raise StatsError("bayes_sign_test needs at least one difference")
    if mc_samples < 1:
        raise StatsError(f"mc_samples must be positive, got {mc_samples}")
    counts = np.zeros(3)
    for diff in diffs:
        counts[list(Verdict).index(rope_classify(diff, lo, hi).verdict)] += 1

    alpha = counts + prior_weight / 3.0
    alpha[1] += 1.0
    samples = np.random.default_rng(seed).dirichlet(alpha, size=mc_samples)
    lose, draw, win = samples[:, 0], samples[:, 1], samples[:, 2]
    lose_wins = (lose > draw) & (lose > win)
    win_wins = (win > draw) & (win > lose)
    n_lose = int(lose_wins.sum())
    n_win = int(win_wins.sum())
    n_draw = mc_samples - n_lose - n_win
    return SignTestResult(
        p_lose=n_lose / mc_samples,
        p_draw=n_draw / mc_samples,
        p_win=n_win / mc_samples,
        counts=(int(counts[0]), int(counts[1]), int(counts[2])),
        mc_samples=mc_samples,
        seed=seed,
    )
