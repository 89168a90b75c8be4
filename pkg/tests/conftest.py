"""
Pytest fixtures for AUTOPRIV tests
"""
import os
import sys
import time

import numpy as np
import pytest

# Add the repository root to the Python path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from autopriv.tabular import Column, ColumnKind, Dataset  # noqa: E402

NUM = ColumnKind.NUMERIC
CAT = ColumnKind.CATEGORICAL


def build_dataset(name, spec, rows, target='label'):
    """Dataset from [(column name, kind), ...] and plain row tuples."""
    return Dataset(name, tuple(Column(n, k) for n, k in spec), rows, target)


def random_table(rng, n_rows, n_numeric=3, n_categorical=1, name='toy', levels=('a', 'b', 'c'), decimals=3):
    """Mixed table whose label leans on the first numeric column; both classes always present."""
    spec = [(f"x{j}", NUM) for j in range(n_numeric)] + [(f"c{j}", CAT) for j in range(n_categorical)]
    spec.append(('label', CAT))
    rows = []
    for i in range(n_rows):
        numbers = [float(round(rng.normal(), decimals)) for _ in range(n_numeric)]
        tokens = [str(rng.choice(levels)) for _ in range(n_categorical)]
        signal = (numbers[0] if numbers else 0.0) + rng.normal(0, 0.5)
        label = 'yes' if signal > 0 else 'no'
        if i < 2:
            label = ('yes', 'no')[i]
        rows.append(tuple(numbers + tokens + [label]))
    return build_dataset(name, spec, rows)


def separable_table(n_per_class=20, seed=0, name='separable'):
    """Two tight clusters along (1, 1): positives near (2.5, 2.5), negatives near (-2.5, -2.5)."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(2 * n_per_class):
        sign = 1.0 if i % 2 == 0 else -1.0
        x1 = float(sign * 2.5 + rng.uniform(-0.4, 0.4))
        x2 = float(sign * 2.5 + rng.uniform(-0.4, 0.4))
        rows.append((x1, x2, 'pos' if sign > 0 else 'neg'))
    return build_dataset(name, [('x1', NUM), ('x2', NUM), ('label', CAT)], rows)


@pytest.fixture
def make_table():
    """Factory for seeded random mixed tables."""
    def _make(n_rows=60, seed=0, **kwargs):
        return random_table(np.random.default_rng(seed), n_rows, **kwargs)
    return _make


@pytest.fixture
def toy_dataset():
    return random_table(np.random.default_rng(7), 80)


@pytest.fixture
def separable_dataset():
    return separable_table()


@pytest.fixture(scope="function")
def capture_test_info(request):
    """Fixture to capture test information for reporting."""
    test_info = {
        'name': request.node.name,
        'module': request.module.__name__,
        'start_time': time.time()
    }

    yield test_info

    test_info['end_time'] = time.time()
    test_info['duration'] = test_info['end_time'] - test_info['start_time']
    print(f"\n[REPORT] Test '{test_info['name']}' completed in {test_info['duration']:.2f} seconds")
