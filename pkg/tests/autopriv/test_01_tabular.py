"""
Test Case 1: Dataset model, CSV ingestion and holdout splitting
"""
import numpy as np
import pytest

from autopriv.errors import DatasetError, SchemaError
from autopriv.tabular import (NA_CATEGORY, Column, ColumnKind, Dataset, holdout_split, load_csv,
                              stratified_counts, write_csv)
from autopriv.utils import round_half_up
from tests.conftest import CAT, NUM, build_dataset


def _write(path, text):
    path.write_text(text, encoding='utf-8')
    return path


def _labelled(n_pos, n_neg):
    rows = [(float(i), 'yes') for i in range(n_pos)] + [(float(i), 'no') for i in range(n_neg)]
    return build_dataset('counts', [('x', NUM), ('label', CAT)], rows)


@pytest.mark.smoke
class TestLoadCsv:
    """CSV ingestion and kind inference"""

    def test_numeric_column_with_missing_cell(self, tmp_path):
        path = _write(tmp_path / 'mini.csv', "a,b,label\n1,x,yes\n2.5,y,no\n,x,yes\n")
        ds = load_csv(path, 'label')
        assert ds.column('a').kind is ColumnKind.NUMERIC
        assert ds.column('b').kind is ColumnKind.CATEGORICAL
        # median of the observed 1 and 2.5
        assert ds.values('a') == [1.0, 2.5, 1.75]
        assert ds.name == 'mini'

    def test_mixed_tokens_make_a_categorical_column(self, tmp_path):
        lines = ["m,n,label"]
        for i in range(20):
            lines.append(f"{'1' if i % 2 else 'x'},{i},{'yes' if i % 3 else 'no'}")
        ds = load_csv(_write(tmp_path / 'mixed.csv', "\n".join(lines) + "\n"), 'label')
        assert ds.column('m').kind is ColumnKind.CATEGORICAL
        assert ds.column('n').kind is ColumnKind.NUMERIC
        assert set(ds.values('m')) == {'1', 'x'}

    def test_missing_markers_are_case_insensitive(self, tmp_path):
        path = _write(tmp_path / 'na.csv', "a,b,label\nNA,p,yes\nnan,q,no\n4,,yes\n2,NaN,no\n")
        ds = load_csv(path, 'label')
        assert ds.column('a').kind is ColumnKind.NUMERIC
        assert ds.values('a') == [3.0, 3.0, 4.0, 2.0]
        assert ds.values('b') == ['p', 'q', NA_CATEGORY, NA_CATEGORY]

    def test_single_class_target_is_rejected(self, tmp_path):
        path = _write(tmp_path / 'one.csv', "a,label\n1,yes\n")
        with pytest.raises(DatasetError, match="non-binary target"):
            load_csv(path, 'label')

    def test_ragged_row_names_the_line(self, tmp_path):
        path = _write(tmp_path / 'ragged.csv', "a,b,label\n1,2,yes\n3,no\n")
        with pytest.raises(DatasetError, match="line 3"):
            load_csv(path, 'label')

    def test_missing_file_and_unknown_target(self, tmp_path):
        with pytest.raises(DatasetError, match="not found"):
            load_csv(tmp_path / 'absent.csv', 'label')
        path = _write(tmp_path / 'ok.csv', "a,label\n1,yes\n2,no\n")
        with pytest.raises(DatasetError, match="target column 'cls'"):
            load_csv(path, 'cls')

    def test_rows_with_missing_target_are_dropped(self, tmp_path):
        path = _write(tmp_path / 'drop.csv', "a,label\n1,yes\n2,\n3,no\n")
        assert load_csv(path, 'label').n_rows == 2

    def test_fixed_kinds_keep_numeric_looking_tokens_categorical(self, tmp_path):
        path = _write(tmp_path / 'codes.csv', "zip,label\n1000,yes\n2000,no\n")
        ds = load_csv(path, 'label', kinds={'zip': ColumnKind.CATEGORICAL, 'label': ColumnKind.CATEGORICAL})
        assert ds.values('zip') == ['1000', '2000']

    def test_fixed_kinds_reject_unknown_columns_and_bad_numbers(self, tmp_path):
        path = _write(tmp_path / 'codes.csv', "zip,label\n1000,yes\nabc,no\n")
        with pytest.raises(SchemaError, match="unexpected column 'zip'"):
            load_csv(path, 'label', kinds={'label': ColumnKind.CATEGORICAL})
        with pytest.raises(DatasetError, match="non-numeric value 'abc'"):
            load_csv(path, 'label', kinds={'zip': ColumnKind.NUMERIC, 'label': ColumnKind.CATEGORICAL})

    def test_write_then_load_preserves_content(self, tmp_path, make_table):
        ds = make_table(n_rows=40, seed=3, name='roundtrip', decimals=12)
        reloaded = load_csv(write_csv(ds, tmp_path / 'roundtrip.csv'), 'label')
        assert reloaded == ds


@pytest.mark.smoke
class TestDatasetInvariants:
    """Dataset construction checks"""

    def test_duplicate_and_empty_column_names(self):
        with pytest.raises(DatasetError, match="duplicate"):
            build_dataset('d', [('a', NUM), ('a', NUM), ('label', CAT)], [(1.0, 2.0, 'y'), (1.0, 2.0, 'n')])
        with pytest.raises(DatasetError, match="non-empty"):
            build_dataset('d', [('', NUM), ('label', CAT)], [(1.0, 'y'), (2.0, 'n')])

    def test_arity_and_numeric_cells(self):
        with pytest.raises(DatasetError, match="row 1 has 1 values"):
            build_dataset('d', [('a', NUM), ('label', CAT)], [(1.0, 'y'), ('n',)])
        with pytest.raises(DatasetError, match="non-finite"):
            build_dataset('d', [('a', NUM), ('label', CAT)], [(float('inf'), 'y'), (1.0, 'n')])

    def test_target_must_be_binary_categorical(self):
        with pytest.raises(DatasetError, match="must be categorical"):
            Dataset('d', (Column('a', NUM), Column('t', NUM)), [(1.0, 0.0), (2.0, 1.0)], 't')
        with pytest.raises(DatasetError, match="non-binary"):
            build_dataset('d', [('a', NUM), ('label', CAT)], [(1.0, 'a'), (2.0, 'b'), (3.0, 'c')])

    def test_last_sorted_class_is_positive(self):
        ds = build_dataset('d', [('a', NUM), ('label', CAT)], [(1.0, 'yes'), (2.0, 'no'), (3.0, 'yes')])
        assert ds.class_values == ('no', 'yes')
        assert ds.labels.tolist() == [1, 0, 1]


@pytest.mark.regression
class TestHoldoutSplit:
    """Stratified holdout partition"""

    def test_thousand_rows_twenty_percent(self):
        ds = _labelled(334, 666)
        holdout = holdout_split(ds, 0.2, seed=11)
        assert len(holdout.test_idx) == 200

    def test_same_seed_same_indices(self, toy_dataset):
        first = holdout_split(toy_dataset, 0.2, seed=5)
        second = holdout_split(toy_dataset, 0.2, seed=5)
        assert first == second

    def test_per_class_counts(self):
        ds = _labelled(30, 70)
        holdout = holdout_split(ds, 0.2, seed=1)
        test_labels = ds.labels[list(holdout.test_idx)]
        assert int(test_labels.sum()) == 6
        assert int((test_labels == 0).sum()) == 14

    def test_indices_partition_the_rows(self, toy_dataset):
        holdout = holdout_split(toy_dataset, 0.25, seed=2)
        train, test = set(holdout.train_idx), set(holdout.test_idx)
        assert not train & test
        assert train | test == set(range(toy_dataset.n_rows))
        assert len(holdout.train_idx) + len(holdout.test_idx) == toy_dataset.n_rows

    def test_both_classes_on_both_sides(self):
        ds = _labelled(2, 40)
        holdout = holdout_split(ds, 0.1, seed=0)
        labels = ds.labels
        assert set(labels[list(holdout.train_idx)]) == {0, 1}
        assert set(labels[list(holdout.test_idx)]) == {0, 1}

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.2, 1.5])
    def test_fraction_outside_unit_interval(self, toy_dataset, fraction):
        with pytest.raises(DatasetError, match="fraction"):
            holdout_split(toy_dataset, fraction, seed=0)

    def test_stratified_counts_keep_the_total(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            sizes = [int(v) for v in rng.integers(30, 300, size=2)]
            fraction = float(rng.uniform(0.05, 0.95))
            counts = stratified_counts(sizes, fraction)
            assert sum(counts) == round_half_up(fraction * sum(sizes))
            for size, count in zip(sizes, counts):
                assert 1 <= count <= size - 1
                assert abs(count - fraction * size) < 2

    @pytest.mark.parametrize("sizes, fraction", [
        ([2, 98], 0.2), ([1, 1, 98], 0.2), ([3, 997], 0.2), ([2, 40], 0.1), ([2, 48], 0.9),
    ])
    def test_skewed_classes_keep_total_and_both_sides(self, sizes, fraction):
        counts = stratified_counts(sizes, fraction)
        assert sum(counts) == round_half_up(fraction * sum(sizes))
        for size, count in zip(sizes, counts):
            if size >= 2:
                assert 1 <= count <= size - 1
            else:
                assert 0 <= count <= size

    @pytest.mark.parametrize("n_pos, n_neg", [(2, 98), (3, 997), (98, 2)])
    def test_skewed_holdout_size(self, n_pos, n_neg):
        ds = _labelled(n_pos, n_neg)
        holdout = holdout_split(ds, 0.2, seed=0)
        assert len(holdout.test_idx) == round_half_up(0.2 * (n_pos + n_neg))
        labels = ds.labels
        assert set(labels[list(holdout.train_idx)]) == {0, 1}
        assert set(labels[list(holdout.test_idx)]) == {0, 1}
