"""Dataset IO and synthetic generation: CSV parsing corners, byte-exact
round-trips, subset files with fingerprint pinning, and generator contracts.
"""
from __future__ import annotations

import numpy as np
import pytest

from nnc import (
    Algorithm,
    CsvFormatError,
    DatasetDescriptor,
    DuplicateConflictError,
    FingerprintMismatchError,
    InvalidParameterError,
    SubsetFormatError,
    SyntheticSpec,
    TrainingSet,
    alpha_rss,
    compute_stats,
    fingerprint,
    generate_synthetic,
    load_csv,
    load_subset,
    save_subset,
    save_training_csv,
)
from nnc.data import GENERATOR_REGION, GENERATOR_VORONOI, GENERATORS


class TestSyntheticSpec:
    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            SyntheticSpec(n=0, d=2, class_count=2, seed=1)
        with pytest.raises(InvalidParameterError):
            SyntheticSpec(n=10, d=0, class_count=2, seed=1)
        with pytest.raises(InvalidParameterError):
            SyntheticSpec(n=10, d=2, class_count=1, seed=1)
        with pytest.raises(InvalidParameterError):
            SyntheticSpec(n=2, d=2, class_count=3, seed=1)
        with pytest.raises(InvalidParameterError):
            SyntheticSpec(n=10, d=2, class_count=2, seed=1, generator="maze")

    def test_known_generators(self):
        assert GENERATOR_VORONOI in GENERATORS and GENERATOR_REGION in GENERATORS


class TestGenerateSynthetic:
    @pytest.mark.parametrize("gen", GENERATORS)
    def test_shape_and_classes(self, gen):
        spec = SyntheticSpec(n=100, d=3, class_count=4, seed=5, generator=gen)
        ts = generate_synthetic(spec)
        assert ts.n == 100 and ts.d == 3 and ts.class_count == 4
        assert set(np.unique(ts.labels)) == {0, 1, 2, 3}
        assert ts.coords.min() >= 0.0 and ts.coords.max() <= 1.0

    def test_deterministic(self):
        spec = SyntheticSpec(n=64, d=2, class_count=3, seed=9)
        a, b = generate_synthetic(spec), generate_synthetic(spec)
        assert fingerprint(a) == fingerprint(b)
        other = generate_synthetic(SyntheticSpec(n=64, d=2, class_count=3, seed=10))
        assert fingerprint(a) != fingerprint(other)

    def test_one_point_per_class_edge(self):
        ts = generate_synthetic(SyntheticSpec(n=3, d=2, class_count=3, seed=2))
        assert sorted(ts.labels.tolist()) == [0, 1, 2]

    def test_sets_are_condensable(self):
        ts = generate_synthetic(SyntheticSpec(n=80, d=2, class_count=2, seed=3))
        sub = alpha_rss(ts, 0.0)
        assert 2 <= sub.size <= 80
        assert compute_stats(ts).gamma > 0


class TestLoadCsv:
    def write(self, tmp_path, text, name="data.csv"):
        p = tmp_path / name
        p.write_text(text)
        return p

    def test_plain_numeric(self, tmp_path):
        p = self.write(tmp_path, "0.5,1.5,0\n2.5,3.5,1\n")
        ts = load_csv(p)
        assert ts.n == 2 and ts.d == 2
        assert ts.labels.tolist() == [0, 1]

    def test_header_detected(self, tmp_path):
        p = self.write(tmp_path, "x,y,label\n0.5,1.5,0\n2.5,3.5,1\n")
        assert load_csv(p).n == 2

    def test_string_labels_by_first_appearance(self, tmp_path):
        p = self.write(tmp_path, "1,setosa\n2,virginica\n3,setosa\n4,versicolor\n")
        ts = load_csv(p)
        assert ts.labels.tolist() == [0, 1, 0, 2]

    def test_label_column_override(self, tmp_path):
        p = self.write(tmp_path, "0,9.0,1.5\n1,8.0,2.5\n")
        ts = load_csv(p, label_column=0)
        assert ts.labels.tolist() == [0, 1]
        assert ts.coords[0].tolist() == [9.0, 1.5]

    def test_negative_label_column(self, tmp_path):
        p = self.write(tmp_path, "1.0,2.0,0\n3.0,4.0,1\n")
        ts = load_csv(p, label_column=-1)
        assert ts.d == 2

    def test_label_column_out_of_range(self, tmp_path):
        p = self.write(tmp_path, "1.0,0\n2.0,1\n")
        with pytest.raises(InvalidParameterError):
            load_csv(p, label_column=5)

    def test_blank_lines_skipped(self, tmp_path):
        p = self.write(tmp_path, "1.0,0\n\n   \n2.0,1\n")
        assert load_csv(p).n == 2

    def test_empty_file(self, tmp_path):
        with pytest.raises(CsvFormatError):
            load_csv(self.write(tmp_path, ""))

    def test_missing_file(self, tmp_path):
        with pytest.raises(CsvFormatError) as ei:
            load_csv(tmp_path / "absent.csv")
        assert "absent.csv" in str(ei.value.details)

    def test_header_only(self, tmp_path):
        with pytest.raises(CsvFormatError):
            load_csv(self.write(tmp_path, "x,label\n"))

    def test_too_few_columns(self, tmp_path):
        with pytest.raises(CsvFormatError):
            load_csv(self.write(tmp_path, "1.0\n2.0\n"))

    def test_bad_rows_reported_one_based(self, tmp_path):
        p = self.write(tmp_path, "1.0,0\noops,1\n3.0,0\n4.0,1,9\n")
        with pytest.raises(CsvFormatError) as err:
            load_csv(p)
        assert err.value.details["rows"] == [2, 4]
        assert err.value.details["total_bad"] == 2

    def test_duplicate_conflict_maps_file_rows(self, tmp_path):
        p = self.write(tmp_path, "x,label\n1.0,0\n1.0,1\n2.0,0\n")
        with pytest.raises(DuplicateConflictError) as err:
            load_csv(p)
        assert set(err.value.details["file_rows"]) == {2, 3}

    def test_normalize_flag(self, tmp_path):
        p = self.write(tmp_path, "0.0,0\n8.0,1\n")
        ts = load_csv(p, normalize=True)
        assert compute_stats(ts).diameter == pytest.approx(1.0)


class TestRoundTrip:
    def test_training_csv_bit_exact(self, tmp_path):
        rng = np.random.default_rng(77)
        # labels in first-appearance order so the loader's id mapping is
        # the identity and fingerprints can match exactly
        ts = TrainingSet(rng.random((40, 3)), np.arange(40) % 2)
        out = tmp_path / "set.csv"
        save_training_csv(ts, out)
        back = load_csv(out)
        assert fingerprint(back) == fingerprint(ts)
        assert np.array_equal(back.coords, ts.coords)

    def test_subset_round_trip(self, d4, tmp_path):
        sub = alpha_rss(d4, 0.5)
        out = tmp_path / "subset.txt"
        save_subset(sub, out)
        back = load_subset(out, d4)
        assert back == sub

    def test_subset_refuses_wrong_dataset(self, d4, tmp_path):
        sub = alpha_rss(d4, 0.5)
        out = tmp_path / "subset.txt"
        save_subset(sub, out)
        other = TrainingSet([0.0, 1.0, 3.0, 4.5], [0, 0, 1, 1])
        with pytest.raises(FingerprintMismatchError):
            load_subset(out, other)

    def test_subset_malformed_header(self, d4, tmp_path):
        p = tmp_path / "subset.txt"
        p.write_text("#something else\n1\n2\n")
        with pytest.raises(SubsetFormatError):
            load_subset(p, d4)

    def test_subset_unknown_algorithm(self, d4, tmp_path):
        fp = fingerprint(d4)
        p = tmp_path / "subset.txt"
        p.write_text(f"#nnc-subset v1 algo=magic alpha=0.0 xi=0.0 fp={fp}\n1\n2\n")
        with pytest.raises(SubsetFormatError):
            load_subset(p, d4)

    def test_subset_non_integer_entry(self, d4, tmp_path):
        fp = fingerprint(d4)
        p = tmp_path / "subset.txt"
        p.write_text(f"#nnc-subset v1 algo=rss alpha=0.0 xi=0.0 fp={fp}\n1\ntwo\n")
        with pytest.raises(SubsetFormatError):
            load_subset(p, d4)

    def test_subset_empty_file(self, d4, tmp_path):
        p = tmp_path / "subset.txt"
        p.write_text("")
        with pytest.raises(SubsetFormatError):
            load_subset(p, d4)

    def test_subset_missing_file(self, d4, tmp_path):
        with pytest.raises(SubsetFormatError):
            load_subset(tmp_path / "absent.subset", d4)

    def test_subset_preserves_parameters(self, d4, tmp_path):
        sub = alpha_rss(d4, 1.0)
        out = tmp_path / "s.txt"
        save_subset(sub, out)
        back = load_subset(out, d4)
        assert back.algorithm is Algorithm.RSS
        assert back.alpha == 1.0 and back.xi == 0.0


class TestDescriptor:
    def test_synthetic_source(self):
        spec = SyntheticSpec(n=30, d=2, class_count=2, seed=1)
        ts = DatasetDescriptor(name="synth", source=spec).resolve()
        assert ts.n == 30

    def test_csv_source_with_normalize(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("0.0,0\n5.0,1\n")
        ts = DatasetDescriptor(name="file", source=p, normalize=True).resolve()
        assert compute_stats(ts).diameter == pytest.approx(1.0)
