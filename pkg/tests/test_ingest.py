import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from accel_denoise.exceptions import InvalidArgumentError, InvalidDataError, ParseError
from accel_denoise.ingest import FieldManifest, ManifestEntry, load_recordings, read_recordings_csv, window
from accel_denoise.sim import (
    EulerAngles,
    Recording,
    SimConfig,
    build_dataset,
    write_dataset,
    write_recordings_csv,
)


def _rec(n=10):
    gt = np.arange(3 * n, dtype=float).reshape(n, 3)
    return Recording(EulerAngles(1, 2), gt, gt + 0.5)


def _manifest(tmp_path, recs):
    entries = []
    for i, rec in enumerate(recs):
        name = f"rec{i}.csv"
        write_recordings_csv(tmp_path / name, [rec])
        entries.append({"path": name, "roll_deg": rec.angles.roll_deg,
                        "pitch_deg": rec.angles.pitch_deg, "sample_rate": rec.sample_rate})
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"entries": entries}))
    return path


class TestLoad:
    def test_two_files(self, tmp_path):
        recs = build_dataset(SimConfig(angle_min_deg=0, angle_max_deg=2, angle_step_deg=1, window_len=7))[:2]
        manifest = FieldManifest.from_json(_manifest(tmp_path, recs))
        loaded = load_recordings(manifest)
        assert [len(r) for r in loaded] == [7, 7]
        assert loaded == recs  # bit-exact round trip

    def test_parallel_load_matches(self, tmp_path):
        recs = build_dataset(SimConfig(angle_step_deg=10, window_len=5))
        manifest = FieldManifest.from_json(_manifest(tmp_path, recs))
        assert load_recordings(manifest, workers=4) == load_recordings(manifest)

    def test_parse_error_reports_line(self, tmp_path):
        path = _manifest(tmp_path, [_rec(30)])
        lines = (tmp_path / "rec0.csv").read_text().splitlines()
        cells = lines[16].split(",")
        cells[5] = "abc"
        lines[16] = ",".join(cells)
        (tmp_path / "rec0.csv").write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError) as info:
            load_recordings(FieldManifest.from_json(path))
        assert info.value.line == 17
        assert ":17:" in str(info.value)

    def test_missing_file(self, tmp_path):
        m = FieldManifest([ManifestEntry("nope.csv", 0, 0, 100)], root=str(tmp_path))
        with pytest.raises(FileNotFoundError, match="nope.csv"):
            load_recordings(m)

    def test_empty_file(self, tmp_path):
        path = _manifest(tmp_path, [_rec(2)])
        header = (tmp_path / "rec0.csv").read_text().splitlines()[0]
        (tmp_path / "rec0.csv").write_text(header + "\n")
        with pytest.raises(InvalidDataError):
            load_recordings(FieldManifest.from_json(path))

    def test_non_finite_rows_dropped(self, tmp_path, caplog):
        path = _manifest(tmp_path, [_rec(5)])
        lines = (tmp_path / "rec0.csv").read_text().splitlines()
        cells = lines[2].split(",")
        cells[4] = "nan"
        lines[2] = ",".join(cells)
        (tmp_path / "rec0.csv").write_text("\n".join(lines) + "\n")
        (rec,) = load_recordings(FieldManifest.from_json(path))
        assert len(rec) == 4
        assert "non-finite" in caplog.text

    def test_column_mapping(self, tmp_path):
        (tmp_path / "a.csv").write_text("ax,ay,az,bx,by,bz\n1,2,3,4,5,6\n")
        m = FieldManifest(
            [ManifestEntry("a.csv", 0, 0, 50)],
            columns={"gt_x": "ax", "gt_y": "ay", "gt_z": "az",
                     "noisy_x": "bx", "noisy_y": "by", "noisy_z": "bz"},
            root=str(tmp_path),
        )
        (rec,) = load_recordings(m)
        np.testing.assert_array_equal(rec.noisy, [[4, 5, 6]])
        assert rec.sample_rate == 50

    def test_manifest_validation(self):
        with pytest.raises(InvalidArgumentError):
            FieldManifest([ManifestEntry("a", 0, 0, 1), ManifestEntry("a", 1, 1, 1)])
        with pytest.raises(InvalidArgumentError):
            FieldManifest([ManifestEntry("a", 0, 0, 0)])

    def test_manifest_round_trip(self, tmp_path):
        m = FieldManifest([ManifestEntry("a.csv", 1.5, -2.0, 100)])
        m.to_json(tmp_path / "m.json")
        assert FieldManifest.from_json(tmp_path / "m.json").entries == m.entries

    def test_multi_recording_file(self, tmp_path):
        cfg = SimConfig(angle_step_deg=10.0, window_len=6, seed=2)
        recs = build_dataset(cfg)
        csv_path, _ = write_dataset(tmp_path, recs, cfg)
        assert read_recordings_csv(csv_path) == recs


class TestWindow:
    def test_even_split(self):
        assert len(window(_rec(10), 5, 5)) == 2

    def test_offsets(self):
        rec = _rec(10)
        ws = window(rec, 4, 3)
        assert len(ws) == 3
        np.testing.assert_array_equal(ws[2].gt, rec.gt[6:10])

    def test_too_long(self):
        with pytest.raises(InvalidArgumentError):
            window(_rec(10), 11, 1)

    @given(st.integers(1, 40), st.integers(1, 40))
    def test_never_fabricates(self, n, h):
        rec = _rec(n)
        if h > n:
            return
        ws = window(rec, h, h)
        joined = np.concatenate([w.gt for w in ws])
        np.testing.assert_array_equal(joined, rec.gt[: len(joined)])
        assert len(joined) == (n // h) * h
