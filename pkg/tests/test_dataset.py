import csv
import logging
from pathlib import Path

import pytest

from paintscore.dataset import (
    MANIFEST_COLUMNS,
    DatasetManifest,
    ManifestError,
    PaintingRecord,
    load_manifest,
    save_manifest_json,
    split_every_kth,
    summarize,
)
from paintscore.rubric import RubricScore

from conftest import make_image


def write_rows(path: Path, rows: list[dict]):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({col: row.get(col, "") for col in MANIFEST_COLUMNS})
    return path


def rating_row(painting_id, image, source="child", rater="r1", total=50,
               timestamp="2024-01-01T00:00:00+00:00"):
    each = total / 5
    return {
        "id": painting_id, "image_path": image, "source": source,
        "originality": each, "color": each, "texture": each,
        "composition": each, "content": each,
        "rater_id": rater, "timestamp": timestamp,
    }


class TestLoadManifest:
    def test_well_formed_three_rows(self, tmp_path):
        make_image(tmp_path / "a.png", 64, 64)
        make_image(tmp_path / "b.png", 64, 64)
        make_image(tmp_path / "c.png", 64, 64)
        path = write_rows(tmp_path / "m.csv", [
            rating_row("a", "a.png"),
            rating_row("b", "b.png"),
            rating_row("c", "c.png"),
        ])
        manifest = load_manifest(path)
        assert len(manifest.records) == 3
        assert manifest.records[0].consensus_total == pytest.approx(50)

    def test_two_raters_merge_into_one_record(self, tmp_path):
        make_image(tmp_path / "a.png", 64, 64)
        path = write_rows(tmp_path / "m.csv", [
            rating_row("a", "a.png", rater="r1", total=40),
            rating_row("a", "a.png", rater="r2", total=60),
        ])
        manifest = load_manifest(path)
        assert len(manifest.records) == 1
        assert len(manifest.records[0].ratings) == 2
        assert manifest.records[0].consensus_total == pytest.approx(50)

    def test_duplicate_rater_pair_fails_naming_id(self, tmp_path):
        make_image(tmp_path / "a.png", 64, 64)
        path = write_rows(tmp_path / "m.csv", [
            rating_row("a", "a.png", rater="r1"),
            rating_row("a", "a.png", rater="r1"),
        ])
        with pytest.raises(ManifestError) as err:
            load_manifest(path)
        assert "'a'" in str(err.value)
        assert "duplicate" in str(err.value)

    def test_small_artist_image_is_error(self, tmp_path):
        make_image(tmp_path / "small.png", 500, 700)
        path = write_rows(tmp_path / "m.csv", [
            rating_row("a", "small.png", source="artist"),
        ])
        with pytest.raises(ManifestError) as err:
            load_manifest(path)
        assert "500x700" in str(err.value)
        assert "600x600" in str(err.value)

    def test_small_child_image_warns_only(self, tmp_path, caplog):
        make_image(tmp_path / "small.png", 64, 64)
        path = write_rows(tmp_path / "m.csv", [rating_row("a", "small.png", source="child")])
        with caplog.at_level(logging.WARNING):
            manifest = load_manifest(path)
        assert len(manifest.records) == 1
        assert any("below" in message for message in caplog.messages)

    def test_big_artist_image_ok(self, tmp_path):
        make_image(tmp_path / "big.png", 600, 600)
        path = write_rows(tmp_path / "m.csv", [rating_row("a", "big.png", source="artist")])
        manifest = load_manifest(path)
        assert manifest.records[0].width == 600

    def test_jpeg_accepted(self, tmp_path):
        make_image(tmp_path / "a.jpg", 64, 64, fmt="JPEG")
        path = write_rows(tmp_path / "m.csv", [rating_row("a", "a.jpg")])
        manifest = load_manifest(path)
        assert manifest.records[0].width == 64

    def test_non_image_payload_rejected(self, tmp_path):
        (tmp_path / "fake.png").write_text("not an image at all")
        path = write_rows(tmp_path / "m.csv", [rating_row("a", "fake.png")])
        with pytest.raises(ManifestError) as err:
            load_manifest(path)
        assert "decode" in str(err.value)

    def test_unsupported_format_rejected(self, tmp_path):
        img = make_image(tmp_path / "a.bmp", 64, 64, fmt="BMP")
        path = write_rows(tmp_path / "m.csv", [rating_row("a", "a.bmp")])
        with pytest.raises(ManifestError) as err:
            load_manifest(path)
        assert "BMP" in str(err.value)

    def test_missing_image_collects_error(self, tmp_path):
        make_image(tmp_path / "a.png", 64, 64)
        path = write_rows(tmp_path / "m.csv", [
            rating_row("a", "a.png"),
            rating_row("b", "nope.png"),
        ])
        with pytest.raises(ManifestError) as err:
            load_manifest(path)
        assert "not found" in str(err.value)
        assert "'b'" in str(err.value)

    def test_errors_collected_not_fail_fast(self, tmp_path):
        path = write_rows(tmp_path / "m.csv", [
            rating_row("a", "gone1.png"),
            rating_row("b", "gone2.png"),
            {**rating_row("c", "gone3.png"), "source": "martian"},
        ])
        with pytest.raises(ManifestError) as err:
            load_manifest(path)
        assert len(err.value.errors) == 3

    def test_unrated_row_allowed(self, tmp_path):
        make_image(tmp_path / "a.png", 64, 64)
        path = write_rows(tmp_path / "m.csv", [
            {"id": "a", "image_path": "a.png", "source": "child"},
        ])
        manifest = load_manifest(path)
        assert manifest.records[0].ratings == []
        assert manifest.records[0].consensus_total is None

    def test_missing_file(self, tmp_path):
        with pytest.raises(ManifestError):
            load_manifest(tmp_path / "absent.csv")

    def test_bad_header(self, tmp_path):
        (tmp_path / "m.csv").write_text("id,nope\n1,2\n")
        with pytest.raises(ManifestError) as err:
            load_manifest(tmp_path / "m.csv")
        assert "header" in str(err.value)

    def test_bad_component_value(self, tmp_path):
        make_image(tmp_path / "a.png", 64, 64)
        row = rating_row("a", "a.png")
        row["color"] = "loud"
        path = write_rows(tmp_path / "m.csv", [row])
        with pytest.raises(ManifestError) as err:
            load_manifest(path)
        assert "loud" in str(err.value)

    def test_json_round_trip(self, tmp_path):
        make_image(tmp_path / "a.png", 64, 64)
        make_image(tmp_path / "b.png", 64, 64)
        path = write_rows(tmp_path / "m.csv", [
            rating_row("a", "a.png", total=40),
            rating_row("a", "a.png", rater="r2", total=50),
            {"id": "b", "image_path": "b.png", "source": "child"},
        ])
        manifest = load_manifest(path)
        out = save_manifest_json(manifest, tmp_path / "canonical.json")
        again = load_manifest(out)
        assert [r.id for r in again.records] == [r.id for r in manifest.records]
        assert again.records[0].consensus_total == pytest.approx(45)
        assert again.records[1].ratings == []


def in_memory_manifest(n_child, n_artist):
    records = [
        PaintingRecord(id=f"c{i}", image_path=Path(f"c{i}.png"), source="child",
                       width=64, height=64)
        for i in range(n_child)
    ] + [
        PaintingRecord(id=f"a{i}", image_path=Path(f"a{i}.png"), source="artist",
                       width=640, height=640)
        for i in range(n_artist)
    ]
    return DatasetManifest(records=records)


class TestSplit:
    def test_paper_scale_counts(self):
        manifest = in_memory_manifest(400, 200)
        result = split_every_kth(manifest, 5)
        assert len(result.train_ids) == 480
        assert len(result.test_ids) == 120
        assert result.counts_by_source["child"] == {"train": 320, "test": 80}
        assert result.counts_by_source["artist"] == {"train": 160, "test": 40}
        assert result.summary_line() == "480 train / 120 test"

    def test_positions_convention(self):
        manifest = in_memory_manifest(10, 0)
        result = split_every_kth(manifest, 5)
        test_positions = [i for i, r in enumerate(manifest.records) if r.split == "test"]
        assert test_positions == [4, 9]
        assert result.test_ids == ("c4", "c9")

    def test_partition_complete_and_disjoint(self):
        manifest = in_memory_manifest(41, 13)
        for k in (2, 3, 5, 7):
            result = split_every_kth(manifest, k)
            train, test = set(result.train_ids), set(result.test_ids)
            assert train | test == {r.id for r in manifest.records}
            assert train & test == set()
            assert len(test) == len(manifest.records) // k

    def test_deterministic(self):
        manifest = in_memory_manifest(30, 10)
        first = split_every_kth(manifest, 5)
        second = split_every_kth(manifest, 5)
        assert first == second

    def test_k_too_small(self):
        with pytest.raises(ValueError):
            split_every_kth(in_memory_manifest(5, 0), 1)

    def test_empty_manifest(self):
        with pytest.raises(ValueError):
            split_every_kth(DatasetManifest(records=[]), 5)

    def test_k_larger_than_count_warns_empty_test(self, caplog):
        manifest = in_memory_manifest(3, 0)
        with caplog.at_level(logging.WARNING):
            result = split_every_kth(manifest, 5)
        assert result.test_ids == ()
        assert any("empty" in m for m in caplog.messages)


def scored_manifest(totals):
    records = []
    for i, total in enumerate(totals):
        record = PaintingRecord(id=f"p{i}", image_path=Path(f"p{i}.png"),
                                source="child", width=64, height=64)
        record.consensus_total = float(total)
        each = total / 5
        record.consensus_components = RubricScore(each, each, each, each, each)
        records.append(record)
    return DatasetManifest(records=records)


class TestSummarize:
    def test_empty(self):
        summary = summarize(DatasetManifest(records=[]))
        assert summary.n_records == 0
        assert all(v == 0 for v in summary.by_source.values())
        assert all(all(v == 0 for v in c.values()) for c in summary.class_counts.values())

    def test_reference_distribution_counts(self):
        # 600 totals matching the documented full-corpus class counts
        totals = ([8] * 6 + [20] * 218 + [40] * 158 + [60] * 28 + [80] * 185 + [95] * 5)
        assert len(totals) == 600
        summary = summarize(scored_manifest(totals))
        assert list(summary.class_counts["M1"].values()) == [382, 218]
        assert list(summary.class_counts["M2"].values()) == [224, 158, 218]
        assert list(summary.class_counts["M3"].values()) == [224, 158, 28, 190]
        assert list(summary.class_counts["M4"].values()) == [6, 218, 158, 28, 190]
        assert list(summary.class_counts["M5"].values()) == [6, 218, 158, 28, 185, 5]

    def test_class_counts_sum_to_scored(self):
        import numpy as np

        totals = np.random.default_rng(4).uniform(0, 100, 137)
        summary = summarize(scored_manifest(totals))
        for counts in summary.class_counts.values():
            assert sum(counts.values()) == 137

    def test_duplicate_ids_rejected(self):
        records = [
            PaintingRecord(id="x", image_path=Path("x.png"), source="child",
                           width=64, height=64)
            for _ in range(2)
        ]
        with pytest.raises(ManifestError):
            DatasetManifest(records=records)
