"""Manifest-driven dataset ingestion, validation, split, and summaries.

A manifest is a CSV (or JSON array) with one row per (painting, rater):

    id,image_path,source,originality,color,texture,composition,content,rater_id,timestamp

Rows sharing an id describe the same painting rated by different raters; rows
with empty rater fields declare an unrated painting. image_path is resolved
relative to the manifest file. Record order is stable across loads — the
every-kth split depends on it.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from PIL import Image, UnidentifiedImageError

from . import rubric
from .rubric import COMPONENT_NAMES, Consensus, Rating, RubricScore, scheme_catalog

log = logging.getLogger(__name__)

MANIFEST_COLUMNS = [
    "id", "image_path", "source",
    *COMPONENT_NAMES,
    "rater_id", "timestamp",
]

SOURCES = ("child", "artist")
SPLITS = ("train", "test", "unassigned")

MIN_ARTIST_SIDE = 600  # selection rule: artist paintings need >=600x600 pixels


class ManifestError(ValueError):
    """Manifest failed validation; ``errors`` lists every offending row/record."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__(
            f"{len(errors)} manifest error(s):\n" + "\n".join(f"  - {e}" for e in errors)
        )


@dataclass
class PaintingRecord:
    id: str
    image_path: Path
    source: str
    width: int
    height: int
    ratings: list[Rating] = field(default_factory=list)
    consensus_total: float | None = None
    consensus_components: RubricScore | None = None
    split: str = "unassigned"

    def refresh_consensus(self) -> None:
        if self.ratings:
            agg: Consensus = rubric.consensus(self.ratings)
            self.consensus_total = agg.total
            self.consensus_components = agg.components
        else:
            self.consensus_total = None
            self.consensus_components = None


@dataclass
class DatasetManifest:
    records: list[PaintingRecord]
    provenance: str = ""
    ordering_note: str = "records in manifest file order"

    def __post_init__(self) -> None:
        ids = [r.id for r in self.records]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ManifestError([f"duplicate painting id {i!r}" for i in dupes])

    def by_id(self, painting_id: str) -> PaintingRecord:
        for record in self.records:
            if record.id == painting_id:
                return record
        raise KeyError(painting_id)


def _parse_components(row: dict, where: str, errors: list[str]) -> RubricScore | None:
    values = []
    for name in COMPONENT_NAMES:
        raw = row.get(name)
        if raw is None or (isinstance(raw, str) and raw.strip() == ""):
            return None
        try:
            values.append(float(raw))
        except (TypeError, ValueError):
            errors.append(f"{where}: component {name}={raw!r} is not a number")
            return None
    try:
        return RubricScore(*values)
    except ValueError as exc:
        errors.append(f"{where}: {exc}")
        return None


def _parse_timestamp(raw: str, where: str, errors: list[str]) -> datetime | None:
    try:
        return datetime.fromisoformat(raw)
    except ValueError:
        errors.append(f"{where}: bad timestamp {raw!r} (want ISO-8601)")
        return None


def _rows_from_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if list(header) != MANIFEST_COLUMNS:
            raise ManifestError(
                [f"bad CSV header {header!r}; expected {MANIFEST_COLUMNS!r}"]
            )
        return list(reader)


def _rows_from_json(path: Path) -> list[dict]:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ManifestError(["JSON manifest must be an array of rating objects"])
    return [{k: ("" if v is None else v) for k, v in obj.items()} for obj in data]


def load_manifest(path: str | Path, images_root: Path | None = None) -> DatasetManifest:
    """Load and fully validate a manifest; errors are collected, not fail-fast.

    One painting record per distinct id, in first-appearance order; all rating
    rows for an id are merged into the record. Every image must exist and
    decode as PNG or JPEG; artist images below 600x600 are an error, child
    images below that only warn.
    """
    path = Path(path)
    if not path.exists():
        raise ManifestError([f"manifest file not found: {path}"])
    rows = _rows_from_json(path) if path.suffix.lower() == ".json" else _rows_from_csv(path)
    root = images_root if images_root is not None else path.parent

    errors: list[str] = []
    records: dict[str, PaintingRecord] = {}
    first_seen: dict[str, tuple[str, str]] = {}  # id -> (image_path, source) as written
    seen_pairs: set[tuple[str, str]] = set()
    undersized_child: list[str] = []

    for lineno, row in enumerate(rows, start=2):
        where = f"row {lineno}"
        painting_id = (row.get("id") or "").strip()
        if not painting_id:
            errors.append(f"{where}: missing painting id")
            continue
        where = f"row {lineno} (id {painting_id!r})"
        source = (row.get("source") or "").strip()
        image_rel = (row.get("image_path") or "").strip()
        if source not in SOURCES:
            errors.append(f"{where}: source {source!r} not one of {SOURCES}")
            continue
        if not image_rel:
            errors.append(f"{where}: missing image_path")
            continue

        record = records.get(painting_id)
        if record is None:
            image_path = (root / image_rel) if not Path(image_rel).is_absolute() else Path(image_rel)
            width = height = 0
            try:
                with Image.open(image_path) as img:
                    if img.format not in ("PNG", "JPEG"):
                        errors.append(f"{where}: image {image_rel} is {img.format}, want PNG or JPEG")
                    width, height = img.size
            except FileNotFoundError:
                errors.append(f"{where}: image file not found: {image_path}")
            except UnidentifiedImageError:
                errors.append(f"{where}: image {image_path} does not decode")
            if width and height and (width < MIN_ARTIST_SIDE or height < MIN_ARTIST_SIDE):
                if source == "artist":
                    errors.append(
                        f"{where}: image is {width}x{height}, below the "
                        f"{MIN_ARTIST_SIDE}x{MIN_ARTIST_SIDE} minimum for artist paintings"
                    )
                else:
                    undersized_child.append(painting_id)
            record = PaintingRecord(
                id=painting_id, image_path=image_path, source=source,
                width=width, height=height,
            )
            records[painting_id] = record
            first_seen[painting_id] = (image_rel, source)
        else:
            if first_seen[painting_id] != (image_rel, source):
                errors.append(
                    f"{where}: conflicting metadata for id (image_path/source "
                    f"differ from earlier row)"
                )
                continue

        rater_id = (row.get("rater_id") or "").strip()
        raw_ts = (row.get("timestamp") or "").strip()
        components = _parse_components(row, where, errors)
        if not rater_id:
            if components is not None:
                errors.append(f"{where}: component scores present but rater_id empty")
            continue  # unrated painting row
        if (painting_id, rater_id) in seen_pairs:
            errors.append(f"{where}: duplicate (id, rater_id) pair ({painting_id!r}, {rater_id!r})")
            continue
        seen_pairs.add((painting_id, rater_id))
        if components is None:
            errors.append(f"{where}: rater {rater_id!r} row has incomplete component scores")
            continue
        timestamp = _parse_timestamp(raw_ts, where, errors) if raw_ts else None
        if raw_ts and timestamp is None:
            continue
        rating = Rating(
            painting_id=painting_id, rater_id=rater_id, rubric=components,
            **({"timestamp": timestamp} if timestamp is not None else {}),
        )
        record.ratings.append(rating)

    if undersized_child:
        log.warning(
            "%d child image(s) below %dx%d (warning only; first: %s)",
            len(undersized_child), MIN_ARTIST_SIDE, MIN_ARTIST_SIDE,
            ", ".join(undersized_child[:3]),
        )
    if errors:
        raise ManifestError(errors)
    result = list(records.values())
    for record in result:
        record.refresh_consensus()
    return DatasetManifest(records=result, provenance=str(path))


def save_manifest_json(manifest: DatasetManifest, path: str | Path) -> Path:
    """Write the canonical JSON form (one object per rating row; unrated
    paintings keep a single row with empty rater fields). Paths are stored
    relative to the output file where possible."""
    path = Path(path)
    root = path.parent.resolve()
    objects = []
    for record in manifest.records:
        image_path = record.image_path.resolve()
        try:
            rel = str(image_path.relative_to(root))
        except ValueError:
            rel = str(image_path)
        base = {"id": record.id, "image_path": rel, "source": record.source}
        if record.ratings:
            for rating in record.ratings:
                objects.append({
                    **base,
                    **{n: getattr(rating.rubric, n) for n in COMPONENT_NAMES},
                    "rater_id": rating.rater_id,
                    "timestamp": rating.timestamp.isoformat(),
                })
        else:
            objects.append({
                **base,
                **{n: "" for n in COMPONENT_NAMES},
                "rater_id": "", "timestamp": "",
            })
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(objects, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


@dataclass(frozen=True)
class SplitResult:
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    counts_by_source: dict  # source -> {"train": n, "test": n}

    def summary_line(self) -> str:
        return f"{len(self.train_ids)} train / {len(self.test_ids)} test"


def split_every_kth(manifest: DatasetManifest, k: int) -> SplitResult:
    """Deterministic split: records at 0-based positions i with
    (i+1) % k == 0 go to test, all others to train.

    Mutates each record's ``split`` field and reports per-source counts.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if not manifest.records:
        raise ValueError("cannot split an empty manifest")
    if k > len(manifest.records):
        log.warning("k=%d exceeds record count %d: test set is empty",
                    k, len(manifest.records))
    train_ids, test_ids = [], []
    counts = {s: {"train": 0, "test": 0} for s in SOURCES}
    for i, record in enumerate(manifest.records):
        is_test = (i + 1) % k == 0
        record.split = "test" if is_test else "train"
        (test_ids if is_test else train_ids).append(record.id)
        counts[record.source]["test" if is_test else "train"] += 1
    return SplitResult(tuple(train_ids), tuple(test_ids), counts)


@dataclass(frozen=True)
class ManifestSummary:
    n_records: int
    by_source: dict
    by_split: dict
    n_scored: int
    class_counts: dict  # scheme name -> {label: count} over consensus totals

    def lines(self) -> list[str]:
        out = [f"records: {self.n_records}"]
        out.append("by source: " + ", ".join(f"{k}={v}" for k, v in self.by_source.items()))
        out.append("by split: " + ", ".join(f"{k}={v}" for k, v in self.by_split.items()))
        out.append(f"scored (consensus present): {self.n_scored}")
        for scheme, counts in self.class_counts.items():
            out.append(f"{scheme}: " + ", ".join(f"{label}={n}" for label, n in counts.items()))
        return out


def summarize(manifest: DatasetManifest) -> ManifestSummary:
    """Deterministic counts by source, split, and scheme class."""
    by_source = {s: 0 for s in SOURCES}
    by_split = {s: 0 for s in SPLITS}
    for record in manifest.records:
        by_source[record.source] += 1
        by_split[record.split] += 1
    scored = [r for r in manifest.records if r.consensus_total is not None]
    class_counts = {}
    for name, scheme in scheme_catalog().items():
        counts = {label: 0 for label in scheme.labels}
        for record in scored:
            counts[rubric.bin_score(record.consensus_total, scheme)] += 1
        class_counts[name] = counts
    return ManifestSummary(
        n_records=len(manifest.records),
        by_source=by_source,
        by_split=by_split,
        n_scored=len(scored),
        class_counts=class_counts,
    )
