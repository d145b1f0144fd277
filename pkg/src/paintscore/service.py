"""HTTP backend for the rater workbench.

Serves paintings and their images, accepts rubric ratings from human raters,
keeps a crash-safe append-only JSON-lines ledger, recomputes a live agreement
snapshot, and exposes model-vs-human comparisons.

No authentication: rater_id is a declared string. This is a research tool for
a trusted two-rater workflow; do not expose it beyond localhost.

Endpoints (all JSON unless noted):
  GET  /paintings?page=&page_size=      paged painting list
  GET  /paintings/{id}                  one painting with ratings + consensus
  GET  /paintings/{id}/image            raw PNG/JPEG bytes
  POST /paintings/{id}/ratings          submit a rating (integers 0-20)
  GET  /agreement                       live agreement snapshot
  GET  /paintings/{id}/compare?checkpoint=NAME
  GET  /report?checkpoint=NAME          evaluation report over rated paintings
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse, JSONResponse

from . import evaluation, model as model_mod, preprocess as pp, rubric
from .dataset import DatasetManifest
from .rubric import COMPONENT_NAMES, Rating, RubricScore


class RatingLedger:
    """Append-only JSON-lines store of ratings with latest-wins indexing.

    Appends are serialized through one lock and flushed per line, so
    concurrent submissions never interleave within a line and a replay after
    restart reconstructs identical state.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: list[Rating] = []
        self._latest: dict[tuple[str, str], Rating] = {}
        if self.path.exists():
            self._replay()

    def _replay(self) -> None:
        with open(self.path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rating = self._decode(json.loads(line))
                self._entries.append(rating)
                self._latest[(rating.painting_id, rating.rater_id)] = rating

    @staticmethod
    def _decode(obj: dict) -> Rating:
        rubric_score = RubricScore(*(float(obj[name]) for name in COMPONENT_NAMES))
        return Rating(
            painting_id=obj["painting_id"],
            rater_id=obj["rater_id"],
            rubric=rubric_score,
            timestamp=datetime.fromisoformat(obj["timestamp"]),
        )

    @staticmethod
    def _encode(rating: Rating) -> str:
        return json.dumps({
            "painting_id": rating.painting_id,
            "rater_id": rating.rater_id,
            **{name: getattr(rating.rubric, name) for name in COMPONENT_NAMES},
            "timestamp": rating.timestamp.isoformat(),
        })

    def append(self, rating: Rating) -> None:
        line = self._encode(rating)
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a") as fh:
                fh.write(line + "\n")
                fh.flush()
            self._entries.append(rating)
            self._latest[(rating.painting_id, rating.rater_id)] = rating

    def __len__(self) -> int:
        return len(self._entries)

    def latest_ratings(self) -> dict[tuple[str, str], Rating]:
        with self._lock:
            return dict(self._latest)

    def ratings_for(self, painting_id: str) -> list[Rating]:
        with self._lock:
            return [r for (pid, _), r in self._latest.items() if pid == painting_id]


@dataclass(frozen=True)
class AgreementSnapshot:
    n_common: int
    icc: float | None
    rater_ids: tuple[str, ...]
    disagreements: tuple[dict, ...] = field(default_factory=tuple)

    def to_json_dict(self) -> dict:
        return {
            "n_common": self.n_common,
            "icc": self.icc,
            "rater_ids": list(self.rater_ids),
            "disagreements": [dict(d) for d in self.disagreements],
        }


def compute_snapshot(ledger: RatingLedger) -> AgreementSnapshot:
    """Agreement over the two most prolific raters (ties lexicographic).

    ICC(2,1) over paintings both have rated; present only with at least 3
    common paintings and a non-degenerate table. Disagreement list is sorted
    by absolute total difference, descending.
    """
    latest = ledger.latest_ratings()
    by_rater: dict[str, dict[str, Rating]] = {}
    for (painting_id, rater_id), rating in latest.items():
        by_rater.setdefault(rater_id, {})[painting_id] = rating
    if len(by_rater) < 2:
        return AgreementSnapshot(n_common=0, icc=None, rater_ids=tuple(sorted(by_rater)))

    ranked = sorted(by_rater.items(), key=lambda item: (-len(item[1]), item[0]))
    (rater_a, ratings_a), (rater_b, ratings_b) = ranked[0], ranked[1]
    common = sorted(set(ratings_a) & set(ratings_b))
    disagreements = sorted(
        (
            {
                "painting_id": pid,
                "delta_total": abs(ratings_a[pid].rubric.total - ratings_b[pid].rubric.total),
            }
            for pid in common
        ),
        key=lambda d: (-d["delta_total"], d["painting_id"]),
    )
    coefficient = None
    if len(common) >= 3:
        table = np.array([
            [ratings_a[pid].rubric.total, ratings_b[pid].rubric.total] for pid in common
        ])
        try:
            coefficient = rubric.icc(table)
        except ValueError:
            coefficient = None  # degenerate table: agreement undefined, not an error
    return AgreementSnapshot(
        n_common=len(common),
        icc=coefficient,
        rater_ids=(rater_a, rater_b),
        disagreements=tuple(disagreements),
    )


def _painting_json(record, ledger: RatingLedger) -> dict:
    ratings = ledger.ratings_for(record.id)
    consensus_obj = rubric.consensus(ratings) if ratings else None
    return {
        "id": record.id,
        "source": record.source,
        "width": record.width,
        "height": record.height,
        "split": record.split,
        "ratings": [
            {
                "rater_id": r.rater_id,
                **{name: getattr(r.rubric, name) for name in COMPONENT_NAMES},
                "total": r.rubric.total,
                "timestamp": r.timestamp.isoformat(),
            }
            for r in sorted(ratings, key=lambda r: r.rater_id)
        ],
        "consensus_total": consensus_obj.total if consensus_obj else None,
        "consensus_components": (
            dict(zip(COMPONENT_NAMES, consensus_obj.components.as_tuple()))
            if consensus_obj else None
        ),
    }


def create_app(
    manifest: DatasetManifest,
    ledger_path: str | Path,
    checkpoint_dir: str | Path | None = None,
    ui_dir: str | Path | None = None,
):
    """Build the FastAPI application around a manifest and a ledger file.

    Ratings already in the manifest seed the ledger on first start, so the
    workbench can continue a partially rated corpus.
    """
    ledger_path = Path(ledger_path)
    fresh_ledger = not ledger_path.exists()
    ledger = RatingLedger(ledger_path)
    if fresh_ledger:
        for record in manifest.records:
            for rating in record.ratings:
                ledger.append(rating)

    checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else None
    app = FastAPI(title="paintscore rater workbench")
    state = {"snapshot": compute_snapshot(ledger)}
    snapshot_lock = threading.Lock()
    model_cache: dict[str, object] = {}

    def _record_or_404(painting_id: str):
        try:
            return manifest.by_id(painting_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown painting {painting_id!r}")

    def _load_checkpoint(name: str):
        if checkpoint_dir is None:
            raise HTTPException(
                status_code=409,
                detail="no checkpoint directory configured; train a model first",
            )
        base = checkpoint_dir / name
        if not base.with_suffix(".json").exists():
            raise HTTPException(
                status_code=409,
                detail=f"checkpoint {name!r} not found in {checkpoint_dir}; train a model first",
            )
        if name not in model_cache:
            model_cache[name] = model_mod.load(base)
        return model_cache[name]

    def _predict_one(scoring_model, record) -> model_mod.ScoreVector:
        from PIL import Image

        config = pp.PreprocessConfig.for_backbone(scoring_model.config.backbone)
        with Image.open(record.image_path) as img:
            rgb = np.asarray(img.convert("RGB"))
        batch = np.stack([pp.pipeline(rgb, config)])
        return model_mod.predict(scoring_model, batch)[0]

    @app.get("/paintings")
    def list_paintings(page: int = 1, page_size: int = 50):
        if page < 1 or page_size < 1:
            raise HTTPException(status_code=422, detail="page and page_size must be >= 1")
        start = (page - 1) * page_size
        items = manifest.records[start:start + page_size]
        return {
            "page": page,
            "page_size": page_size,
            "total": len(manifest.records),
            "items": [_painting_json(r, ledger) for r in items],
        }

    @app.get("/paintings/{painting_id}")
    def get_painting(painting_id: str):
        return _painting_json(_record_or_404(painting_id), ledger)

    @app.get("/paintings/{painting_id}/image")
    def get_image(painting_id: str):
        record = _record_or_404(painting_id)
        media = "image/png" if record.image_path.suffix.lower() == ".png" else "image/jpeg"
        return FileResponse(record.image_path, media_type=media)

    @app.post("/paintings/{painting_id}/ratings")
    async def submit_rating(painting_id: str, request: Request):
        record = _record_or_404(painting_id)
        body = await request.json()
        rater_id = str(body.get("rater_id") or "").strip()
        if not rater_id:
            raise HTTPException(status_code=422, detail="rater_id is required")
        values = []
        for name in COMPONENT_NAMES:
            raw = body.get(name)
            if not isinstance(raw, int) or isinstance(raw, bool):
                raise HTTPException(
                    status_code=422,
                    detail=f"component {name} must be an integer, got {raw!r}",
                )
            if not (0 <= raw <= 20):
                raise HTTPException(
                    status_code=422,
                    detail=f"component {name}={raw} outside [0, 20]",
                )
            values.append(raw)
        rating = Rating(
            painting_id=record.id,
            rater_id=rater_id,
            rubric=RubricScore(*values),
            timestamp=datetime.now(timezone.utc),
        )
        ledger.append(rating)
        with snapshot_lock:
            snapshot = compute_snapshot(ledger)
            state["snapshot"] = snapshot
        return {
            "ok": True,
            "painting_id": record.id,
            "rater_id": rater_id,
            "total": rating.rubric.total,
            "agreement": snapshot.to_json_dict(),
        }

    @app.get("/agreement")
    def agreement():
        return state["snapshot"].to_json_dict()

    @app.get("/paintings/{painting_id}/compare")
    def compare(painting_id: str, checkpoint: str):
        record = _record_or_404(painting_id)
        scoring_model = _load_checkpoint(checkpoint)
        vector = _predict_one(scoring_model, record)
        ratings = ledger.ratings_for(record.id)
        consensus_obj = rubric.consensus(ratings) if ratings else None
        deltas = None
        if consensus_obj is not None:
            deltas = {
                name: vector.components[i] - consensus_obj.components.as_tuple()[i]
                for i, name in enumerate(COMPONENT_NAMES)
            }
        return {
            "painting_id": record.id,
            "consensus": (
                {
                    "total": consensus_obj.total,
                    **dict(zip(COMPONENT_NAMES, consensus_obj.components.as_tuple())),
                }
                if consensus_obj else None
            ),
            "model": vector.as_dict(),
            "deltas": deltas,
        }

    @app.get("/report")
    def report(checkpoint: str):
        scoring_model = _load_checkpoint(checkpoint)
        rated = []
        for record in manifest.records:
            ratings = ledger.ratings_for(record.id)
            if ratings:
                rated.append((record, rubric.consensus(ratings).total))
        if len(rated) < 4:
            raise HTTPException(
                status_code=409,
                detail=f"need at least 4 rated paintings for a report, have {len(rated)}",
            )
        predicted = [
            _predict_one(scoring_model, record).clamped_total for record, _ in rated
        ]
        actual = [total for _, total in rated]
        try:
            result = evaluation.evaluate_scores(predicted, actual)
        except ValueError as exc:
            raise HTTPException(status_code=409, detail=f"report undefined: {exc}")
        return JSONResponse(result.to_json_dict())

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="workbench")

    return app
