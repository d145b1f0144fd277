"""Fine-tuning loop: seeded shuffled minibatches minimizing mean-square loss
over the five component outputs.

There is no validation split and no early stopping; max_epochs is the only
stop. The last partial batch of each epoch is kept, so step counts are exact:
ceil(n / batch_size) steps per epoch.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import torch

from . import model as model_mod
from . import preprocess as pp
from .dataset import PaintingRecord
from .model import Checkpoint, ScoringModel, TrainingMeta

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    """Loss went non-finite; carries the lr and batch id for diagnosis."""


@dataclass(frozen=True)
class Hyperparams:
    batch_size: int = 10
    learning_rate: float = 0.0005
    max_epochs: int = 200
    optimizer: str = "adam"
    seed: int = 0
    eval_every: int = 10

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"optimizer must be adam or sgd, got {self.optimizer!r}")


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    test_loss: float | None
    steps: int
    lr: float
    wall_seconds: float
    checkpoint: str | None = None


@dataclass
class TrainingLog:
    entries: list[EpochLog] = field(default_factory=list)

    @property
    def total_steps(self) -> int:
        return sum(e.steps for e in self.entries)

    def write_jsonl(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            for entry in self.entries:
                fh.write(json.dumps(asdict(entry)) + "\n")
        return path


def mse_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean over all N x 5 squared differences."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: pred {tuple(pred.shape)} vs target {tuple(target.shape)}")
    return ((pred - target) ** 2).mean()


def make_optimizer(model: ScoringModel, hp: Hyperparams) -> torch.optim.Optimizer:
    params = [p for p in model.parameters() if p.requires_grad]
    if hp.optimizer == "adam":
        return torch.optim.Adam(params, lr=hp.learning_rate)
    return torch.optim.SGD(params, lr=hp.learning_rate)


def training_step(
    model: ScoringModel,
    inputs: torch.Tensor,
    targets: torch.Tensor,
    hp: Hyperparams,
    optimizer: torch.optim.Optimizer | None = None,
    batch_id: str = "?",
) -> float:
    """One gradient step; returns the pre-step loss.

    Pass the same optimizer across calls to keep adaptive-moment state; a
    fresh one is created per call otherwise.
    """
    if optimizer is None:
        optimizer = make_optimizer(model, hp)
    model.train()
    optimizer.zero_grad()
    loss = mse_loss(model(inputs), targets)
    value = float(loss.item())
    if not np.isfinite(value):
        raise TrainingDiverged(
            f"non-finite loss at batch {batch_id} (lr={hp.learning_rate})"
        )
    loss.backward()
    optimizer.step()
    return value


def target_vector(record: PaintingRecord) -> np.ndarray:
    """Per-component target; total-only ground truth splits evenly (total/5)."""
    if record.consensus_components is not None:
        return np.asarray(record.consensus_components.as_tuple(), dtype=np.float32)
    if record.consensus_total is not None:
        return np.full(5, record.consensus_total / 5.0, dtype=np.float32)
    raise ValueError(f"record {record.id} has no consensus ground truth")


def _load_standardized(records: list[PaintingRecord], cfg: pp.PreprocessConfig) -> list[np.ndarray]:
    from PIL import Image

    out = []
    for record in records:
        with Image.open(record.image_path) as img:
            rgb = np.asarray(img.convert("RGB"))
        out.append(pp.standardize(rgb, cfg))
    return out


def _assemble_batch(
    images: list[np.ndarray],
    targets: np.ndarray,
    indices: np.ndarray,
    records: list[PaintingRecord],
    cfg: pp.PreprocessConfig,
    epoch: int,
    augment: bool,
) -> tuple[torch.Tensor, torch.Tensor]:
    arrays = []
    for i in indices:
        img = images[i]
        if augment:
            seed = pp.derive_item_seed(cfg.seed, records[i].id, epoch)
            img = pp.augment(img, cfg, seed)
        arrays.append(pp.to_model_input(img, cfg))
    x = torch.from_numpy(np.stack(arrays))
    y = torch.from_numpy(targets[indices])
    return x, y


def evaluate_loss(
    model: ScoringModel,
    images: list[np.ndarray],
    targets: np.ndarray,
    cfg: pp.PreprocessConfig,
    batch_size: int = 32,
) -> float:
    model.eval()
    losses, weights = [], []
    with torch.no_grad():
        for start in range(0, len(images), batch_size):
            chunk = images[start:start + batch_size]
            x = torch.from_numpy(np.stack([pp.to_model_input(im, cfg) for im in chunk]))
            y = torch.from_numpy(targets[start:start + batch_size])
            losses.append(float(mse_loss(model(x), y).item()))
            weights.append(len(chunk))
    return float(np.average(losses, weights=weights))


def train(
    model: ScoringModel,
    train_records: list[PaintingRecord],
    hp: Hyperparams,
    preprocess_config: pp.PreprocessConfig,
    test_records: list[PaintingRecord] | None = None,
    out_dir: str | Path | None = None,
    start_epoch: int = 0,
    augment_train: bool = True,
    augment_test: bool = False,
) -> tuple[Checkpoint | None, TrainingLog]:
    """Run hp.max_epochs epochs of seeded shuffled minibatches.

    Each step: preprocess + augment -> forward -> mse -> gradient step. Flip
    decisions derive from (preprocess seed, item id, epoch), so they are
    reproducible and order-independent; targets never depend on augmentation.
    Writes a checkpoint every hp.eval_every epochs (and at the end) when
    out_dir is given; returns the final checkpoint and the per-epoch log.

    ``start_epoch`` continues the epoch numbering when resuming.
    """
    if not train_records:
        raise ValueError("training set is empty")
    if augment_test:
        log.info("test-set augmentation enabled by flag")

    train_images = _load_standardized(train_records, preprocess_config)
    train_targets = np.stack([target_vector(r) for r in train_records])
    test_images = test_targets = None
    if test_records:
        test_images = _load_standardized(test_records, preprocess_config)
        test_targets = np.stack([target_vector(r) for r in test_records])

    optimizer = make_optimizer(model, hp)
    shuffle_rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(hp.seed, spawn_key=(start_epoch,)))
    )
    out_path = Path(out_dir) if out_dir is not None else None
    training_log = TrainingLog()
    checkpoint = None
    last_loss = float("nan")

    for epoch in range(start_epoch + 1, start_epoch + hp.max_epochs + 1):
        t0 = time.monotonic()
        order = shuffle_rng.permutation(len(train_records))
        step_losses = []
        for start in range(0, len(order), hp.batch_size):
            indices = order[start:start + hp.batch_size]
            x, y = _assemble_batch(
                train_images, train_targets, indices, train_records,
                preprocess_config, epoch, augment_train,
            )
            loss = training_step(
                model, x, y, hp, optimizer,
                batch_id=f"epoch {epoch} step {start // hp.batch_size}",
            )
            step_losses.append(loss)
        last_loss = float(np.mean(step_losses))

        test_loss = None
        is_eval_epoch = epoch % hp.eval_every == 0 or epoch == start_epoch + hp.max_epochs
        if test_images is not None and is_eval_epoch:
            eval_images = test_images
            if augment_test:
                eval_images = [
                    pp.augment(img, preprocess_config,
                               pp.derive_item_seed(preprocess_config.seed, rec.id, epoch))
                    for img, rec in zip(test_images, test_records)
                ]
            test_loss = evaluate_loss(model, eval_images, test_targets, preprocess_config)

        checkpoint_ref = None
        if out_path is not None and is_eval_epoch:
            meta = TrainingMeta(
                epochs_completed=epoch,
                final_loss=last_loss,
                seed=hp.seed,
                created_at=datetime.now(timezone.utc).isoformat(),
            )
            checkpoint = model_mod.save(model, out_path / "checkpoint", meta)
            checkpoint_ref = str(checkpoint.weights_path)

        training_log.entries.append(EpochLog(
            epoch=epoch,
            train_loss=last_loss,
            test_loss=test_loss,
            steps=len(step_losses),
            lr=hp.learning_rate,
            wall_seconds=time.monotonic() - t0,
            checkpoint=checkpoint_ref,
        ))

    return checkpoint, training_log
