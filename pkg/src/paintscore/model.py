"""The scoring network: a convolutional feature backbone with a 5-output
linear regression head.

Two interchangeable variants:

* ``pretrained_b1`` — the published EfficientNet-B1 topology (torchvision)
  initialized from its published ImageNet weights, classifier replaced by a
  single Linear(1280 -> 5). Weights must be available locally or fetchable;
  the build never falls back to random initialization.
* ``mini`` — a small from-scratch backbone for desk-scale verification:
  3x3 stride-2 stem (3 -> 16) -> three inverted-residual blocks (expansion 4,
  depthwise 3x3, strides 2/2/1, channels 16 -> 24 -> 40 -> 40) -> global
  average pool -> Linear(40 -> 64) + SiLU -> Linear(64 -> 5).

Outputs are raw linear scores, one per rubric component; clamping to [0, 20]
per component happens only at reporting time (ScoreVector).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

from .rubric import COMPONENT_NAMES

CHECKPOINT_FORMAT_VERSION = 1

BACKBONES = ("pretrained_b1", "mini")
_B1_WEIGHT_FILE = "efficientnet_b1_rwightman-bac287d4.pth"


class PretrainedWeightsUnavailable(RuntimeError):
    """Published backbone weights are neither cached nor fetchable."""


class CheckpointError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    backbone: str
    input_side: int
    head_outputs: int = 5
    freeze_backbone: bool = False
    feature_dim: int = 0

    def __post_init__(self) -> None:
        if self.backbone not in BACKBONES:
            raise ValueError(f"backbone must be one of {BACKBONES}, got {self.backbone!r}")
        if self.head_outputs != 5:
            raise ValueError("head_outputs is fixed at 5 (one per rubric component)")
        expected_dim = 1280 if self.backbone == "pretrained_b1" else 64
        if self.feature_dim == 0:
            object.__setattr__(self, "feature_dim", expected_dim)
        elif self.feature_dim != expected_dim:
            raise ValueError(
                f"feature_dim for {self.backbone} is {expected_dim}, got {self.feature_dim}"
            )

    @classmethod
    def mini(cls, freeze_backbone: bool = False) -> "ModelConfig":
        return cls(backbone="mini", input_side=72, freeze_backbone=freeze_backbone)

    @classmethod
    def pretrained_b1(cls, freeze_backbone: bool = False) -> "ModelConfig":
        return cls(backbone="pretrained_b1", input_side=720, freeze_backbone=freeze_backbone)


@dataclass(frozen=True)
class ScoreVector:
    """Model output for one painting: five raw component scores.

    ``clamped_*`` views restrict components to [0, 20] (hence the total to
    [0, 100]) for reporting and binning; the raw values stay available.
    """

    components: tuple[float, float, float, float, float]

    @property
    def total(self) -> float:
        return float(sum(self.components))

    @property
    def clamped_components(self) -> tuple[float, ...]:
        return tuple(min(20.0, max(0.0, c)) for c in self.components)

    @property
    def clamped_total(self) -> float:
        return float(sum(self.clamped_components))

    def as_dict(self) -> dict:
        return {
            **dict(zip(COMPONENT_NAMES, self.components)),
            "total": self.total,
            "clamped_total": self.clamped_total,
        }


class _InvertedResidual(nn.Module):
    def __init__(self, cin: int, cout: int, stride: int, expand: int = 4):
        super().__init__()
        mid = cin * expand
        self.use_residual = stride == 1 and cin == cout
        self.block = nn.Sequential(
            nn.Conv2d(cin, mid, 1, bias=False),
            nn.BatchNorm2d(mid),
            nn.SiLU(),
            nn.Conv2d(mid, mid, 3, stride, 1, groups=mid, bias=False),
            nn.BatchNorm2d(mid),
            nn.SiLU(),
            nn.Conv2d(mid, cout, 1, bias=False),
            nn.BatchNorm2d(cout),
        )

    def forward(self, x):
        out = self.block(x)
        return x + out if self.use_residual else out


class _MiniBackbone(nn.Module):
    def __init__(self):
        super().__init__()
        self.stem = nn.Sequential(
            nn.Conv2d(3, 16, 3, 2, 1, bias=False), nn.BatchNorm2d(16), nn.SiLU()
        )
        self.blocks = nn.Sequential(
            _InvertedResidual(16, 24, stride=2),
            _InvertedResidual(24, 40, stride=2),
            _InvertedResidual(40, 40, stride=1),
        )
        self.pool = nn.AdaptiveAvgPool2d(1)

    def forward(self, x):
        return self.pool(self.blocks(self.stem(x))).flatten(1)


class ScoringModel(nn.Module):
    """Backbone + regression head; ``config`` travels with the module."""

    def __init__(self, config: ModelConfig, backbone: nn.Module, head: nn.Module):
        super().__init__()
        self.config = config
        self.backbone = backbone
        self.head = head
        if config.freeze_backbone:
            for p in self.backbone.parameters():
                p.requires_grad_(False)

    def train(self, mode: bool = True):
        super().train(mode)
        if self.config.freeze_backbone:
            # keep normalization statistics frozen along with the weights
            self.backbone.eval()
        return self

    def forward(self, x):
        return self.head(self.backbone(x))


class _B1Features(nn.Module):
    def __init__(self, net):
        super().__init__()
        self.features = net.features
        self.avgpool = net.avgpool

    def forward(self, x):
        return self.avgpool(self.features(x)).flatten(1)


def _build_pretrained_b1(config: ModelConfig) -> ScoringModel:
    from torchvision import models

    weights = models.EfficientNet_B1_Weights.IMAGENET1K_V1
    try:
        net = models.efficientnet_b1(weights=weights)
    except Exception as exc:
        hub_dir = Path(torch.hub.get_dir()) / "checkpoints" / _B1_WEIGHT_FILE
        raise PretrainedWeightsUnavailable(
            f"published EfficientNet-B1 weights are required but unavailable: "
            f"expected artifact {_B1_WEIGHT_FILE} in {hub_dir.parent} "
            f"(or a working download from {weights.url}); refusing to fall "
            f"back to random initialization ({exc})"
        ) from exc
    head = nn.Linear(config.feature_dim, config.head_outputs)
    return ScoringModel(config, _B1Features(net), head)


def _build_mini(config: ModelConfig) -> ScoringModel:
    backbone = _MiniBackbone()
    head = nn.Sequential(
        nn.Linear(40, config.feature_dim),
        nn.SiLU(),
        nn.Linear(config.feature_dim, config.head_outputs),
    )
    return ScoringModel(config, backbone, head)


def build(config: ModelConfig, init_seed: int = 0) -> ScoringModel:
    """Construct the network; deterministic initial weights given a seed."""
    torch.manual_seed(init_seed)
    if config.backbone == "pretrained_b1":
        return _build_pretrained_b1(config)
    return _build_mini(config)


def _build_topology(config: ModelConfig) -> ScoringModel:
    # topology only, for checkpoint loading: every parameter is overwritten
    # by the checkpoint state, so no published weights are needed here
    if config.backbone == "pretrained_b1":
        from torchvision import models

        net = models.efficientnet_b1(weights=None)
        head = nn.Linear(config.feature_dim, config.head_outputs)
        return ScoringModel(config, _B1Features(net), head)
    return _build_mini(config)


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def predict(model: ScoringModel, batch) -> list[ScoreVector]:
    """Score a batch of preprocessed arrays; deterministic in inference mode."""
    tensor = torch.as_tensor(np.asarray(batch), dtype=torch.float32)
    if tensor.ndim != 4 or tensor.shape[1] != 3:
        raise ValueError(f"expected (N, 3, S, S) batch, got shape {tuple(tensor.shape)}")
    side = model.config.input_side
    if tensor.shape[2] != side or tensor.shape[3] != side:
        raise ValueError(
            f"batch spatial size {tensor.shape[2]}x{tensor.shape[3]} does not "
            f"match config.input_side={side}"
        )
    model.eval()
    with torch.no_grad():
        out = model(tensor)
    return [ScoreVector(tuple(float(v) for v in row)) for row in out]


@dataclass
class TrainingMeta:
    epochs_completed: int = 0
    final_loss: float | None = None
    seed: int | None = None
    created_at: str = ""


@dataclass(frozen=True)
class Checkpoint:
    weights_path: Path
    meta_path: Path
    config: ModelConfig
    training_meta: TrainingMeta = field(default_factory=TrainingMeta)


def _paths(path: str | Path) -> tuple[Path, Path]:
    base = Path(path)
    if base.suffix == ".pt":
        base = base.with_suffix("")
    return base.with_suffix(".pt"), base.with_suffix(".json")


def save(model: ScoringModel, path: str | Path,
         training_meta: TrainingMeta | None = None) -> Checkpoint:
    """Write weight blob (.pt) + sidecar metadata (.json)."""
    weights_path, meta_path = _paths(path)
    weights_path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), weights_path)
    meta = training_meta or TrainingMeta()
    sidecar = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": asdict(model.config),
        "training_meta": asdict(meta),
    }
    with open(meta_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return Checkpoint(weights_path, meta_path, model.config, meta)


def read_meta(path: str | Path) -> dict:
    """Sidecar metadata without touching the weight blob."""
    _, meta_path = _paths(path)
    if not meta_path.exists():
        raise CheckpointError(f"checkpoint metadata not found: {meta_path}")
    with open(meta_path) as fh:
        sidecar = json.load(fh)
    version = sidecar.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint format version {version!r} unsupported "
            f"(want {CHECKPOINT_FORMAT_VERSION})"
        )
    return sidecar


def load(path: str | Path) -> ScoringModel:
    """Rebuild the model from a checkpoint; bit-identical predictions."""
    weights_path, meta_path = _paths(path)
    sidecar = read_meta(path)
    config = ModelConfig(**sidecar["config"])
    model = _build_topology(config)
    if not weights_path.exists():
        raise CheckpointError(f"checkpoint weights not found: {weights_path}")
    try:
        state = torch.load(weights_path, map_location="cpu", weights_only=True)
        model.load_state_dict(state, strict=True)
    except Exception as exc:
        raise CheckpointError(
            f"weights at {weights_path} do not match config {config}: {exc}"
        ) from exc
    model.eval()
    return model
