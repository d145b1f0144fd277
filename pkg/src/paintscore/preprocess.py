"""Deterministic image standardization and seeded flip augmentation.

Pipeline: center-crop to the short side, bilinear-resize to the target square,
optional horizontal/vertical flips decided by a per-item stream, then scale to
[0, 1] and standardize per channel. Every step is a pure function; identical
(config, item_seed) inputs give bit-identical arrays, so parallel preprocessing
is order-independent.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

# Channel statistics published with the pretrained backbone (external
# convention, configurable); the mini backbone centers on 0.5/0.5.
PRETRAINED_MEANS = (0.485, 0.456, 0.406)
PRETRAINED_STDS = (0.229, 0.224, 0.225)
MINI_MEANS = (0.5, 0.5, 0.5)
MINI_STDS = (0.5, 0.5, 0.5)


@dataclass(frozen=True)
class PreprocessConfig:
    target_side: int = 720
    normalize_means: tuple[float, float, float] = PRETRAINED_MEANS
    normalize_stds: tuple[float, float, float] = PRETRAINED_STDS
    augment_hflip_prob: float = 0.5
    augment_vflip_prob: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.target_side <= 0:
            raise ValueError("target_side must be positive")
        for p in (self.augment_hflip_prob, self.augment_vflip_prob):
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"flip probability {p} outside [0, 1]")

    @classmethod
    def for_backbone(cls, backbone: str, seed: int = 0, **overrides) -> "PreprocessConfig":
        if backbone == "mini":
            defaults = dict(target_side=72, normalize_means=MINI_MEANS,
                            normalize_stds=MINI_STDS)
        elif backbone == "pretrained_b1":
            defaults = dict(target_side=720, normalize_means=PRETRAINED_MEANS,
                            normalize_stds=PRETRAINED_STDS)
        else:
            raise ValueError(f"unknown backbone {backbone!r}")
        defaults.update(overrides)
        return cls(seed=seed, **defaults)


def _check_rgb(image: np.ndarray) -> None:
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected HxWx3 RGB, got shape {image.shape}")


def center_crop_square(image: np.ndarray) -> np.ndarray:
    """Crop the centered SxS window, S = min(W, H); floor offsets on odd gaps."""
    _check_rgb(image)
    h, w = image.shape[:2]
    s = min(h, w)
    top = (h - s) // 2
    left = (w - s) // 2
    return image[top:top + s, left:left + s]


def resize(image: np.ndarray, side: int) -> np.ndarray:
    """Bilinear resize of a square image to side x side.

    Implemented as a separable interpolation with half-pixel centers so the
    result is reproducible bit-for-bit everywhere; same-size calls return an
    identical copy. uint8 in, uint8 out (round-half-up then clip).
    """
    _check_rgb(image)
    h, w = image.shape[:2]
    if h != w:
        raise ValueError(f"resize expects a square image, got {w}x{h}; crop first")
    if side <= 0:
        raise ValueError("side must be positive")
    if h == side:
        return image.copy()

    src = image.astype(np.float64)
    # sample positions of output pixel centers in input coordinates
    pos = (np.arange(side) + 0.5) * (h / side) - 0.5
    pos = np.clip(pos, 0, h - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, h - 1)
    frac = pos - lo

    rows = src[lo] * (1 - frac)[:, None, None] + src[hi] * frac[:, None, None]
    out = rows[:, lo] * (1 - frac)[None, :, None] + rows[:, hi] * frac[None, :, None]
    if image.dtype == np.uint8:
        return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)
    return out.astype(image.dtype)


def derive_item_seed(config_seed: int, item_id: str, epoch: int = 0) -> int:
    """Stable 64-bit stream key for one item (and epoch) of one run."""
    digest = hashlib.blake2b(
        f"{config_seed}:{item_id}:{epoch}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


def augment(image: np.ndarray, config: PreprocessConfig, item_seed: int) -> np.ndarray:
    """Horizontal then vertical flip, independent coins from the item stream."""
    _check_rgb(image)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(item_seed)))
    out = image
    if rng.uniform() < config.augment_hflip_prob:
        out = out[:, ::-1]
    if rng.uniform() < config.augment_vflip_prob:
        out = out[::-1, :]
    return np.ascontiguousarray(out)


def to_model_input(image: np.ndarray, config: PreprocessConfig) -> np.ndarray:
    """8-bit RGB -> float32 (3, H, W): scale to [0,1], standardize per channel."""
    _check_rgb(image)
    if image.dtype != np.uint8:
        raise ValueError(f"expected uint8 input, got {image.dtype}")
    scaled = image.astype(np.float32) / np.float32(255.0)
    means = np.asarray(config.normalize_means, dtype=np.float32)
    stds = np.asarray(config.normalize_stds, dtype=np.float32)
    normalized = (scaled - means) / stds
    return np.ascontiguousarray(normalized.transpose(2, 0, 1))


def standardize(image: np.ndarray, config: PreprocessConfig) -> np.ndarray:
    """Crop + resize to the configured square. No augmentation, no scaling."""
    return resize(center_crop_square(image), config.target_side)


def pipeline(
    image: np.ndarray,
    config: PreprocessConfig,
    item_seed: int | None = None,
    apply_augment: bool = False,
) -> np.ndarray:
    """Full path from decoded RGB to a model-ready array."""
    out = standardize(image, config)
    if apply_augment:
        if item_seed is None:
            raise ValueError("augmentation requires an item_seed")
        out = augment(out, config, item_seed)
    return to_model_input(out, config)
