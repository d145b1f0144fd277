"""Synthetic painting corpus with procedurally derived ground-truth scores.

The real 600-painting corpus cannot be redistributed, so this module draws
random colored shapes on textured backgrounds and scores each image with a
documented, deterministic map from measurable image statistics to the five
rubric components. The map is chosen to exercise every component and to be
learnable by a small CNN; it makes no claim of approximating human judgment.

Score map (all statistics computed from the rendered 8-bit RGB pixels;
"foreground" is the saturation > 0.35 mask, "edges" the pixels whose
luminance-gradient magnitude exceeds 0.08):

  originality  = 20 * min(H_ori / 2.9, 1) * min(edge_frac / 0.06, 1)
                 where H_ori is the Shannon entropy (bits) of the 8-bin
                 gradient-orientation histogram over edge pixels
  color        = 20 * min(H_hue / 2.9, 1) * min(fg_frac / 0.10, 1)
                 where H_hue is the entropy of the 16-bin saturation-weighted
                 hue histogram over foreground pixels
  texture      = 20 * min(edge_frac / 0.18, 1)
  composition  = 20 * (1 - min(d / 0.7, 1)) where d is the foreground-centroid
                 distance from the image center in half-side units
  content      = 20 * min(n_components, 8) / 8 with n_components the count of
                 4-connected foreground regions

Determinism: every image derives its own PCG64 stream from
SeedSequence(seed, spawn_key=(index,)), so identical (count, image_side, seed)
yield bit-identical images and scores on any platform with the same numpy
bit-generator (PCG64 streams are a stability guarantee of numpy).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .rubric import COMPONENT_NAMES, RubricScore

SCORE_FUNCTION_NAME = "shape-statistics-v1"

# Fixed manifest timestamp: regeneration must be byte-identical.
SYNTHETIC_TIMESTAMP = "1970-01-01T00:00:00+00:00"
SYNTHETIC_RATER_ID = "synthetic-oracle"

_FG_SATURATION = 0.35
_EDGE_THRESHOLD = 0.08


@dataclass(frozen=True)
class SyntheticSpec:
    """Generation recipe; equal specs produce bit-identical corpora."""

    count: int
    image_side: int = 72
    seed: int = 0
    score_function: str = SCORE_FUNCTION_NAME

    def __post_init__(self) -> None:
        if self.count <= 0:
            raise ValueError("count must be positive")
        if self.image_side < 8:
            raise ValueError("image_side must be at least 8")
        if self.score_function != SCORE_FUNCTION_NAME:
            raise ValueError(f"unknown score function {self.score_function!r}")


def rgb_to_hsv_arrays(img: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized RGB([0,1] floats) -> (hue, saturation, value) arrays."""
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    mx = img.max(axis=-1)
    mn = img.min(axis=-1)
    diff = mx - mn
    sat = np.where(mx > 0, diff / np.maximum(mx, 1e-12), 0.0)
    hue = np.zeros_like(mx)
    nonzero = diff > 0
    red_max = nonzero & (mx == r)
    green_max = nonzero & (mx == g) & ~red_max
    blue_max = nonzero & ~red_max & ~green_max
    hue[red_max] = ((g - b)[red_max] / diff[red_max]) % 6
    hue[green_max] = (b - r)[green_max] / diff[green_max] + 2
    hue[blue_max] = (r - g)[blue_max] / diff[blue_max] + 4
    return hue / 6.0, sat, mx


def _hsv_to_rgb(h: float, s: float, v: float) -> np.ndarray:
    i = int(np.floor(h * 6.0)) % 6
    f = h * 6.0 - np.floor(h * 6.0)
    p = v * (1 - s)
    q = v * (1 - f * s)
    t = v * (1 - (1 - f) * s)
    table = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)]
    return np.array(table[i])


def _entropy_bits(weights: np.ndarray) -> float:
    total = weights.sum()
    if total <= 0:
        return 0.0
    p = weights / total
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def score_statistics(image: np.ndarray) -> RubricScore:
    """Score an 8-bit RGB image with the documented statistics map.

    This routine is both the generator's labeler and the oracle the tests use:
    re-scoring a decoded PNG must reproduce the stored score exactly.
    """
    if image.dtype != np.uint8 or image.ndim != 3 or image.shape[2] != 3:
        raise ValueError("expected an HxWx3 uint8 RGB image")
    img = image.astype(np.float64) / 255.0
    hue, sat, _ = rgb_to_hsv_arrays(img)
    fg = sat > _FG_SATURATION
    lum = 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]
    gy, gx = np.gradient(lum)
    gmag = np.hypot(gx, gy)
    edges = gmag > _EDGE_THRESHOLD
    edge_frac = float(edges.mean())
    side = image.shape[0]

    color = 0.0
    if fg.any():
        hist, _ = np.histogram(hue[fg], bins=16, range=(0, 1), weights=sat[fg])
        color = 20.0 * min(_entropy_bits(hist) / 2.9, 1.0) * min(fg.mean() / 0.10, 1.0)

    texture = 20.0 * min(edge_frac / 0.18, 1.0)

    composition = 0.0
    if fg.any():
        cy, cx = np.argwhere(fg).mean(axis=0)
        d = float(np.hypot(cx - (side - 1) / 2, cy - (side - 1) / 2)) / (side / 2)
        composition = 20.0 * (1.0 - min(d / 0.7, 1.0))

    originality = 0.0
    if edges.any():
        orientation = np.mod(np.arctan2(gy[edges], gx[edges]), np.pi)
        hist, _ = np.histogram(orientation, bins=8, range=(0, np.pi))
        originality = 20.0 * min(_entropy_bits(hist) / 2.9, 1.0) * min(edge_frac / 0.06, 1.0)

    content = 20.0 * min(int(ndimage.label(fg)[1]), 8) / 8.0

    values = np.clip([originality, color, texture, composition, content], 0.0, 20.0)
    return RubricScore(*(float(v) for v in values))


def draw_painting(rng: np.random.Generator, side: int) -> np.ndarray:
    """Render one synthetic painting: shapes over a noise-textured background.

    Scenes come in two regimes, sparse and busy, so corpus totals are bimodal
    around the Low/High threshold instead of piling up on it. A canvas that
    would render with nothing painted receives one centered disc: zero-total
    paintings are degenerate for percentage-error metrics, so the corpus never
    contains one.
    """
    busy = rng.uniform() < 0.45
    gray = rng.uniform(0.45, 0.8)
    if busy:
        n_shapes = int(rng.integers(9, 15))
        noise_amp = rng.uniform(0.12, 0.25)
        palette = rng.uniform(0, 1, int(rng.integers(4, 9)))
        bias = rng.uniform(0, 0.25)
    else:
        n_shapes = int(rng.integers(0, 5))
        noise_amp = rng.uniform(0.0, 0.10)
        if rng.uniform() < 0.5:
            base = rng.uniform()
            palette = (base + rng.uniform(-0.02, 0.02, 8)) % 1.0
        else:
            palette = rng.uniform(0, 1, int(rng.integers(2, 4)))
        bias = rng.uniform(0, 0.6)

    noise = rng.uniform(-1, 1, (side, side, 1))
    img = np.clip(gray + noise * noise_amp, 0, 1) * np.ones((1, 1, 3))
    yy, xx = np.mgrid[0:side, 0:side]
    painted = False

    for _ in range(n_shapes):
        hue = palette[rng.integers(0, len(palette))]
        color = _hsv_to_rgb(hue, rng.uniform(0.65, 1.0), rng.uniform(0.5, 1.0))
        cx = side / 2 + bias * rng.uniform(-1, 1) * side / 2 + rng.normal(0, side * 0.16)
        cy = side / 2 + bias * rng.uniform(-1, 1) * side / 2 + rng.normal(0, side * 0.16)
        size = rng.uniform(0.06, 0.16) * side
        kind = int(rng.integers(0, 3))
        if kind == 0:  # disc
            mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= size ** 2
        elif kind == 1:  # rotated rectangle
            ang = rng.uniform(0, np.pi)
            dx = (xx - cx) * np.cos(ang) + (yy - cy) * np.sin(ang)
            dy = -(xx - cx) * np.sin(ang) + (yy - cy) * np.cos(ang)
            mask = (np.abs(dx) <= size) & (np.abs(dy) <= size * rng.uniform(0.4, 1.0))
        else:  # rotated triangle
            ang = rng.uniform(0, np.pi)
            dx = (xx - cx) * np.cos(ang) + (yy - cy) * np.sin(ang)
            dy = -(xx - cx) * np.sin(ang) + (yy - cy) * np.cos(ang)
            mask = (dy >= -size / 2) & (np.abs(dx) <= (dy + size / 2) * 0.6) & (dy <= size)
        img[mask] = color
        painted = painted or bool(mask.any())

    if not painted:
        # fixed fallback mark (no extra rng draws: sibling images stay identical)
        center = (side - 1) / 2
        mask = (xx - center) ** 2 + (yy - center) ** 2 <= (0.12 * side) ** 2
        img[mask] = _hsv_to_rgb(float(palette[0]), 0.8, 0.8)

    return (np.clip(img, 0, 1) * 255).round().astype(np.uint8)


def painting_rng(spec: SyntheticSpec, index: int) -> np.random.Generator:
    """Independent, reproducible stream for painting ``index`` of a spec."""
    seq = np.random.SeedSequence(spec.seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(seq))


def generate_synthetic(spec: SyntheticSpec, out_dir: Path):
    """Render ``spec.count`` paintings + manifest CSV under ``out_dir``.

    Layout: images/synth-NNNNN.png and manifest.csv (schema identical to the
    ingest manifest; one rating row per painting from the synthetic oracle).
    Returns the loaded, validated DatasetManifest.

    All records are child-source: the artist tag carries a 600x600 minimum
    resolution rule that desk-scale synthetic sides would violate.
    """
    from . import dataset  # local import: dataset also imports this module

    out_dir = Path(out_dir)
    images_dir = out_dir / "images"
    try:
        images_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {images_dir}: {exc}") from exc

    rows = []
    for index in range(spec.count):
        rng = painting_rng(spec, index)
        image = draw_painting(rng, spec.image_side)
        score = score_statistics(image)
        name = f"synth-{index:05d}.png"
        Image.fromarray(image, mode="RGB").save(images_dir / name, format="PNG")
        rows.append(
            {
                "id": f"synth-{index:05d}",
                "image_path": f"images/{name}",
                "source": "child",
                **{name_: repr(getattr(score, name_)) for name_ in COMPONENT_NAMES},
                "rater_id": SYNTHETIC_RATER_ID,
                "timestamp": SYNTHETIC_TIMESTAMP,
            }
        )

    manifest_path = out_dir / "manifest.csv"
    with open(manifest_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=dataset.MANIFEST_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)

    return dataset.load_manifest(manifest_path)
