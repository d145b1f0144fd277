"""Scoring rubric: component scores, quality bands, binning schemes, consensus
and inter-rater agreement.

Five components (originality, color, texture, composition, content) are each
worth 0-20 points; their sum is the 0-100 creativity total. Five named binning
schemes (M1..M5) partition [0, 100] into 2-6 ordered creativity classes.

Everything here is a pure function over immutable inputs and safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

COMPONENT_NAMES = ("originality", "color", "texture", "composition", "content")


@dataclass(frozen=True)
class RubricScore:
    """One rubric judgment: five component scores, each in [0, 20].

    Human raters submit integers; model output is real-valued. Both flow
    through this type unchanged.
    """

    originality: float
    color: float
    texture: float
    composition: float
    content: float

    def __post_init__(self) -> None:
        for name in COMPONENT_NAMES:
            value = getattr(self, name)
            if not np.isfinite(value) or not (0 <= value <= 20):
                raise ValueError(f"component {name}={value!r} outside [0, 20]")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.originality, self.color, self.texture, self.composition, self.content)

    @property
    def total(self) -> float:
        return float(sum(self.as_tuple()))


def total(rubric: RubricScore) -> float:
    """Creativity total: exact sum of the five components, in [0, 100]."""
    return rubric.total


@dataclass(frozen=True)
class QualityBand:
    name: str
    low: int   # inclusive
    high: int  # inclusive


# A component score of 0 falls into Poor (the printed band starts at 1,
# but the 0-20 scale admits 0 and no other band fits).
QUALITY_BANDS = (
    QualityBand("Poor", 0, 5),
    QualityBand("Fair", 6, 10),
    QualityBand("Good", 11, 15),
    QualityBand("Excellent", 16, 20),
)


def band_of(component: float) -> QualityBand:
    """Quality band containing a component score."""
    if not (0 <= component <= 20):
        raise ValueError(f"component score {component!r} outside [0, 20]")
    for band in QUALITY_BANDS:
        if component <= band.high:
            return band
    return QUALITY_BANDS[-1]  # pragma: no cover - unreachable given the guard


@dataclass(frozen=True)
class Rating:
    """One rater's rubric judgment of one painting."""

    painting_id: str
    rater_id: str
    rubric: RubricScore
    timestamp: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc)
    )


@dataclass(frozen=True)
class BinClass:
    """One creativity class: label + half-open interval [low, high).

    The last class of a scheme is closed at 100 (``closed_end``).
    """

    label: str
    low: float
    high: float
    closed_end: bool = False

    def contains(self, score: float) -> bool:
        if self.closed_end:
            return self.low <= score <= self.high
        return self.low <= score < self.high


@dataclass(frozen=True)
class BinningScheme:
    """Named ordered partition of [0, 100] into creativity classes."""

    name: str
    classes: tuple[BinClass, ...]

    def __post_init__(self) -> None:
        if not self.classes:
            raise ValueError("scheme must have at least one class")
        if self.classes[0].low != 0 or self.classes[-1].high != 100:
            raise ValueError(f"scheme {self.name} does not cover [0, 100]")
        if not self.classes[-1].closed_end:
            raise ValueError(f"scheme {self.name} last class must be closed at 100")
        for left, right in zip(self.classes, self.classes[1:]):
            if left.high != right.low:
                raise ValueError(
                    f"scheme {self.name}: gap or overlap between "
                    f"{left.label} and {right.label}"
                )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.classes)


def _scheme(name: str, *edges_and_labels: tuple[str, float, float]) -> BinningScheme:
    classes = [
        BinClass(label, low, high, closed_end=(i == len(edges_and_labels) - 1))
        for i, (label, low, high) in enumerate(edges_and_labels)
    ]
    return BinningScheme(name, tuple(classes))


# Boundary semantics: the half-open interval notation of the five/six-class
# summaries is the single source of truth; thresholds 16/36/58/72/90 are shared
# across schemes.
_SCHEMES = (
    _scheme("M1", ("Low", 0, 58), ("High", 58, 100)),
    _scheme("M2", ("Low", 0, 36), ("Medium", 36, 58), ("High", 58, 100)),
    _scheme(
        "M3",
        ("Low", 0, 36), ("Medium", 36, 58), ("MediumHigh", 58, 72), ("High", 72, 100),
    ),
    _scheme(
        "M4",
        ("VeryLow", 0, 16), ("Low", 16, 36), ("Medium", 36, 58),
        ("MediumHigh", 58, 72), ("High", 72, 100),
    ),
    _scheme(
        "M5",
        ("VeryLow", 0, 16), ("Low", 16, 36), ("Medium", 36, 58),
        ("MediumHigh", 58, 72), ("High", 72, 90), ("VeryHigh", 90, 100),
    ),
)


def scheme_catalog() -> dict[str, BinningScheme]:
    """The five binning schemes M1..M5, in order."""
    return {s.name: s for s in _SCHEMES}


def bin_score(score: float, scheme: BinningScheme) -> str:
    """Label of the unique scheme class containing ``score``."""
    if not np.isfinite(score) or not (0 <= score <= 100):
        raise ValueError(f"score {score!r} outside [0, 100]")
    for cls in scheme.classes:
        if cls.contains(score):
            return cls.label
    raise AssertionError(  # pragma: no cover - partition property guarantees a hit
        f"no class of {scheme.name} contains {score}"
    )


def class_index(score: float, scheme: BinningScheme) -> int:
    """Index of the class containing ``score`` within the scheme's order."""
    label = bin_score(score, scheme)
    return scheme.labels.index(label)


@dataclass(frozen=True)
class Consensus:
    """Mean of the raters' judgments for one painting."""

    total: float
    components: RubricScore
    n_raters: int


def consensus(ratings: list[Rating]) -> Consensus:
    """Consensus score for one painting: arithmetic mean of rating totals,
    plus per-component means.

    Resubmissions (same rater) collapse latest-timestamp-wins before averaging.
    """
    if not ratings:
        raise ValueError("consensus requires at least one rating")
    painting_ids = {r.painting_id for r in ratings}
    if len(painting_ids) > 1:
        raise ValueError(f"ratings span multiple paintings: {sorted(painting_ids)}")
    latest: dict[str, Rating] = {}
    for r in ratings:
        kept = latest.get(r.rater_id)
        if kept is None or r.timestamp >= kept.timestamp:
            latest[r.rater_id] = r
    rows = np.array([r.rubric.as_tuple() for r in latest.values()], dtype=float)
    means = rows.mean(axis=0)
    components = RubricScore(*means)
    return Consensus(total=float(means.sum()), components=components, n_raters=len(latest))


def icc(table) -> float:
    """Intraclass correlation ICC(2,1): two-way random effects, absolute
    agreement, single measure.

    ``table`` is n paintings x 2 raters of creativity totals. From the two-way
    ANOVA decomposition with n rows and k columns:

        MSR = k * var(row means)        (between-paintings mean square)
        MSC = n * var(column means)     (between-raters mean square)
        MSE = (SS_total - SS_rows - SS_cols) / ((n-1)(k-1))

        ICC(2,1) = (MSR - MSE) / (MSR + (k-1) MSE + k (MSC - MSE) / n)

    The coefficient is at most 1 and can be negative.
    """
    m = np.asarray(table, dtype=float)
    if m.ndim != 2 or m.shape[1] != 2:
        raise ValueError(f"expected an n x 2 table, got shape {m.shape}")
    n, k = m.shape
    if n < 3:
        raise ValueError(f"need at least 3 paintings, got {n}")
    grand = m.mean()
    ss_total = float(((m - grand) ** 2).sum())
    if ss_total == 0.0:
        raise ValueError("degenerate table: zero total variance")
    ss_rows = k * float(((m.mean(axis=1) - grand) ** 2).sum())
    ss_cols = n * float(((m.mean(axis=0) - grand) ** 2).sum())
    ms_rows = ss_rows / (n - 1)
    ms_cols = ss_cols / (k - 1)
    ms_err = (ss_total - ss_rows - ss_cols) / ((n - 1) * (k - 1))
    denom = ms_rows + (k - 1) * ms_err + k * (ms_cols - ms_err) / n
    if denom == 0.0:
        raise ValueError("degenerate table: zero denominator in ICC")
    return float((ms_rows - ms_err) / denom)
