"""Metric suite and reporting: Pearson r with Fisher 95% CI, coefficient of
determination, MAPE, per-scheme confusion matrices and accuracies, plus the
predicted-vs-human scatter.

Classification is derived by thresholding the regression total under each
binning scheme; no per-scheme classifiers exist.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import norm

from . import rubric
from .rubric import BinningScheme, scheme_catalog

# Reported accuracies that differ from a supplied reference by at least this
# many percentage points get flagged.
DISCREPANCY_THRESHOLD_PP = 0.5


def pearson_r(pred, actual) -> float:
    """Sample Pearson correlation; both series must be non-constant."""
    x = np.asarray(pred, dtype=float)
    y = np.asarray(actual, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"expected two equal-length 1-D series, got {x.shape} vs {y.shape}")
    sx = x - x.mean()
    sy = y - y.mean()
    denom = np.sqrt((sx ** 2).sum() * (sy ** 2).sum())
    if denom == 0.0:
        raise ValueError("correlation undefined: at least one series is constant")
    return float((sx * sy).sum() / denom)


def pearson_with_ci(pred, actual, alpha: float = 0.05) -> tuple[float, float, float]:
    """Sample Pearson r with the Fisher z-transform confidence interval.

    z = atanh(r); half-width = z_(1-alpha/2) / sqrt(N - 3); bounds are
    tanh(z -/+ half-width). Needs N >= 4 and two non-constant series;
    |r| = 1 makes the transform degenerate and raises.
    """
    x = np.asarray(pred, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected 1-D series, got shape {x.shape}")
    n = len(x)
    if n < 4:
        raise ValueError(f"need at least 4 samples for the Fisher interval, got {n}")
    r = pearson_r(pred, actual)
    if abs(r) >= 1.0:
        raise ValueError(f"correlation is {r:+.0f}: Fisher interval degenerate")
    z = np.arctanh(r)
    half = norm.ppf(1 - alpha / 2) / np.sqrt(n - 3)
    return r, float(np.tanh(z - half)), float(np.tanh(z + half))


def r_squared(pred, actual) -> float:
    """Coefficient of determination: 1 - SS_res / SS_tot, SS_tot about the
    mean of the actuals. Can be negative for bad predictors."""
    p = np.asarray(pred, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1:
        raise ValueError(f"expected two equal-length 1-D series, got {p.shape} vs {a.shape}")
    if len(a) < 2:
        raise ValueError("need at least 2 samples")
    ss_tot = float(((a - a.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise ValueError("actuals are constant: R^2 undefined")
    ss_res = float(((p - a) ** 2).sum())
    return 1.0 - ss_res / ss_tot


def mape(pred, actual) -> float:
    """Mean absolute percentage error: mean(|pred - actual| / |actual|) * 100."""
    p = np.asarray(pred, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1:
        raise ValueError(f"expected two equal-length 1-D series, got {p.shape} vs {a.shape}")
    zeros = np.nonzero(a == 0.0)[0]
    if zeros.size:
        raise ValueError(f"actual value is 0 at index {zeros[0]}: MAPE undefined")
    return float(np.mean(np.abs(p - a) / np.abs(a)) * 100.0)


@dataclass(frozen=True)
class ConfusionMatrix:
    scheme_name: str
    labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]  # rows = actual class, cols = predicted

    @property
    def n(self) -> int:
        return int(sum(sum(row) for row in self.counts))

    @property
    def trace(self) -> int:
        return int(sum(self.counts[i][i] for i in range(len(self.labels))))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=int)


def confusion(pred_scores, actual_scores, scheme: BinningScheme) -> ConfusionMatrix:
    """Cell (i, j) counts items with actual class i and predicted class j."""
    p = np.asarray(pred_scores, dtype=float)
    a = np.asarray(actual_scores, dtype=float)
    if p.shape != a.shape or p.ndim != 1:
        raise ValueError(f"expected two equal-length 1-D score lists, got {p.shape} vs {a.shape}")
    size = len(scheme.classes)
    counts = np.zeros((size, size), dtype=int)
    for pv, av in zip(p, a):
        counts[rubric.class_index(av, scheme), rubric.class_index(pv, scheme)] += 1
    return ConfusionMatrix(
        scheme_name=scheme.name,
        labels=scheme.labels,
        counts=tuple(tuple(int(v) for v in row) for row in counts),
    )


def accuracy(matrix: ConfusionMatrix) -> float:
    """100 * trace / total over the matrix cells."""
    total = matrix.n
    if total == 0:
        raise ValueError("empty confusion matrix")
    return 100.0 * matrix.trace / total


@dataclass(frozen=True)
class SchemeResult:
    matrix: ConfusionMatrix
    accuracy_percent: float
    misclassified: int
    reference_accuracy_percent: float | None = None
    discrepancy_flag: bool = False


@dataclass
class EvaluationReport:
    n: int
    pearson_r: float
    ci95: tuple[float, float]
    r_squared: float
    mape_percent: float
    per_scheme: dict[str, SchemeResult] = field(default_factory=dict)
    average_accuracy_percent: float = 0.0
    scatter: list[tuple[float, float]] = field(default_factory=list)  # (human, predicted)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "pearson_r": self.pearson_r,
            "ci95": list(self.ci95),
            "r_squared": self.r_squared,
            "mape_percent": self.mape_percent,
            "per_scheme": {
                name: {
                    "labels": list(res.matrix.labels),
                    "confusion": [list(row) for row in res.matrix.counts],
                    "accuracy_percent": res.accuracy_percent,
                    "misclassified": res.misclassified,
                    "reference_accuracy_percent": res.reference_accuracy_percent,
                    "discrepancy_flag": res.discrepancy_flag,
                }
                for name, res in self.per_scheme.items()
            },
            "average_accuracy_percent": self.average_accuracy_percent,
            "scatter": [list(pair) for pair in self.scatter],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "EvaluationReport":
        per_scheme = {}
        for name, res in data["per_scheme"].items():
            matrix = ConfusionMatrix(
                scheme_name=name,
                labels=tuple(res["labels"]),
                counts=tuple(tuple(int(v) for v in row) for row in res["confusion"]),
            )
            per_scheme[name] = SchemeResult(
                matrix=matrix,
                accuracy_percent=res["accuracy_percent"],
                misclassified=res["misclassified"],
                reference_accuracy_percent=res.get("reference_accuracy_percent"),
                discrepancy_flag=res.get("discrepancy_flag", False),
            )
        return cls(
            n=data["n"],
            pearson_r=data["pearson_r"],
            ci95=tuple(data["ci95"]),
            r_squared=data["r_squared"],
            mape_percent=data["mape_percent"],
            per_scheme=per_scheme,
            average_accuracy_percent=data["average_accuracy_percent"],
            scatter=[tuple(pair) for pair in data["scatter"]],
        )


def evaluate_scores(
    predicted_totals,
    actual_totals,
    schemes: dict[str, BinningScheme] | None = None,
    reference_accuracies: dict[str, float] | None = None,
) -> EvaluationReport:
    """All metrics for one prediction series against consensus ground truth.

    Predicted totals are clamped into [0, 100] for binning (raw values feed
    the regression metrics). ``reference_accuracies`` attaches externally
    stated accuracies per scheme and flags recomputed values that differ by
    at least 0.5 percentage points.
    """
    pred = np.asarray(predicted_totals, dtype=float)
    actual = np.asarray(actual_totals, dtype=float)
    if pred.shape != actual.shape or pred.ndim != 1:
        raise ValueError("predicted and actual score lists must be equal-length 1-D")
    schemes = schemes or scheme_catalog()
    reference_accuracies = reference_accuracies or {}

    r, lo, hi = pearson_with_ci(pred, actual)
    clamped = np.clip(pred, 0.0, 100.0)
    per_scheme = {}
    for name, scheme in schemes.items():
        matrix = confusion(clamped, actual, scheme)
        acc = accuracy(matrix)
        reference = reference_accuracies.get(name)
        per_scheme[name] = SchemeResult(
            matrix=matrix,
            accuracy_percent=acc,
            misclassified=matrix.n - matrix.trace,
            reference_accuracy_percent=reference,
            discrepancy_flag=(
                reference is not None
                and abs(acc - reference) >= DISCREPANCY_THRESHOLD_PP
            ),
        )
    return EvaluationReport(
        n=len(pred),
        pearson_r=r,
        ci95=(lo, hi),
        r_squared=r_squared(pred, actual),
        mape_percent=mape(pred, actual),
        per_scheme=per_scheme,
        average_accuracy_percent=float(
            np.mean([res.accuracy_percent for res in per_scheme.values()])
        ),
        scatter=[(float(a), float(p)) for a, p in zip(actual, pred)],
    )


def evaluate_model(model, records, preprocess_config) -> EvaluationReport:
    """Predict every record with the model, then score against consensus."""
    from . import model as model_mod
    from . import preprocess as pp
    from PIL import Image

    missing = [r.id for r in records if r.consensus_total is None]
    if missing:
        raise ValueError(f"missing ground truth for test items: {missing[:5]}"
                         + ("..." if len(missing) > 5 else ""))
    batch = []
    for record in records:
        with Image.open(record.image_path) as img:
            rgb = np.asarray(img.convert("RGB"))
        batch.append(pp.pipeline(rgb, preprocess_config))
    vectors = model_mod.predict(model, np.stack(batch))
    predicted = [v.clamped_total for v in vectors]
    actual = [r.consensus_total for r in records]
    return evaluate_scores(predicted, actual)


def write_scatter_png(report: EvaluationReport, path: str | Path) -> Path:
    """Predicted-vs-human scatter, both axes 0-100."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    human = [pair[0] for pair in report.scatter]
    predicted = [pair[1] for pair in report.scatter]
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.scatter(human, predicted, s=18, alpha=0.7, edgecolors="none")
    ax.plot([0, 100], [0, 100], linewidth=1, color="gray", linestyle="--")
    ax.set_xlabel("human rating")
    ax.set_ylabel("model score")
    ax.set_xlim(0, 100)
    ax.set_ylim(0, 100)
    ax.set_title(f"model vs human (r = {report.pearson_r:.3f}, n = {report.n})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_report_json(report: EvaluationReport, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2)
        fh.write("\n")
    return path


def _matrix_markdown(result: SchemeResult) -> list[str]:
    labels = result.matrix.labels
    lines = ["| Actual \\ Predicted | " + " | ".join(labels) + " |"]
    lines.append("|" + "---|" * (len(labels) + 1))
    for label, row in zip(labels, result.matrix.counts):
        lines.append(f"| {label} | " + " | ".join(str(v) for v in row) + " |")
    return lines


def write_report_markdown(report: EvaluationReport, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        "# Evaluation report",
        "",
        f"- n = {report.n}",
        f"- Pearson r = {report.pearson_r:.4f}, 95% CI [{report.ci95[0]:.4f}, {report.ci95[1]:.4f}]",
        f"- R^2 = {report.r_squared:.4f}",
        f"- MAPE = {report.mape_percent:.2f}%",
        f"- average accuracy over schemes = {report.average_accuracy_percent:.2f}%",
        "",
    ]
    for name, result in report.per_scheme.items():
        lines.append(f"## {name} — accuracy {result.accuracy_percent:.2f}% "
                     f"({result.misclassified} misclassified)")
        if result.reference_accuracy_percent is not None:
            flag = " **MISMATCH**" if result.discrepancy_flag else ""
            lines.append(f"reference accuracy {result.reference_accuracy_percent:.2f}%{flag}")
        lines.append("")
        lines.extend(_matrix_markdown(result))
        lines.append("")
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
    return path
