"""Coverage, interval-size and error statistics for predicted ranges."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dataio import QUALITY_LABELS
from .errors import EmptyTestSet

PREDICTION_HEADER = [
    "image_id", "y_true", "y_hat", "sigma", "lower", "upper", "width", "covered", "quality_label",
]


@dataclass(frozen=True)
class PredictionRecord:
    image_id: str
    y_true: float
    y_hat: float
    sigma: float
    lower: float
    upper: float
    quality_label: str = "unknown"
    width: float = field(init=False)
    covered: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "width", self.upper - self.lower)
        object.__setattr__(self, "covered", bool(self.lower <= self.y_true <= self.upper))

    @classmethod
    def stored(cls, image_id, y_true, y_hat, sigma, lower, upper, width, covered, quality_label):
        """Rebuild a record exactly as serialised (width/covered taken verbatim)."""
        rec = cls(image_id, y_true, y_hat, sigma, lower, upper, quality_label)
        object.__setattr__(rec, "width", width)
        object.__setattr__(rec, "covered", covered)
        return rec


@dataclass(frozen=True)
class SizeBins:
    """Half-open width bins ``(e[i], e[i+1]]``; width 0 falls in the first."""

    edges: tuple[float, ...] = (0.0, 0.1, 0.2, 0.5, 1.0)
    names: tuple[str, ...] = ("very small", "small", "large", "very large")

    def __post_init__(self):
        if len(self.edges) < 2 or any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError(f"bin edges must be strictly increasing, got {self.edges}")
        if len(self.names) != len(self.edges) - 1:
            object.__setattr__(self, "names", tuple(self.label(i) for i in range(len(self.edges) - 1)))

    def __len__(self):
        return len(self.edges) - 1

    def label(self, i: int) -> str:
        return f"({self.edges[i]:g}, {self.edges[i + 1]:g}]"

    def assign(self, widths) -> np.ndarray:
        w = np.asarray(widths, dtype=np.float64)
        idx = np.searchsorted(np.asarray(self.edges[1:-1]), w, side="left")
        return np.clip(idx, 0, len(self) - 1)


DEFAULT_BINS = SizeBins()


def _require(records) -> list[PredictionRecord]:
    records = list(records)
    if not records:
        raise EmptyTestSet("no prediction records")
    return records


def marginal_coverage(records) -> float:
    records = _require(records)
    return sum(r.covered for r in records) / len(records)


def mae(records) -> float:
    records = _require(records)
    # fsum keeps the result independent of record order
    return math.fsum(abs(r.y_true - r.y_hat) for r in records) / len(records)


def conditional_coverage(records, bins: SizeBins = DEFAULT_BINS) -> list[dict]:
    """Coverage within each interval-width bin.

    Empty bins report ``coverage=None`` rather than zero.
    """
    records = _require(records)
    idx = bins.assign([r.width for r in records])
    covered = np.array([r.covered for r in records])
    out = []
    for i in range(len(bins)):
        sel = idx == i
        n = int(sel.sum())
        out.append({
            "bin": bins.label(i),
            "name": bins.names[i],
            "count": n,
            "coverage": float(covered[sel].mean()) if n else None,
        })
    return out


def grouped_coverage(records, bins: SizeBins = DEFAULT_BINS, groups=QUALITY_LABELS) -> dict[str, dict]:
    """Marginal and per-bin coverage for each quality label.

    Every label in ``groups`` appears; labels with no records carry
    ``count=0`` and ``None`` statistics.
    """
    records = _require(records)
    labels = list(groups) + sorted({r.quality_label for r in records} - set(groups))
    out = {}
    for label in labels:
        sub = [r for r in records if r.quality_label == label]
        if sub:
            out[label] = {
                "count": len(sub),
                "marginal_coverage": marginal_coverage(sub),
                "mae": mae(sub),
                "per_bin": conditional_coverage(sub, bins),
            }
        else:
            out[label] = {"count": 0, "marginal_coverage": None, "mae": None, "per_bin": None}
    return out


def width_stats(records) -> dict[str, float]:
    w = np.array([r.width for r in _require(records)])
    q1, median, q3 = np.percentile(w, [25, 50, 75])
    return {
        "mean": math.fsum(w) / w.size,
        "median": float(median),
        "q1": float(q1),
        "q3": float(q3),
        "min": float(w.min()),
        "max": float(w.max()),
    }


@dataclass
class CoverageReport:
    n_test: int
    alpha: float
    marginal_coverage: float
    mae: float
    width_stats: dict
    per_bin: list
    per_quality: dict

    def to_dict(self) -> dict:
        return {
            "n_test": self.n_test,
            "alpha": self.alpha,
            "marginal_coverage": self.marginal_coverage,
            "mae": self.mae,
            "width_stats": self.width_stats,
            "per_bin": self.per_bin,
            "per_quality": self.per_quality,
        }


def build_report(records, alpha: float, bins: SizeBins = DEFAULT_BINS) -> CoverageReport:
    records = _require(records)
    return CoverageReport(
        n_test=len(records),
        alpha=alpha,
        marginal_coverage=marginal_coverage(records),
        mae=mae(records),
        width_stats=width_stats(records),
        per_bin=conditional_coverage(records, bins),
        per_quality=grouped_coverage(records, bins),
    )


def _round_floats(obj, ndigits: int = 6):
    if isinstance(obj, float):
        return round(obj, ndigits)
    if isinstance(obj, dict):
        return {k: _round_floats(v, ndigits) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round_floats(v, ndigits) for v in obj]
    return obj


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def write_predictions(records, path) -> None:
    """CSV of prediction records, floats with 6 decimals."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PREDICTION_HEADER)
        for r in records:
            writer.writerow([
                r.image_id, _fmt(r.y_true), _fmt(r.y_hat), _fmt(r.sigma), _fmt(r.lower),
                _fmt(r.upper), _fmt(r.width), "true" if r.covered else "false", r.quality_label,
            ])


def read_predictions(path) -> list[PredictionRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PREDICTION_HEADER:
            raise ValueError(f"{path}: expected header {','.join(PREDICTION_HEADER)}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(PREDICTION_HEADER) or row[7] not in ("true", "false"):
                raise ValueError(f"{path}:{lineno}: malformed prediction row")
            image_id, *nums, covered, quality = row
            y_true, y_hat, sigma, lower, upper, width = map(float, nums)
            records.append(PredictionRecord.stored(
                image_id, y_true, y_hat, sigma, lower, upper, width, covered == "true", quality,
            ))
    return records


def emit_report(report: CoverageReport, path_json, path_csv=None, records=None) -> None:
    """Write the JSON report and, when given, the per-record CSV.

    Key order is fixed and empty statistics serialise as ``null``.
    """
    with open(path_json, "w", encoding="utf-8") as fh:
        json.dump(_round_floats(report.to_dict()), fh, indent=2)
        fh.write("\n")
    if path_csv is not None:
        if records is None:
            raise ValueError("records are required to write the CSV")
        write_predictions(records, path_csv)
