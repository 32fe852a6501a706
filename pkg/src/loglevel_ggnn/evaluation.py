"""Splits, metrics, confusion analysis and report files."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import ConfigError, DataError
from .logs import LEVEL_NAMES, N_LEVELS, LabeledSample

FATAL = N_LEVELS - 1
OMIT_FATAL_BELOW = 0.001

# 7 train, 1 valid, 2 test per ten consecutive samples of a stratum
_CYCLE = ("train", "train", "test", "train", "valid", "train", "train", "test", "train", "train")


# ---- splits -----------------------------------------------------------------

@dataclass(frozen=True)
class SplitPlan:
    seen: tuple[str, ...]
    unseen: tuple[str, ...]
    assignment: tuple[str, ...]  # train | valid | test | unseen | excluded, per sample
    seed: int

    def indices(self, part: str) -> list[int]:
        return [i for i, a in enumerate(self.assignment) if a == part]

    def select(self, samples: Sequence, part: str) -> list:
        if len(samples) != len(self.assignment):
            raise ConfigError("split plan and sample list differ in length")
        return [samples[i] for i in self.indices(part)]

    def counts(self) -> dict[str, int]:
        return {part: self.assignment.count(part) for part in ("train", "valid", "test", "unseen", "excluded")}

    def to_dict(self) -> dict:
        return {"seen": list(self.seen), "unseen": list(self.unseen), "seed": self.seed,
                "assignment": list(self.assignment)}


def make_splits(samples: Sequence[LabeledSample], seen: Optional[Iterable[str]] = None,
                unseen: Iterable[str] = (), seed: int = 0) -> SplitPlan:
    """Label-stratified 7-1-2 split of seen-project samples.

    ``seen=None`` means every project not listed as unseen.  Samples of
    projects in neither list are marked ``excluded``.
    """
    unseen = tuple(sorted(set(unseen)))
    projects = sorted({s.project for s in samples})
    seen = tuple(sorted(set(seen))) if seen is not None else tuple(p for p in projects if p not in unseen)
    both = set(seen) & set(unseen)
    if both:
        raise ConfigError(f"projects listed as both seen and unseen: {sorted(both)}")
    rng = np.random.default_rng(seed)
    assignment = ["excluded"] * len(samples)
    strata: dict[int, list[int]] = {}
    for i, s in enumerate(samples):
        if s.project in unseen:
            assignment[i] = "unseen"
        elif s.project in seen:
            strata.setdefault(-1 if s.label is None else int(s.label), []).append(i)
    position = 0
    for key in sorted(strata):
        members = strata[key]
        for j in rng.permutation(len(members)):
            assignment[members[j]] = _CYCLE[position % len(_CYCLE)]
            position += 1
    return SplitPlan(seen, unseen, tuple(assignment), seed)


# ---- metrics ------------------------------------------------------------------

def _check(preds, labels) -> tuple[np.ndarray, np.ndarray]:
    preds = np.asarray(preds, dtype=float)
    labels = np.asarray(labels)
    if preds.ndim != 2 or preds.shape[1] != N_LEVELS:
        raise DataError(f"predictions must have shape (n, {N_LEVELS}), got {preds.shape}")
    if len(preds) != len(labels):
        raise DataError(f"{len(preds)} predictions but {len(labels)} labels")
    if len(labels) == 0:
        raise DataError("no samples to evaluate")
    labels = labels.astype(np.int64)
    if labels.min() < 0 or labels.max() >= N_LEVELS:
        raise DataError("labels must be level ordinals 0..5")
    return preds, labels


def predicted_levels(preds) -> np.ndarray:
    """Argmax per row; ties go to the least severe level."""
    return np.argmax(np.asarray(preds), axis=1)


def accuracy(preds, labels) -> float:
    preds, labels = _check(preds, labels)
    return float(np.mean(predicted_levels(preds) == labels))


def binary_auc(scores, positive) -> Optional[float]:
    """ROC area via the rank-sum statistic; tied scores earn half credit."""
    scores = np.asarray(scores, dtype=float)
    positive = np.asarray(positive, dtype=bool)
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def per_class_auc(preds, labels) -> dict[str, Optional[float]]:
    preds, labels = _check(preds, labels)
    return {name: binary_auc(preds[:, k], labels == k) for k, name in enumerate(LEVEL_NAMES)}


def macro_auc(preds, labels) -> float:
    """Mean one-vs-rest AUC over classes that have positives and negatives."""
    values = [v for v in per_class_auc(preds, labels).values() if v is not None]
    if not values:
        raise DataError("no class has both positive and negative samples; AUC undefined")
    return float(np.mean(values))


@dataclass(frozen=True)
class Confusion:
    matrix: np.ndarray  # rows true, columns predicted
    adjacent_error_rate: float
    n_misclassified: int

    @property
    def zero_misclassified(self) -> bool:
        return self.n_misclassified == 0


def confusion(preds, labels) -> Confusion:
    preds, labels = _check(preds, labels)
    predicted = predicted_levels(preds)
    matrix = np.zeros((N_LEVELS, N_LEVELS), dtype=np.int64)
    np.add.at(matrix, (labels, predicted), 1)
    wrong = predicted != labels
    n_wrong = int(wrong.sum())
    adjacent = int(np.sum(np.abs(predicted[wrong] - labels[wrong]) == 1))
    rate = adjacent / n_wrong if n_wrong else 0.0
    return Confusion(matrix, rate, n_wrong)


# ---- reports ------------------------------------------------------------------

@dataclass
class EvalReport:
    accuracy: float
    macro_auc: Optional[float]
    per_class_auc: dict
    confusion: np.ndarray
    adjacent_error_rate: float
    n: int
    excluded_classes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_auc": self.macro_auc,
            "per_class_auc": dict(self.per_class_auc),
            "confusion": self.confusion.tolist(),
            "adjacent_error_rate": self.adjacent_error_rate,
            "n": self.n,
            "excluded_classes": list(self.excluded_classes),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())
            fh.write("\n")

    def confusion_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["true\\predicted", *LEVEL_NAMES])
        for name, row in zip(LEVEL_NAMES, self.confusion.tolist()):
            writer.writerow([name, *row])
        return buf.getvalue()

    def write_confusion_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.confusion_csv())

    def omit_fatal(self) -> bool:
        """Whether fatal is rare enough (< 0.1% support) to drop from displays."""
        return self.confusion[FATAL].sum() < OMIT_FATAL_BELOW * max(self.n, 1)

    def confusion_table(self, omit_fatal: Optional[bool] = None) -> str:
        omit = self.omit_fatal() if omit_fatal is None else omit_fatal
        keep = N_LEVELS - 1 if omit else N_LEVELS
        names = LEVEL_NAMES[:keep]
        width = max(7, *(len(str(v)) for v in self.confusion.ravel()))
        lines = [" " * 8 + "".join(f"{n:>{width + 1}}" for n in names)]
        for k in range(keep):
            lines.append(f"{names[k]:<8}" + "".join(f"{v:>{width + 1}}" for v in self.confusion[k, :keep]))
        return "\n".join(lines)

    def summary(self) -> str:
        auc = "n/a" if self.macro_auc is None else f"{self.macro_auc:.3f}"
        return f"n={self.n}  accuracy={self.accuracy:.3f}  macro_auc={auc}  adjacent_errors={self.adjacent_error_rate:.3f}"


def evaluate_predictions(preds, labels) -> EvalReport:
    preds, labels = _check(preds, labels)
    aucs = per_class_auc(preds, labels)
    values = [v for v in aucs.values() if v is not None]
    conf = confusion(preds, labels)
    return EvalReport(
        accuracy=accuracy(preds, labels),
        macro_auc=float(np.mean(values)) if values else None,
        per_class_auc=aucs,
        confusion=conf.matrix,
        adjacent_error_rate=conf.adjacent_error_rate,
        n=len(labels),
        excluded_classes=[k for k, v in aucs.items() if v is None],
    )


def random_predictions(n: int, seed: int = 0) -> np.ndarray:
    """Uniformly random prediction arrays that ignore their input."""
    raw = np.random.default_rng(seed).random((n, N_LEVELS))
    return raw / raw.sum(axis=1, keepdims=True)


def random_baseline(labels, seed: int = 0) -> EvalReport:
    labels = np.asarray(labels)
    return evaluate_predictions(random_predictions(len(labels), seed), labels)


def sample_labels(samples: Sequence[LabeledSample]) -> np.ndarray:
    if any(s.label is None for s in samples):
        raise DataError("evaluation needs labeled samples")
    return np.asarray([int(s.label) for s in samples], dtype=np.int64)


def evaluate(model, samples: Sequence[LabeledSample], report_path=None, confusion_path=None) -> EvalReport:
    """Score ``model`` (anything with ``predict_proba``) on labeled samples."""
    labels = sample_labels(samples)
    report = evaluate_predictions(model.predict_proba(samples), labels)
    if report_path is not None:
        report.write_json(report_path)
    if confusion_path is not None:
        report.write_confusion_csv(confusion_path)
    return report


def format_comparison(rows: dict[str, dict[str, Optional[EvalReport]]]) -> str:
    """Table of AUC/accuracy per model, with seen and unseen columns."""
    header = f"{'model':<24}{'seen AUC':>10}{'seen acc':>10}{'unseen AUC':>12}{'unseen acc':>12}"
    lines = [header, "-" * len(header)]

    def cells(report: Optional[EvalReport], w: int) -> str:
        if report is None:
            return f"{'-':>{w}}" * 2
        auc = "n/a" if report.macro_auc is None else f"{report.macro_auc:.3f}"
        return f"{auc:>{w}}{report.accuracy:>{w}.3f}"

    for name, parts in rows.items():
        seen, unseen = parts.get("seen"), parts.get("unseen")
        lines.append(f"{name:<24}{cells(seen, 10)}{cells(unseen, 12)}")
    return "\n".join(lines)
