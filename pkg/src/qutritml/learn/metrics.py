"""Evaluation reports and the conservative entanglement verdict.

Confusion matrices follow the convention rows = predicted class,
columns = true class; per-class accuracy is the diagonal entry divided
by its column sum, i.e. recall of each true class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError
from .pipeline import TASK_REGRESS, PipelineModel, predict, rows_matrix

VERDICT_ENTANGLED = "Entangled"
VERDICT_INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class EvalReport:
    task: str
    labels: tuple[str, ...]
    confusion: np.ndarray          # (C, C) ints, rows=predicted cols=true
    per_class_accuracy: np.ndarray  # (C,) recall per true class
    overall_accuracy: float
    mae: float
    n_test: int


def evaluate(model: PipelineModel, rows) -> EvalReport:
    """Score a fitted pipeline on labeled rows."""
    x, labels, gr = rows_matrix(rows)
    n = x.shape[0]
    pred = predict(model, x)
    if model.task == TASK_REGRESS:
        mae = float(np.mean(np.abs(pred - gr)))
        return EvalReport(task=model.task, labels=(), confusion=np.zeros((0, 0), int),
                          per_class_accuracy=np.zeros(0), overall_accuracy=float("nan"),
                          mae=mae, n_test=n)
    lab = model.labels
    code = {l: i for i, l in enumerate(lab)}
    unknown = sorted(set(labels) - set(lab))
    if unknown:
        raise PreconditionError(
            f"test rows carry labels {unknown} outside the model's classes {list(lab)}")
    c = len(lab)
    confusion = np.zeros((c, c), dtype=np.int64)
    for p, t in zip(pred, labels):
        confusion[code[p], code[t]] += 1
    col = confusion.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        per_class = np.where(col > 0, np.diag(confusion) / col, np.nan)
    overall = float(np.trace(confusion)) / n
    return EvalReport(task=model.task, labels=lab, confusion=confusion,
                      per_class_accuracy=per_class, overall_accuracy=overall,
                      mae=float("nan"), n_test=n)


def report_text(report: EvalReport) -> str:
    """Human-readable report."""
    lines = [f"task={report.task} n_test={report.n_test}"]
    if report.task == TASK_REGRESS:
        lines.append(f"mae={report.mae:.6f}")
    else:
        lines.append(f"overall_accuracy={report.overall_accuracy:.6f}")
        lines.append("confusion (rows=predicted, cols=true), labels: "
                     + ",".join(report.labels))
        for i, l in enumerate(report.labels):
            row = " ".join(f"{v:6d}" for v in report.confusion[i])
            lines.append(f"  {l:>6s} {row}")
        pcs = " ".join(
            f"{l}={a:.6f}" if np.isfinite(a) else f"{l}=n/a"
            for l, a in zip(report.labels, report.per_class_accuracy))
        lines.append(f"per_class_accuracy {pcs}")
    return "\n".join(lines) + "\n"


def report_csv(report: EvalReport) -> str:
    """Machine-readable report: key,value rows then the confusion matrix."""
    lines = [f"task,{report.task}", f"n_test,{report.n_test}"]
    if report.task == TASK_REGRESS:
        lines.append(f"mae,{report.mae:.17g}")
    else:
        lines.append(f"overall_accuracy,{report.overall_accuracy:.17g}")
        for l, a in zip(report.labels, report.per_class_accuracy):
            val = f"{a:.17g}" if np.isfinite(a) else "nan"
            lines.append(f"accuracy_{l},{val}")
        lines.append("confusion,predicted\\true," + ",".join(report.labels))
        for i, l in enumerate(report.labels):
            lines.append(f"confusion,{l}," + ",".join(str(v) for v in report.confusion[i]))
    return "\n".join(lines) + "\n"


def report_json(report: EvalReport) -> dict:
    out = {"task": report.task, "n_test": report.n_test}
    if report.task == TASK_REGRESS:
        out["mae"] = report.mae
    else:
        out["overall_accuracy"] = report.overall_accuracy
        out["labels"] = list(report.labels)
        out["confusion_rows_predicted"] = report.confusion.tolist()
        out["per_class_accuracy"] = [
            a if np.isfinite(a) else None for a in report.per_class_accuracy]
    return out


def entanglement_verdict(gr_predicted: float, mae: float) -> tuple[str, float]:
    """Conservative call: Entangled iff the estimate clears 3x the MAE.

    Returns (verdict, threshold). The inequality is strict, so an
    estimate exactly at the threshold stays Inconclusive.
    """
    if not mae > 0:
        raise PreconditionError("mae must be positive to set a threshold")
    threshold = 3.0 * mae
    verdict = VERDICT_ENTANGLED if gr_predicted > threshold else VERDICT_INCONCLUSIVE
    return verdict, threshold
