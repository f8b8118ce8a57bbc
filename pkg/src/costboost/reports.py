"""CSV and plain-text report emission.

Long-format rows always use the columns ``dataset,algorithm,cost_tag,metric,value``.
"""

from __future__ import annotations

import csv
import io

from costboost._io import atomic_write_text, fmt_float
from costboost.dataset import DISLIKE, FAVOR
from costboost.evaluation import ConfusionMatrix, CvReport, metrics

LONG_COLUMNS = ("dataset", "algorithm", "cost_tag", "metric", "value")

CONFUSION_CELLS = (
    ("true_dislike_pred_dislike", 0, 0),
    ("true_dislike_pred_favor", 0, 1),
    ("true_favor_pred_dislike", 1, 0),
    ("true_favor_pred_favor", 1, 1),
)


def _cell(v):
    if isinstance(v, float):
        return fmt_float(v)
    return v


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    return atomic_write_text(path, to_csv(header, rows))


def confusion_rows(dataset, algorithm, cost_tag, cm: ConfusionMatrix):
    for name, t, p in CONFUSION_CELLS:
        yield (dataset, algorithm, cost_tag, name, cm.counts[t][p])


def metric_rows(dataset, algorithm, cost_tag, cm: ConfusionMatrix, positive=FAVOR):
    m = metrics(cm, positive)
    suffix = "" if positive == FAVOR else "_dislike_positive"
    for name in ("precision", "recall", "accuracy", "error"):
        yield (dataset, algorithm, cost_tag, name + suffix, float(getattr(m, name)))


def cv_rows(dataset, algorithm, cost_tag, report: CvReport):
    yield (dataset, algorithm, cost_tag, "error_out_sample", report.mean_out_sample)
    yield (dataset, algorithm, cost_tag, "error_in_sample", report.mean_in_sample)
    yield (dataset, algorithm, cost_tag, "pooled_error_out_sample", report.pooled_out_sample)
    for f, (ein, eout) in enumerate(zip(report.error_in_sample, report.error_out_sample)):
        yield (dataset, algorithm, cost_tag, f"fold{f}_error_in_sample", float(ein))
        yield (dataset, algorithm, cost_tag, f"fold{f}_error_out_sample", float(eout))
    yield from confusion_rows(dataset, algorithm, cost_tag, report.pooled)


def format_table(header, rows, floatfmt="{:.4f}") -> str:
    cells = [[floatfmt.format(v) if isinstance(v, float) else str(v) for v in r] for r in rows]
    widths = [max(len(str(h)), *(len(r[i]) for r in cells)) if cells else len(str(h)) for i, h in enumerate(header)]
    line = "  ".join("-" * w for w in widths)
    out = ["  ".join(str(h).ljust(w) for h, w in zip(header, widths)), line]
    out += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(out) + "\n"


def format_confusion(cm: ConfusionMatrix) -> str:
    rows = [
        ["true dislike", cm.counts[0][0], cm.counts[0][1]],
        ["true favor", cm.counts[1][0], cm.counts[1][1]],
    ]
    return format_table(["", "pred dislike", "pred favor"], rows)


def label_name(label: int) -> str:
    return "favor" if label == FAVOR else "dislike" if label == DISLIKE else str(label)
