"""FNR / FPR scoring of road masks, grouped averages and run comparison.

A rate whose denominator is zero is ``UNDEFINED_DENOM`` (``None``). Such
rates are left out of every average and flagged in the rendered report.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, MismatchedImageLists, NetpbmError
from .netpbm import read_mask
from .raster import as_mask

UNDEFINED_DENOM = None
CSV_FIELDS = ("name", "tp", "fp", "tn", "fn", "fnr", "fpr")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(pred, gt) -> ConfusionCounts:
    p, g = as_mask(pred), as_mask(gt)
    if p.shape != g.shape:
        raise DimensionMismatch(f"prediction {p.shape} and ground truth {g.shape} differ")
    tp = int(np.count_nonzero(p & g))
    fn = int(np.count_nonzero(~p & g))
    fp = int(np.count_nonzero(p & ~g))
    return ConfusionCounts(tp=tp, fp=fp, tn=p.size - tp - fn - fp, fn=fn)


def rates(c: ConfusionCounts):
    """``(fnr, fpr)``: fn / (tp + fn) and fp / (tn + fp)."""
    fnr = c.fn / (c.tp + c.fn) if c.tp + c.fn else UNDEFINED_DENOM
    fpr = c.fp / (c.tn + c.fp) if c.tn + c.fp else UNDEFINED_DENOM
    return fnr, fpr


def mean_defined(values):
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else UNDEFINED_DENOM


@dataclass(frozen=True)
class ImageResult:
    name: str
    counts: ConfusionCounts
    fnr: float | None
    fpr: float | None


@dataclass(frozen=True)
class GroupAverage:
    index: int
    names: tuple
    fnr: float | None
    fpr: float | None


@dataclass
class EvalReport:
    images: list
    group_size: int = 3
    metadata: dict = field(default_factory=dict)

    @property
    def names(self) -> list:
        return [r.name for r in self.images]

    @property
    def groups(self) -> list:
        out = []
        for k in range(0, len(self.images), self.group_size):
            members = self.images[k:k + self.group_size]
            out.append(GroupAverage(
                index=k // self.group_size,
                names=tuple(r.name for r in members),
                fnr=mean_defined(r.fnr for r in members),
                fpr=mean_defined(r.fpr for r in members),
            ))
        return out

    @property
    def overall(self):
        return (mean_defined(r.fnr for r in self.images),
                mean_defined(r.fpr for r in self.images))

    @property
    def undefined(self) -> list:
        """Names of images with at least one undefined rate."""
        return [r.name for r in self.images if r.fnr is None or r.fpr is None]

    def render_text(self) -> str:
        lines = []
        for key in sorted(self.metadata):
            lines.append(f"# {key}: {self.metadata[key]}")
        lines.append(f"{'image':<24} {'tp':>8} {'fp':>8} {'tn':>8} {'fn':>8} {'fnr':>8} {'fpr':>8}")
        for r in self.images:
            c = r.counts
            lines.append(f"{r.name:<24} {c.tp:>8} {c.fp:>8} {c.tn:>8} {c.fn:>8} "
                         f"{_fmt(r.fnr):>8} {_fmt(r.fpr):>8}")
        lines.append("")
        lines.append(f"group averages (size {self.group_size})")
        for g in self.groups:
            lines.append(f"  group {g.index + 1:>3}  fnr {_fmt(g.fnr):>8}  fpr {_fmt(g.fpr):>8}  "
                         f"[{', '.join(g.names)}]")
        fnr, fpr = self.overall
        lines.append(f"overall    fnr {_fmt(fnr):>8}  fpr {_fmt(fpr):>8}")
        if self.undefined:
            lines.append("undefined rates (excluded from averages): " + ", ".join(self.undefined))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# group_size={self.group_size}\n")
        for key in sorted(self.metadata):
            buf.write(f"# {key}={self.metadata[key]}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in self.images:
            c = r.counts
            writer.writerow([r.name, c.tp, c.fp, c.tn, c.fn, _csv_rate(r.fnr), _csv_rate(r.fpr)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EvalReport":
        meta, body = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val.strip()
            elif line.strip():
                body.append(line)
        group_size = int(meta.pop("group_size", 3))
        rows = list(csv.DictReader(body))
        images = []
        for row in rows:
            counts = ConfusionCounts(*(int(row[k]) for k in ("tp", "fp", "tn", "fn")))
            images.append(ImageResult(row["name"], counts, *rates(counts)))
        return cls(images, group_size, meta)

    def write(self, base) -> tuple:
        """Write ``<base>.report.txt`` and ``<base>.report.csv``."""
        base = str(base)
        txt, csv_path = Path(base + ".report.txt"), Path(base + ".report.csv")
        txt.write_text(self.render_text())
        csv_path.write_text(self.to_csv())
        return txt, csv_path


def _fmt(v) -> str:
    return "undef" if v is None else f"{v:.4f}"


def _csv_rate(v) -> str:
    return "undefined" if v is None else "%.17g" % v


def evaluate_masks(items, group_size: int = 3, metadata=None) -> EvalReport:
    """Score ``(name, pred_mask, gt_mask)`` triples in input order."""
    if group_size < 1:
        raise ValueError("group_size must be >= 1")
    images = []
    for name, pred, gt in items:
        c = confusion(pred, gt)
        images.append(ImageResult(name, c, *rates(c)))
    return EvalReport(images, group_size, dict(metadata or {}))


def batch_eval(pairs, group_size: int = 3, metadata=None) -> EvalReport:
    """Score ``(pred_path, gt_path)`` pairs of P5 masks.

    Image names are the prediction file stems. Load and size errors are
    re-raised with the offending path in the message.
    """
    items = []
    for pred_path, gt_path in pairs:
        masks = []
        for path in (pred_path, gt_path):
            try:
                masks.append(read_mask(path))
            except NetpbmError as exc:
                raise type(exc)(f"{path}: {exc}") from exc
        if masks[0].shape != masks[1].shape:
            raise DimensionMismatch(f"{pred_path}: size {masks[0].shape} differs from "
                                    f"ground truth {gt_path} {masks[1].shape}")
        items.append((Path(pred_path).stem, masks[0], masks[1]))
    return evaluate_masks(items, group_size, metadata)


def match_directories(pred_dir, gt_dir, pattern: str = "*.pgm"):
    """Pair files with identical names in two directories.

    Raises MismatchedImageLists naming the first file without a partner.
    """
    preds = {p.name: p for p in Path(pred_dir).glob(pattern)}
    gts = {p.name: p for p in Path(gt_dir).glob(pattern)}
    for name in sorted(set(preds) ^ set(gts)):
        where = gt_dir if name in preds else pred_dir
        raise MismatchedImageLists(f"{name} has no counterpart in {where}")
    if not preds:
        raise MismatchedImageLists(f"no {pattern} files in {pred_dir}")
    return [(preds[n], gts[n]) for n in sorted(preds)]


# --------------------------------------------------------------------------
# comparison of two runs
# --------------------------------------------------------------------------

def _delta(a, b):
    return None if a is None or b is None else a - b


@dataclass(frozen=True)
class ComparisonSummary:
    label_a: str
    label_b: str
    groups: list  # (index, fnr_a, fnr_b, d_fnr, fpr_a, fpr_b, d_fpr)
    overall: tuple  # same layout without the index
    verdicts: dict  # metric -> label of the better run, or "tie"

    @property
    def deltas(self):
        return self.overall[2], self.overall[5]

    def render_text(self) -> str:
        a, b = self.label_a, self.label_b
        head = (f"{'group':>6} | {'fnr ' + a:>14} {'fnr ' + b:>14} {'delta':>9} | "
                f"{'fpr ' + a:>14} {'fpr ' + b:>14} {'delta':>9}")
        lines = [head, "-" * len(head)]
        for g in self.groups:
            lines.append(_row(str(g[0] + 1), g[1:]))
        lines.append("-" * len(head))
        lines.append(_row("all", self.overall))
        for metric in ("fnr", "fpr"):
            lines.append(f"{metric}: lower overall error -> {self.verdicts[metric]}")
        return "\n".join(lines) + "\n"


def _row(label, vals):
    return (f"{label:>6} | {_fmt(vals[0]):>14} {_fmt(vals[1]):>14} {_signed(vals[2]):>9} | "
            f"{_fmt(vals[3]):>14} {_fmt(vals[4]):>14} {_signed(vals[5]):>9}")


def _signed(v):
    return "undef" if v is None else f"{v:+.4f}"


def compare_runs(a: EvalReport, b: EvalReport, label_a: str = "A", label_b: str = "B") -> ComparisonSummary:
    """Per-group and overall deltas (a - b) for FNR and FPR."""
    if a.names != b.names:
        missing = [n for n in a.names if n not in b.names] + [n for n in b.names if n not in a.names]
        detail = f" (first difference: {missing[0]})" if missing else " (order differs)"
        raise MismatchedImageLists("reports cover different image lists" + detail)
    if a.group_size != b.group_size:
        raise MismatchedImageLists("reports use different group sizes")
    groups = [(ga.index, ga.fnr, gb.fnr, _delta(ga.fnr, gb.fnr), ga.fpr, gb.fpr, _delta(ga.fpr, gb.fpr))
              for ga, gb in zip(a.groups, b.groups)]
    (fnr_a, fpr_a), (fnr_b, fpr_b) = a.overall, b.overall
    overall = (fnr_a, fnr_b, _delta(fnr_a, fnr_b), fpr_a, fpr_b, _delta(fpr_a, fpr_b))
    verdicts = {}
    for metric, d in (("fnr", overall[2]), ("fpr", overall[5])):
        if d is None:
            verdicts[metric] = "undefined"
        elif d < 0:
            verdicts[metric] = label_a
        elif d > 0:
            verdicts[metric] = label_b
        else:
            verdicts[metric] = "tie"
    return ComparisonSummary(label_a, label_b, groups, overall, verdicts)
