"""Confusion counts and accuracy / precision / recall / F1.

Phishing is the positive class. A metric whose denominator is zero raises
:class:`Undefined`; reports carry it as ``None``.
"""
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .errors import Undefined

POSITIVE = "phishing"
NEGATIVE = "legitimate"


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other):
        return ConfusionCounts(self.tp + other.tp, self.tn + other.tn,
                               self.fp + other.fp, self.fn + other.fn)

    def to_json(self):
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


def _check_label(label):
    if label not in (POSITIVE, NEGATIVE):
        raise ValueError(f"unknown label {label!r}")
    return label == POSITIVE


def confusion(pairs):
    """Count ``(predicted, actual)`` label pairs."""
    tp = tn = fp = fn = 0
    for predicted, actual in pairs:
        p, a = _check_label(predicted), _check_label(actual)
        if p and a:
            tp += 1
        elif p:
            fp += 1
        elif a:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, tn, fp, fn)


def _ratio(num, den, name):
    if den == 0:
        raise Undefined(f"{name} undefined: zero denominator")
    return num / den


def accuracy(c):
    return _ratio(c.tp + c.tn, c.total, "accuracy")


def precision(c):
    return _ratio(c.tp, c.tp + c.fp, "precision")


def recall(c):
    return _ratio(c.tp, c.tp + c.fn, "recall")


def f1(p, r):
    if p + r == 0:
        raise Undefined("f1 undefined: precision + recall == 0")
    return 2 * p * r / (p + r)


def f1_score(c):
    return f1(precision(c), recall(c))


def maybe(fn, *args):
    """``fn(*args)``, or ``None`` when the metric is undefined."""
    try:
        return fn(*args)
    except Undefined:
        return None


def format_pct(value):
    """Percentage with two decimals, rounded half up; ``undefined`` for None."""
    if value is None:
        return "undefined"
    pct = (Decimal(repr(float(value))) * 100).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return f"{pct}%"


@dataclass(frozen=True)
class CategoryResult:
    name: str
    counts: ConfusionCounts

    @property
    def n(self):
        return self.counts.total

    @property
    def accuracy(self):
        return maybe(accuracy, self.counts)

    @property
    def precision(self):
        return maybe(precision, self.counts)

    def to_json(self):
        return {"name": self.name, "accuracy": self.accuracy,
                "precision": self.precision, "n": self.n}


@dataclass(frozen=True)
class EvalReport:
    counts: ConfusionCounts
    per_category: tuple

    @property
    def overall(self):
        c = self.counts
        p, r = maybe(precision, c), maybe(recall, c)
        return {
            "accuracy": maybe(accuracy, c),
            "precision": p,
            "recall": r,
            "f1": None if p is None or r is None else maybe(f1, p, r),
        }

    def to_json(self):
        overall = dict(self.overall)
        overall["counts"] = self.counts.to_json()
        return {"overall": overall,
                "per_category": [cat.to_json() for cat in self.per_category]}

    def format_table(self):
        o = self.overall
        lines = [f"{'category':<28} {'n':>5} {'accuracy':>10} {'precision':>10}"]
        for cat in self.per_category:
            lines.append(f"{cat.name:<28} {cat.n:>5} {format_pct(cat.accuracy):>10} "
                         f"{format_pct(cat.precision):>10}")
        c = self.counts
        lines += [
            "",
            f"overall  n={c.total}  tp={c.tp} tn={c.tn} fp={c.fp} fn={c.fn}",
            f"  accuracy  {format_pct(o['accuracy'])}",
            f"  precision {format_pct(o['precision'])}",
            f"  recall    {format_pct(o['recall'])}",
            f"  f1        {format_pct(o['f1'])}",
        ]
        return "\n".join(lines)


def per_category_report(rows):
    """Build a report from ``(predicted, actual, category)`` triples.

    Categories keep first-seen order; empty categories cannot appear.
    """
    by_cat = {}
    for predicted, actual, category in rows:
        by_cat.setdefault(category, []).append((predicted, actual))
    cats = tuple(CategoryResult(name, confusion(pairs)) for name, pairs in by_cat.items())
    total = ConfusionCounts()
    for cat in cats:
        total = total + cat.counts
    return EvalReport(total, cats)
