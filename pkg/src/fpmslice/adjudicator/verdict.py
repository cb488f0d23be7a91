"""Verdict parsing, self-consistency voting and confusion-matrix scoring."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable


class VerdictValue(str, Enum):
    false_alarm = "false_alarm"
    real_bug = "real_bug"
    unknown = "unknown"


class EmptyBallot(ValueError):
    pass


@dataclass(frozen=True)
class Verdict:
    value: VerdictValue
    rationale: str = ""
    raw: str = ""


_MARKER = re.compile(r"^[\s*_`>#-]*VERDICT\s*:\s*[*_`]*\s*(FALSE[ _]ALARM|REAL[ _]BUG|UNKNOWN)\s*[*_`.]*\s*$",
                     re.IGNORECASE | re.MULTILINE)
_VALUES = {"FALSE ALARM": VerdictValue.false_alarm, "REAL BUG": VerdictValue.real_bug, "UNKNOWN": VerdictValue.unknown}


def parse_verdict(raw: str) -> Verdict:
    """Read the ``VERDICT: ...`` marker.  No marker, or markers that disagree, give unknown."""
    if not isinstance(raw, str):
        return Verdict(VerdictValue.unknown, "", repr(raw))
    matches = list(_MARKER.finditer(raw))
    if not matches:
        return Verdict(VerdictValue.unknown, raw.strip(), raw)
    found = {_VALUES[m.group(1).upper().replace("_", " ")] for m in matches}
    rationale = raw[: matches[0].start()].strip()
    if len(found) > 1:
        return Verdict(VerdictValue.unknown, rationale, raw)
    return Verdict(found.pop(), rationale, raw)


def _value(v) -> VerdictValue:
    if isinstance(v, Verdict):
        return v.value
    return VerdictValue(v)


def majority_vote(verdicts: Iterable) -> VerdictValue:
    """Most frequent value; a tie between distinct values gives unknown."""
    counts = Counter(_value(v) for v in verdicts)
    if not counts:
        raise EmptyBallot("cannot vote on an empty ballot")
    top = max(counts.values())
    winners = [v for v, c in counts.items() if c == top]
    return winners[0] if len(winners) == 1 else VerdictValue.unknown


def _ratio(a: int, b: int) -> float:
    return a / b if b else 0.0


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("counters must be nonnegative")

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn)

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def accuracy(self) -> float:
        return _ratio(self.tp + self.tn, self.total)

    @property
    def precision(self) -> float:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return _ratio(2 * p * r, p + r) if p + r else 0.0

    def to_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn,
                "accuracy": self.accuracy, "precision": self.precision, "recall": self.recall, "f1": self.f1}


LABELS = ("buggy", "not_buggy")


def score(items: Iterable[dict]) -> ConfusionMatrix:
    """Buggy items count as TP only when confirmed; unknown counts against the tool either way."""
    tp = tn = fp = fn = 0
    for item in items:
        label = item["label"]
        final = _value(item["final"])
        if label == "buggy":
            if final is VerdictValue.real_bug:
                tp += 1
            else:
                fn += 1
        elif label == "not_buggy":
            if final is VerdictValue.false_alarm:
                tn += 1
            else:
                fp += 1
        else:
            raise ValueError(f"label must be one of {LABELS}, got {label!r}")
    return ConfusionMatrix(tp, tn, fp, fn)
