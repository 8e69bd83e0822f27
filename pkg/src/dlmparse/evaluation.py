"""Attachment-score evaluation with punctuation exclusion.

UAS counts tokens with the correct head, LAS tokens with the correct head
and label, both over non-excluded tokens only; POS accuracy is computed
over all tokens.  Percentages are reported to two decimal places with
half-up rounding.  With no scored tokens the attachment scores are
vacuously 100 (so evaluating a treebank against itself scores 100/100
under every punctuation rule).
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import FrozenSet

from .conll import AlignmentError, Treebank, check_aligned

# PTB punctuation part-of-speech tags.
DEFAULT_PUNCT_TAGS: FrozenSet[str] = frozenset({"``", "''", ":", ",", "."})

PUNCT_RULES = ("gold-pos", "unicode", "none")


@dataclass(frozen=True)
class EvalReport:
    las: float
    uas: float
    pos_acc: float
    scored_tokens: int
    excluded_tokens: int
    punct_rule: str = "gold-pos"

    def record(self) -> str:
        """Single-line machine-readable summary."""
        return (
            f"las={self.las:.2f} uas={self.uas:.2f} pos_acc={self.pos_acc:.2f}"
            f" scored={self.scored_tokens} excluded={self.excluded_tokens}"
            f" punct={self.punct_rule}"
        )

    def text(self) -> str:
        return (
            f"LAS: {self.las:.2f}\n"
            f"UAS: {self.uas:.2f}\n"
            f"POS accuracy: {self.pos_acc:.2f}\n"
            f"Scored tokens: {self.scored_tokens}"
            f" (excluded as punctuation: {self.excluded_tokens},"
            f" rule: {self.punct_rule})"
        )


def _is_unicode_punct(form: str) -> bool:
    return bool(form) and all(unicodedata.category(ch).startswith("P") for ch in form)


def _percent(numerator: int, denominator: int) -> float:
    if denominator == 0:
        return 100.0
    frac = Decimal(numerator * 100) / Decimal(denominator)
    return float(frac.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def evaluate(
    gold: Treebank,
    pred: Treebank,
    punct_rule: str = "gold-pos",
    punct_tags: FrozenSet[str] = DEFAULT_PUNCT_TAGS,
) -> EvalReport:
    """Score pred against gold; the corpora must be sentence-aligned."""
    if punct_rule not in PUNCT_RULES:
        raise ValueError(f"unknown punct_rule {punct_rule!r}")
    if len(gold) != len(pred):
        raise AlignmentError(
            f"corpora have different sentence counts ({len(gold)} vs {len(pred)})",
            min(len(gold), len(pred)),
        )
    scored = excluded = 0
    head_ok = label_ok = 0
    total = pos_ok = 0
    for i, (g, p) in enumerate(zip(gold, pred)):
        check_aligned(g, p, i)
        for tg, tp in zip(g.tokens, p.tokens):
            total += 1
            if tg.pos == tp.pos:
                pos_ok += 1
            if punct_rule == "gold-pos" and tg.pos in punct_tags:
                excluded += 1
                continue
            if punct_rule == "unicode" and _is_unicode_punct(tg.form):
                excluded += 1
                continue
            scored += 1
            if tg.head == tp.head:
                head_ok += 1
                if tg.deprel == tp.deprel:
                    label_ok += 1
    return EvalReport(
        las=_percent(label_ok, scored),
        uas=_percent(head_ok, scored),
        pos_acc=_percent(pos_ok, total),
        scored_tokens=scored,
        excluded_tokens=excluded,
        punct_rule=punct_rule,
    )
