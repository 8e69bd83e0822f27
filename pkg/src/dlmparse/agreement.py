"""Double-parse agreement filtering.

Keeps exactly the sentences for which two independently produced parses of
the same text are identical, which yields a higher-precision corpus for
building DLM tables.  Annotation of a kept sentence is taken from the
first corpus (identical to the second under labeled agreement).
"""

from __future__ import annotations

from dataclasses import dataclass

from .conll import AlignmentError, Sentence, Treebank, check_aligned


@dataclass(frozen=True)
class AgreementReport:
    total: int
    agreed: int
    agreement_rate: float
    mean_length_agreed: float
    mean_length_all: float

    def record(self) -> str:
        """Single-line machine-readable summary."""
        return (
            f"total={self.total} agreed={self.agreed}"
            f" rate={self.agreement_rate:.4f}"
            f" mean_len_agreed={self.mean_length_agreed:.2f}"
            f" mean_len_all={self.mean_length_all:.2f}"
        )


def agree(a: Sentence, b: Sentence, labeled: bool = True, index: int = 0) -> bool:
    """True iff every token has the same head in both parses (and the same
    label when labeled).  The sentences must have equal length and forms."""
    check_aligned(a, b, index)
    for ta, tb in zip(a.tokens, b.tokens):
        if ta.head != tb.head:
            return False
        if labeled and ta.deprel != tb.deprel:
            return False
    return True


def filter_agreement(
    parsed_a: Treebank, parsed_b: Treebank, labeled: bool = True
) -> tuple[Treebank, AgreementReport]:
    """The sentences of parsed_a on which parsed_b agrees, in input order,
    with agreement statistics."""
    if len(parsed_a) != len(parsed_b):
        raise AlignmentError(
            f"corpora have different sentence counts ({len(parsed_a)} vs {len(parsed_b)})",
            min(len(parsed_a), len(parsed_b)),
        )
    kept = []
    token_total = 0
    token_agreed = 0
    for i, (a, b) in enumerate(zip(parsed_a, parsed_b)):
        token_total += len(a)
        if agree(a, b, labeled=labeled, index=i):
            kept.append(a)
            token_agreed += len(a)
    total = len(parsed_a)
    agreed = len(kept)
    report = AgreementReport(
        total=total,
        agreed=agreed,
        agreement_rate=agreed / total if total else 0.0,
        mean_length_agreed=token_agreed / agreed if agreed else 0.0,
        mean_length_all=token_total / total if total else 0.0,
    )
    return Treebank(sentences=kept, source_tag=parsed_a.source_tag), report
