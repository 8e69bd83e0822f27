"""N-gram dependency language models over head/previous-children events.

An event of order N records, for one token, its head unit, the units of
the N-1 same-side siblings immediately closer to the head (nearest to the
head last, padded on the left with "<S>"), and the token's own unit.
Probabilities are relative frequencies over events that survive a minimum
count filter; they are then bucketed by rank into the coarse classes PH
(top decile), PM (next two deciles) and PL (the rest).  Lookups of unseen
keys return PO; the parser additionally uses PU for tokens whose head does
not exist yet.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import IO, Dict, Iterable, List, Tuple

from .conll import ROOT, Sentence, Treebank

PH = "PH"
PM = "PM"
PL = "PL"
PO = "PO"
PU = "PU"

TABLE_CLASSES = (PH, PM, PL)
LOOKUP_CLASSES = (PH, PM, PL, PO, PU)

LEFT = "L"
RIGHT = "R"

BOUNDARY = "<S>"  # pad for missing previous children
ROOT_UNIT = "<ROOT>"  # unit of the artificial root as a head

UNIT_MODES = ("form", "pos", "form_pos")


class DlmFormatError(ValueError):
    """A saved table that cannot be decoded; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class EmptyTableWarning(UserWarning):
    pass


def unit_of(s: Sentence, index: int, unit_mode: str) -> str:
    """The unit string of a token; the root contributes ROOT_UNIT."""
    if index == ROOT:
        return ROOT_UNIT
    tok = s[index - 1]
    if unit_mode == "form":
        return tok.form.lower()
    if unit_mode == "pos":
        return tok.pos
    if unit_mode == "form_pos":
        return f"{tok.form.lower()}/{tok.pos}"
    raise ValueError(f"unknown unit_mode {unit_mode!r}")


@dataclass(frozen=True, slots=True)
class NGramKey:
    order: int
    side: str  # LEFT or RIGHT
    head_unit: str
    prev_units: Tuple[str, ...]  # length order-1, nearest to the head last
    child_unit: str

    def sort_fields(self) -> Tuple:
        return (self.side, self.head_unit, self.prev_units, self.child_unit)


@dataclass(frozen=True, slots=True)
class Entry:
    count: int
    prob: float
    bucket: str


@dataclass
class DLMTable:
    order: int
    unit_mode: str
    min_count: int = 3
    entries: Dict[NGramKey, Entry] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)


def prev_children(heads: Tuple[int, ...], child: int, order: int) -> List[int]:
    """Indices of the order-1 same-side siblings of child immediately closer
    to its head, listed nearest to the head last.  May be shorter than
    order-1; callers pad."""
    if order <= 1:
        return []
    h = heads[child - 1]
    lo, hi = (child, h) if child < h else (h, child)
    sibs = [d for d in range(lo + 1, hi) if heads[d - 1] == h]
    # Decreasing distance to the head: starts with the sibling adjacent to
    # the child, ends with the one nearest the head.
    sibs.sort(key=lambda d: -abs(d - h))
    return sibs[: order - 1]


def pad_prev(units: List[str], order: int) -> Tuple[str, ...]:
    return tuple([BOUNDARY] * (order - 1 - len(units)) + units)


def extract_events(s: Sentence, order: int, unit_mode: str = "form") -> List[NGramKey]:
    """One key per token, in token order; root-attached tokens count as
    right-side children of the artificial root."""
    heads = s.heads
    keys = []
    for tok in s.tokens:
        side = LEFT if tok.id < tok.head else RIGHT
        prev = [unit_of(s, d, unit_mode) for d in prev_children(heads, tok.id, order)]
        keys.append(
            NGramKey(
                order=order,
                side=side,
                head_unit=unit_of(s, tok.head, unit_mode),
                prev_units=pad_prev(prev, order),
                child_unit=unit_of(s, tok.id, unit_mode),
            )
        )
    return keys


def count_events(
    sentences: Iterable[Sentence], order: int, unit_mode: str = "form"
) -> Counter:
    """Raw event counts; shards may be counted separately and merged by +."""
    counts: Counter = Counter()
    for s in sentences:
        counts.update(extract_events(s, order, unit_mode))
    return counts


def _context(key: NGramKey) -> Tuple:
    return (key.side, key.head_unit, key.prev_units)


def table_from_counts(
    counts: Counter, order: int, unit_mode: str, min_count: int = 3
) -> DLMTable:
    """Relative-frequency table over events meeting the minimum count.

    The denominator sums counts of *retained* children of the same context,
    so stored probabilities of each context sum to one.
    """
    kept = {k: c for k, c in counts.items() if c >= min_count}
    totals: Dict[Tuple, int] = defaultdict(int)
    for k, c in kept.items():
        totals[_context(k)] += c
    entries = {
        k: Entry(count=c, prob=c / totals[_context(k)], bucket=PL)
        for k, c in kept.items()
    }
    table = DLMTable(order=order, unit_mode=unit_mode, min_count=min_count, entries=entries)
    if counts and not entries:
        warnings.warn(
            f"DLM table of order {order} is empty after min_count={min_count} filtering",
            EmptyTableWarning,
            stacklevel=2,
        )
    return table


def build(
    tb: Treebank | Iterable[Sentence],
    order: int,
    unit_mode: str = "form",
    min_count: int = 3,
) -> DLMTable:
    """Count, filter, estimate and bucket in one step."""
    if unit_mode not in UNIT_MODES:
        raise ValueError(f"unknown unit_mode {unit_mode!r}")
    counts = count_events(tb, order, unit_mode)
    return assign_buckets(table_from_counts(counts, order, unit_mode, min_count))


def ranked_entries(t: DLMTable) -> List[Tuple[NGramKey, Entry]]:
    """Entries in descending probability order; ties broken by higher count
    first, then lexicographic key order, so ranking is deterministic."""
    return sorted(
        t.entries.items(),
        key=lambda kv: (-kv[1].prob, -kv[1].count, kv[0].sort_fields()),
    )


def assign_buckets(t: DLMTable) -> DLMTable:
    """Bucket by rank: the first ceil(0.1K) entries are PH, entries ranked
    up to ceil(0.3K) are PM, the rest PL."""
    k = len(t.entries)
    if k == 0:
        return t
    ph_cut = math.ceil(0.1 * k)
    pm_cut = math.ceil(0.3 * k)
    entries = {}
    for rank, (key, e) in enumerate(ranked_entries(t), start=1):
        bucket = PH if rank <= ph_cut else PM if rank <= pm_cut else PL
        entries[key] = Entry(count=e.count, prob=e.prob, bucket=bucket)
    return DLMTable(
        order=t.order, unit_mode=t.unit_mode, min_count=t.min_count, entries=entries
    )


def lookup(t: DLMTable, key: NGramKey) -> str:
    """The stored bucket class of key, or PO when the key is absent."""
    if key.order != t.order:
        raise ValueError(f"key order {key.order} does not match table order {t.order}")
    e = t.entries.get(key)
    return e.bucket if e is not None else PO


def _escape(unit: str) -> str:
    return unit.replace("\\", "\\\\").replace(",", "\\c")


def _unescape(unit: str, line_no: int) -> str:
    out = []
    i = 0
    while i < len(unit):
        ch = unit[i]
        if ch == "\\":
            i += 1
            if i >= len(unit):
                raise DlmFormatError("dangling escape in prev_units", line_no)
            nxt = unit[i]
            if nxt == "\\":
                out.append("\\")
            elif nxt == "c":
                out.append(",")
            else:
                raise DlmFormatError(f"bad escape \\{nxt} in prev_units", line_no)
        else:
            out.append(ch)
        i += 1
    return "".join(out)


def save(t: DLMTable, stream: IO[str]) -> None:
    """One header line, then one tab-separated line per entry in rank order.

    Units never contain tabs or newlines (CoNLL guarantees this); commas and
    backslashes inside prev_units are backslash-escaped so the comma-joined
    field decodes unambiguously.  Probabilities are written with 17
    significant digits and round-trip bit-exactly.
    """
    stream.write(
        f"#dlm\tversion=1\torder={t.order}\tunit_mode={t.unit_mode}"
        f"\tmin_count={t.min_count}\tentries={len(t.entries)}\n"
    )
    for key, e in ranked_entries(t):
        prev = ",".join(_escape(u) for u in key.prev_units)
        stream.write(
            f"{key.order}\t{key.side}\t{key.head_unit}\t{prev}"
            f"\t{key.child_unit}\t{e.count}\t{e.prob:.17g}\t{e.bucket}\n"
        )


def load(stream: IO[str]) -> DLMTable:
    lines = iter(stream)
    try:
        header = next(lines).rstrip("\n")
    except StopIteration:
        raise DlmFormatError("empty stream, expected a header line", 1) from None
    fields = header.split("\t")
    if not fields or fields[0] != "#dlm":
        raise DlmFormatError("missing #dlm header", 1)
    meta = {}
    for f in fields[1:]:
        k, _, v = f.partition("=")
        meta[k] = v
    try:
        order = int(meta["order"])
        min_count = int(meta["min_count"])
        n_entries = int(meta["entries"])
        unit_mode = meta["unit_mode"]
    except (KeyError, ValueError) as exc:
        raise DlmFormatError(f"bad header: {exc}", 1) from None
    if unit_mode not in UNIT_MODES:
        raise DlmFormatError(f"unknown unit_mode {unit_mode!r}", 1)

    entries: Dict[NGramKey, Entry] = {}
    line_no = 1
    for line in lines:
        line_no += 1
        line = line.rstrip("\n")
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 8:
            raise DlmFormatError(f"expected 8 columns, got {len(cols)}", line_no)
        try:
            key_order = int(cols[0])
            count = int(cols[5])
            prob = float(cols[6])
        except ValueError as exc:
            raise DlmFormatError(str(exc), line_no) from None
        if key_order != order:
            raise DlmFormatError(
                f"entry order {key_order} does not match header order {order}", line_no
            )
        if cols[1] not in (LEFT, RIGHT):
            raise DlmFormatError(f"unknown side {cols[1]!r}", line_no)
        if cols[7] not in TABLE_CLASSES:
            raise DlmFormatError(f"unknown class token {cols[7]!r}", line_no)
        prev = (
            tuple(_unescape(u, line_no) for u in cols[3].split(","))
            if cols[3]
            else ()
        )
        if len(prev) != order - 1:
            raise DlmFormatError(
                f"expected {order - 1} prev units, got {len(prev)}", line_no
            )
        key = NGramKey(
            order=order,
            side=cols[1],
            head_unit=cols[2],
            prev_units=prev,
            child_unit=cols[4],
        )
        if key in entries:
            raise DlmFormatError("duplicate entry", line_no)
        entries[key] = Entry(count=count, prob=prob, bucket=cols[7])
    if len(entries) != n_entries:
        raise DlmFormatError(
            f"header announced {n_entries} entries, found {len(entries)}", line_no
        )
    return DLMTable(order=order, unit_mode=unit_mode, min_count=min_count, entries=entries)


def save_file(t: DLMTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        save(t, f)


def load_file(path) -> DLMTable:
    with open(path, encoding="utf-8") as f:
        return load(f)
