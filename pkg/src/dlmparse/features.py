"""Sparse feature extraction for (configuration, transition) pairs.

Feature identifiers are 64-bit and stable across runs: every feature is a
template string hashed with blake2b (8-byte digest), and state parts are
mixed with the transition part through a fixed integer combiner.  The full
identity of a feature is therefore (template tag, values, transition); the
test suite audits that distinct identities never collide at test scale.

Two baseline template registries are provided:

``full`` (registry id ``base-v1``)
    unigrams   s0w s0p s1w s1p s2w s2p b0w b0p b1p b2p
    bigrams    s0p|s1p s0w|s1w s0w|s1p s0p|s1w s0p|b0p s1p|b0p s0w|b0p s0p|s2p
    trigrams   s0p|s1p|b0p s0p|s1p|s2p s0p|b0p|b1p s0w|s1p|b0p
    dependents POS of the leftmost/rightmost attached dependent of s0 and s1
    valency    attached-dependent count of s0 and s1, bucketed 0/1/2/3+
    distance   linear distance between s1 and s0, bucketed 1/2/3/4/5+

``words`` (registry id ``words-v1``)
    the form-only subset: unigrams s0w s1w s2w b0w b1w b2w, bigrams
    s0w|s1w s0w|b0w s1w|b0w, trigram s0w|s1w|b0w, plus the same valency
    and distance buckets.

Every template always fires; positions that do not exist contribute the
reserved value "<NONE>" and the artificial root contributes "<ROOT>".
Each baseline template is conjoined with the scored transition (kind plus
label).  DLM templates additionally fire per attached DLM table: the seven
combinations of (table index, bucket class of s0, bucket class of s1,
label) with no extra value, s0/s1 POS, s0/s1 word, both POS, both words.
For SHIFT the label slot takes "<SHIFT>".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from hashlib import blake2b
from typing import Dict, List, Optional, Sequence, Tuple

from .conll import ROOT, Sentence
from .dlm import (
    LEFT,
    PU,
    RIGHT,
    DLMTable,
    NGramKey,
    lookup,
    pad_prev,
    unit_of,
)
from .transitions import LEFT_ARC, RIGHT_ARC, SHIFT, Configuration, Transition

NONE_VALUE = "<NONE>"
ROOT_VALUE = "<ROOT>"
SHIFT_LABEL = "<SHIFT>"

TEMPLATE_SETS = ("full", "words")
REGISTRY_VERSION = {"full": "base-v1", "words": "words-v1"}

_MASK64 = (1 << 64) - 1


def h64(s: str) -> int:
    """Stable 64-bit hash of a template string (blake2b, 8-byte digest)."""
    return int.from_bytes(blake2b(s.encode("utf-8"), digest_size=8).digest(), "big")


def combine(state: int, trans: int) -> int:
    """Mix a state hash with a transition hash (boost-style combiner)."""
    return (
        state
        ^ (trans + 0x9E3779B97F4A7C15 + ((state << 6) & _MASK64) + (state >> 2))
    ) & _MASK64


@dataclass
class DLMSet:
    """An ordered collection of DLM tables; a table's position is its index
    in the feature templates.  Orders must be distinct and unit modes
    uniform."""

    tables: List[DLMTable] = field(default_factory=list)

    def __post_init__(self):
        orders = [t.order for t in self.tables]
        if len(set(orders)) != len(orders):
            raise ValueError(f"DLM orders must be distinct, got {orders}")
        modes = {t.unit_mode for t in self.tables}
        if len(modes) > 1:
            raise ValueError(f"DLM unit modes must be uniform, got {sorted(modes)}")

    def __len__(self) -> int:
        return len(self.tables)

    def __iter__(self):
        return iter(self.tables)

    @property
    def orders(self) -> List[int]:
        return [t.order for t in self.tables]

    @property
    def unit_mode(self) -> str:
        return self.tables[0].unit_mode if self.tables else "form"


@lru_cache(maxsize=128)
def _word_pos_arrays(s: Sentence) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    words = (ROOT_VALUE,) + tuple(t.form for t in s.tokens)
    poss = (ROOT_VALUE,) + tuple(t.pos for t in s.tokens)
    return words, poss


@lru_cache(maxsize=128)
def _unit_array(s: Sentence, unit_mode: str) -> Tuple[str, ...]:
    return tuple(unit_of(s, i, unit_mode) for i in range(len(s) + 1))


def _bucket_count(n: int) -> str:
    return str(n) if n < 3 else "3+"


def _bucket_dist(n: int) -> str:
    return str(n) if n < 5 else "5+"


def state_strings(c: Configuration, template_set: str = "full") -> List[str]:
    """The baseline template strings of a configuration (transition not yet
    attached).  Fixed length for a given registry."""
    words, poss = _word_pos_arrays(c.sentence)

    def w(i: Optional[int]) -> str:
        return NONE_VALUE if i is None else words[i]

    def p(i: Optional[int]) -> str:
        return NONE_VALUE if i is None else poss[i]

    stack, buf = c.stack, c.buffer
    s0 = stack[-1] if stack else None
    s1 = stack[-2] if len(stack) >= 2 else None
    s2 = stack[-3] if len(stack) >= 3 else None
    b0 = buf[0] if len(buf) >= 1 else None
    b1 = buf[1] if len(buf) >= 2 else None
    b2 = buf[2] if len(buf) >= 3 else None

    s0w, s0p, s1w, s1p = w(s0), p(s0), w(s1), p(s1)
    b0w, b0p = w(b0), p(b0)

    # Attached-dependent statistics for s0 and s1 in one scan of the arcs.
    s0l = s0r = s1l = s1r = None
    s0n = s1n = 0
    for h, d, _ in c.arcs:
        if h == s0:
            s0n += 1
            if s0l is None or d < s0l:
                s0l = d
            if s0r is None or d > s0r:
                s0r = d
        elif h == s1:
            s1n += 1
            if s1l is None or d < s1l:
                s1l = d
            if s1r is None or d > s1r:
                s1r = d

    if template_set == "full":
        dist = NONE_VALUE if s1 is None else _bucket_dist(s0 - s1)
        return [
            f"s0w={s0w}",
            f"s0p={s0p}",
            f"s1w={s1w}",
            f"s1p={s1p}",
            f"s2w={w(s2)}",
            f"s2p={p(s2)}",
            f"b0w={b0w}",
            f"b0p={b0p}",
            f"b1p={p(b1)}",
            f"b2p={p(b2)}",
            f"s0p|s1p={s0p}|{s1p}",
            f"s0w|s1w={s0w}|{s1w}",
            f"s0w|s1p={s0w}|{s1p}",
            f"s0p|s1w={s0p}|{s1w}",
            f"s0p|b0p={s0p}|{b0p}",
            f"s1p|b0p={s1p}|{b0p}",
            f"s0w|b0p={s0w}|{b0p}",
            f"s0p|s2p={s0p}|{p(s2)}",
            f"s0p|s1p|b0p={s0p}|{s1p}|{b0p}",
            f"s0p|s1p|s2p={s0p}|{s1p}|{p(s2)}",
            f"s0p|b0p|b1p={s0p}|{b0p}|{p(b1)}",
            f"s0w|s1p|b0p={s0w}|{s1p}|{b0p}",
            f"s0lp={p(s0l)}",
            f"s0rp={p(s0r)}",
            f"s1lp={p(s1l)}",
            f"s1rp={p(s1r)}",
            f"s0v={NONE_VALUE if s0 is None else _bucket_count(s0n)}",
            f"s1v={NONE_VALUE if s1 is None else _bucket_count(s1n)}",
            f"d01={dist}",
        ]
    if template_set == "words":
        dist = NONE_VALUE if s1 is None else _bucket_dist(s0 - s1)
        return [
            f"s0w={s0w}",
            f"s1w={s1w}",
            f"s2w={w(s2)}",
            f"b0w={b0w}",
            f"b1w={w(b1)}",
            f"b2w={w(b2)}",
            f"s0w|s1w={s0w}|{s1w}",
            f"s0w|b0w={s0w}|{b0w}",
            f"s1w|b0w={s1w}|{b0w}",
            f"s0w|s1w|b0w={s0w}|{s1w}|{b0w}",
            f"s0v={NONE_VALUE if s0 is None else _bucket_count(s0n)}",
            f"s1v={NONE_VALUE if s1 is None else _bucket_count(s1n)}",
            f"d01={dist}",
        ]
    raise ValueError(f"unknown template_set {template_set!r}")


def state_atoms(c: Configuration, template_set: str = "full") -> List[int]:
    return [h64(s) for s in state_strings(c, template_set)]


def transition_string(t: Transition) -> str:
    if t.kind == SHIFT:
        return "t=S"
    return f"t=L:{t.label}" if t.kind == LEFT_ARC else f"t=R:{t.label}"


_trans_atom_cache: Dict[Transition, int] = {}


def transition_atom(t: Transition) -> int:
    a = _trans_atom_cache.get(t)
    if a is None:
        a = _trans_atom_cache[t] = h64(transition_string(t))
    return a


_label_atom_cache: Dict[Optional[str], int] = {}


def label_atom(label: Optional[str]) -> int:
    a = _label_atom_cache.get(label)
    if a is None:
        a = _label_atom_cache[label] = h64(f"l={SHIFT_LABEL if label is None else label}")
    return a


def _finish(ids) -> Tuple[int, ...]:
    return tuple(sorted(set(ids)))


def baseline_features(
    c: Configuration, t: Transition, template_set: str = "full"
) -> Tuple[int, ...]:
    """Sorted, deduplicated feature ids of the baseline templates conjoined
    with the transition."""
    ta = transition_atom(t)
    return _finish(combine(a, ta) for a in state_atoms(c, template_set))


def _class_for_head(c: Configuration, token: int, head: int, d: DLMTable) -> str:
    """Bucket class of the (head, previous children, token) event built from
    the dependents of head already present in c.arcs."""
    units = _unit_array(c.sentence, d.unit_mode)
    if token < head:
        side = LEFT
        deps = [dep for h, dep, _ in c.arcs if h == head and token < dep < head]
    else:
        side = RIGHT
        deps = [dep for h, dep, _ in c.arcs if h == head and head < dep < token]
    deps.sort(key=lambda dep: -abs(dep - head))
    picked = deps[: d.order - 1]
    key = NGramKey(
        order=d.order,
        side=side,
        head_unit=units[head],
        prev_units=pad_prev([units[dep] for dep in picked], d.order),
        child_unit=units[token],
    )
    return lookup(d, key)


def dlm_class(
    c: Configuration,
    token: int,
    d: DLMTable,
    candidate: Optional[Tuple[int, str]] = None,
) -> str:
    """Bucket class of a token under a DLM table.

    With a candidate (head, label) overlay the token is classed as a
    hypothetical child of that head; otherwise its head in c.arcs is used;
    a token with no head yet is PU.
    """
    if candidate is not None:
        return _class_for_head(c, token, candidate[0], d)
    head = c.head_of(token)
    if head is None:
        return PU
    return _class_for_head(c, token, head, d)


def _phi_pair(c: Configuration, kind: str, d: DLMTable) -> Tuple[str, str]:
    s0, s1 = c.s0, c.s1

    def existing(tok: Optional[int]) -> str:
        if tok is None:
            return PU
        head = c.head_of(tok)
        return PU if head is None else _class_for_head(c, tok, head, d)

    if kind == LEFT_ARC:
        return existing(s0), _class_for_head(c, s1, s0, d)
    if kind == RIGHT_ARC:
        return _class_for_head(c, s0, s1, d), existing(s1)
    return existing(s0), existing(s1)


def dlm_state_strings(c: Configuration, kind: str, ds: DLMSet) -> List[str]:
    """The seven per-table DLM template strings for a transition kind; the
    label is attached separately."""
    words, poss = _word_pos_arrays(c.sentence)
    s0, s1 = c.s0, c.s1
    s0w = NONE_VALUE if s0 is None else words[s0]
    s0p = NONE_VALUE if s0 is None else poss[s0]
    s1w = NONE_VALUE if s1 is None else words[s1]
    s1p = NONE_VALUE if s1 is None else poss[s1]
    out = []
    for no, d in enumerate(ds.tables):
        phi0, phi1 = _phi_pair(c, kind, d)
        head = f"D{no}"
        out.extend(
            (
                f"{head}:c={phi0}|{phi1}",
                f"{head}:cp0={phi0}|{phi1}|{s0p}",
                f"{head}:cw0={phi0}|{phi1}|{s0w}",
                f"{head}:cp1={phi0}|{phi1}|{s1p}",
                f"{head}:cw1={phi0}|{phi1}|{s1w}",
                f"{head}:cpp={phi0}|{phi1}|{s0p}|{s1p}",
                f"{head}:cww={phi0}|{phi1}|{s0w}|{s1w}",
            )
        )
    return out


def dlm_state_atoms(c: Configuration, kind: str, ds: DLMSet) -> List[int]:
    return [h64(s) for s in dlm_state_strings(c, kind, ds)]


def dlm_features(
    c: Configuration,
    t: Transition,
    ds: DLMSet,
    dlm_on_shift: bool = True,
) -> Tuple[int, ...]:
    """Sorted ids of the DLM templates for a scored transition: exactly
    7 * len(ds) ids, or none for SHIFT when dlm_on_shift is off."""
    if not ds.tables or (t.kind == SHIFT and not dlm_on_shift):
        return ()
    la = label_atom(t.label)
    return _finish(combine(a, la) for a in dlm_state_atoms(c, t.kind, ds))


def features(
    c: Configuration,
    t: Transition,
    ds: Optional[DLMSet] = None,
    template_set: str = "full",
    dlm_on_shift: bool = True,
) -> Tuple[int, ...]:
    """Baseline plus DLM feature ids; with no DLM set this is exactly the
    baseline vector."""
    base = baseline_features(c, t, template_set)
    if ds is None or not ds.tables:
        return base
    return _finish(base + dlm_features(c, t, ds, dlm_on_shift))


def explain_features(
    c: Configuration,
    t: Transition,
    ds: Optional[DLMSet] = None,
    template_set: str = "full",
    dlm_on_shift: bool = True,
) -> List[Tuple[str, int]]:
    """(full template identity, feature id) pairs, for collision audits."""
    ts = transition_string(t)
    ta = transition_atom(t)
    out = [(f"{s} & {ts}", combine(h64(s), ta)) for s in state_strings(c, template_set)]
    if ds is not None and ds.tables and not (t.kind == SHIFT and not dlm_on_shift):
        ls = f"l={SHIFT_LABEL if t.label is None else t.label}"
        la = label_atom(t.label)
        out.extend(
            (f"{s} & {ls}", combine(h64(s), la))
            for s in dlm_state_strings(c, t.kind, ds)
        )
    return out
