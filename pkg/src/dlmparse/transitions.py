"""Arc-standard labeled transition system.

A configuration is (stack, buffer, arcs) over token indices, with the
artificial root 0 at the stack bottom.  LEFT_ARC attaches the second-top
of the stack to the top and pops it; RIGHT_ARC attaches the top to the
second-top and pops it; SHIFT moves the buffer front onto the stack.
Every sequence of 2n legal transitions over an n-token sentence ends in
the terminal configuration (stack == [0], empty buffer) and its arc set
is a valid projective tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Sequence, Tuple

from .conll import ROOT, Sentence, is_projective

SHIFT = "SHIFT"
LEFT_ARC = "LEFT_ARC"
RIGHT_ARC = "RIGHT_ARC"

Arc = Tuple[int, int, str]  # (head, dependent, label)


class OracleError(ValueError):
    """Raised when no oracle transition applies (non-projective input)."""


@dataclass(frozen=True, slots=True)
class Transition:
    kind: str
    label: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (SHIFT, LEFT_ARC, RIGHT_ARC):
            raise ValueError(f"unknown transition kind {self.kind!r}")
        if self.kind == SHIFT and self.label is not None:
            raise ValueError("SHIFT carries no label")
        if self.kind != SHIFT and self.label is None:
            raise ValueError(f"{self.kind} requires a label")

    def __str__(self) -> str:
        return self.kind if self.kind == SHIFT else f"{self.kind}({self.label})"


@dataclass(frozen=True, slots=True)
class Configuration:
    stack: Tuple[int, ...]
    buffer: Tuple[int, ...]
    arcs: Tuple[Arc, ...]
    sentence: Sentence

    @property
    def s0(self) -> Optional[int]:
        return self.stack[-1] if self.stack else None

    @property
    def s1(self) -> Optional[int]:
        return self.stack[-2] if len(self.stack) >= 2 else None

    def head_of(self, dep: int) -> Optional[int]:
        for h, d, _ in self.arcs:
            if d == dep:
                return h
        return None

    def dependents_of(self, head: int) -> List[int]:
        return sorted(d for h, d, _ in self.arcs if h == head)


def initial(s: Sentence) -> Configuration:
    return Configuration(
        stack=(ROOT,),
        buffer=tuple(range(1, len(s) + 1)),
        arcs=(),
        sentence=s,
    )


def is_terminal(c: Configuration) -> bool:
    return not c.buffer and c.stack == (ROOT,)


def legal(c: Configuration) -> FrozenSet[str]:
    """The set of transition kinds applicable in c."""
    kinds = set()
    if c.buffer:
        kinds.add(SHIFT)
    if len(c.stack) >= 2:
        kinds.add(RIGHT_ARC)
        if c.stack[-2] != ROOT:
            kinds.add(LEFT_ARC)
    return frozenset(kinds)


def apply(c: Configuration, t: Transition) -> Configuration:
    """Apply t to c, returning a new configuration; c is never mutated."""
    if t.kind not in legal(c):
        raise ValueError(f"illegal transition {t} in configuration {c.stack}/{c.buffer}")
    if t.kind == SHIFT:
        return Configuration(
            stack=c.stack + (c.buffer[0],),
            buffer=c.buffer[1:],
            arcs=c.arcs,
            sentence=c.sentence,
        )
    s0, s1 = c.stack[-1], c.stack[-2]
    if t.kind == LEFT_ARC:
        # s1 becomes a dependent of s0 and is removed from the stack.
        return Configuration(
            stack=c.stack[:-2] + (s0,),
            buffer=c.buffer,
            arcs=c.arcs + ((s0, s1, t.label),),
            sentence=c.sentence,
        )
    # RIGHT_ARC: s0 becomes a dependent of s1 and is popped.
    return Configuration(
        stack=c.stack[:-1],
        buffer=c.buffer,
        arcs=c.arcs + ((s1, s0, t.label),),
        sentence=c.sentence,
    )


def oracle(s: Sentence) -> List[Transition]:
    """Static oracle: the transition sequence reconstructing the gold tree.

    Rule, with stack height >= 2: LEFT_ARC if the gold head of s1 is s0;
    else RIGHT_ARC if the gold head of s0 is s1 and all gold dependents of
    s0 are attached already; else SHIFT.  Requires a projective input tree.
    """
    if not is_projective(s):
        raise OracleError("oracle requires a projective gold tree")
    heads = (None,) + s.heads  # heads[i] = gold head of token i
    labels = (None,) + s.deprels
    n_gold_deps = [0] * (len(s) + 1)
    for h in s.heads:
        n_gold_deps[h] += 1

    c = initial(s)
    seq: List[Transition] = []
    attached = [0] * (len(s) + 1)  # dependents attached so far, per head
    while not is_terminal(c):
        t = None
        if len(c.stack) >= 2:
            s0, s1 = c.stack[-1], c.stack[-2]
            if s1 != ROOT and heads[s1] == s0:
                t = Transition(LEFT_ARC, labels[s1])
                attached[s0] += 1
            elif heads[s0] == s1 and attached[s0] == n_gold_deps[s0]:
                t = Transition(RIGHT_ARC, labels[s0])
                attached[s1] += 1
        if t is None:
            if not c.buffer:
                raise OracleError(
                    f"oracle is stuck at stack {c.stack} with an empty buffer"
                )
            t = Transition(SHIFT)
        seq.append(t)
        c = apply(c, t)
    return seq


def replay(s: Sentence, seq: Sequence[Transition]) -> Configuration:
    """Apply a transition sequence from the initial configuration of s."""
    c = initial(s)
    for t in seq:
        c = apply(c, t)
    return c


def arcs_to_sentence(s: Sentence, arcs: Sequence[Arc]) -> Sentence:
    """Copy s with heads/labels taken from a complete arc set."""
    heads = [0] * len(s)
    deprels = ["root"] * len(s)
    for h, d, label in arcs:
        heads[d - 1] = h
        deprels[d - 1] = label
    return s.with_arcs(heads, deprels)
