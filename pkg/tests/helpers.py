"""Shared test utilities: independent brute-force oracles and random data.

These deliberately do not reuse the library's own traversal helpers; they
re-derive the same definitions from scratch so the production code is
checked against a second route.
"""

from __future__ import annotations

import random
from functools import lru_cache
from typing import Dict, Iterator, List, Tuple

from dlmparse.conll import Sentence, Token, Treebank


def make_sentence(heads, forms=None, deprels=None, poss=None) -> Sentence:
    n = len(heads)
    forms = forms or [f"w{i}" for i in range(1, n + 1)]
    deprels = deprels or ["dep"] * n
    poss = poss or ["X"] * n
    return Sentence(
        tuple(
            Token(
                id=i + 1,
                form=forms[i],
                lemma=forms[i],
                cpos=poss[i],
                pos=poss[i],
                head=heads[i],
                deprel=deprels[i],
            )
            for i in range(n)
        )
    )


def crossing_arcs(heads) -> bool:
    """Brute force: any two arcs (including root arcs) whose spans interleave."""
    arcs = [(min(h, d), max(h, d)) for d, h in enumerate(heads, start=1)]
    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            (a1, b1), (a2, b2) = arcs[i], arcs[j]
            if a1 < a2 < b1 < b2 or a2 < a1 < b2 < b1:
                return True
    return False


def random_tree_heads(rng: random.Random, n: int) -> List[int]:
    """A uniform-ish random valid tree: attach nodes in a random order, each
    to a random already-attached node (or the root)."""
    order = list(range(1, n + 1))
    rng.shuffle(order)
    heads = [0] * n
    attached = [0]
    for node in order:
        heads[node - 1] = rng.choice(attached)
        attached.append(node)
    return heads


def random_sentence(rng: random.Random, n: int, n_labels: int = 3, vocab: int = 8) -> Sentence:
    heads = random_tree_heads(rng, n)
    forms = [f"w{rng.randrange(vocab)}" for _ in range(n)]
    poss = [f"P{rng.randrange(3)}" for _ in range(n)]
    deprels = [f"l{rng.randrange(n_labels)}" for _ in range(n)]
    return make_sentence(heads, forms=forms, deprels=deprels, poss=poss)


def random_treebank(
    rng: random.Random, n_sentences: int, max_len: int = 12, n_labels: int = 3, vocab: int = 8
) -> Treebank:
    return Treebank(
        sentences=[
            random_sentence(rng, rng.randint(1, max_len), n_labels, vocab)
            for _ in range(n_sentences)
        ]
    )


def enumerate_projective_heads(n: int) -> Iterator[Tuple[int, ...]]:
    """All projective trees over n tokens (multi-root included), generated
    span-recursively, so every yielded head array is projective and valid by
    construction."""

    @lru_cache(maxsize=None)
    def subtrees(lo: int, hi: int) -> List[Tuple[int, Dict[int, int]]]:
        # All (root, head assignment of the other span nodes) over [lo, hi].
        out = []
        for r in range(lo, hi + 1):
            for left in forests(lo, r - 1):
                for right in forests(r + 1, hi):
                    heads = dict(left)
                    heads.update(right)
                    out.append((r, heads))
        return out

    @lru_cache(maxsize=None)
    def forests(lo: int, hi: int) -> List[Dict[int, int]]:
        # All head assignments of [lo, hi] as a sequence of complete
        # subtrees whose roots point at... nothing yet; roots map to None.
        if lo > hi:
            return [{}]
        out = []
        for mid in range(lo, hi + 1):
            for root, heads in subtrees(lo, mid):
                for rest in forests(mid + 1, hi):
                    combined = dict(heads)
                    combined[root] = None
                    combined.update(rest)
                    out.append(combined)
        return out

    for assignment in forests(1, n):
        heads = [0] * n
        for node, h in assignment.items():
            heads[node - 1] = 0 if h is None else h
        yield tuple(heads)


def _forest_roots(assignment: Dict[int, int]) -> List[int]:
    return [node for node, h in assignment.items() if h is None]


def brute_dlm_counts(tb: Treebank, order: int, unit_mode: str) -> Dict[Tuple, int]:
    """Independent event counter: for every token, siblings are re-derived
    by scanning the whole sentence; returns counts keyed by plain tuples
    (side, head_unit, prev_units, child_unit)."""

    def unit(s: Sentence, idx: int) -> str:
        if idx == 0:
            return "<ROOT>"
        tok = s[idx - 1]
        if unit_mode == "form":
            return tok.form.lower()
        if unit_mode == "pos":
            return tok.pos
        return f"{tok.form.lower()}/{tok.pos}"

    counts: Dict[Tuple, int] = {}
    for s in tb:
        for tok in s.tokens:
            h = tok.head
            side = "L" if tok.id < h else "R"
            closer = []
            for other in s.tokens:
                if other.id == tok.id or other.head != h:
                    continue
                same_side = (other.id < h) == (tok.id < h)
                if same_side and abs(other.id - h) < abs(tok.id - h):
                    closer.append(other.id)
            closer.sort(key=lambda d: abs(d - h))  # nearest to the head first
            picked = closer[-(order - 1):] if order > 1 else []
            picked.reverse()  # decreasing distance: nearest to the head last
            units = [unit(s, d) for d in picked]
            prev = tuple(["<S>"] * (order - 1 - len(units)) + units)
            key = (side, unit(s, h), prev, unit(s, tok.id))
            counts[key] = counts.get(key, 0) + 1
    return counts
