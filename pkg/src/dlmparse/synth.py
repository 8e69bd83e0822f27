"""Synthetic projective treebanks from a fixed head-outward grammar.

The grammar generates clauses with a verb root: a subject noun phrase and
an optional pre-verbal adverb on the left; an optional object noun phrase
on the right, or (only when there is no object) a verb-attached
prepositional phrase.  Noun phrases take an optional determiner and up to
two adjectives on the left; the object noun phrase may take a
prepositional phrase on the right, which always attaches to that noun.
Attachment is therefore a deterministic function of the part-of-speech
sequence, so the trees are learnable to high accuracy; lexical choice is
uniform per category, which leaves room for models that generalize over
word pairs.  All trees are projective and single-rooted by construction.

Word forms are synthetic ("nn07", "vb03", ...), one disjoint vocabulary
per part of speech, with sizes set by GrammarConfig.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .conll import Sentence, Token, Treebank

POS_TAGS = ("NN", "VB", "JJ", "DT", "IN", "RB")

DEFAULT_VOCAB = {"NN": 20, "VB": 12, "JJ": 8, "DT": 4, "IN": 5, "RB": 5}


@dataclass
class GrammarConfig:
    vocab: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_VOCAB))
    p_det: float = 0.55
    p_adj: Tuple[float, float, float] = (0.55, 0.30, 0.15)  # 0, 1 or 2 adjectives
    p_advmod: float = 0.30
    p_object: float = 0.75
    p_np_pp: float = 0.30  # prepositional phrase under the object noun
    p_verb_pp: float = 0.35  # verb-attached PP, only without an object


@dataclass
class _Node:
    pos: str
    form: str
    label: str
    left: List["_Node"] = field(default_factory=list)
    right: List["_Node"] = field(default_factory=list)


def _pick(rng: random.Random, cfg: GrammarConfig, pos: str) -> str:
    return f"{pos.lower()}{rng.randrange(cfg.vocab[pos]):02d}"


def _np(rng: random.Random, cfg: GrammarConfig, label: str, allow_pp: bool) -> _Node:
    noun = _Node(pos="NN", form=_pick(rng, cfg, "NN"), label=label)
    if rng.random() < cfg.p_det:
        noun.left.append(_Node(pos="DT", form=_pick(rng, cfg, "DT"), label="det"))
    r = rng.random()
    n_adj = 0 if r < cfg.p_adj[0] else 1 if r < cfg.p_adj[0] + cfg.p_adj[1] else 2
    for _ in range(n_adj):
        noun.left.append(_Node(pos="JJ", form=_pick(rng, cfg, "JJ"), label="amod"))
    if allow_pp and rng.random() < cfg.p_np_pp:
        noun.right.append(_pp(rng, cfg))
    return noun


def _pp(rng: random.Random, cfg: GrammarConfig) -> _Node:
    prep = _Node(pos="IN", form=_pick(rng, cfg, "IN"), label="prep")
    prep.right.append(_np(rng, cfg, label="pobj", allow_pp=False))
    return prep


def _clause(rng: random.Random, cfg: GrammarConfig) -> _Node:
    verb = _Node(pos="VB", form=_pick(rng, cfg, "VB"), label="root")
    verb.left.append(_np(rng, cfg, label="nsubj", allow_pp=False))
    if rng.random() < cfg.p_advmod:
        verb.left.append(_Node(pos="RB", form=_pick(rng, cfg, "RB"), label="advmod"))
    if rng.random() < cfg.p_object:
        verb.right.append(_np(rng, cfg, label="dobj", allow_pp=True))
    elif rng.random() < cfg.p_verb_pp:
        verb.right.append(_pp(rng, cfg))
    return verb


def _linearize(node: _Node, tokens: List[Tuple[_Node, Optional[_Node]]], parent) -> None:
    for child in node.left:
        _linearize(child, tokens, node)
    tokens.append((node, parent))
    for child in node.right:
        _linearize(child, tokens, node)


def generate_sentence(rng: random.Random, cfg: Optional[GrammarConfig] = None) -> Sentence:
    cfg = cfg or GrammarConfig()
    root = _clause(rng, cfg)
    ordered: List[Tuple[_Node, Optional[_Node]]] = []
    _linearize(root, ordered, None)
    position = {id(node): i + 1 for i, (node, _) in enumerate(ordered)}
    tokens = []
    for i, (node, parent) in enumerate(ordered):
        tokens.append(
            Token(
                id=i + 1,
                form=node.form,
                lemma=node.form,
                cpos=node.pos,
                pos=node.pos,
                head=position[id(parent)] if parent is not None else 0,
                deprel=node.label,
            )
        )
    return Sentence(tuple(tokens))


def generate_corpus(
    n_sentences: int,
    seed: int,
    cfg: Optional[GrammarConfig] = None,
    source_tag: str = "synthetic",
) -> Treebank:
    """Deterministic corpus of n_sentences clauses from the fixed grammar."""
    rng = random.Random(seed)
    cfg = cfg or GrammarConfig()
    return Treebank(
        sentences=[generate_sentence(rng, cfg) for _ in range(n_sentences)],
        source_tag=source_tag,
    )


def _descendants(heads: Tuple[int, ...], node: int) -> set:
    out = set()
    frontier = [node]
    while frontier:
        cur = frontier.pop()
        for d in range(1, len(heads) + 1):
            if heads[d - 1] == cur and d not in out:
                out.add(d)
                frontier.append(d)
    return out


def corrupt_heads(tb: Treebank, rate: float, seed: int) -> Treebank:
    """Independently reattach each token's head with probability rate,
    choosing uniformly among attachments that keep the sentence a valid
    tree.  Labels are left unchanged; results may be non-projective."""
    rng = random.Random(seed)
    out = []
    for s in tb:
        heads = list(s.heads)
        for i in range(1, len(s) + 1):
            if rng.random() >= rate:
                continue
            blocked = _descendants(tuple(heads), i)
            blocked.add(i)
            blocked.add(heads[i - 1])
            candidates = [h for h in range(0, len(s) + 1) if h not in blocked]
            if candidates:
                heads[i - 1] = rng.choice(candidates)
        out.append(s.with_arcs(heads, s.deprels))
    return Treebank(sentences=out, source_tag=f"{tb.source_tag}+noise")
