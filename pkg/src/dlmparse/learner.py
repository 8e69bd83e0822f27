"""Beam-search decoding and averaged structured-perceptron training.

Training uses early update: a sentence is decoded against its gold
transition sequence, and at the first beam step where the gold prefix is
pruned the weights are updated with the feature difference between the
gold prefix and the best surviving item.  If the gold sequence survives to
the end without ranking first, the update uses the full sequences.
Weights are averaged over every processed sentence; decoding uses the
averaged weights by default.

Candidate transitions are enumerated as SHIFT, then LEFT_ARC for each
label in alphabet order, then RIGHT_ARC likewise; beam pruning sorts by
descending score with earlier-generated candidates winning ties, which
makes decoding deterministic.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import IO, Callable, Dict, List, Optional, Sequence, Tuple

from .conll import Sentence, Treebank, is_projective
from .dlm import UNIT_MODES
from .features import (
    DLMSet,
    TEMPLATE_SETS,
    combine,
    dlm_state_atoms,
    label_atom,
    state_atoms,
    transition_atom,
)
from .transitions import (
    LEFT_ARC,
    RIGHT_ARC,
    SHIFT,
    Configuration,
    Transition,
    apply,
    arcs_to_sentence,
    initial,
    legal,
    oracle,
)

MODEL_FORMAT = "dlmparse-model"
MODEL_VERSION = 1


class TrainingError(RuntimeError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass
class TrainConfig:
    beam_width: int = 40
    epochs: int = 10
    seed: int = 1
    shuffle: bool = True
    dlm_on_shift: bool = True
    template_set: str = "full"

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.template_set not in TEMPLATE_SETS:
            raise ValueError(f"unknown template_set {self.template_set!r}")


@dataclass
class Model:
    weights: Dict[int, float] = field(default_factory=dict)
    averaged_weights: Dict[int, float] = field(default_factory=dict)
    labels: List[str] = field(default_factory=list)
    config: Dict[str, object] = field(default_factory=dict)
    dlm_manifest: List[Tuple[int, str]] = field(default_factory=list)

    def weight_table(self, averaged: bool) -> Dict[int, float]:
        return self.averaged_weights if averaged else self.weights


@dataclass
class BeamItem:
    config: Configuration
    history: Tuple[Transition, ...]
    score: float
    is_gold: bool = field(default=False, compare=False)
    _atoms: Optional[List[int]] = field(default=None, compare=False, repr=False)
    _dlm_atoms: Optional[Dict[str, List[int]]] = field(
        default=None, compare=False, repr=False
    )


def score(m: Model, fv: Sequence[int], averaged: bool = False) -> float:
    """Dot product of a feature vector with the (averaged) weights."""
    w = m.weight_table(averaged)
    return sum(w.get(f, 0.0) for f in fv)


def transition_inventory(labels: Sequence[str]) -> List[Transition]:
    out = [Transition(SHIFT)]
    out.extend(Transition(LEFT_ARC, lab) for lab in labels)
    out.extend(Transition(RIGHT_ARC, lab) for lab in labels)
    return out


def _item_atoms(item: BeamItem, template_set: str) -> List[int]:
    if item._atoms is None:
        item._atoms = state_atoms(item.config, template_set)
    return item._atoms


def _item_dlm_atoms(item: BeamItem, kind: str, ds: DLMSet) -> List[int]:
    if item._dlm_atoms is None:
        item._dlm_atoms = {}
    atoms = item._dlm_atoms.get(kind)
    if atoms is None:
        atoms = item._dlm_atoms[kind] = dlm_state_atoms(item.config, kind, ds)
    return atoms


def transition_feature_ids(
    c_or_item,
    t: Transition,
    ds: Optional[DLMSet],
    template_set: str,
    dlm_on_shift: bool,
) -> Tuple[int, ...]:
    """Sorted, deduplicated ids for one scored transition; accepts either a
    Configuration or a BeamItem (which caches its state atoms)."""
    if isinstance(c_or_item, BeamItem):
        atoms = _item_atoms(c_or_item, template_set)
        ta = transition_atom(t)
        ids = [combine(a, ta) for a in atoms]
        if ds is not None and ds.tables and not (t.kind == SHIFT and not dlm_on_shift):
            la = label_atom(t.label)
            ids.extend(combine(a, la) for a in _item_dlm_atoms(c_or_item, t.kind, ds))
        return tuple(sorted(set(ids)))
    item = BeamItem(config=c_or_item, history=(), score=0.0)
    return transition_feature_ids(item, t, ds, template_set, dlm_on_shift)


def _expand(
    beam: List[BeamItem],
    inventory: Sequence[Transition],
    weights: Dict[int, float],
    beam_width: int,
    ds: Optional[DLMSet],
    template_set: str,
    dlm_on_shift: bool,
    gold_next: Optional[Transition] = None,
) -> List[BeamItem]:
    """One synchronized beam step: expand every item with every legal
    transition, keep the top beam_width by score (stable on ties)."""
    candidates: List[Tuple[float, int, BeamItem, Transition]] = []
    for item in beam:
        kinds = legal(item.config)
        for t in inventory:
            if t.kind not in kinds:
                continue
            fids = transition_feature_ids(item, t, ds, template_set, dlm_on_shift)
            sc = item.score + sum(weights.get(f, 0.0) for f in fids)
            candidates.append((sc, len(candidates), item, t))
    candidates.sort(key=lambda cand: (-cand[0], cand[1]))
    out = []
    for sc, _, item, t in candidates[:beam_width]:
        out.append(
            BeamItem(
                config=apply(item.config, t),
                history=item.history + (t,),
                score=sc,
                is_gold=item.is_gold and gold_next is not None and t == gold_next,
            )
        )
    return out


def decode(
    m: Model,
    s: Sentence,
    beam_width: Optional[int] = None,
    ds: Optional[DLMSet] = None,
    averaged: bool = True,
) -> Tuple[Sentence, BeamItem]:
    """Beam-decode one sentence; returns the predicted tree and the winning
    beam item.  Decoding is total: any sentence yields a valid projective
    tree after exactly 2n steps."""
    width = beam_width if beam_width is not None else int(m.config.get("beam_width", 1))
    _check_dlms(m, ds)
    weights = m.weight_table(averaged)
    template_set = str(m.config.get("template_set", "full"))
    dlm_on_shift = bool(m.config.get("dlm_on_shift", True))
    inventory = transition_inventory(m.labels)
    beam = [BeamItem(config=initial(s), history=(), score=0.0)]
    for _ in range(2 * len(s)):
        beam = _expand(beam, inventory, weights, width, ds, template_set, dlm_on_shift)
    best = beam[0]
    return arcs_to_sentence(s, best.config.arcs), best


def _check_dlms(m: Model, ds: Optional[DLMSet]) -> None:
    want = list(m.config.get("dlm_orders", []))
    got = ds.orders if ds is not None else []
    if want != got:
        raise ValueError(
            f"model was trained with DLM orders {want} but got {got}; "
            "supply the matching DLM tables"
        )


def sequence_feature_counts(
    s: Sentence,
    seq: Sequence[Transition],
    ds: Optional[DLMSet],
    template_set: str,
    dlm_on_shift: bool,
) -> Dict[int, int]:
    """Accumulated per-step feature ids along a transition sequence."""
    counts: Dict[int, int] = {}
    c = initial(s)
    for t in seq:
        for f in transition_feature_ids(c, t, ds, template_set, dlm_on_shift):
            counts[f] = counts.get(f, 0) + 1
        c = apply(c, t)
    return counts


class _AveragedWeights:
    """Perceptron weights with lazily-accumulated averages.

    The vector after processing sentence number i (1-based) contributes one
    term to the average; finalize(total) returns the mean over all totals."""

    def __init__(self):
        self.weights: Dict[int, float] = {}
        self._acc: Dict[int, float] = {}
        self._stamp: Dict[int, int] = {}

    def add(self, fid: int, delta: float, now: int) -> None:
        w = self.weights.get(fid, 0.0)
        self._acc[fid] = self._acc.get(fid, 0.0) + (now - 1 - self._stamp.get(fid, 0)) * w
        self._stamp[fid] = now - 1
        self.weights[fid] = w + delta

    def finalize(self, total: int) -> Dict[int, float]:
        if total <= 0:
            return {}
        out = {}
        for fid, w in self.weights.items():
            acc = self._acc.get(fid, 0.0) + (total - self._stamp.get(fid, 0)) * w
            if acc != 0.0:
                out[fid] = acc / total
        return out


@dataclass
class SentenceUpdate:
    """Outcome of one training sentence, for tests and diagnostics."""

    updated: bool
    early: bool
    step: int  # steps taken before the update (== 2n when none)
    gold_seq: Tuple[Transition, ...] = ()
    best_seq: Tuple[Transition, ...] = ()


def _train_sentence(
    s: Sentence,
    gold_seq: Sequence[Transition],
    avg: _AveragedWeights,
    now: int,
    inventory: Sequence[Transition],
    cfg: TrainConfig,
    ds: Optional[DLMSet],
) -> SentenceUpdate:
    beam = [BeamItem(config=initial(s), history=(), score=0.0, is_gold=True)]
    for k, gold_t in enumerate(gold_seq):
        beam = _expand(
            beam,
            inventory,
            avg.weights,
            cfg.beam_width,
            ds,
            cfg.template_set,
            cfg.dlm_on_shift,
            gold_next=gold_t,
        )
        if not any(item.is_gold for item in beam):
            gold_prefix = tuple(gold_seq[: k + 1])
            _apply_update(s, gold_prefix, beam[0].history, avg, now, cfg, ds)
            return SentenceUpdate(
                updated=True,
                early=True,
                step=k + 1,
                gold_seq=gold_prefix,
                best_seq=beam[0].history,
            )
    best = beam[0]
    if not best.is_gold:
        _apply_update(s, gold_seq, best.history, avg, now, cfg, ds)
        return SentenceUpdate(
            updated=True,
            early=False,
            step=len(gold_seq),
            gold_seq=tuple(gold_seq),
            best_seq=best.history,
        )
    return SentenceUpdate(updated=False, early=False, step=len(gold_seq))


def _apply_update(
    s: Sentence,
    gold_seq: Sequence[Transition],
    pred_seq: Sequence[Transition],
    avg: _AveragedWeights,
    now: int,
    cfg: TrainConfig,
    ds: Optional[DLMSet],
) -> None:
    gold_counts = sequence_feature_counts(s, gold_seq, ds, cfg.template_set, cfg.dlm_on_shift)
    pred_counts = sequence_feature_counts(s, pred_seq, ds, cfg.template_set, cfg.dlm_on_shift)
    delta: Dict[int, int] = dict(gold_counts)
    for f, n in pred_counts.items():
        delta[f] = delta.get(f, 0) - n
    for f in sorted(delta):
        if delta[f]:
            avg.add(f, float(delta[f]), now)


def train(
    tb: Treebank,
    cfg: TrainConfig,
    ds: Optional[DLMSet] = None,
    progress: Optional[Callable[[Dict[str, object]], None]] = None,
) -> Model:
    """Averaged perceptron with early update over the usable sentences of a
    treebank.  Non-projective and multi-root sentences are skipped and
    reported through the progress callback.  Deterministic for a fixed
    seed; training stops early once an epoch makes no updates."""
    usable: List[Tuple[Sentence, List[Transition]]] = []
    skipped_nonproj = 0
    skipped_multiroot = 0
    for s in tb:
        if sum(1 for t in s.tokens if t.head == 0) > 1:
            skipped_multiroot += 1
            continue
        if not is_projective(s):
            skipped_nonproj += 1
            continue
        usable.append((s, oracle(s)))
    if progress is not None:
        progress(
            {
                "event": "start",
                "usable": len(usable),
                "skipped_nonprojective": skipped_nonproj,
                "skipped_multiroot": skipped_multiroot,
            }
        )
    if not usable:
        raise TrainingError(
            "no usable training sentences (all non-projective or multi-root)"
        )

    labels = sorted({t.deprel for s, _ in usable for t in s.tokens})
    inventory = transition_inventory(labels)
    avg = _AveragedWeights()
    rng = random.Random(cfg.seed)
    now = 0
    epochs_run = 0
    for epoch in range(1, cfg.epochs + 1):
        order = list(range(len(usable)))
        if cfg.shuffle:
            rng.shuffle(order)
        updates = 0
        early = 0
        for idx in order:
            s, gold_seq = usable[idx]
            now += 1
            res = _train_sentence(s, gold_seq, avg, now, inventory, cfg, ds)
            if res.updated:
                updates += 1
                if res.early:
                    early += 1
        epochs_run = epoch
        if progress is not None:
            progress(
                {
                    "event": "epoch",
                    "epoch": epoch,
                    "updates": updates,
                    "early_updates": early,
                    "exact_match": (len(usable) - updates) / len(usable),
                }
            )
        if updates == 0:
            break

    model = Model(
        weights=avg.weights,
        averaged_weights=avg.finalize(now),
        labels=labels,
        config={
            "beam_width": cfg.beam_width,
            "epochs": cfg.epochs,
            "epochs_run": epochs_run,
            "seed": cfg.seed,
            "shuffle": cfg.shuffle,
            "dlm_on_shift": cfg.dlm_on_shift,
            "template_set": cfg.template_set,
            "unit_mode": ds.unit_mode if ds is not None else "form",
            "dlm_orders": ds.orders if ds is not None else [],
        },
        dlm_manifest=[],
    )
    return model


def save_model(m: Model, stream: IO[str]) -> None:
    """Versioned JSON container; weights are keyed by decimal feature id and
    serialize exactly (shortest round-trip float representation)."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "config": m.config,
        "labels": m.labels,
        "dlm_manifest": [[o, digest] for o, digest in m.dlm_manifest],
        "weights": {
            str(f): [m.weights.get(f, 0.0), m.averaged_weights.get(f, 0.0)]
            for f in sorted(set(m.weights) | set(m.averaged_weights))
            if m.weights.get(f, 0.0) != 0.0 or m.averaged_weights.get(f, 0.0) != 0.0
        },
    }
    json.dump(doc, stream, sort_keys=True, separators=(",", ":"))
    stream.write("\n")


def load_model(stream: IO[str]) -> Model:
    try:
        doc = json.load(stream)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not a model file: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError("missing model format marker")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"unsupported model version {doc.get('version')!r}, expected {MODEL_VERSION}"
        )
    weights = {}
    averaged = {}
    for key, pair in doc["weights"].items():
        fid = int(key)
        w, aw = pair
        if w != 0.0:
            weights[fid] = w
        if aw != 0.0:
            averaged[fid] = aw
    cfg = doc["config"]
    if cfg.get("unit_mode") not in UNIT_MODES:
        raise ModelFormatError(f"bad unit_mode in model config: {cfg.get('unit_mode')!r}")
    return Model(
        weights=weights,
        averaged_weights=averaged,
        labels=list(doc["labels"]),
        config=cfg,
        dlm_manifest=[(int(o), str(digest)) for o, digest in doc["dlm_manifest"]],
    )


def save_model_file(m: Model, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        save_model(m, f)


def load_model_file(path) -> Model:
    with open(path, encoding="utf-8") as f:
        return load_model(f)
