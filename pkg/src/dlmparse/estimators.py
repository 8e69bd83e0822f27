"""Scikit-learn style estimator facade.

BeamParser is fit/predict shaped over sentences (a Treebank or any
iterable of Sentence objects carrying gold heads for fit); its
hyperparameters follow the scikit-learn convention so get_params,
set_params and clone work.  DependencyLanguageModel is fit/transform
shaped: fit builds the bucketed table from parsed sentences, transform
maps each token of parsed input to its bucket class.
"""

from __future__ import annotations

from typing import Iterable, List, Optional, Sequence, Union

from sklearn.base import BaseEstimator, TransformerMixin

from . import dlm as dlm_mod
from .conll import Sentence, Treebank
from .features import DLMSet
from .learner import Model, TrainConfig, decode, train

Corpus = Union[Treebank, Iterable[Sentence]]


def as_treebank(X: Corpus) -> Treebank:
    if isinstance(X, Treebank):
        return X
    return Treebank(sentences=list(X))


class DependencyLanguageModel(BaseEstimator, TransformerMixin):
    """N-gram dependency language model with rank-bucketed probabilities."""

    def __init__(self, order: int = 1, unit_mode: str = "form", min_count: int = 3):
        self.order = order
        self.unit_mode = unit_mode
        self.min_count = min_count

    def fit(self, X: Corpus, y=None):
        self.table_ = dlm_mod.build(
            as_treebank(X), self.order, self.unit_mode, self.min_count
        )
        return self

    def transform(self, X: Corpus) -> List[List[str]]:
        """Bucket class of every token's own attachment event, per sentence."""
        out = []
        for s in as_treebank(X):
            keys = dlm_mod.extract_events(s, self.order, self.unit_mode)
            out.append([dlm_mod.lookup(self.table_, k) for k in keys])
        return out

    def lookup(self, key: dlm_mod.NGramKey) -> str:
        return dlm_mod.lookup(self.table_, key)

    def save(self, path) -> None:
        dlm_mod.save_file(self.table_, path)

    @classmethod
    def from_file(cls, path) -> "DependencyLanguageModel":
        table = dlm_mod.load_file(path)
        est = cls(order=table.order, unit_mode=table.unit_mode, min_count=table.min_count)
        est.table_ = table
        return est


def _as_dlm_set(dlms) -> Optional[DLMSet]:
    if dlms is None:
        return None
    if isinstance(dlms, DLMSet):
        return dlms
    tables = []
    for d in dlms:
        if isinstance(d, DependencyLanguageModel):
            tables.append(d.table_)
        elif isinstance(d, dlm_mod.DLMTable):
            tables.append(d)
        else:
            tables.append(dlm_mod.load_file(d))
    return DLMSet(tables=tables)


class BeamParser(BaseEstimator):
    """Beam-search transition parser trained with an averaged perceptron.

    Parameters mirror TrainConfig; dlms is an optional sequence of DLM
    tables (DLMTable, fitted DependencyLanguageModel, or file path) whose
    bucket classes are added as features.
    """

    def __init__(
        self,
        beam_width: int = 40,
        epochs: int = 10,
        seed: int = 1,
        shuffle: bool = True,
        dlms=None,
        dlm_on_shift: bool = True,
        template_set: str = "full",
    ):
        self.beam_width = beam_width
        self.epochs = epochs
        self.seed = seed
        self.shuffle = shuffle
        self.dlms = dlms
        self.dlm_on_shift = dlm_on_shift
        self.template_set = template_set

    def _config(self) -> TrainConfig:
        return TrainConfig(
            beam_width=self.beam_width,
            epochs=self.epochs,
            seed=self.seed,
            shuffle=self.shuffle,
            dlm_on_shift=self.dlm_on_shift,
            template_set=self.template_set,
        )

    def fit(self, X: Corpus, y=None, progress=None):
        """Train on gold-annotated sentences; y is ignored (gold arcs live
        on the sentences themselves)."""
        self.dlm_set_ = _as_dlm_set(self.dlms)
        self.model_ = train(as_treebank(X), self._config(), self.dlm_set_, progress)
        return self

    def predict(self, X: Corpus, beam_width: Optional[int] = None) -> List[Sentence]:
        return [
            decode(self.model_, s, beam_width, self.dlm_set_, averaged=True)[0]
            for s in as_treebank(X)
        ]

    def score(self, X: Corpus, y=None) -> float:
        """Labeled attachment accuracy in [0, 1] over all tokens of X."""
        gold = as_treebank(X)
        correct = total = 0
        for g, p in zip(gold, self.predict(gold)):
            for tg, tp in zip(g.tokens, p.tokens):
                total += 1
                if tg.head == tp.head and tg.deprel == tp.deprel:
                    correct += 1
        return correct / total if total else 1.0
