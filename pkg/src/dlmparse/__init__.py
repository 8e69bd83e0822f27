"""Transition-based dependency parsing with dependency language model features."""

from .agreement import AgreementReport, agree, filter_agreement
from .conll import (
    AlignmentError,
    ConllParseError,
    Sentence,
    Token,
    Treebank,
    TreeValidationError,
    is_projective,
    read_conll,
    read_conll_file,
    write_conll,
    write_conll_file,
)
from .dlm import DLMTable, NGramKey, assign_buckets, build, extract_events, lookup
from .estimators import BeamParser, DependencyLanguageModel
from .evaluation import EvalReport, evaluate
from .features import DLMSet, baseline_features, dlm_class, dlm_features
from .learner import (
    Model,
    TrainConfig,
    decode,
    load_model,
    load_model_file,
    save_model,
    save_model_file,
    train,
)
from .transitions import Configuration, Transition, initial, is_terminal, legal, oracle

__version__ = "0.1.0"

__all__ = [
    "AgreementReport",
    "AlignmentError",
    "BeamParser",
    "Configuration",
    "ConllParseError",
    "DLMSet",
    "DLMTable",
    "DependencyLanguageModel",
    "EvalReport",
    "Model",
    "NGramKey",
    "Sentence",
    "Token",
    "TrainConfig",
    "Transition",
    "Treebank",
    "TreeValidationError",
    "agree",
    "assign_buckets",
    "baseline_features",
    "build",
    "decode",
    "dlm_class",
    "dlm_features",
    "evaluate",
    "extract_events",
    "filter_agreement",
    "initial",
    "is_projective",
    "is_terminal",
    "legal",
    "load_model",
    "load_model_file",
    "lookup",
    "oracle",
    "read_conll",
    "read_conll_file",
    "save_model",
    "save_model_file",
    "train",
    "write_conll",
    "write_conll_file",
]
