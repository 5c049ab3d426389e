"""Deterministic black-box context-free grammar inference."""

from .evaluation import EvalReport, evaluate, f1, precision, recall
from .grammar import (
    CharClass,
    Grammar,
    GrammarError,
    GrammarStats,
    Nonterminal,
    Rule,
    Terminal,
    TreeNode,
    extract_grammar,
    grammar_stats,
    load_grammar,
    read_grammar,
    write_grammar,
)
from .inference import InferenceConfig, InferenceStats, infer
from .oracle import CommandOracle, FunctionOracle, GrammarOracle, Oracle
from .parsing import Recognizer, SamplerConfig, recognize, sample
from .tokenizer import Token, TokenKind, tokenize

__version__ = "0.1.0"

__all__ = [
    "CharClass", "CommandOracle", "EvalReport", "FunctionOracle", "Grammar", "GrammarError",
    "GrammarOracle", "GrammarStats", "InferenceConfig", "InferenceStats", "Nonterminal", "Oracle",
    "Recognizer", "Rule", "SamplerConfig", "Terminal", "Token", "TokenKind", "TreeNode",
    "evaluate", "extract_grammar", "f1", "grammar_stats", "infer", "load_grammar", "precision",
    "read_grammar", "recall", "recognize", "sample", "tokenize", "write_grammar",
]
