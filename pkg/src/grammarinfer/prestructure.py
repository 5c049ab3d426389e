"""Initial parse trees that follow bracket nesting."""

from itertools import count

from .grammar import Nonterminal, TreeNode
from .tokenizer import TokenKind

DEFAULT_BRACKETS = {"(": ")", "[": "]", "{": "}"}


class BracketConfig:
    def __init__(self, pairs=None):
        self.pairs = dict(DEFAULT_BRACKETS if pairs is None else pairs)
        openers, closers = set(self.pairs), set(self.pairs.values())
        if openers & closers:
            raise ValueError("openers and closers must be disjoint")
        if any(len(c) != 1 for c in openers | closers):
            raise ValueError("brackets must be single characters")
        self.closers = closers

    def is_bracket(self, text: str) -> bool:
        return text in self.pairs or text in self.closers


def flat_tree(tokens) -> TreeNode:
    return TreeNode(Nonterminal(0), [TreeNode.leaf(t) for t in tokens])


def prestructure(tokens, cfg: BracketConfig = None, ids=None) -> TreeNode:
    """One stack pass: each bracketed span becomes a node with a fresh nonterminal.

    ``ids`` is an iterator of fresh nonterminal ids shared across programs,
    so numbering continues from one seed to the next.  Any mismatch makes
    the whole program fall back to a flat tree, and no ids are consumed.
    """
    if not tokens:
        raise ValueError("cannot build a tree for an empty program")
    cfg = cfg or BracketConfig()
    root = TreeNode(Nonterminal(0))
    stack = [(root, None)]
    opened = []
    for tok in tokens:
        is_punct = tok.kind is TokenKind.PUNCT
        if is_punct and tok.text in cfg.pairs:
            node = TreeNode(None, [TreeNode.leaf(tok)])
            stack[-1][0].children.append(node)
            stack.append((node, cfg.pairs[tok.text]))
            opened.append(node)
        elif is_punct and tok.text in cfg.closers:
            if len(stack) == 1 or stack[-1][1] != tok.text:
                return flat_tree(tokens)
            stack[-1][0].children.append(TreeNode.leaf(tok))
            stack.pop()
        else:
            stack[-1][0].children.append(TreeNode.leaf(tok))
    if len(stack) > 1:
        return flat_tree(tokens)
    ids = ids if ids is not None else count(1)
    for node in opened:
        node.symbol = Nonterminal(next(ids))
    return root


def build_trees(token_seqs, cfg: BracketConfig = None, enabled=True):
    """Trees for every program in order; returns (trees, next free nonterminal id)."""
    ids = count(1)
    trees = [prestructure(toks, cfg, ids) if enabled else flat_tree(toks) for toks in token_seqs]
    return trees, next(ids)
