"""Deterministic grammar inference from seed programs and a membership oracle.

The loop works on one parse tree per seed.  Merging two labels, or grouping
a run of siblings (a *bubble*) under an existing label, generalizes the
grammar implied by the trees; each such step is kept only if the oracle
accepts every check program built by cross-substituting the two sides.

Bubble ranking: Jaccard similarity of the bubble's (left, right) k-context
set against the best existing label, then deeper bubbles first, then more
occurrences, then shorter, then symbol sequence, then first position.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from .grammar import CharClass, Grammar, Nonterminal, Rule, Terminal, extract_grammar, symbol_key
from .parsing import _render, make_rng
from .prestructure import BracketConfig, build_trees
from .tokenizer import DEFAULT_QUOTES, tokenize
from .trees import (
    TreeIndex,
    collapse,
    context_of,
    find_runs,
    relabel,
    select_disjoint,
    wrap_free_leaves,
    wrap_spans,
)

log = logging.getLogger(__name__)


@dataclass
class InferenceConfig:
    k: int = 2
    max_bubble_len: int = 10
    top_candidates: int = 100
    check_budget_per_side: int = 50
    expand_samples: int = 10
    rng_seed: int = 0
    prestructure: bool = True
    reapply: bool = True
    partial_merge: bool = False
    one_bracket_bubbles: bool = False
    new_ranking: bool = True
    two_bubbles: bool = False
    expand: bool = True
    brackets: BracketConfig = field(default_factory=BracketConfig)
    quote_chars: frozenset = DEFAULT_QUOTES

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_bubble_len < 2:
            raise ValueError("max_bubble_len must be >= 2")
        if self.top_candidates < 1 or self.check_budget_per_side < 1:
            raise ValueError("budgets must be >= 1")


@dataclass
class InferenceStats:
    merges_accepted: int = 0
    merges_rejected: int = 0
    reapply_count: int = 0
    epochs: int = 0
    first_epoch_bubbles: Optional[int] = None
    first_epoch_time: Optional[float] = None
    time_total: float = 0.0
    time_bubbles: float = 0.0
    time_sampling: float = 0.0
    time_oracle: float = 0.0
    queries: int = 0
    cache_hits: int = 0
    timeouts: int = 0
    expanded: dict = field(default_factory=dict)
    reapplied: dict = field(default_factory=dict)  # rule text -> wraps

    def as_dict(self):
        return {
            "merges_accepted": self.merges_accepted,
            "merges_rejected": self.merges_rejected,
            "rc": self.reapply_count,
            "epochs": self.epochs,
            "first_epoch_bubbles": self.first_epoch_bubbles,
            "q": self.queries,
            "cache_hits": self.cache_hits,
            "timeouts": self.timeouts,
            "t": self.time_total,
            "t_O": self.time_oracle,
            "t_B": self.time_bubbles,
            "t_S": self.time_sampling,
            "reapplied": dict(self.reapplied),
            "expanded_terminals": {f"t{k}": str(v) for k, v in sorted(self.expanded.items())},
        }


class InferenceState:
    def __init__(self, seeds, config: InferenceConfig = None):
        self.config = config or InferenceConfig()
        self.seeds = list(seeds)
        if not self.seeds or any(not s for s in self.seeds):
            raise ValueError("seeds must be a non-empty list of non-empty programs")
        tokens = [tokenize(s, self.config.quote_chars) for s in self.seeds]
        self.trees, self.next_id = build_trees(
            tokens, self.config.brackets, enabled=self.config.prestructure
        )
        self.stats = InferenceStats()
        self.expansions = {}

    def fresh(self) -> Nonterminal:
        nt = Nonterminal(self.next_id)
        self.next_id += 1
        return nt

    def index(self) -> TreeIndex:
        return TreeIndex(self.trees, self.config.k)

    def grammar(self) -> Grammar:
        g = extract_grammar(self.trees)
        if not self.expansions:
            return g
        rules = [r for r in g.rules if r.lhs not in self.expansions]
        rules += [Rule(nt, (cls,)) for nt, cls in self.expansions.items()]
        return Grammar(g.start, tuple(rules))

    def signature(self):
        return tuple(t.signature() for t in self.trees)


# --- checking ----------------------------------------------------------------


def _substitutions(state, sites, expansions, rng, budget):
    """Programs with one site replaced by one expansion; at most ``budget`` of them."""
    total = len(sites) * len(expansions)
    if total == 0:
        return []
    if total > budget:
        picks = sorted(int(x) for x in rng.choice(total, size=budget, replace=False))
    else:
        picks = range(total)
    out = []
    for p in picks:
        ti, start, end = sites[p // len(expansions)]
        seed = state.seeds[ti]
        program = seed[:start] + expansions[p % len(expansions)] + seed[end:]
        if program != seed:
            out.append(program)
    return out


def _expansions(state, sites):
    return list(dict.fromkeys(state.seeds[ti][s:e] for ti, s, e in sites))


def check_sides(state, side_a, side_b, oracle) -> bool:
    """True iff the oracle accepts every sampled cross-substitution of the two sides."""
    if side_a == side_b:
        return True  # identity merge
    t0 = time.perf_counter()
    budget = state.config.check_budget_per_side
    rng = make_rng(state.config.rng_seed)
    programs = _substitutions(state, side_a, _expansions(state, side_b), rng, budget)
    programs += _substitutions(state, side_b, _expansions(state, side_a), rng, budget)
    programs = list(dict.fromkeys(programs))
    state.stats.time_sampling += time.perf_counter() - t0
    t0 = time.perf_counter()
    try:
        return all(oracle.query(p) for p in programs)
    finally:
        state.stats.time_oracle += time.perf_counter() - t0


def merge_labels(state, a, b):
    """Make labels ``a`` and ``b`` one nonterminal in the trees; returns it."""
    if isinstance(a, Nonterminal) and isinstance(b, Nonterminal):
        keep, drop = (a, b) if a.id < b.id else (b, a)
        relabel(state.trees, drop, keep)
        result = keep
    elif isinstance(a, Nonterminal) or isinstance(b, Nonterminal):
        result, term = (a, b) if isinstance(a, Nonterminal) else (b, a)
        wrap_free_leaves(state.trees, term, result)
    else:
        result = state.fresh()
        wrap_free_leaves(state.trees, a, result)
        wrap_free_leaves(state.trees, b, result)
    collapse(state.trees)
    return result


def merge_all_valid(state, oracle) -> int:
    """Try to merge every pair of labels, shallowest labels first."""
    accepted = 0
    tried = set()
    while True:
        index = state.index()
        merged = None
        for a, b in combinations(index.labels(), 2):
            if (a, b) in tried:
                continue
            tried.add((a, b))
            if check_sides(state, index.label_sites[a], index.label_sites[b], oracle):
                merged = merge_labels(state, a, b)
                log.debug("merged %s with %s into %s", a, b, merged)
                break
            state.stats.merges_rejected += 1
        if merged is None:
            return accepted
        accepted += 1
        state.stats.merges_accepted += 1
        # the merged label now means something new; let it be paired again
        tried = {p for p in tried if merged not in p}


# --- bubbles -----------------------------------------------------------------


@dataclass(eq=False)
class Bubble:
    symbols: tuple
    occurrences: list = field(default_factory=list)  # (parent, start, length)
    depth: int = 1 << 30
    contexts: set = field(default_factory=set)
    first: tuple = ()
    similarity: float = 0.0

    @property
    def count(self):
        return len(self.occurrences)

    @property
    def key(self):
        return tuple(symbol_key(s) for s in self.symbols)


def generate_bubbles(state, index: TreeIndex = None) -> list:
    """Every sibling run of length 2..max_bubble_len, grouped by symbol sequence.

    Runs spanning a whole child list are skipped (they already form a rule),
    and so are runs holding exactly one bracket unless one-bracket bubbles
    are enabled.
    """
    index = index or state.index()
    cfg = state.config
    bubbles = {}
    for ti, node, depth in index.internal:
        syms = [c.symbol for c in node.children]
        m = len(syms)
        brackets = [0]
        for s in syms:
            brackets.append(brackets[-1] + (isinstance(s, Terminal) and cfg.brackets.is_bracket(s.text)))
        pos = index.order[id(node)]
        for i in range(m):
            for length in range(2, min(cfg.max_bubble_len, m - i) + 1):
                if length == m:
                    continue
                if not cfg.one_bracket_bubbles and brackets[i + length] - brackets[i] == 1:
                    continue
                seq = tuple(syms[i:i + length])
                b = bubbles.get(seq)
                if b is None:
                    b = bubbles[seq] = Bubble(seq, first=(pos, i))
                b.occurrences.append((node, i, length))
                b.contexts.add(context_of(syms, i, length, cfg.k))
                if depth + 1 < b.depth:
                    b.depth = depth + 1
    return list(bubbles.values())


def _similarity(bubbles, index):
    by_context = {}
    for label, ctxs in index.label_contexts.items():
        for c in ctxs:
            by_context.setdefault(c, []).append(label)
    for b in bubbles:
        inter = {}
        for c in b.contexts:
            for label in by_context.get(c, ()):
                inter[label] = inter.get(label, 0) + 1
        best = 0.0
        for label, n in inter.items():
            union = len(b.contexts) + len(index.label_contexts[label]) - n
            best = max(best, n / union)
        b.similarity = best


def bubble_order_key(b: Bubble, new_ranking=True):
    if new_ranking:
        return (-b.similarity, -b.depth, -b.count, len(b.symbols), b.key, b.first)
    return (-b.similarity, -b.count, b.key, b.first)


@dataclass
class MergeCandidate:
    bubbles: tuple
    targets: list  # labels, for single bubbles; empty for 2-bubbles


def rank_bubbles(bubbles, state, index: TreeIndex = None) -> list:
    """Order bubbles and pair the best with merge targets; 2-bubbles follow."""
    index = index or state.index()
    _similarity(bubbles, index)
    ordered = sorted(bubbles, key=lambda b: bubble_order_key(b, state.config.new_ranking))
    top = ordered[: state.config.top_candidates]
    targets = index.labels()
    singles = [MergeCandidate((b,), targets) for b in top]
    if not state.config.two_bubbles:
        return singles
    pairs = sorted(combinations(range(len(top)), 2), key=lambda p: (p[0] + p[1], p))
    return singles + [MergeCandidate((top[i], top[j]), []) for i, j in pairs]


def _spans(index, occurrences):
    return [index.occurrence_span(p, i, n) for p, i, n in occurrences]


def _wrapped_rule(nodes):
    node = nodes[0]
    return Rule(node.symbol.id, tuple(c.symbol for c in node.children))


def check_merge(state, candidate: MergeCandidate, target, oracle, index: TreeIndex = None,
                instance=None):
    """Check one merge; on acceptance apply it and return the learned rules, else None.

    ``target`` is a label for single bubbles (``None`` for 2-bubbles).
    ``instance`` restricts a terminal target to one of its leaves (partial merge).
    Nothing is modified unless the merge is accepted.
    """
    index = index or state.index()
    bubble = candidate.bubbles[0]
    taken = {}
    occ = select_disjoint(bubble.occurrences, taken)
    if len(candidate.bubbles) == 2:
        other = select_disjoint(candidate.bubbles[1].occurrences, taken)
        if not other:
            return None
        side_b = _spans(index, other)
    elif instance is not None:
        other = [index.label_nodes[target][instance]]
        side_b = [index.label_sites[target][instance]]
    else:
        side_b = index.label_sites[target]
    side_a = _spans(index, occ)
    if not check_sides(state, side_a, side_b, oracle):
        state.stats.merges_rejected += 1
        return None
    state.stats.merges_accepted += 1
    if len(candidate.bubbles) == 2:
        label = state.fresh()
        # one call, so runs sharing a parent are wrapped right to left
        wrap_spans(occ + other, label)
        collapse(state.trees)
        return [Rule(label.id, b.symbols) for b in candidate.bubbles]
    if isinstance(target, Nonterminal):
        created = wrap_spans(occ, target)
    else:
        label = state.fresh()
        created = wrap_spans(occ, label)
        wrap_free_leaves(state.trees, target, label,
                         only=set(other) if instance is not None else None)
    collapse(state.trees)
    return [_wrapped_rule(created)]


def reapply_rule(state, rule: Rule) -> int:
    """Wrap every further sibling run equal to ``rule.rhs`` under ``rule.lhs``, to fixpoint.

    No oracle queries; the rule was already accepted.
    """
    label = Nonterminal(rule.lhs)
    count = 0
    while True:
        runs = find_runs(state.trees, rule.rhs)
        if not runs:
            break
        wrap_spans(runs, label)
        count += len(runs)
    if count:
        collapse(state.trees)
    state.stats.reapply_count += count
    if count:
        key = str(rule)
        state.stats.reapplied[key] = state.stats.reapplied.get(key, 0) + count
    return count


def _try_candidates(state, candidates, oracle, index):
    for cand in candidates:
        if len(cand.bubbles) == 2:
            rules = check_merge(state, cand, None, oracle, index)
            if rules:
                return rules
            continue
        for target in cand.targets:
            rules = check_merge(state, cand, target, oracle, index)
            if rules:
                return rules
        if state.config.partial_merge:
            for target in cand.targets:
                if not (isinstance(target, Terminal) and len(target.text) == 1):
                    continue
                for inst in range(len(index.label_sites[target])):
                    rules = check_merge(state, cand, target, oracle, index, instance=inst)
                    if rules:
                        return rules
    return None


def bubble_epoch(state, oracle) -> bool:
    """Rank bubbles once and apply the first accepted merge; False when none is."""
    state.stats.epochs += 1
    t0 = time.perf_counter()
    index = state.index()
    bubbles = generate_bubbles(state, index)
    candidates = rank_bubbles(bubbles, state, index)
    elapsed = time.perf_counter() - t0
    state.stats.time_bubbles += elapsed
    if state.stats.first_epoch_bubbles is None:
        state.stats.first_epoch_bubbles = sum(b.count for b in bubbles)
        state.stats.first_epoch_time = elapsed
    rules = _try_candidates(state, candidates, oracle, index)
    if not rules:
        return False
    log.debug("epoch %d learned %s", state.stats.epochs, ", ".join(map(str, rules)))
    if state.config.reapply:
        for rule in rules:
            reapply_rule(state, rule)
    return True


# --- terminal expansion ------------------------------------------------------

_TEXT_CLASSES = ("lower", "upper", "digit", "space")


def _class_of(text):
    for name in _TEXT_CLASSES:
        chars = CharClass(name, False).chars
        if all(c in chars for c in text):
            return name
    return None


def expansion_candidates(texts):
    """Character classes to try, least general first."""
    classes = {_class_of(t) for t in texts}
    if len(classes) != 1 or None in classes:
        return []
    name = classes.pop()
    out = []
    if all(len(t) == 1 for t in texts):
        out.append(CharClass(name, False))
    out.append(CharClass(name, True))
    if name != "space":
        out.append(CharClass("alnum", True))
    return out


def expand_terminals(state, oracle) -> dict:
    """Widen all-terminal nonterminals to the most general class the oracle accepts."""
    g = extract_grammar(state.trees)
    index = state.index()
    for nt in g.nonterminals():
        alts = g.alternatives(nt)
        if not all(len(rhs) == 1 and isinstance(rhs[0], Terminal) for rhs in alts):
            continue
        sites = index.label_sites.get(Nonterminal(nt))
        if not sites:
            continue
        adopted = None
        for cls in expansion_candidates([rhs[0].text for rhs in alts]):
            rng = make_rng(state.config.rng_seed)
            programs = []
            for _ in range(state.config.expand_samples):
                ti, start, end = sites[int(rng.integers(len(sites)))]
                seed = state.seeds[ti]
                programs.append(seed[:start] + _render(cls, rng, 3) + seed[end:])
            t0 = time.perf_counter()
            ok = all(oracle.query(p) for p in programs)
            state.stats.time_oracle += time.perf_counter() - t0
            if ok:
                adopted = cls
        if adopted is not None:
            state.expansions[nt] = adopted
    state.stats.expanded = dict(state.expansions)
    return state.expansions


# --- driver ------------------------------------------------------------------


def infer(seeds, oracle, config: InferenceConfig = None):
    """Infer a grammar for ``seeds``; returns (grammar, stats)."""
    started = time.perf_counter()
    base = (oracle.stats.queries, oracle.stats.cache_hits, oracle.stats.timeouts)
    state = InferenceState(seeds, config)
    oracle.check_seeds(state.seeds)
    merge_all_valid(state, oracle)
    while True:
        while bubble_epoch(state, oracle):
            pass
        if merge_all_valid(state, oracle) == 0:
            break
    if state.config.expand:
        expand_terminals(state, oracle)
    stats = state.stats
    stats.queries = oracle.stats.queries - base[0]
    stats.cache_hits = oracle.stats.cache_hits - base[1]
    stats.timeouts = oracle.stats.timeouts - base[2]
    stats.time_total = time.perf_counter() - started
    return state.grammar(), stats
