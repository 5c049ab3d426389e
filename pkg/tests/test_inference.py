import itertools
import re

import pytest
from hypothesis import given, settings, strategies as st

from grammarinfer.grammar import CharClass, Nonterminal, Rule, Terminal, write_grammar
from grammarinfer.inference import (
    Bubble,
    InferenceConfig,
    InferenceState,
    bubble_order_key,
    check_merge,
    check_sides,
    expand_terminals,
    generate_bubbles,
    infer,
    merge_all_valid,
    merge_labels,
    rank_bubbles,
    reapply_rule,
)
from grammarinfer.oracle import FunctionOracle, GrammarOracle
from grammarinfer.parsing import Recognizer
from grammarinfer.tokenizer import tokenize
from grammarinfer.trees import wrap_free_leaves

from conftest import PAIR_SEEDS, FIXTURES, read_seed_dir

BRACKETS = set("()[]{}")
FLAT = dict(prestructure=False)


def texts(bubbles):
    return ["".join(s.text for s in b.symbols) for b in bubbles]


# --- MergeAllValid -----------------------------------------------------------


def test_mav_merges_skip_into_t0(while_grammar):
    state = InferenceState(PAIR_SEEDS, InferenceConfig(**FLAT))
    merge_all_valid(state, GrammarOracle(while_grammar))
    assert (Terminal("skip"),) in state.grammar().alternatives(0)


def test_mav_merges_bracket_nodes_with_n(while_grammar):
    state = InferenceState(PAIR_SEEDS)
    merge_all_valid(state, GrammarOracle(while_grammar))
    g = state.grammar()
    assert set(g.nonterminals()) == {0, 1}
    assert set(g.alternatives(1)) == {
        (Terminal("n"),),
        tuple(map(Terminal, "(")) + (Nonterminal(1), Terminal("+"), Nonterminal(1), Terminal(")")),
    }


def test_identity_merge_needs_no_queries():
    state = InferenceState(["a+b", "b+a"], InferenceConfig(**FLAT))
    oracle = FunctionOracle(lambda s: False)
    sites = state.index().label_sites[Terminal("a")]
    assert check_sides(state, sites, sites, oracle)
    assert oracle.stats.requests == 0


# --- bubbles -----------------------------------------------------------------


def sibling_lists(text, prestructured):
    """Child texts of every node, from an independent recursive bracket parser."""
    toks = [t.text for t in tokenize(text)]
    if not prestructured:
        return [toks]
    lists = []

    def parse(i, closer):
        kids = []
        while i < len(toks):
            t = toks[i]
            if t in "([{" and len(t) == 1:
                inner, i = parse(i + 1, {"(": ")", "[": "]", "{": "}"}[t])
                kids.append("<node>")
                lists.append([t] + inner)
                continue
            if closer and t == closer:
                kids.append(t)
                return kids, i + 1
            kids.append(t)
            i += 1
        return kids, i

    top, _ = parse(0, None)
    lists.append(top)
    return lists


def brute_bubble_count(children, max_len):
    m = len(children)
    n = 0
    for i, j in itertools.combinations(range(m + 1), 2):
        if j - i < 2 or j - i > max_len or (i, j) == (0, m):
            continue
        if sum(c in BRACKETS for c in children[i:j]) == 1:
            continue
        n += 1
    return n


@settings(max_examples=150, deadline=None)
@given(st.lists(st.sampled_from(["a", "+", "(a)", "(a+a)", "[a]", "b"]), min_size=1, max_size=7),
       st.integers(2, 12), st.booleans())
def test_bubble_occurrences_match_brute_force(parts, max_len, prestructured):
    text = "".join(parts)
    state = InferenceState([text], InferenceConfig(max_bubble_len=max_len, prestructure=prestructured))
    got = sum(b.count for b in generate_bubbles(state))
    want = sum(brute_bubble_count(c, max_len) for c in sibling_lists(text, prestructured))
    assert got == want


def test_flat_count_formula():
    m = 9
    state = InferenceState(["a+b-c*d/e"], InferenceConfig(max_bubble_len=m, **FLAT))
    assert sum(b.count for b in generate_bubbles(state)) == m * (m - 1) // 2 - 1


def test_one_bracket_exclusion():
    state = InferenceState(["(x)"], InferenceConfig(**FLAT))
    assert generate_bubbles(state) == []
    state = InferenceState(["(x)"], InferenceConfig(one_bracket_bubbles=True, **FLAT))
    assert sorted(texts(generate_bubbles(state))) == ["(x", "x)"]


def test_assignment_bubble_after_mav(while_grammar):
    state = InferenceState(PAIR_SEEDS)
    merge_all_valid(state, GrammarOracle(while_grammar))
    by_text = {tuple(b.symbols): b for b in generate_bubbles(state)}
    key = (Terminal("L"), Terminal(" "), Terminal("="), Terminal(" "), Nonterminal(1))
    assert by_text[key].count == 2


# --- ranking -----------------------------------------------------------------


def test_hand_ranked_fixture():
    # trees t0[+ - * /] and t0[+ *], k = 1.  Jaccard scores worked out by hand:
    #   "+-"  context (N | *)  shares it with label "+"  -> 1/2
    #   "-*/" context (+ | N)  shares it with label "*"  -> 1/2
    #   "-*", "*/", "+-*"      no shared context        -> 0
    state = InferenceState(["+-*/", "+*"], InferenceConfig(k=1, **FLAT))
    ranked = rank_bubbles(generate_bubbles(state), state)
    assert texts(c.bubbles[0] for c in ranked) == ["+-", "-*/", "*/", "-*", "+-*"]
    assert [c.bubbles[0].similarity for c in ranked] == [0.5, 0.5, 0.0, 0.0, 0.0]
    old = InferenceState(["+-*/", "+*"], InferenceConfig(k=1, new_ranking=False, **FLAT))
    ranked = rank_bubbles(generate_bubbles(old), old)
    assert texts(c.bubbles[0] for c in ranked) == ["+-", "-*/", "*/", "+-*", "-*"]


def _bubble(symbols, depth, count, sim=0.0, first=(0, 0)):
    b = Bubble(tuple(map(Terminal, symbols)), [None] * count, depth, set(), first, sim)
    return b


def test_depth_then_length_tiebreaks():
    shallow, deep = _bubble("ab", 0, 1), _bubble("cd", 2, 1)
    assert sorted([shallow, deep], key=bubble_order_key)[0] is deep
    short, long = _bubble("ab", 1, 1), _bubble("abcde", 1, 1)
    assert sorted([long, short], key=bubble_order_key)[0] is short


@given(st.permutations(range(6)))
def test_ranking_is_a_total_order(perm):
    pool = [_bubble("ab", 1, 2), _bubble("ab", 1, 2, first=(1, 0)), _bubble("ba", 1, 2),
            _bubble("ab", 2, 1), _bubble("abc", 1, 2), _bubble("x", 0, 9, sim=0.3)]
    base = sorted(pool, key=bubble_order_key)
    assert sorted([pool[i] for i in perm], key=bubble_order_key) == base


def test_two_bubble_candidates_are_opt_in():
    state = InferenceState(["+-*/", "+*"], InferenceConfig(k=1, **FLAT))
    assert all(len(c.bubbles) == 1 for c in rank_bubbles(generate_bubbles(state), state))
    state = InferenceState(["+-*/", "+*"], InferenceConfig(k=1, two_bubbles=True, **FLAT))
    ranked = rank_bubbles(generate_bubbles(state), state)
    assert sum(len(c.bubbles) == 2 for c in ranked) == 10


# --- check_merge and rollback ------------------------------------------------


def test_rejected_merges_leave_trees_identical(while_grammar):
    oracle = GrammarOracle(while_grammar)
    state = InferenceState(PAIR_SEEDS, InferenceConfig(**FLAT))
    merge_all_valid(state, oracle)
    index = state.index()
    rejected = 0
    for cand in rank_bubbles(generate_bubbles(state, index), state, index):
        for target in cand.targets:
            before = state.signature()
            if check_merge(state, cand, target, oracle, index) is not None:
                return
            assert state.signature() == before
            rejected += 1
    assert rejected > 0


def test_while_n_merge_is_rejected(while_grammar):
    state = InferenceState(PAIR_SEEDS, InferenceConfig(**FLAT))
    oracle = GrammarOracle(while_grammar)
    idx = state.index()
    assert not check_sides(state, idx.label_sites[Terminal("while")], idx.label_sites[Terminal("n")], oracle)
    # the first failing check stops the merge; one substitution direction gives "L = while"
    assert list(oracle.cache.values()) == [False]
    assert not oracle("L = while")


def test_accepted_merge_preserves_seeds(while_grammar):
    oracle = GrammarOracle(while_grammar)
    state = InferenceState(PAIR_SEEDS)
    merge_all_valid(state, oracle)
    index = state.index()
    for cand in rank_bubbles(generate_bubbles(state, index), state, index):
        rules = None
        for target in cand.targets:
            rules = check_merge(state, cand, target, oracle, index)
            if rules:
                break
        if rules:
            break
    accept = Recognizer(state.grammar())
    assert all(map(accept, PAIR_SEEDS))
    assert [t.text() for t in state.trees] == PAIR_SEEDS


# --- reapply -----------------------------------------------------------------

PAREN_RULE = Rule(1, (Terminal("("), Nonterminal(1), Terminal("+"), Nonterminal(1), Terminal(")")))


def test_reapply_to_fixpoint():
    state = InferenceState(["((((n+n)+n)+n)+n)"], InferenceConfig(**FLAT))
    wrap_free_leaves(state.trees, Terminal("n"), Nonterminal(1))
    # the outermost pair is the root's whole child list, so three wraps
    assert reapply_rule(state, PAREN_RULE) == 3
    assert state.stats.reapply_count == 3
    before = state.signature()
    assert reapply_rule(state, PAREN_RULE) == 0
    assert state.signature() == before
    assert state.trees[0].text() == "((((n+n)+n)+n)+n)"


def test_reapply_without_match():
    state = InferenceState(["skip"], InferenceConfig(**FLAT))
    before = state.signature()
    assert reapply_rule(state, PAREN_RULE) == 0
    assert state.signature() == before


# --- terminal expansion ------------------------------------------------------


def _digit_state():
    state = InferenceState(["a=1", "a=2"], InferenceConfig(**FLAT))
    merge_labels(state, Terminal("1"), Terminal("2"))
    return state


@pytest.mark.parametrize("pattern, expected", [
    (r"a=\d", CharClass("digit", False)),
    (r"a=\d+", CharClass("digit", True)),
    (r"a=\w+", CharClass("alnum", True)),
])
def test_expand_digits(pattern, expected):
    state = _digit_state()
    oracle = FunctionOracle(lambda s: re.fullmatch(pattern, s) is not None)
    nt = state.grammar().nonterminals()[-1]
    assert expand_terminals(state, oracle) == {nt: expected}
    assert state.grammar().alternatives(nt) == [(expected,)]


def test_no_expansion_when_oracle_refuses():
    state = _digit_state()
    assert expand_terminals(state, FunctionOracle(lambda s: s in ("a=1", "a=2"))) == {}


def test_keyword_not_expanded(while_grammar):
    state = InferenceState(["while true do skip"], InferenceConfig(**FLAT))
    wrap_free_leaves(state.trees, Terminal("while"), state.fresh())
    assert expand_terminals(state, GrammarOracle(while_grammar)) == {}


def test_nothing_to_expand(while_grammar):
    state = InferenceState(PAIR_SEEDS, InferenceConfig(**FLAT))
    before = state.signature()
    assert expand_terminals(state, GrammarOracle(while_grammar)) == {}
    assert state.signature() == before


# --- driver ------------------------------------------------------------------


def test_single_seed_does_not_generalize():
    g, stats = infer(["x"], FunctionOracle(lambda s: s == "x"))
    assert write_grammar(g) == 't0 : "x" ;\n'
    assert stats.merges_accepted == 0


def test_config_validation():
    for bad in (dict(k=0), dict(max_bubble_len=1), dict(top_candidates=0), dict(check_budget_per_side=0)):
        with pytest.raises(ValueError):
            InferenceConfig(**bad)


def test_query_accounting_matches_oracle(while_grammar):
    oracle = GrammarOracle(while_grammar)
    oracle("skip")  # earlier traffic must not be attributed to the run
    _, stats = infer(PAIR_SEEDS, oracle)
    assert stats.queries == oracle.stats.queries - 1


@pytest.mark.parametrize("lang", ["while", "json", "lisp"])
def test_seeds_stay_derivable(lang):
    from grammarinfer.grammar import load_grammar
    seeds = read_seed_dir(FIXTURES / lang / "seeds")
    g, _ = infer(seeds, GrammarOracle(load_grammar(FIXTURES / f"{lang}.g")))
    accept = Recognizer(g)
    assert all(map(accept, seeds))


@pytest.mark.parametrize("flags", [dict(partial_merge=True), dict(two_bubbles=True),
                                   dict(one_bracket_bubbles=True), dict(reapply=False)])
def test_ablations_stay_sound(while_grammar, flags):
    g, _ = infer(PAIR_SEEDS, GrammarOracle(while_grammar), InferenceConfig(**flags))
    accept = Recognizer(g)
    assert all(map(accept, PAIR_SEEDS))
