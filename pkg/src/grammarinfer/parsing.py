"""Earley recognition and seeded random sampling for arbitrary CFGs.

The recognizer is scannerless: terminals are matched as literal substrings
of the input at whatever position the chart reaches, so it decides exact
membership in the string language of the grammar (multi-character
terminals, ambiguity, left/right recursion and unit cycles all included).

Sampling uses numpy's PCG64 bit generator (O'Neill's permuted congruential
generator, 128-bit state, XSL-RR output) seeded with ``rng_seed``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grammar import Grammar, Nonterminal, Terminal


class SamplingError(RuntimeError):
    """The grammar did not yield a bounded derivation within the attempt budget."""


@dataclass(frozen=True)
class SamplerConfig:
    rng_seed: int = 0
    max_depth: int = 50
    max_attempts: int = 1000
    max_symbols: int = 20000
    max_repeat: int = 3

    def __post_init__(self):
        if self.max_depth < 1 or self.max_attempts < 1:
            raise ValueError("max_depth and max_attempts must be >= 1")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


class Recognizer:
    """Precompiled Earley recognizer; reuse it when checking many strings."""

    def __init__(self, g: Grammar):
        self.grammar = g
        self.start = g.start
        self.rules = [(r.lhs, r.rhs) for r in g.rules]
        self.by_lhs = {}
        for idx, (lhs, _) in enumerate(self.rules):
            self.by_lhs.setdefault(lhs, []).append(idx)

    def _scan(self, sym, text, i):
        if isinstance(sym, Terminal):
            if text.startswith(sym.text, i):
                yield i + len(sym.text)
        elif i < len(text) and text[i] in sym.chars:
            j = i + 1
            yield j
            if sym.repeat:
                chars = sym.chars
                while j < len(text) and text[j] in chars:
                    j += 1
                    yield j

    def __call__(self, text: str) -> bool:
        n = len(text)
        rules = self.rules
        # chart[i]: set of (rule, dot, origin); waiting[i][nt]: items at i expecting nt
        chart = [set() for _ in range(n + 1)]
        agenda = [[] for _ in range(n + 1)]
        waiting = [dict() for _ in range(n + 1)]

        def add(pos, item):
            if item not in chart[pos]:
                chart[pos].add(item)
                agenda[pos].append(item)

        for r in self.by_lhs.get(self.start, ()):
            add(0, (r, 0, 0))
        for i in range(n + 1):
            work = agenda[i]
            predicted = set()
            while work:
                item = work.pop()
                r, dot, origin = item
                lhs, rhs = rules[r]
                if dot == len(rhs):
                    for (pr, pdot, porigin) in waiting[origin].get(lhs, ()):
                        add(i, (pr, pdot + 1, porigin))
                    continue
                sym = rhs[dot]
                if isinstance(sym, Nonterminal):
                    waiting[i].setdefault(sym.id, []).append(item)
                    if sym.id not in predicted:
                        predicted.add(sym.id)
                        for pr in self.by_lhs.get(sym.id, ()):
                            add(i, (pr, 0, i))
                    # rhs symbols are never nullable, so no completion at i can be missed
                else:
                    for j in self._scan(sym, text, i):
                        add(j, (r, dot + 1, origin))
        return any(
            origin == 0 and dot == len(rules[r][1]) and rules[r][0] == self.start
            for (r, dot, origin) in chart[n]
        )


def recognize(g: Grammar, text: str) -> bool:
    return Recognizer(g)(text)


def _render(sym, rng, max_repeat):
    if isinstance(sym, Terminal):
        return sym.text
    chars = sym.chars
    length = int(rng.integers(1, max_repeat + 1)) if sym.repeat else 1
    return "".join(chars[int(k)] for k in rng.integers(0, len(chars), size=length))


def _derive(table, start, rng, cfg):
    out = []
    stack = [(Nonterminal(start), 0)]
    expanded = 0
    while stack:
        sym, depth = stack.pop()
        if not isinstance(sym, Nonterminal):
            out.append(_render(sym, rng, cfg.max_repeat))
            continue
        if depth >= cfg.max_depth:
            return None
        alts = table[sym.id]
        rhs = alts[int(rng.integers(len(alts)))] if len(alts) > 1 else alts[0]
        expanded += len(rhs)
        if expanded > cfg.max_symbols:
            return None
        stack.extend((s, depth + 1) for s in reversed(rhs))
    return "".join(out)


def sample(g: Grammar, cfg: SamplerConfig = SamplerConfig(), count: int = 1, rng=None) -> list:
    """``count`` strings derived left-to-right with uniform choice among alternatives.

    Derivations deeper than ``max_depth`` (or larger than ``max_symbols``) are
    abandoned and retried, at most ``max_attempts`` times per string.
    """
    table = g.by_lhs()
    rng = rng if rng is not None else make_rng(cfg.rng_seed)
    result = []
    for _ in range(count):
        for _attempt in range(cfg.max_attempts):
            s = _derive(table, g.start, rng, cfg)
            if s is not None:
                result.append(s)
                break
        else:
            raise SamplingError(
                f"no derivation within depth {cfg.max_depth} after {cfg.max_attempts} attempts"
            )
    return result
