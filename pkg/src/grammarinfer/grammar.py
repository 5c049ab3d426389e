"""Grammar and parse-tree data model, grammar extraction and the text format.

Grammar files hold one alternative per line::

    t0 : "while" " " t1 " " "do" " " t0 ;
    t1 : [digit]+ ;

Nonterminals are written ``t<k>``.  Terminals are double-quoted with ``\\"``
and ``\\\\`` escapes (plus ``\\n``, ``\\t``, ``\\r`` for control whitespace).
Character-class terminals produced by terminal expansion are written
``[name]`` (one character) or ``[name]+`` (one or more).  ``#`` starts a
comment line.  A ``%start tK`` line is emitted only when the start symbol is
not the lowest-numbered nonterminal.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional, Union


class Nonterminal(NamedTuple):
    id: int

    def __str__(self):
        return f"t{self.id}"


class Terminal(NamedTuple):
    text: str

    def __str__(self):
        return quote(self.text)


CHAR_CLASSES = {
    "lower": string.ascii_lowercase,
    "upper": string.ascii_uppercase,
    "digit": string.digits,
    "space": string.whitespace,
    "alnum": string.ascii_letters + string.digits,
}


class CharClass(NamedTuple):
    """A terminal matching one (or, with ``repeat``, one or more) characters of a class."""

    name: str
    repeat: bool

    @property
    def chars(self) -> str:
        return CHAR_CLASSES[self.name]

    def __str__(self):
        return f"[{self.name}]" + ("+" if self.repeat else "")


Symbol = Union[Nonterminal, Terminal, CharClass]


def symbol_key(sym: Symbol):
    """Total-order key over symbols: nonterminals by id, then terminals, then classes."""
    if isinstance(sym, Nonterminal):
        return (0, sym.id, "")
    if isinstance(sym, Terminal):
        return (1, 0, sym.text)
    return (2, int(sym.repeat), sym.name)


class Rule(NamedTuple):
    lhs: int
    rhs: tuple

    def __str__(self):
        return f"t{self.lhs} : " + " ".join(str(s) for s in self.rhs) + " ;"


def rule_key(rule: Rule):
    return (rule.lhs, tuple(symbol_key(s) for s in rule.rhs))


class GrammarError(ValueError):
    """Malformed grammar text or an invalid grammar value."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Grammar:
    start: int
    rules: tuple

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(sorted(set(self.rules), key=rule_key)))

    def alternatives(self, lhs: int) -> list:
        return [r.rhs for r in self.rules if r.lhs == lhs]

    def by_lhs(self) -> dict:
        table = {}
        for r in self.rules:
            table.setdefault(r.lhs, []).append(r.rhs)
        return table

    def nonterminals(self) -> list:
        return sorted({r.lhs for r in self.rules})

    def terminals(self) -> set:
        return {s for r in self.rules for s in r.rhs if not isinstance(s, Nonterminal)}

    def validate(self):
        defined = {r.lhs for r in self.rules}
        if self.start not in defined:
            raise GrammarError(f"start symbol t{self.start} has no rule")
        for r in self.rules:
            if not r.rhs:
                raise GrammarError(f"empty alternative for t{r.lhs}")
            for s in r.rhs:
                if isinstance(s, Nonterminal) and s.id not in defined:
                    raise GrammarError(f"t{s.id} is used but never defined")
                if isinstance(s, Terminal) and not s.text:
                    raise GrammarError("empty terminal")
        return self

    def __str__(self):
        return write_grammar(self)


@dataclass(frozen=True)
class GrammarStats:
    nonterminal_count: int
    terminal_count: int
    alternative_count: int
    size: int

    @property
    def mean_rule_length(self) -> float:
        return self.size / self.alternative_count if self.alternative_count else 0.0

    def as_dict(self):
        return {
            "NT": self.nonterminal_count,
            "T": self.terminal_count,
            "A": self.alternative_count,
            "l(A)": self.mean_rule_length,
            "S": self.size,
        }


def grammar_stats(g: Grammar) -> GrammarStats:
    return GrammarStats(
        nonterminal_count=len({r.lhs for r in g.rules}),
        terminal_count=len(g.terminals()),
        alternative_count=len(g.rules),
        size=sum(len(r.rhs) for r in g.rules),
    )


# --- parse trees -----------------------------------------------------------


@dataclass(eq=False)
class TreeNode:
    """Internal node (``symbol`` is a Nonterminal) or leaf (``token`` set, Terminal symbol)."""

    symbol: Symbol
    children: list = field(default_factory=list)
    token: Optional[object] = None

    @classmethod
    def leaf(cls, token) -> "TreeNode":
        return cls(Terminal(token.text), [], token)

    @property
    def is_leaf(self) -> bool:
        return self.token is not None

    def leaves(self) -> Iterator["TreeNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.extend(reversed(node.children))

    def text(self) -> str:
        return "".join(leaf.token.text for leaf in self.leaves())

    def signature(self):
        """Hashable structural fingerprint, used to prove rollbacks are exact."""
        if self.is_leaf:
            return self.token.text
        return (self.symbol.id, tuple(c.signature() for c in self.children))

    def copy(self) -> "TreeNode":
        if self.is_leaf:
            return TreeNode(self.symbol, [], self.token)
        return TreeNode(self.symbol, [c.copy() for c in self.children])

    def __repr__(self):
        if self.is_leaf:
            return repr(self.token.text)
        return f"t{self.symbol.id}[" + " ".join(map(repr, self.children)) + "]"


ParseTree = TreeNode


def extract_grammar(trees: Iterable[TreeNode], start: int = 0) -> Grammar:
    """Each interior node with its child symbols implies one rule; duplicates collapse."""
    rules = set()
    for tree in trees:
        stack = [tree]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                continue
            rules.add(Rule(node.symbol.id, tuple(c.symbol for c in node.children)))
            stack.extend(node.children)
    return Grammar(start, tuple(rules))


# --- text format -----------------------------------------------------------

_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\t": "\\t", "\r": "\\r"}
_UNESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}


def quote(text: str) -> str:
    return '"' + "".join(_ESCAPES.get(c, c) for c in text) + '"'


def write_grammar(g: Grammar) -> str:
    lines = []
    if g.rules and g.rules[0].lhs != g.start:
        lines.append(f"%start t{g.start}")
    lines.extend(str(r) for r in g.rules)
    return "\n".join(lines) + "\n"


_NT_RE = re.compile(r"t(\d+)\b")
_CLASS_RE = re.compile(r"\[([a-z]+)\](\+?)")


def _parse_symbols(body: str, lineno: int) -> list:
    syms = []
    i = 0
    while i < len(body):
        c = body[i]
        if c in " \t":
            i += 1
        elif c == '"':
            i += 1
            buf = []
            while True:
                if i >= len(body):
                    raise GrammarError("unterminated string", lineno)
                c = body[i]
                if c == '"':
                    i += 1
                    break
                if c == "\\":
                    if i + 1 >= len(body) or body[i + 1] not in _UNESCAPES:
                        raise GrammarError("bad escape", lineno)
                    buf.append(_UNESCAPES[body[i + 1]])
                    i += 2
                else:
                    buf.append(c)
                    i += 1
            if not buf:
                raise GrammarError("empty terminal", lineno)
            syms.append(Terminal("".join(buf)))
        elif m := _NT_RE.match(body, i):
            syms.append(Nonterminal(int(m.group(1))))
            i = m.end()
        elif m := _CLASS_RE.match(body, i):
            if m.group(1) not in CHAR_CLASSES:
                raise GrammarError(f"unknown character class {m.group(1)!r}", lineno)
            syms.append(CharClass(m.group(1), bool(m.group(2))))
            i = m.end()
        else:
            raise GrammarError(f"unexpected character {c!r}", lineno)
    return syms


def read_grammar(text: str) -> Grammar:
    rules = []
    start = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("%start"):
            m = _NT_RE.fullmatch(line[len("%start"):].strip())
            if not m:
                raise GrammarError("bad %start directive", lineno)
            start = int(m.group(1))
            continue
        m = re.match(r"t(\d+)\s*:", line)
        if not m:
            raise GrammarError("expected 't<k> :'", lineno)
        if not line.endswith(";"):
            raise GrammarError("missing ';'", lineno)
        rhs = _parse_symbols(line[m.end():-1], lineno)
        if not rhs:
            raise GrammarError("empty alternative", lineno)
        rules.append(Rule(int(m.group(1)), tuple(rhs)))
    if not rules:
        raise GrammarError("no rules")
    if start is None:
        start = min(r.lhs for r in rules)
    return Grammar(start, tuple(rules)).validate()


def load_grammar(path) -> Grammar:
    with open(path, encoding="utf-8") as f:
        return read_grammar(f.read())
