"""Precision, recall and F1 of an inferred grammar, plus report files.

Precision samples the inferred grammar and asks the oracle; recall runs the
inferred grammar's recognizer over golden test programs.  An oracle timeout
is a rejection, never an acceptance, and the report says how many there were.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .grammar import Grammar, GrammarStats, grammar_stats
from .parsing import Recognizer, SamplerConfig, sample

DEFAULT_SAMPLES = 1000
DEFAULT_TESTS = 1000


def escape_program(text: str) -> str:
    """One-line form used by corpus files and ``sample`` output."""
    return text.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")


def unescape_program(line: str) -> str:
    out = []
    it = iter(line)
    for c in it:
        if c != "\\":
            out.append(c)
            continue
        nxt = next(it, "")
        out.append({"n": "\n", "r": "\r", "\\": "\\"}.get(nxt, "\\" + nxt))
    return "".join(out)


def read_corpus(path) -> list:
    """Programs from a file (one escaped program per line) or a directory (one per file, sorted)."""
    if os.path.isdir(path):
        programs = []
        for name in sorted(os.listdir(path)):
            full = os.path.join(path, name)
            if os.path.isfile(full):
                with open(full, encoding="utf-8", newline="") as f:
                    programs.append(f.read())
        return programs
    with open(path, encoding="utf-8") as f:
        return [unescape_program(line) for line in f.read().splitlines() if line]


def write_corpus(path, programs):
    with open(path, "w", encoding="utf-8") as f:
        for p in programs:
            f.write(escape_program(p) + "\n")


def f1(p: float, r: float) -> float:
    if not (0 <= p <= 1 and 0 <= r <= 1):
        raise ValueError("precision and recall must lie in [0, 1]")
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def precision(g: Grammar, oracle, n: int = DEFAULT_SAMPLES, sampler_cfg: SamplerConfig = None) -> float:
    """Fraction of ``n`` fixed-seed samples of ``g`` the oracle accepts."""
    if n < 1:
        raise ValueError("n must be >= 1")
    programs = sample(g, sampler_cfg or SamplerConfig(), n)
    return sum(1 for p in programs if oracle.query(p)) / n


def recall(g: Grammar, test_programs) -> float:
    tests = list(test_programs)
    if not tests:
        raise ValueError("no test programs")
    accept = Recognizer(g)
    return sum(1 for t in tests if accept(t)) / len(tests)


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    samples_used: int
    test_programs_used: int
    grammar_stats: GrammarStats
    timeouts: int = 0
    timings: dict = field(default_factory=dict)
    peak_memory: Optional[int] = None

    def as_dict(self) -> dict:
        d = {
            "p": round(self.precision, 6),
            "r": round(self.recall, 6),
            "f1": round(self.f1, 6),
            "samples_used": self.samples_used,
            "test_programs_used": self.test_programs_used,
            "timeouts": self.timeouts,
        }
        d.update(self.grammar_stats.as_dict())
        for k in ("t", "t_O", "t_B", "t_S"):
            if k in self.timings:
                d[k] = self.timings[k]
        if self.peak_memory is not None:
            d["peak_memory_kb"] = self.peak_memory
        return d

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.as_dict().items())

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def peak_memory_kb() -> Optional[int]:
    try:
        import resource
    except ImportError:  # not on every platform
        return None
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss


def evaluate(g: Grammar, oracle, test_programs, n: int = DEFAULT_SAMPLES,
             sampler_cfg: SamplerConfig = None, timings=None, with_memory=False) -> EvalReport:
    tests = list(test_programs)
    before = oracle.stats.timeouts
    p = precision(g, oracle, n, sampler_cfg)
    r = recall(g, tests)
    return EvalReport(
        precision=p,
        recall=r,
        f1=f1(p, r),
        samples_used=n,
        test_programs_used=len(tests),
        grammar_stats=grammar_stats(g),
        timeouts=oracle.stats.timeouts - before,
        timings=dict(timings or {}),
        peak_memory=peak_memory_kb() if with_memory else None,
    )
