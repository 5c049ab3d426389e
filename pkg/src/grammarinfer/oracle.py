"""Membership oracles: an external parser command or a known golden grammar.

External protocol: the candidate program is written to the command's stdin
(``input_mode="stdin"``) or to a temporary file whose path replaces ``{}``
in the command template (``input_mode="tempfile"``).  Exit status 0 means
accepted, anything else rejected.  A timeout is a rejection and is counted.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass

from .grammar import Grammar, load_grammar
from .parsing import Recognizer

DEFAULT_TIMEOUT_MS = 10_000


class OracleConfigError(RuntimeError):
    """The oracle cannot be run at all (missing binary, bad template)."""


class SeedRejectedError(RuntimeError):
    def __init__(self, index, program):
        self.index = index
        self.program = program
        super().__init__(f"oracle rejects seed #{index}: {program!r}")


@dataclass
class OracleStats:
    queries: int = 0
    requests: int = 0
    cache_hits: int = 0
    oracle_time: float = 0.0
    timeouts: int = 0

    def as_dict(self):
        return {
            "q": self.queries,
            "requests": self.requests,
            "cache_hits": self.cache_hits,
            "t_O": self.oracle_time,
            "timeouts": self.timeouts,
        }


class Oracle:
    """Caching wrapper; subclasses implement ``_ask``."""

    def __init__(self, cache_enabled=True):
        self.cache_enabled = cache_enabled
        self.cache = {}
        self.stats = OracleStats()

    def _ask(self, program: str) -> bool:
        raise NotImplementedError

    def query(self, program: str) -> bool:
        self.stats.requests += 1
        if self.cache_enabled and program in self.cache:
            self.stats.cache_hits += 1
            return self.cache[program]
        t0 = time.perf_counter()
        try:
            answer = self._ask(program)
        finally:
            self.stats.oracle_time += time.perf_counter() - t0
        self.stats.queries += 1
        if self.cache_enabled:
            self.cache[program] = answer
        return answer

    __call__ = query

    def check_seeds(self, seeds):
        for i, s in enumerate(seeds):
            if not self.query(s):
                raise SeedRejectedError(i, s)


class GrammarOracle(Oracle):
    def __init__(self, grammar: Grammar, cache_enabled=True):
        super().__init__(cache_enabled)
        self.grammar = grammar
        self._recognize = Recognizer(grammar)

    @classmethod
    def from_file(cls, path, cache_enabled=True):
        return cls(load_grammar(path), cache_enabled)

    def _ask(self, program):
        return self._recognize(program)


class FunctionOracle(Oracle):
    """Wraps any ``str -> bool`` predicate (handy in tests)."""

    def __init__(self, fn, cache_enabled=True):
        super().__init__(cache_enabled)
        self.fn = fn

    def _ask(self, program):
        return bool(self.fn(program))


class CommandOracle(Oracle):
    def __init__(self, command, timeout_ms=None, input_mode="stdin", cache_enabled=True):
        super().__init__(cache_enabled)
        # the environment variable wins over the configured value
        if os.environ.get("ORACLE_TIMEOUT_MS"):
            timeout_ms = int(os.environ["ORACLE_TIMEOUT_MS"])
        elif timeout_ms is None:
            timeout_ms = DEFAULT_TIMEOUT_MS
        if timeout_ms <= 0:
            raise OracleConfigError("timeout_ms must be positive")
        if input_mode not in ("stdin", "tempfile"):
            raise OracleConfigError(f"unknown input mode {input_mode!r}")
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.argv:
            raise OracleConfigError("empty oracle command")
        if input_mode == "tempfile" and not any("{}" in a for a in self.argv):
            raise OracleConfigError("tempfile mode needs a '{}' placeholder in the command")
        self.timeout = timeout_ms / 1000
        self.input_mode = input_mode

    def _run(self, argv, stdin_data):
        try:
            proc = subprocess.run(
                argv,
                input=stdin_data,
                stdout=subprocess.DEVNULL,
                stderr=subprocess.DEVNULL,
                timeout=self.timeout,
            )
        except subprocess.TimeoutExpired:
            self.stats.timeouts += 1
            return False
        except OSError as e:
            raise OracleConfigError(f"cannot run oracle {argv[0]!r}: {e}") from e
        return proc.returncode == 0

    def _ask(self, program):
        data = program.encode("utf-8")
        if self.input_mode == "stdin":
            return self._run(self.argv, data)
        fd, path = tempfile.mkstemp(prefix="oracle-", suffix=".txt")
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            return self._run([a.replace("{}", path) for a in self.argv], b"")
        finally:
            os.unlink(path)
