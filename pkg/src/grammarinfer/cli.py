"""Command line driver: infer, eval, sample, parse.

Exit codes: 0 success, 1 domain failure (seed rejected, program not in the
language), 2 configuration error (bad paths, unreadable grammar, oracle
that cannot run).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .evaluation import DEFAULT_SAMPLES, DEFAULT_TESTS, escape_program, evaluate, read_corpus
from .grammar import GrammarError, load_grammar, write_grammar
from .inference import InferenceConfig, infer
from .oracle import CommandOracle, GrammarOracle, OracleConfigError, SeedRejectedError
from .parsing import Recognizer, SamplerConfig, SamplingError, sample

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("grammarinfer")


class ConfigError(Exception):
    pass


def _read_text(path):
    with open(path, encoding="utf-8", newline="") as f:
        return f.read()


def read_seeds(seeds_dir) -> list:
    """Seed programs from every regular file in ``seeds_dir``, by sorted filename."""
    if not os.path.isdir(seeds_dir):
        raise ConfigError(f"seeds directory not found: {seeds_dir}")
    names = sorted(n for n in os.listdir(seeds_dir) if os.path.isfile(os.path.join(seeds_dir, n)))
    if not names:
        raise ConfigError(f"seeds directory is empty: {seeds_dir}")
    seeds = []
    for name in names:
        text = _read_text(os.path.join(seeds_dir, name))
        # editors append a final newline; it is not part of the program
        if text.endswith("\n"):
            text = text[:-1]
        if not text:
            raise ConfigError(f"empty seed file: {os.path.join(seeds_dir, name)}")
        seeds.append(text)
    return seeds


def _load_grammar(path):
    try:
        return load_grammar(path)
    except OSError as e:
        raise ConfigError(f"cannot read grammar {path}: {e.strerror}") from e
    except GrammarError as e:
        raise ConfigError(f"{path}: {e}") from e


def make_oracle(args):
    if args.golden:
        return GrammarOracle(_load_grammar(args.golden))
    return CommandOracle(args.oracle_cmd, timeout_ms=args.timeout_ms, input_mode=args.input_mode)


def _add_oracle_args(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--golden", metavar="GRAMMAR", help="use a known grammar file as the oracle")
    g.add_argument("--oracle-cmd", metavar="CMD",
                   help="external parser; exit 0 means accepted ('{}' = temp file path)")
    p.add_argument("--timeout-ms", type=int, default=None,
                   help="per-query timeout (env ORACLE_TIMEOUT_MS overrides)")
    p.add_argument("--input-mode", choices=("stdin", "tempfile"), default="stdin")


def inference_config(args) -> InferenceConfig:
    return InferenceConfig(
        k=args.k,
        max_bubble_len=args.max_bubble_len,
        top_candidates=args.top,
        check_budget_per_side=args.check_budget,
        rng_seed=args.rng_seed,
        prestructure=not args.no_prestructure,
        reapply=not args.no_reapply,
        partial_merge=args.partial_merge,
        one_bracket_bubbles=args.one_bracket_bubbles,
        new_ranking=not args.old_ranking,
        two_bubbles=args.two_bubbles,
        expand=not args.no_expand,
    )


def cmd_infer(args) -> int:
    seeds = read_seeds(args.seeds)
    try:
        config = inference_config(args)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    oracle = make_oracle(args)
    grammar, stats = infer(seeds, oracle, config)
    text = write_grammar(grammar)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(text)
    stats_path = args.stats_out or args.out + ".stats.json"
    with open(stats_path, "w", encoding="utf-8") as f:
        json.dump(stats.as_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    d = stats.as_dict()
    print(f"wrote {args.out}: {len(grammar.rules)} alternatives, q={d['q']} rc={d['rc']} "
          f"t={d['t']:.2f}s t_O={d['t_O']:.2f}s t_B={d['t_B']:.2f}s t_S={d['t_S']:.2f}s")
    return EXIT_OK


def cmd_eval(args) -> int:
    grammar = _load_grammar(args.grammar)
    if not os.path.exists(args.tests):
        raise ConfigError(f"tests not found: {args.tests}")
    tests = read_corpus(args.tests)[: args.n_tests]
    if not tests:
        raise ConfigError(f"no test programs in {args.tests}")
    timings = {}
    if args.stats:
        with open(args.stats, encoding="utf-8") as f:
            saved = json.load(f)
        timings = {k: saved[k] for k in ("t", "t_O", "t_B", "t_S") if k in saved}
    oracle = make_oracle(args)
    cfg = SamplerConfig(rng_seed=args.rng_seed, max_depth=args.max_depth)
    report = evaluate(grammar, oracle, tests, n=args.n, sampler_cfg=cfg,
                      timings=timings, with_memory=args.peak_memory)
    sys.stdout.write(report.to_text())
    if args.report:
        with open(args.report + ".txt", "w", encoding="utf-8") as f:
            f.write(report.to_text())
        with open(args.report + ".json", "w", encoding="utf-8") as f:
            f.write(report.to_json())
    return EXIT_OK


def cmd_sample(args) -> int:
    grammar = _load_grammar(args.grammar)
    cfg = SamplerConfig(rng_seed=args.seed, max_depth=args.max_depth)
    for program in sample(grammar, cfg, args.count):
        sys.stdout.write(escape_program(program) + "\n")
    return EXIT_OK


def cmd_parse(args) -> int:
    grammar = _load_grammar(args.grammar)
    if (args.program is None) == (args.file is None):
        raise ConfigError("give exactly one of PROGRAM or --file")
    if args.file is not None:
        try:
            program = _read_text(args.file)
        except OSError as e:
            raise ConfigError(f"cannot read {args.file}: {e.strerror}") from e
    else:
        program = args.program
    ok = Recognizer(grammar)(program)
    print("accepted" if ok else "rejected")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grammarinfer", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log each accepted step")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="infer a grammar from seed programs")
    p.add_argument("--seeds", required=True, help="directory of seed programs, one per file")
    _add_oracle_args(p)
    p.add_argument("--out", required=True, help="grammar output file")
    p.add_argument("--stats-out", help="stats JSON (default: OUT.stats.json)")
    p.add_argument("--k", type=int, default=2, help="context width")
    p.add_argument("--max-bubble-len", type=int, default=10)
    p.add_argument("--top", type=int, default=100, help="bubble candidates per epoch")
    p.add_argument("--check-budget", type=int, default=50, help="check programs per merge side")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--no-prestructure", action="store_true")
    p.add_argument("--no-reapply", action="store_true")
    p.add_argument("--partial-merge", action="store_true")
    p.add_argument("--one-bracket-bubbles", action="store_true")
    p.add_argument("--old-ranking", action="store_true")
    p.add_argument("--two-bubbles", action="store_true", help="also try merging bubble pairs")
    p.add_argument("--no-expand", action="store_true", help="skip terminal expansion")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="precision/recall/F1 of a grammar")
    p.add_argument("grammar")
    _add_oracle_args(p)
    p.add_argument("--tests", required=True, help="corpus file (escaped, one per line) or directory")
    p.add_argument("--n", type=int, default=DEFAULT_SAMPLES, help="precision samples")
    p.add_argument("--n-tests", type=int, default=DEFAULT_TESTS, help="use at most this many tests")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--max-depth", type=int, default=50)
    p.add_argument("--stats", help="stats JSON from infer, for the timing columns")
    p.add_argument("--report", metavar="PREFIX", help="write PREFIX.txt and PREFIX.json")
    p.add_argument("--peak-memory", action="store_true",
                   help="include peak RSS (makes reports machine dependent)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sample", help="print random programs, one per line (\\n and \\\\ escaped)")
    p.add_argument("grammar")
    p.add_argument("count", type=int, nargs="?", default=1)
    p.add_argument("seed", type=int, nargs="?", default=0)
    p.add_argument("--max-depth", type=int, default=50)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("parse", help="exit 0 iff the program is in the grammar's language")
    p.add_argument("grammar")
    p.add_argument("program", nargs="?", help="program text")
    p.add_argument("--file", help="read the program from a file instead")
    p.set_defaults(func=cmd_parse)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, OracleConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SeedRejectedError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    except SamplingError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
