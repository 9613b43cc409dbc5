"""``normsel`` command-line interface.

Streams are ASCII digits on stdin/stdout; reports are JSON with a fixed key
order.  Exit codes: 0 success, 1 property failure, 2 input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from importlib import resources

import numpy as np

from . import __version__
from .augmented import (
    augmented_visit_frequencies,
    build_buffer_automaton,
    check_measure_preservation,
    predicted_word_frequency,
    recurrent_piece,
    selected_counts_via_buffer,
)
from .automata import Dfa, load_automaton
from .exceptions import ConfigurationError, InconclusiveError, InputError, NormselError
from .pipeline import (
    decode_stream_detailed,
    encode_stream,
    run_t1,
    t2_step,
    t3_step,
    train_code,
    visit_frequencies,
)
from .random_automata import default_seed
from .selection import select
from .sequences import GeneratorSpec, bernoulli, champernowne, generate
from .stats import freq_table, max_deviation, ps_ratio
from .validation import all_words, format_digits, parse_digits, word_str
from .verify import FAIL, worked_example_suites, verify_automaton

EXIT_OK, EXIT_FAILURE, EXIT_INPUT = 0, 1, 2
BUILTIN_PREFIX = "builtin:"
BUILTINS = ("group3", "ends_with_one")


def resolve_automaton(spec: str) -> Dfa:
    if spec.startswith(BUILTIN_PREFIX):
        name = spec[len(BUILTIN_PREFIX):]
        if name not in BUILTINS:
            raise InputError(f"unknown builtin automaton {name!r}; choose from {BUILTINS}")
        text = resources.files("normsel").joinpath("data", f"{name}.json").read_text()
        return Dfa.from_dict(json.loads(text))
    try:
        return load_automaton(spec)
    except OSError as exc:
        raise InputError(f"cannot read automaton file {spec}: {exc.strerror}") from None


def read_stream(base: int, stdin=None) -> np.ndarray:
    text = (stdin or sys.stdin).read()
    return parse_digits(text, base)


def emit_report(report: dict, args, out=None) -> None:
    if not getattr(args, "no_timestamp", False):
        report["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    (out or sys.stdout).write(json.dumps(report, indent=2) + "\n")


def _config(args, **resolved) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "no_timestamp")}
    cfg.update(resolved)
    return cfg


def _check_positive(name: str, value, allow_zero: bool = False) -> None:
    if value is None:
        return
    if value < 0 or (value == 0 and not allow_zero):
        raise InputError(f"--{name} must be {'non-negative' if allow_zero else 'positive'}, got {value}")


# -- subcommands ------------------------------------------------------------------


def cmd_gen(args) -> int:
    _check_positive("length", args.length, allow_zero=True)
    spec = GeneratorSpec(args.kind, args.length, args.base, args.pattern, args.p, args.seed)
    sys.stdout.write(format_digits(generate(spec)) + "\n")
    return EXIT_OK


def automaton_summary(dfa: Dfa) -> dict:
    scc = dfa.scc_analysis()
    return {
        "states": dfa.n_states,
        "alphabet_size": dfa.alphabet_size,
        "deterministic": True,
        "complete": True,
        "group": dfa.is_group(),
        "transitive": dfa.is_transitive(),
        "components": [[dfa.names[q] for q in comp] for comp in scc.components],
        "recurrent": [
            {"states": [dfa.names[q] for q in scc.components[i]], "group": flag}
            for i, flag in zip(scc.recurrent, scc.group_flags)
        ],
    }


def cmd_check(args) -> int:
    dfa = resolve_automaton(args.automaton)
    emit_report({"command": "check", "config": _config(args), **automaton_summary(dfa)}, args)
    return EXIT_OK


def cmd_select(args) -> int:
    dfa = resolve_automaton(args.automaton)
    x = read_stream(dfa.alphabet_size)
    out = list(select(dfa, x, args.mode, args.complement))
    sys.stdout.write(format_digits(out) + "\n")
    return EXIT_OK


def stats_report(x: np.ndarray, base: int, k: int, n: int | None) -> tuple[dict, list[list]]:
    t = freq_table(x, n, k, base)
    ratios = ps_ratio(t)
    counts, freqs, rows = {}, {}, []
    for ell in range(1, k + 1):
        for u in all_words(base, ell):
            key = word_str(u)
            counts[key] = t.count(u)
            freqs[key] = t.frequency(u)
            rows.append([key, ell, counts[key], freqs[key], ratios[u]])
    report = {
        "n": t.n,
        "base": base,
        "max_len": k,
        "counts": counts,
        "frequencies": freqs,
        "aligned_counts": {word_str(u): t.aligned_count(u) for u in all_words(base, k)},
        "max_deviation": max_deviation(t),
        "ps_ratios": {word_str(u): r for u, r in ratios.items()},
        "max_ps_ratio": max(ratios.values()),
    }
    return report, rows


def cmd_stats(args) -> int:
    _check_positive("max-len", args.max_len)
    _check_positive("n", args.n)
    x = read_stream(args.base)
    report, rows = stats_report(x, args.base, args.max_len, args.n)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["word", "length", "count", "frequency", "ps_ratio"])
        writer.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        emit_report({"command": "stats", "config": _config(args), **report}, args)
    return EXIT_OK


def _stage_check(dfa, code, m, x, machine) -> dict:
    """Re-run each stage from its own transition function and compare with the fused tapes."""
    tape1, tape2, _ = run_t1(dfa, x)
    state2 = (dfa.initial, "")
    code_tape = []
    state3 = (dfa.initial, "", "", "")
    merged = []
    for a in x.tolist():
        o1, _o2, state2 = t2_step(dfa, code, state2, a)
        code_tape.append(o1)
        out3, state3 = t3_step(dfa, code, m, state3, a)
        merged.append(out3)
    return {
        "t1_tape1_len": len(tape1),
        "t1_tape2_len": len(tape2),
        "t2_tape1_len": len("".join(code_tape)),
        "t3_output_len": len("".join(merged)),
        "t4_output_len": machine.emitted,
        "t1_matches": tape1 == format_digits(machine.tape1) and tape2 == format_digits(machine.tape2),
        "t2_matches": "".join(code_tape) == "".join(machine.code_tape),
        "t3_matches": "".join(merged) == "".join(machine.merged_tape),
    }


def cmd_compress(args) -> int:
    _check_positive("k", args.k)
    _check_positive("m", args.m)
    _check_positive("train", args.train)
    dfa = resolve_automaton(args.automaton)
    if dfa.alphabet_size != 2:
        raise InputError("compress supports binary automata only")
    x = read_stream(2)
    if x.size == 0:
        raise InputError("compress needs a non-empty input stream")
    code = train_code(dfa, x, args.k, args.train or x.size)
    if args.m < code.max_codeword_len:
        raise ConfigurationError(f"--m {args.m} is shorter than the longest codeword ({code.max_codeword_len})")
    machine = encode_stream(dfa, code, args.m, x, debug=args.debug_stages)
    bits = machine.bits
    report = {"command": "compress", "config": _config(args, train=args.train or int(x.size))}
    report.update(machine.report())
    report["max_codeword_len"] = code.max_codeword_len
    report["covered_prefix"] = machine.covered_prefix_length()
    status = EXIT_OK
    if args.decode:
        if not dfa.is_group():
            report["round_trip"] = {"status": "hypothesis_unmet", "detail": "decoding requires a group automaton"}
        else:
            try:
                res = decode_stream_detailed(dfa, code, args.m, bits)
                ok = res.symbols.size == report["covered_prefix"] and np.array_equal(res.symbols, x[: res.symbols.size])
                report["round_trip"] = {"status": "pass" if ok else "fail", "decoded_prefix": int(res.symbols.size)}
            except NormselError as exc:
                ok = False
                report["round_trip"] = {"status": "fail", "detail": str(exc)}
            if not ok:
                status = EXIT_FAILURE
    if args.debug_stages:
        report["stages"] = _stage_check(dfa, code, args.m, x, machine)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(bits + "\n")
    if args.code_out:
        with open(args.code_out, "w") as fh:
            fh.write(code.dumps() + "\n")
    emit_report(report, args)
    return status


def cmd_augmented(args) -> int:
    _check_positive("k", args.k)
    _check_positive("length", args.length)
    _check_positive("probe", args.probe)
    dfa = resolve_automaton(args.automaton)
    b = dfa.alphabet_size
    x = read_stream(b) if args.stdin else champernowne(b, args.length)
    aug = build_buffer_automaton(dfa, args.k)
    report = {"command": "augmented", "config": _config(args), "states": aug.n_states}
    try:
        piece = recurrent_piece(aug, x, min(args.probe, x.size), strict=False)
    except InconclusiveError as exc:
        report["piece"] = {"status": "inconclusive", "detail": str(exc)}
        emit_report(report, args)
        return EXIT_FAILURE
    measure = check_measure_preservation(piece)
    counts, windows = selected_counts_via_buffer(aug, x)
    visits = augmented_visit_frequencies(aug, x)
    report["piece"] = {
        "size": piece.size,
        "final_count": len(piece.finals),
        "entry_state": aug.state_name(piece.entry),
        "entry_step": piece.entry_step,
        "buffer_words_covered": len(piece.covered_words()),
        "buffer_words_total": aug.n_words,
        "violations": list(piece.violations),
    }
    report["measure"] = {
        "in_degree_ok": not measure.in_degree_violations,
        "in_degree_violations": [aug.state_name(s) for s in measure.in_degree_violations],
        "cylinder_depth": measure.depth,
        "cylinder_ok": not measure.cylinder_violations,
        "group_hypothesis": measure.group_hypothesis,
    }
    report["frequencies"] = {
        word_str(w): {
            "predicted": str(predicted_word_frequency(piece, w)) if piece.finals else None,
            "empirical": counts[i] / windows if windows else None,
            "count": int(counts[i]),
        }
        for i, w in enumerate(all_words(b, args.k))
    }
    report["windows"] = windows
    report["base_state_visits"] = dict(zip(dfa.names, visit_frequencies(dfa, x).tolist()))
    report["piece_visits"] = {aug.state_name(s): float(visits[s]) for s in piece.members}
    probes = [champernowne(b, x.size)] + ([bernoulli(0.5, s, x.size) for s in range(3)] if b == 2 else [])
    pieces = {recurrent_piece(aug, p, min(args.probe, p.size), strict=False).members for p in probes}
    report["pieces_agree_across_probes"] = len(pieces) == 1
    emit_report(report, args)
    return EXIT_OK


def _suite_report(command: str, args, results) -> int:
    report = {"command": command, "config": _config(args), "suites": [r.as_dict() for r in results]}
    failed = any(r.status == FAIL for r in results)
    report["status"] = "fail" if failed else "pass"
    emit_report(report, args)
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_verify(args) -> int:
    dfa = resolve_automaton(args.automaton)
    seed = default_seed() if args.seed is None else args.seed
    results = verify_automaton(dfa, seed, args.family_size, args.max_len, args.length, args.cases)
    return _suite_report("verify", args, results)


def cmd_paper_examples(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    return _suite_report("paper-examples", args, worked_example_suites(seed))


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="normsel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--no-timestamp", action="store_true", help="omit the report timestamp")
        return p

    p = add("gen", cmd_gen, "generate a digit sequence")
    p.add_argument("--kind", required=True, choices=("champernowne", "periodic", "bernoulli"))
    p.add_argument("--base", type=int, default=2)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--pattern")
    p.add_argument("--p", type=float)
    p.add_argument("--seed", type=int, default=0)

    p = add("check", cmd_check, "structural analysis of an automaton file")
    p.add_argument("--automaton", required=True)

    p = add("select", cmd_select, "select symbols of stdin by an automaton")
    p.add_argument("--automaton", required=True)
    p.add_argument("--mode", choices=("oblivious", "nonoblivious"), default="nonoblivious")
    p.add_argument("--complement", action="store_true")

    p = add("stats", cmd_stats, "word-frequency report for stdin")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--base", type=int, default=2)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = add("compress", cmd_compress, "run the compression transducer on stdin")
    p.add_argument("--automaton", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--train", type=int, help="training prefix length (default: whole input)")
    p.add_argument("--decode", action="store_true", help="decode the output and check the round trip")
    p.add_argument("--debug-stages", action="store_true", help="report and cross-check per-stage tapes")
    p.add_argument("--out", help="write the emitted bits (ASCII 0/1) to this file")
    p.add_argument("--code-out", help="write the trained block code as JSON to this file")

    p = add("augmented", cmd_augmented, "buffer-automaton analysis")
    p.add_argument("--automaton", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--length", type=int, default=2**16, help="Champernowne input length")
    p.add_argument("--probe", type=int, default=10_000)
    p.add_argument("--stdin", action="store_true", help="read the input stream from stdin instead")

    p = add("verify", cmd_verify, "run the brute-force verification suites")
    p.add_argument("--automaton", default="builtin:group3")
    p.add_argument("--seed", type=int)
    p.add_argument("--family-size", type=int, default=20)
    p.add_argument("--max-len", type=int, default=12)
    p.add_argument("--length", type=int, default=10_000, help="round-trip input length")
    p.add_argument("--cases", type=int, default=20, help="round-trip cases")

    p = add("paper-examples", cmd_paper_examples, "reproduce the worked selection examples")
    p.add_argument("--seed", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ConfigurationError) as exc:
        print(f"normsel {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NormselError as exc:
        print(f"normsel {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
