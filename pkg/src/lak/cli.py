"""Command-line front end: ``lak check|eval|simulate|compile|compare|bench``.

Exit codes: 0 on success, 1 when a verification fails (mismatch, rejected
derivation, bound violation, fuel exhaustion), 2 on unreadable input.
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from .compiler import CompilationError, compile_machine, run_compiled
from .derivation import DerivationSyntaxError, RuleMismatch, check_derivation, dump_derivation, load_derivation
from .encodings import DecodeError, mk_klist
from .formulas import show_formula
from .machine import (
    Accepted,
    MachineError,
    Rejected,
    Timeout,
    load_machine,
    parse_input,
    run,
    step_count_bound_check,
    validate_machine,
)
from .reduction import FuelExhausted, check_bounds, normalize_standard, reduce_untyped, step_bound
from .structure import StructureError, format_element, structure_by_name
from .syntax import ParseError, parse_term, show
from .terms import App, erase

OK, MISMATCH, BAD_INPUT = 0, 1, 2


class InputError(Exception):
    pass


class Output:
    """Human lines or JSON records, depending on ``--format``."""

    def __init__(self, fmt: str, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout

    def text(self, line: str = "") -> None:
        if self.fmt == "text":
            print(line, file=self.stream)

    def record(self, **fields) -> None:
        if self.fmt == "records":
            print(json.dumps(fields, sort_keys=True), file=self.stream)

    def table(self, header, rows) -> None:
        if self.fmt != "text":
            return
        cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
        for r in cells:
            print("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip(), file=self.stream)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _machine(path: str):
    try:
        m = load_machine(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except (ValueError, KeyError, TypeError, MachineError, StructureError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    problems = validate_machine(m)
    if problems:
        raise InputError(f"{path}: " + "; ".join(problems))
    return m


def _term(path: str, structure):
    try:
        return parse_term(_read(path), structure.carrier)
    except (ParseError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _structure(name: str):
    try:
        return structure_by_name(name)
    except StructureError as exc:
        raise InputError(str(exc)) from exc


def _word(text: str, structure):
    try:
        return parse_input(text, structure)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _show_word(w) -> str:
    return "[" + ", ".join(map(format_element, w)) + "]"


def _words(w) -> list:
    return [format_element(a) for a in w]


def random_element(rng: random.Random, carrier: str):
    if carrier == "gf2":
        return rng.randint(0, 1)
    return Fraction(rng.randint(-9, 9), rng.randint(1, 9))


def input_set(args, structure) -> list:
    """The inputs selected by ``--inputs``, ``--exhaustive`` or ``--random``."""
    if args.inputs is not None:
        return [_word(part, structure) for part in args.inputs.split(";") if part.strip()]
    if args.exhaustive is not None:
        if structure.carrier != "gf2":
            raise InputError("--exhaustive needs a finite carrier (gf2)")
        return [list(w) for w in itertools.product((0, 1), repeat=args.exhaustive)]
    rng = random.Random(args.seed)
    return [[random_element(rng, structure.carrier) for _ in range(rng.randint(1, args.max_length))]
            for _ in range(args.random)]


# ---------------------------------------------------------------------------
# commands


def cmd_check(args, out: Output) -> int:
    text = _read(args.derivation)
    name = args.structure
    for line in text.splitlines():
        if line.startswith("; structure "):
            name = line.split()[2]
    s = _structure(name)
    try:
        d = load_derivation(text, s.carrier)
    except (DerivationSyntaxError, ParseError, ValueError) as exc:
        raise InputError(f"{args.derivation}: {exc}") from exc
    try:
        j = check_derivation(d, s.p)
    except RuleMismatch as exc:
        out.text(f"rejected: {exc}")
        out.record(accepted=False, reason=str(exc))
        return MISMATCH
    out.text(f"accepted: |- t : {show_formula(j.formula)}  (term size {j.term.size})")
    out.text(f"nodes: {d.count()}")
    out.record(accepted=True, formula=show_formula(j.formula), nodes=d.count())
    return OK


def cmd_eval(args, out: Output) -> int:
    s = _structure(args.structure)
    t = _term(args.term, s)
    status = OK
    try:
        if args.strategy == "standard":
            nf, trace = normalize_standard(t, s, fuel=args.fuel)
        else:
            nf, trace = reduce_untyped(erase(t), s, fuel=args.fuel if args.fuel is not None else step_bound(t))
    except FuelExhausted as exc:
        nf, trace, status = None, exc.trace, MISMATCH
    if args.trace:
        with open(args.trace, "w") as fh:
            for rec in trace.records():
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    steps = len(trace.steps)
    if nf is None:
        out.text(f"fuel exhausted after {steps} steps")
        out.record(normal_form=None, steps=steps, fuel_exhausted=True)
        return status
    out.text(show(nf))
    out.text(f"steps: {steps}  measure: {t.measure} -> {nf.measure}  depth: {t.maxdepth}  bound: {step_bound(t)}")
    rec = {"normal_form": show(nf), "steps": steps, "measure": t.measure, "depth": t.maxdepth,
           "bound": step_bound(t)}
    if args.strategy == "standard":
        rep = check_bounds(trace)
        for v in rep.violations:
            out.text(f"violation: {v}")
        out.text(f"bounds: {'ok' if rep.ok else 'violated'}  endpoint <nf> <= <t>^2: {rep.endpoint_ok}")
        rec.update(bounds_ok=rep.ok, violations=rep.violations, endpoint_ok=rep.endpoint_ok)
        if not rep.ok:
            status = MISMATCH
    out.record(**rec)
    return status


def cmd_simulate(args, out: Output) -> int:
    m = _machine(args.machine)
    w = _word(args.input, m.structure)
    try:
        res = run(m, w, max_steps=args.max_steps)
    except MachineError as exc:
        raise InputError(str(exc)) from exc
    if isinstance(res, Timeout):
        out.text(f"timeout after {res.steps} steps: {res.config}")
        out.record(outcome="timeout", steps=res.steps)
        return MISMATCH
    outcome = "accept" if isinstance(res, Accepted) else "reject"
    out.text(f"{outcome} after {res.steps} steps (bound {m.bound(len(w))})")
    out.text(f"output: {_show_word(res.output)}")
    out.record(outcome=outcome, steps=res.steps, bound=m.bound(len(w)), output=_words(res.output))
    return OK


def cmd_compile(args, out: Output) -> int:
    m = _machine(args.machine)
    try:
        cm = compile_machine(m)
    except CompilationError as exc:
        out.text(f"compilation failed: {exc}")
        out.record(compiled=False, reason=str(exc))
        return MISMATCH
    Path(args.output).write_text(show(cm.term) + "\n")
    if args.emit_derivation:
        header = f"structure {m.structure.name}"
        Path(args.emit_derivation).write_text(dump_derivation(cm.derivation, header))
    formula = show_formula(cm.formula)
    out.text(f"{m.name}: |- u : {formula}  (k = {cm.k}, d = {cm.d}, size {cm.term.size}, "
             f"derivation nodes {cm.derivation.count()})")
    out.record(compiled=True, name=m.name, formula=formula, k=cm.k, d=cm.d, size=cm.term.size,
               measure=cm.term.measure, nodes=cm.derivation.count())
    return OK


def cmd_compare(args, out: Output) -> int:
    m = _machine(args.machine)
    inputs = input_set(args, m.structure)
    gate = step_count_bound_check(m, m.polynomial, inputs)
    if not gate.ok:
        late = [_show_word(r[0]) for r in gate.rows if not r[3]]
        raise InputError("polynomial bound exceeded on " + ", ".join(late))
    if args.term:
        term = _term(args.term, m.structure)
    else:
        try:
            term = compile_machine(m).term
        except CompilationError as exc:
            raise InputError(str(exc)) from exc
    rows, agree = [], 0
    for w in sorted(inputs, key=lambda w: (len(w), _words(w))):
        res = run(m, w, max_steps=args.max_steps)
        expected = list(res.output) if isinstance(res, (Accepted, Rejected)) else None
        got, steps, bounds, error = None, None, None, None
        try:
            got, trace = run_compiled(term, w, m.structure, fuel=args.fuel)
            steps, bounds = len(trace.steps), check_bounds(trace).ok
        except (FuelExhausted, DecodeError, StructureError) as exc:
            error = type(exc).__name__
        same = error is None and got == expected and bounds
        agree += same
        rows.append((_show_word(w), _show_word(expected or []), _show_word(got or []) if error is None else error,
                     res.steps, steps, bounds, "yes" if same else "NO"))
        out.record(input=_words(w), expected=_words(expected or []), got=None if got is None else _words(got),
                   machine_steps=res.steps, reduction_steps=steps, bounds_ok=bounds, error=error, agree=same)
    out.table(("input", "simulator", "compiled", "machine steps", "reduction steps", "bounds ok", "agree"), rows)
    out.text(f"{agree}/{len(inputs)} agreements")
    out.record(summary=True, agreements=agree, total=len(inputs))
    return OK if agree == len(inputs) else MISMATCH


def cmd_bench(args, out: Output) -> int:
    s = _structure(args.structure)
    corpus = [(path, _term(path, s), s) for path in args.terms]
    if args.machine:
        m = _machine(args.machine)
        try:
            term = compile_machine(m).term
        except CompilationError as exc:
            raise InputError(str(exc)) from exc
        one = 1 if m.structure.carrier == "gf2" else Fraction(1)
        for n in range(1, args.lengths + 1):
            corpus.append((f"{m.name}[n={n}]", App(term, mk_klist([one] * n)), m.structure))
    rows, status = [], OK
    for name, t, st in corpus:
        bound = step_bound(t)
        try:
            _, trace = normalize_standard(t, st, fuel=args.fuel)
            steps, flag = len(trace.steps), ("ok" if check_bounds(trace).ok else "violated")
        except FuelExhausted as exc:
            steps, flag = len(exc.trace.steps), "fuel"
        if flag != "ok":
            status = MISMATCH
        ratio = steps / bound
        rows.append((name, t.measure, t.maxdepth, steps, bound, f"{ratio:.3g}", flag))
        out.record(term=name, measure=t.measure, depth=t.maxdepth, steps=steps, bound=bound,
                   ratio=ratio, status=flag)
    out.table(("term", "measure", "depth", "steps", "bound", "ratio", "status"), rows)
    return status


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--structure", default="rationals", choices=("gf2", "rationals"))
    common.add_argument("--max-steps", type=int, default=10_000)
    common.add_argument("--fuel", type=int, default=None, help="step limit (default: the theorem bound)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("text", "records"), default="text")

    parser = argparse.ArgumentParser(prog="lak", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="check a derivation file")
    p.add_argument("derivation")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", parents=[common], help="normalize a term file")
    p.add_argument("term")
    p.add_argument("--strategy", choices=("standard", "untyped"), default="standard")
    p.add_argument("--trace", help="write one JSON record per step to this file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", parents=[common], help="run a machine on an input")
    p.add_argument("machine")
    p.add_argument("input", help="comma or space separated literals")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compile", parents=[common], help="compile a machine into a term")
    p.add_argument("machine")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--emit-derivation")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("compare", parents=[common], help="compare compiled term and simulator")
    p.add_argument("machine")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--inputs", help="inputs separated by ';', e.g. '1,0;1,1,1'")
    group.add_argument("--exhaustive", type=int, metavar="L", help="every input of length exactly L")
    group.add_argument("--random", type=int, metavar="N", help="N seeded random inputs")
    p.add_argument("--max-length", type=int, default=5)
    p.add_argument("--term", help="use this term file instead of compiling the machine")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", parents=[common], help="tabulate step counts against the bound")
    p.add_argument("terms", nargs="*")
    p.add_argument("--machine", help="also bench the compiled machine on all-ones inputs")
    p.add_argument("--lengths", type=int, default=5, metavar="L")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    out = Output(args.format)
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
