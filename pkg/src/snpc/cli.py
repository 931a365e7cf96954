"""Command line interface: ``snpc <command> ...``."""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import bounds as bnd
from .codec import (CodecError, SymbolSeq, decode, desclen, emit_compressed,
                    emit_full)
from .compiler import CompileError, CompileOptions, compile_program, verify_equivalence
from .experiment import ExperimentConfig, ExperimentError, run_generalization_experiment
from .lang import (SNPRuntimeError, SNPSyntaxError, SNPValidationError,
                   SweepCapExceeded, bound_profile, execute, inline_composite,
                   parse_file, render, validate)
from .noise import (MODES, SCOPES, CorrectionError, build_correction_net,
                    corrupt_dataset, corrupt_points, read_corrections,
                    read_dataset, write_dataset)


def _load(path):
    return inline_composite(parse_file(path))


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.replace(" ", "").split(",") if t]


def _compile(args):
    p = _load(args.file)
    wb = args.write_back_bound
    if wb not in (None, "auto"):
        wb = int(wb)
    return p, *compile_program(p, CompileOptions(args.N, args.B, "auto" if wb is None else wb))


def _read_net(path):
    text = Path(path).read_text(encoding="utf-8")
    return decode(SymbolSeq.from_file_text(text.strip()))


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# commands

def cmd_parse(args):
    p = parse_file(args.file)
    print(render(p), end="")
    print(f"# V={p.V} L={p.L} I={p.I} depth={p.depth}")
    return 0


def cmd_check(args):
    p = parse_file(args.file)
    diags = validate(p)
    for d in diags:
        loc = f"{args.file}:{d.line}: " if d.line else f"{args.file}: "
        print(f"{loc}{d.level}: {d.message}")
    bad = any(d.level == "error" for d in diags)
    if not bad:
        print("ok")
    return 1 if bad else 0


def cmd_run(args):
    p = _load(args.file)
    r = execute(p, _ints(args.input), loop_bound=args.loop_bound, trace=args.trace)
    if args.trace:
        for line in r.trace:
            print(line)
    print(r.value)
    return 0


def cmd_bound(args):
    p = _load(args.file)
    prof = bound_profile(p, args.N, cap=args.cap)
    print(f"N={prof.N} B={prof.B}")
    return 0


def cmd_compile(args):
    p, net, rc = _compile(args)
    seq = emit_compressed(net, rc)
    st = net.stats()
    print(f"program={p.name} N={args.N} B={net.meta['B']} G={net.meta['G']} depth={st.depth} "
          f"max_width={st.max_width} symbols={len(seq)}", file=sys.stderr)
    _write(args.output, seq.to_file_text() + "\n")
    return 0


def cmd_verify(args):
    p, net, _ = _compile(args)
    rep = verify_equivalence(p, net, args.N)
    print(f"checked={rep.checked} mismatches={len(rep.mismatches)}")
    for x, want, got in rep.mismatches[:10]:
        print(f"  x={x} program={want} network={got}")
    return 0 if rep.ok else 1


def _net_from(args):
    if str(args.net).endswith(".snp"):
        if args.N is None:
            raise SystemExit("--N is required to compile a .snp file")
        args.file, args.B, args.write_back_bound = args.net, None, None
        return _compile(args)[1]
    return _read_net(args.net)


def cmd_encode(args):
    net = _net_from(args)
    seq = emit_compressed(net) if args.compressed else emit_full(net)
    _write(args.output, (seq.to_unicode() if args.unicode else seq.to_file_text()) + "\n")
    return 0


def cmd_decode(args):
    net = _read_net(args.file)
    st = net.stats()
    spec = ",".join("I" if v is None else str(v) for v in net.input_spec)
    print(f"inputs={spec} depth={st.depth} max_width={st.max_width} "
          f"max_abs_param={st.max_abs_param} outputs={net.out_width}")
    if args.dump:
        print(net.dump())
    return 0


def cmd_desclen(args):
    p, net, _ = _compile(args)
    d = desclen(net, L=p.L, V=p.V, B=net.meta["B"], c_impl=args.c_impl)
    print(f"raw_length={d.raw_length}")
    print(f"compressed_length={d.compressed_length}")
    print(f"bound={d.bound} (c_impl={d.c_impl}, L={p.L}, V={p.V}, B={net.meta['B']})")
    return 0


def cmd_corrupt(args):
    clean = read_dataset(args.data, args.inputs)
    fn = corrupt_points if args.scope == "point" else corrupt_dataset
    ds = fn(clean, Fraction(args.rho), args.mode, args.B, args.seed)
    if args.output in (None, "-"):
        import io
        import csv
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for x, y, z in ds.points:
            w.writerow(list(x) + [y, z])
        sys.stdout.write(buf.getvalue())
    else:
        write_dataset(args.output, ds)
    print(f"corrupted {len(ds.corrupted)} of {ds.n}", file=sys.stderr)
    return 0


def cmd_augment(args):
    net = _read_net(args.net)
    E = read_corrections(args.corrections)
    G = build_correction_net(net, E, args.N, None, args.B)
    seq = emit_compressed(G)
    print(f"base_depth={net.depth} depth={G.depth} symbols={len(seq)}", file=sys.stderr)
    _write(args.output, seq.to_file_text() + "\n")
    return 0


def cmd_bounds(args):
    b = bnd.BoundInputs(L=args.L, V=args.V, B=args.B, I=args.I, N=args.N, n=args.n,
                        eps=Fraction(args.eps), delta=Fraction(args.delta),
                        rho=Fraction(args.rho), c3=Fraction(args.c3))
    rows = []
    if args.kind == "sample-size":
        rows += [("sample_size", bnd.sample_size(b)), ("failprob", bnd.failure_probability(b))]
    elif args.kind == "average-error":
        rows += [("avg_error", bnd.average_error(b, Fraction(args.C)))]
    elif args.kind == "noisy":
        r = bnd.noisy_bounds(b, C_reading=args.C_reading)
        rows += [(k, getattr(r, k)) for k in ("a", "b0", "b1", "failprob", "eps_star", "avg_error",
                                              "leading", "o_term", "closed_form", "C", "C_reading")]
    else:
        rows += [("bound", bnd.binomial_tail_bound(b.n, b.rho, b.eps)),
                 ("exact_cdf", float(bnd.tail_event_cdf(b.n, b.rho, b.eps)))]
    rows += [("c3", args.c3)]
    if args.kind == "average-error":
        rows += [("C", args.C)]
    w = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{w}}  {bnd._fmt(v)}")
    return 0


def cmd_experiment(args):
    cfg = ExperimentConfig.from_file(args.config)
    res = run_generalization_experiment(cfg)
    print(res.table())
    if args.csv:
        Path(args.csv).write_text(res.csv(), encoding="utf-8")
    else:
        print()
        print(res.csv(), end="")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="snpc", description="Compile simple neural programs to ReLU networks.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", help="parse and pretty-print a program")
    s.add_argument("file")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("check", help="validate a program")
    s.add_argument("file")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("run", help="interpret a program on one input")
    s.add_argument("file")
    s.add_argument("--input", required=True, help="comma separated inputs, e.g. 3,4")
    s.add_argument("--trace", action="store_true")
    s.add_argument("--loop-bound", type=int, default=None,
                   help="run loops with the fixed repetition count of a network compiled with this B")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("bound", help="measure the runtime bound B(N)")
    s.add_argument("file")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--cap", type=int, default=1_000_000)
    s.set_defaults(func=cmd_bound)

    def compile_opts(s):
        s.add_argument("--N", type=int, required=True)
        s.add_argument("--B", type=int, default=None)
        s.add_argument("--write-back-bound", default=None, help="'auto' (default) or an integer")

    s = sub.add_parser("compile", help="compile to a .nnsym symbol sequence")
    s.add_argument("file")
    compile_opts(s)
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("verify", help="compare network and interpreter on all of [N]^I")
    s.add_argument("file")
    compile_opts(s)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("encode", help="print the symbol sequence of a network")
    s.add_argument("net", help=".nnsym file, or .snp file together with --N")
    s.add_argument("--compressed", action="store_true")
    s.add_argument("--unicode", action="store_true")
    s.add_argument("--N", type=int, default=None)
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("decode", help="decode a .nnsym file and describe the network")
    s.add_argument("file")
    s.add_argument("--dump", action="store_true")
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("desclen", help="description length of a compiled program")
    s.add_argument("file")
    compile_opts(s)
    s.add_argument("--c-impl", type=float, default=64)
    s.set_defaults(func=cmd_desclen)

    s = sub.add_parser("corrupt", help="corrupt the labels of a dataset")
    s.add_argument("data", help="lines x_1,...,x_I,y")
    s.add_argument("--rho", required=True)
    s.add_argument("--mode", choices=MODES, default="fixed-seed-random")
    s.add_argument("--scope", choices=SCOPES, default="index")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--B", type=int, default=1)
    s.add_argument("--inputs", type=int, default=None, help="input arity (default: all but the last column)")
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_corrupt)

    s = sub.add_parser("augment", help="append a correction network")
    s.add_argument("net")
    s.add_argument("--corrections", required=True, help="lines x_1,...,x_I,value")
    s.add_argument("--N", type=int, default=None)
    s.add_argument("--B", type=int, default=None)
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_augment)

    s = sub.add_parser("bounds", help="evaluate a generalization bound")
    s.add_argument("--kind", choices=("sample-size", "average-error", "noisy", "tail"), required=True,
                   help="sample size for noiseless data, averaged error, noisy-data bounds, or binomial tail")
    s.add_argument("--L", type=int, default=1)
    s.add_argument("--V", type=int, default=1)
    s.add_argument("--I", type=int, default=1)
    s.add_argument("--B", type=int, default=2)
    s.add_argument("--N", type=int, default=None)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--eps", default="1/10")
    s.add_argument("--delta", default="1/20")
    s.add_argument("--rho", default="0")
    s.add_argument("--c3", default="1")
    s.add_argument("--C", default="1")
    s.add_argument("--C-reading", choices=("B", "N"), default="B")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("experiment", help="run a generalization experiment from a key = value file")
    s.add_argument("config")
    s.add_argument("--csv", default=None, help="write the CSV rows here instead of stdout")
    s.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SNPSyntaxError, SNPValidationError, SNPRuntimeError, SweepCapExceeded, CompileError,
            CodecError, CorrectionError, ExperimentError, OSError, ValueError) as e:
        print(f"snpc: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
