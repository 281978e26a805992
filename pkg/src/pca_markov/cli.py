"""``pca-markov`` command line.

Exit codes: 0 analysis completed (whatever the verdict), 2 input error,
3 resource limit, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

import numpy as np

from .core import (
    BudgetExceeded,
    NoConvergence,
    NotPrimitive,
    PCAError,
    SingularNormalization,
    load_tm,
    tm_to_json,
)
from .generators import gen_commuting_pair, gen_cond3_tm, gen_kappa1_case2, gen_symmetric_tm
from .hz import EPS_COND, kernel_pair_to_tm
from .oracle import EPS_ORACLE, exact_hz_distribution, exact_stationary, is_cmc, is_hzcmc
from .report import SCHEMA_VERSION, build_report, render_text
from .simulate import pattern_stats, simulate
from .spectral import EPS_EIG

EXIT_OK, EXIT_INPUT, EXIT_RESOURCE, EXIT_NUMERIC = 0, 2, 3, 4

MODES = ("commuting", "cond3", "symmetric", "kappa1-case2")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _emit(args, doc: dict, text: str) -> None:
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
    if args.format == "json":
        sys.stdout.write(json.dumps(doc, indent=1) + "\n")
    else:
        sys.stdout.write(text)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _text_lines(doc: dict, skip=("schema_version",)) -> str:
    return "".join(f"{k}: {_fmt(v)}\n" for k, v in doc.items() if k not in skip)


# ------------------------------------------------------------- subcommands


def cmd_analyze(args) -> int:
    tm = load_tm(args.path)
    rep = build_report(tm, args.n, args.eps_cond, args.eps_eig, args.eps_oracle)
    doc = rep.to_dict()
    _emit(args, doc, render_text(doc))
    return EXIT_OK


def cmd_oracle(args) -> int:
    tm = load_tm(args.path)
    if args.n < 3:
        raise ValueError("--n must be >= 3 for the structure tests")
    doc = {"schema_version": SCHEMA_VERSION, "n": args.n, "structure": args.structure}
    if args.structure == "h":
        dist = exact_stationary(tm, args.n, args.eps_oracle)
        fit = is_cmc(dist, args.eps_oracle)
        doc.update(
            cmc=fit.ok,
            residual=fit.residual,
            field_residual=fit.field_residual,
            rank=fit.rank,
            M=None if fit.m is None else fit.m.tolist(),
        )
        head = "CMC: " + (f"yes, rank-{fit.rank}" if fit.ok else "no")
    else:
        hz = exact_hz_distribution(tm, args.n, args.eps_oracle)
        fit = is_hzcmc(hz, args.eps_oracle)
        doc.update(
            hzcmc=fit.ok,
            residual=fit.residual,
            field_residual=fit.field_residual,
            D=None if fit.d is None else fit.d.tolist(),
            U=None if fit.u is None else fit.u.tolist(),
        )
        head = "HZCMC: " + ("yes" if fit.ok else "no")
    _emit(args, doc, head + "\n" + _text_lines(doc, ("schema_version", "n", "structure")))
    return EXIT_OK


def cmd_simulate(args) -> int:
    tm = load_tm(args.path)
    if args.k > args.width:
        raise ValueError(f"--k {args.k} exceeds --width {args.width}")
    init = None
    if args.init_row is not None:
        init = np.array([int(v) for v in args.init_row.split(",")], dtype=np.int64)
    dg = simulate(tm, args.width, args.steps, args.seed, init=init, threads=args.threads)
    if args.export:
        dg.save(args.export, args.export_format)
    st = pattern_stats(dg, args.k, args.burn_in)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "width": dg.width,
        "steps": dg.steps,
        "seed": dg.seed,
        "burn_in": st.burn_in,
        "k": st.window,
        "rows_used": st.rows_used,
        "sha256": hashlib.sha256(dg.to_bytes()).hexdigest(),
        "patterns": [list(st.pattern(i)) for i in range(st.freq.size)],
        "counts": st.counts.tolist(),
        "freq": st.freq.tolist(),
        "se": st.se.tolist(),
    }
    lines = [f"{k}: {doc[k]}" for k in ("width", "steps", "seed", "burn_in", "k", "rows_used", "sha256")]
    lines.append("pattern count freq se")
    for p, c, f, s in zip(doc["patterns"], doc["counts"], doc["freq"], doc["se"]):
        lines.append(f"{''.join(map(str, p))} {c} {f!r} {s!r}")
    _emit(args, doc, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.kappa < 1:
        raise ValueError("--kappa must be >= 1")
    extra = {"mode": args.mode, "seed": args.seed}
    if args.mode == "commuting":
        d, u = gen_commuting_pair(args.kappa, args.seed)
        tm = kernel_pair_to_tm(d, u)
        extra.update(D=d.tolist(), U=u.tolist())
    elif args.mode == "cond3":
        tm = gen_cond3_tm(args.kappa, args.seed)
    elif args.mode == "symmetric":
        tm = gen_symmetric_tm(args.kappa, args.seed)
    else:
        if args.kappa != 1:
            raise ValueError("kappa1-case2 needs --kappa 1")
        tm, rho = gen_kappa1_case2(args.seed, branch=args.branch)
        extra.update(rho=rho.tolist(), branch=args.branch)
    text = tm_to_json(tm, **extra)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _add_eps(p):
    p.add_argument("--eps-cond", type=float, default=EPS_COND)
    p.add_argument("--eps-eig", type=float, default=EPS_EIG)
    p.add_argument("--eps-oracle", type=float, default=EPS_ORACLE)


def _add_output(p):
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--json-out", metavar="PATH", help="also write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pca-markov", description="Markov invariant laws of two-neighbour PCA.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="condition report for a TM file")
    p.add_argument("path")
    p.add_argument("--n", type=int, default=None, help="cycle length (default: all)")
    _add_eps(p)
    _add_output(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("oracle", help="exact cylinder law and structure test")
    p.add_argument("path")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--structure", choices=("h", "hz"), default="hz")
    _add_eps(p)
    _add_output(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("simulate", help="Monte Carlo space-time diagram and pattern stats")
    p.add_argument("path")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--init-row", default=None, help="comma-separated initial row")
    p.add_argument("--export", metavar="PATH")
    p.add_argument("--export-format", choices=("text", "binary"), default="binary")
    _add_eps(p)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("generate", help="write a seeded test instance")
    p.add_argument("--kappa", type=int, required=True)
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--branch", type=int, choices=(1, 2), default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (NoConvergence, NotPrimitive, SingularNormalization) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (PCAError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
