"""Command-line front end.

Exit codes: ``prove`` returns 0 (Proved), 1 (Refuted) or 2 (Unknown);
``check-model`` and ``check-proof`` return 0 when everything passes and 1
otherwise; ``canonical --check-truth-lemma`` returns 1 on any failure.
Usage errors exit with 64, malformed input (formulas, JSON) with 65 and
I/O failures with 74.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict, dataclass

from . import canonical as cn
from . import formula as fm
from . import model as mdl
from . import prover as pv
from . import sequent as sq

EX_USAGE, EX_DATAERR, EX_IOERR = 64, 65, 74


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


@dataclass
class RunConfig:
    """Validated options of one invocation."""

    command: str
    agents: int = 2
    logic: str = "tstit"
    max_labels: int = 12
    max_nodes: int = 200_000
    max_depth: int = 100_000
    seed: int = 0

    def __post_init__(self):
        for name in ("agents", "max_labels", "max_nodes", "max_depth"):
            if getattr(self, name) < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be at least 1")

    @property
    def budget(self) -> pv.SearchBudget:
        return pv.SearchBudget(self.max_labels, self.max_nodes, self.max_depth)


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _budget_args(p):
    p.add_argument("--logic", choices=["ldm", "tstit"], default="tstit")
    p.add_argument("--agents", type=_positive, default=2)
    p.add_argument("--max-labels", type=_positive, default=12)
    p.add_argument("--max-nodes", type=_positive, default=200_000)
    p.add_argument("--max-depth", type=_positive, default=100_000)
    p.add_argument("--compg2", choices=["lazy", "off"], default="lazy")
    p.add_argument("--irrg", choices=["all-box", "g-overlap"], default="all-box")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tstit", description="Prover, model checker and canonical models for Ldm/Tstit.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prove", help="search for a proof or a countermodel")
    p.add_argument("formula")
    _budget_args(p)
    p.add_argument("--out", help="write the proof (Proved) or countermodel (Refuted) JSON here")
    p.add_argument("--json", action="store_true", help="print a JSON summary")

    p = sub.add_parser("check-model", help="validate the frame conditions of a model file")
    p.add_argument("path")
    p.add_argument("--c7", choices=["disjoint", "irreflexive"], default="disjoint")
    p.add_argument("--c2-bound", type=_positive, default=mdl.DEFAULT_C2_BOUND)
    p.add_argument("--eval", action="append", default=[], metavar="FORMULA", help="also report where FORMULA holds")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("gen-model", help="generate a random valid layered model")
    p.add_argument("--agents", type=_positive, default=2)
    p.add_argument("--cells", type=_positive, default=1)
    p.add_argument("--cell-shape", help="choices per agent, e.g. 2x2")
    p.add_argument("--multiplicity", type=_positive)
    p.add_argument("--atoms", default="p,q")
    p.add_argument("--layers", "-T", type=_positive, default=1, dest="T")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("canonical", help="build the finite canonical model of a closure")
    p.add_argument("formula")
    p.add_argument("--agents", type=_positive, default=2)
    p.add_argument("--layers", type=_positive, default=2)
    p.add_argument("--mode", choices=["s5", "literal"], default="s5")
    p.add_argument("--emit-model")
    p.add_argument("--check-truth-lemma", action="store_true")
    p.add_argument("--report", help="write the machine-readable report here")

    p = sub.add_parser("check-proof", help="validate a proof file")
    p.add_argument("path")
    p.add_argument("--logic", choices=["ldm", "tstit", "xstit"])
    p.add_argument("--agents", type=_positive)

    p = sub.add_parser("batch", help="prove every formula of a file and write a CSV summary")
    p.add_argument("path")
    _budget_args(p)
    p.add_argument("--csv", required=True)

    p = sub.add_parser("fixture", help="write the Xstit independence derivation as a proof file")
    p.add_argument("--out", required=True)
    return ap


# ---------------------------------------------------------------- commands


def _config(args) -> pv.ProverConfig:
    return pv.ProverConfig(compg2=args.compg2, irrg=args.irrg)


def _verdict_line(phi, v) -> str:
    s = v.stats
    return f"{v.verdict}  {fm.render(phi)}  (labels {s.labels}, nodes {s.nodes}, branches {s.branches})"


def cmd_prove(args) -> int:
    cfg = RunConfig("prove", args.agents, args.logic, args.max_labels, args.max_nodes, args.max_depth)
    phi = fm.parse(args.formula, agents=args.agents)
    v = pv.prove(phi, cfg.logic, cfg.agents, cfg.budget, _config(args))
    summary = {"formula": fm.render(phi), "verdict": v.verdict, **asdict(v.stats)}
    if isinstance(v, pv.Proved):
        summary["proof_nodes"] = v.tree.size()
        if args.out:
            sq.dump_proof(v.tree, args.out, cfg.logic, cfg.agents)
    elif isinstance(v, pv.Refuted):
        summary["root_world"] = v.interpretation["x0"]
        if args.out:
            mdl.dump_model(v.model, args.out, {"interpretation": v.interpretation})
    else:
        summary["reason"] = v.reason
    if args.json:
        print(json.dumps(summary, indent=1))
    else:
        print(_verdict_line(phi, v))
        if isinstance(v, pv.Refuted):
            print(f"countermodel: {len(v.model.worlds)} worlds, root {summary['root_world']}")
        if isinstance(v, pv.Unknown):
            print(v.reason)
        if args.out and not isinstance(v, pv.Unknown):
            print(f"wrote {args.out}")
    return {"Proved": 0, "Refuted": 1, "Unknown": 2}[v.verdict]


def cmd_check_model(args) -> int:
    m = mdl.load_model(args.path)
    rep = mdl.check_frame(m, c7=args.c7, c2_bound=args.c2_bound)
    evals = {}
    for text in args.eval:
        phi = fm.parse(text, agents=m.agents)
        ev = mdl.evaluator_for(m, [phi])
        ws = m.worlds() if isinstance(m, mdl.LayeredModel) else list(m.worlds)
        evals[fm.render(phi)] = [w if isinstance(w, str) else f"{w[0]}@{w[1]}" for w in ws if ev.holds(w, phi)]
    if args.json:
        out = {"frame": rep.to_json(), "all_pass": rep.all_pass}
        if evals:
            out["truth"] = evals
        print(json.dumps(out, indent=1))
    else:
        print("\n".join(rep.lines()))
        for k, ws in evals.items():
            print(f"{k} holds at: {', '.join(ws) if ws else '(nowhere)'}")
        print("all pass" if rep.all_pass else "FAILED")
    return 0 if rep.all_pass else 1


def _shape(text):
    if text is None:
        return None
    try:
        return tuple(int(x) for x in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"bad cell shape {text!r} (expected e.g. 2x2)")


def cmd_gen_model(args) -> int:
    shape = _shape(args.cell_shape)
    if shape is not None and len(shape) != args.agents:
        raise UsageError("cell shape needs one entry per agent")
    atoms = tuple(a.strip() for a in args.atoms.split(",") if a.strip())
    params = mdl.GenParams(args.agents, args.cells, shape, args.multiplicity, atoms, args.T)
    m = mdl.generate_model(params, args.seed)
    mdl.dump_model(m, args.out, {"seed": args.seed})
    print(f"wrote {args.out}: {len(m.base_worlds)} base worlds, T={m.T}, seed={args.seed}")
    return 0


def cmd_canonical(args) -> int:
    phi = fm.parse(args.formula, agents=args.agents)
    if not fm.is_ldm(phi):
        raise UsageError("canonical models cover box, diamond and agent operators only")
    code = 0
    oracle = cn.ConsistencyOracle(agents=args.agents)
    if args.check_truth_lemma:
        rep = cn.truth_lemma_check(phi, args.agents, args.layers, args.mode, oracle)
        print("\n".join(rep.lines()))
        if args.report:
            with open(args.report, "w", encoding="utf-8") as fh:
                json.dump(rep.to_json(), fh, indent=1)
                fh.write("\n")
        code = 0 if rep.ok else 1
    if args.emit_model or not args.check_truth_lemma:
        mcs = cn.enumerate_mcs(cn.closure(phi), oracle)
        can = cn.build_canonical(cn.build_pre_canonical(mcs, args.agents, args.mode), args.layers)
        for w in can.warnings:
            print(f"warning: {w}")
        if args.emit_model:
            names = can.pre.names()
            mdl.dump_model(can.model, args.emit_model, {"mcs": {n: sorted(fm.render(f) for f in w.members) for n, w in zip(names, mcs)}})
            print(f"wrote {args.emit_model}: {len(mcs)} worlds per layer")
        else:
            for n, w in zip(can.pre.names(), mcs):
                print(f"{n}{'?' if w.possible else ''}  {w.label()}")
    return code


def cmd_check_proof(args) -> int:
    tree, meta = sq.load_proof(args.path)
    logic = args.logic or meta.get("logic", "tstit")
    agents = args.agents or meta.get("agents")
    res = sq.check_proof(tree, logic, agents)
    for w in res.warnings:
        print(f"warning: {w}")
    if res.accepted:
        print(f"accepted ({tree.size()} nodes, logic {logic})")
        return 0
    print(f"rejected at {list(res.path)}: {res.reason}")
    return 1


def read_formula_file(path) -> list[str]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            text = line.split("#", 1)[0].strip()
            if text:
                out.append(text)
    return out


def cmd_batch(args) -> int:
    cfg = RunConfig("batch", args.agents, args.logic, args.max_labels, args.max_nodes, args.max_depth)
    lines = read_formula_file(args.path)
    rows = []
    for text in lines:
        t0 = time.perf_counter()
        try:
            phi = fm.parse(text, agents=cfg.agents)
            v = pv.prove(phi, cfg.logic, cfg.agents, cfg.budget, _config(args))
            verdict, labels, nodes = v.verdict, v.stats.labels, v.stats.nodes
        except (fm.FormulaError, ValueError) as e:
            verdict, labels, nodes = f"error: {e}", 0, 0
        rows.append([text, verdict, labels, nodes, f"{time.perf_counter() - t0:.4f}"])
    with open(args.csv, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["formula", "verdict", "labels", "nodes", "seconds"])
        w.writerows(rows)
    counts: dict = {}
    for r in rows:
        counts[r[1]] = counts.get(r[1], 0) + 1
    print(f"{len(rows)} formulas: " + ", ".join(f"{k} {v}" for k, v in sorted(counts.items())))
    return 0


def cmd_fixture(args) -> int:
    t = sq.appendix_b_fixture()
    sq.dump_proof(t, args.out, "xstit", 2)
    print(f"wrote {args.out} ({t.size()} nodes)")
    return 0


COMMANDS = {
    "prove": cmd_prove,
    "check-model": cmd_check_model,
    "gen-model": cmd_gen_model,
    "canonical": cmd_canonical,
    "check-proof": cmd_check_proof,
    "batch": cmd_batch,
    "fixture": cmd_fixture,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:  # usage errors and --help
        return e.code if isinstance(e.code, int) else EX_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"tstit: {e}", file=sys.stderr)
        return EX_USAGE
    except OSError as e:
        print(f"tstit: {e}", file=sys.stderr)
        return EX_IOERR
    except (fm.FormulaError, mdl.ModelError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        print(f"tstit: invalid input: {e}", file=sys.stderr)
        return EX_DATAERR


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
