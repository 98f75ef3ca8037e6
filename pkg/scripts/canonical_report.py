"""Build finite canonical models and run the truth-lemma checks.

    python scripts/canonical_report.py "<>p" "[]p -> [0]p" --agents 2 --json out.json
"""

import argparse
import json
import time

from tstit import canonical as cn
from tstit import formula as fm

DEFAULT = ["p", "<>p", "[]p -> [0]p", "(<>[0]p & <>[1]q) -> <>([0]p & [1]q)"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("formulas", nargs="*", default=DEFAULT)
    ap.add_argument("--agents", type=int, default=2)
    ap.add_argument("--layers", type=int, default=2)
    ap.add_argument("--mode", choices=["s5", "literal"], default="s5")
    ap.add_argument("--cross-check", action="store_true", help="run both consistency oracles on every candidate")
    ap.add_argument("--json")
    args = ap.parse_args()
    reports = []
    for text in args.formulas:
        oracle = cn.ConsistencyOracle(agents=args.agents, cross_check=args.cross_check)
        t0 = time.perf_counter()
        rep = cn.truth_lemma_check(fm.parse(text), args.agents, args.layers, args.mode, oracle)
        print("\n".join(rep.lines()))
        print(f"time         {time.perf_counter() - t0:.2f}s\n")
        reports.append(rep.to_json())
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(reports, fh, indent=1)
    raise SystemExit(0 if all(r["ok"] for r in reports) else 1)


if __name__ == "__main__":
    main()
