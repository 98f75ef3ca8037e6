"""Run the prover on random formulas by size and verify every decisive verdict.

Proofs go through the proof checker; countermodels are model-checked and
frame-validated.  Prints a per-size table and optionally writes a CSV.

    python scripts/prover_stress.py --per-size 100 --sizes 2-14 --csv stress.csv
"""

import argparse
import csv
import random
import time
from dataclasses import dataclass

from tstit import formula as fm
from tstit import model as mdl
from tstit import prover as pv
from tstit.sequent import check_proof


@dataclass
class StressConfig:
    per_size: int = 50
    sizes: str = "2-12"
    agents: int = 2
    max_labels: int = 12
    max_nodes: int = 50_000
    seed: int = 1
    csv: str = ""


def size_range(text: str) -> range:
    lo, _, hi = text.partition("-")
    return range(int(lo), int(hi or lo) + 1)


def verify(phi, v, agents) -> bool:
    if isinstance(v, pv.Proved):
        return check_proof(v.tree, "tstit", agents).accepted
    if isinstance(v, pv.Refuted):
        return not mdl.satisfies(v.model, v.interpretation["x0"], phi) and mdl.check_frame(v.model).all_pass
    return True


def run(cfg: StressConfig) -> list:
    rng = random.Random(cfg.seed)
    budget = pv.SearchBudget(cfg.max_labels, cfg.max_nodes)
    rows = []
    for n in size_range(cfg.sizes):
        row = {"size": n, "Proved": 0, "Refuted": 0, "Unknown": 0, "bad": 0, "seconds": 0.0}
        for _ in range(cfg.per_size):
            phi = fm.random_formula(rng, n, agents=cfg.agents)
            t0 = time.perf_counter()
            v = pv.prove(phi, agents=cfg.agents, budget=budget)
            row["seconds"] += time.perf_counter() - t0
            row[v.verdict] += 1
            row["bad"] += not verify(phi, v, cfg.agents)
        rows.append(row)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(StressConfig()).items():
        ap.add_argument("--" + name.replace("_", "-"), type=type(default), default=default)
    cfg = StressConfig(**vars(ap.parse_args()))
    rows = run(cfg)
    cols = ["size", "Proved", "Refuted", "Unknown", "bad", "seconds"]
    print("  ".join(f"{c:>8}" for c in cols))
    for r in rows:
        print("  ".join(f"{r[c]:>8.2f}" if c == "seconds" else f"{r[c]:>8}" for c in cols))
    total = sum(r["Proved"] + r["Refuted"] + r["Unknown"] for r in rows)
    unknown = sum(r["Unknown"] for r in rows)
    print(f"unknown rate {unknown / total:.1%}, unverified verdicts {sum(r['bad'] for r in rows)}")
    if cfg.csv:
        with open(cfg.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            w.writerows(rows)
    raise SystemExit(1 if any(r["bad"] for r in rows) else 0)


if __name__ == "__main__":
    main()
