"""Check that every Proved formula holds at every world of random layered models.

    python scripts/soundness_sweep.py --formulas 1000 --models 80 --max-size 12
"""

import argparse
import random
import time
from collections import Counter
from dataclasses import dataclass

from tstit import formula as fm
from tstit import model as mdl
from tstit import prover as pv


@dataclass
class SweepConfig:
    formulas: int = 300
    models: int = 50
    max_size: int = 12
    max_worlds: int = 16
    max_T: int = 2
    max_labels: int = 12
    max_nodes: int = 20_000
    seed: int = 0


def random_models(cfg: SweepConfig, rng: random.Random) -> list:
    out = []
    while len(out) < cfg.models:
        params = mdl.GenParams(
            agents=2, cells=rng.randint(1, 3), T=rng.randint(1, cfg.max_T), max_worlds=cfg.max_worlds
        )
        try:
            out.append(mdl.generate_model(params, rng.randrange(2**31)))
        except mdl.ModelError:
            pass
    return out


def sweep(cfg: SweepConfig) -> dict:
    rng = random.Random(cfg.seed)
    models = random_models(cfg, rng)
    budget = pv.SearchBudget(cfg.max_labels, cfg.max_nodes)
    verdicts: Counter = Counter()
    unsound = []
    t0 = time.perf_counter()
    for _ in range(cfg.formulas):
        phi = fm.random_formula(rng, rng.randint(1, cfg.max_size), sugar=True)
        v = pv.prove(phi, budget=budget)
        verdicts[v.verdict] += 1
        if isinstance(v, pv.Proved):
            bad = next((k for k, m in enumerate(models) if not mdl.valid_in(m, phi)), None)
            if bad is not None:
                unsound.append((fm.render(phi), bad))
    return {"verdicts": dict(verdicts), "unsound": unsound, "seconds": time.perf_counter() - t0}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(SweepConfig()).items():
        ap.add_argument("--" + name.replace("_", "-"), type=type(default), default=default)
    cfg = SweepConfig(**vars(ap.parse_args()))
    out = sweep(cfg)
    print(f"config   {cfg}")
    print(f"verdicts {out['verdicts']}")
    print(f"unsound  {len(out['unsound'])}")
    for text, k in out["unsound"]:
        print(f"  {text} fails in model {k}")
    print(f"time     {out['seconds']:.1f}s")
    raise SystemExit(1 if out["unsound"] else 0)


if __name__ == "__main__":
    main()
