"""Finite canonical models over a closure set.

Maximal consistent sets are taken relative to a finite closure (one of each
complementary pair, boolean-coherent, consistent).  Consistency is decided
by two independent procedures: the prover (a Proved disjunction of
complements means inconsistent, a Refuted one means consistent) and the
brute-force cell oracle (a satisfying cell means consistent).  Candidates
neither can decide are kept and flagged ``possible``.

Two accessibility definitions are offered.  ``literal`` uses the bare
membership condition (``[]phi in w`` implies ``phi in u``).  On a finite
closure that relation is in general not an equivalence (take the closure
of ``<>p``: a world holding ``<>p, ~p`` sees one holding ``[]~p``, which
does not see it back), so the default ``s5`` mode also requires the two
sets to agree on their box formulas, which restores symmetry and keeps the
truth lemma.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import formula as fm
from . import model as mdl
from . import oracle as orc
from . import prover as pv
from .formula import Formula


class CanonicalError(ValueError):
    pass


class OracleDisagreement(RuntimeError):
    """The prover and the brute-force oracle gave opposite decisive answers."""


@dataclass(frozen=True)
class FiniteMCS:
    members: frozenset
    possible: bool = False  # consistency could not be decided

    def __contains__(self, phi) -> bool:
        return phi in self.members

    def label(self) -> str:
        return "{" + ", ".join(sorted(fm.render(f) for f in self.members)) + "}"


@dataclass
class ConsistencyOracle:
    """Decides consistency of a finite set of NNF formulas.

    ``cross_check`` runs both procedures and raises on a contradiction.
    """

    agents: int = 2
    budget: pv.SearchBudget = field(default_factory=lambda: pv.SearchBudget(max_labels=16, max_nodes=50_000))
    max_worlds: int = 6
    cross_check: bool = False
    calls: dict = field(default_factory=lambda: {"prover": 0, "brute": 0, "undecided": 0})

    def by_prover(self, formulas) -> bool | None:
        formulas = sorted(formulas, key=fm.render)
        if not formulas:
            return True
        goal = _disjunction([fm.complement(f) for f in formulas])
        logic = "ldm" if fm.is_ldm(goal) else "tstit"
        v = pv.prove(goal, logic, self.agents, self.budget)
        if isinstance(v, pv.Proved):
            return False
        if isinstance(v, pv.Refuted):
            return True
        return None

    def by_brute_force(self, formulas) -> bool | None:
        res = orc.satisfiable(formulas, self.agents, self.max_worlds)
        if res is not None and res.satisfiable:
            return True
        return None  # no small cell found: not conclusive

    def consistent(self, formulas) -> bool | None:
        a = self.by_prover(formulas)
        if a is not None and not self.cross_check:
            self.calls["prover"] += 1
            return a
        b = self.by_brute_force(formulas)
        if a is not None and b is not None and a != b:
            raise OracleDisagreement(f"prover={a} brute={b} on {[fm.render(f) for f in formulas]}")
        if a is not None:
            self.calls["prover"] += 1
            return a
        if b is not None:
            self.calls["brute"] += 1
            return b
        self.calls["undecided"] += 1
        return None


def _disjunction(fs: list) -> Formula:
    out = fs[0]
    for f in fs[1:]:
        out = fm.Or(out, f)
    return out


def closure(phi0: Formula) -> frozenset:
    return fm.closure_of([fm.to_nnf(phi0)])


def _decision_points(c: frozenset) -> list:
    """Non-boolean pair representatives, one per complementary pair, in a fixed order."""
    seen, out = set(), []
    for phi in sorted(c, key=lambda f: (fm.size(f), fm.render(f))):
        if isinstance(phi, (fm.And, fm.Or)) or phi in seen:
            continue
        comp = fm.complement(phi)
        seen.update((phi, comp))
        out.append(min(phi, comp, key=lambda f: (isinstance(f, (fm.NegAtom,) + fm.DIAMONDS), fm.render(f))))
    return out


def _complete(c: frozenset, chosen: set) -> frozenset:
    """Close a choice on the non-boolean formulas under the boolean clauses."""
    val: dict = {}
    for phi in sorted(c, key=fm.size):
        if isinstance(phi, fm.And):
            val[phi] = val[phi.left] and val[phi.right]
        elif isinstance(phi, fm.Or):
            val[phi] = val[phi.left] or val[phi.right]
        else:
            val[phi] = phi in chosen
    return frozenset(phi for phi, v in val.items() if v)


def boolean_candidates(c: frozenset) -> list:
    """All subsets of the closure with one member per pair that are boolean-coherent."""
    points = _decision_points(c)
    out = []
    for bits in itertools.product((True, False), repeat=len(points)):
        chosen = {p if b else fm.complement(p) for p, b in zip(points, bits)}
        out.append(_complete(c, chosen))
    return out


def is_boolean_coherent(c: frozenset, s: frozenset) -> bool:
    for phi in c:
        if (phi in s) == (fm.complement(phi) in s):
            return False
        if isinstance(phi, fm.And) and phi in s and not (phi.left in s and phi.right in s):
            return False
        if isinstance(phi, fm.Or) and phi in s and not (phi.left in s or phi.right in s):
            return False
    return True


def enumerate_mcs(c: frozenset, oracle: ConsistencyOracle | None = None) -> list:
    """Closure-relative maximal consistent sets, in a deterministic order."""
    if not c:
        raise CanonicalError("empty closure")
    oracle = oracle or ConsistencyOracle()
    out = []
    for s in boolean_candidates(c):
        verdict = oracle.consistent(s)
        if verdict is False:
            continue
        out.append(FiniteMCS(s, possible=verdict is None))
    out.sort(key=lambda m: sorted(fm.render(f) for f in m.members))
    return out


@dataclass(frozen=True)
class PreCanonicalModel:
    worlds: tuple  # FiniteMCS
    agents: int
    R_box: frozenset  # index pairs
    R_i: tuple
    R_fut: frozenset
    mode: str = "s5"

    def names(self) -> tuple:
        return tuple(f"m{k}" for k in range(len(self.worlds)))


def _boxes(w: FiniteMCS, kind, agent=None) -> set:
    return {
        f for f in w.members if isinstance(f, kind) and (agent is None or f.agent == agent)
    }


def _related(w: FiniteMCS, u: FiniteMCS, kind, agent, mode: str) -> bool:
    bw = _boxes(w, kind, agent)
    if any(b.sub not in u.members for b in bw):
        return False
    if mode == "s5" and bw != _boxes(u, kind, agent):
        return False
    return True


def build_pre_canonical(mcs: list, agents: int, mode: str = "s5") -> PreCanonicalModel:
    if not mcs:
        raise CanonicalError("no maximal consistent sets")
    if mode not in ("s5", "literal"):
        raise CanonicalError(f"unknown mode {mode!r}")
    n = len(mcs)
    idx = range(n)
    r_box = frozenset((a, b) for a in idx for b in idx if _related(mcs[a], mcs[b], fm.Box, None, mode))
    r_i = []
    for i in range(agents):
        rel = {(a, b) for a in idx for b in idx if _related(mcs[a], mcs[b], fm.Stit, i, mode)}
        if mode == "s5":
            rel &= r_box  # choices refine moments
        r_i.append(frozenset(rel))
    r_fut = frozenset.intersection(*r_i) if r_i else r_box
    return PreCanonicalModel(tuple(mcs), agents, r_box, tuple(r_i), r_fut, mode)


@dataclass(frozen=True)
class CanonicalModel:
    model: mdl.LayeredModel
    pre: PreCanonicalModel
    warnings: tuple


def _is_equivalence(rel: frozenset, n: int) -> bool:
    if any((a, a) not in rel for a in range(n)):
        return False
    if any((b, a) not in rel for a, b in rel):
        return False
    succ: dict = {}
    for a, b in rel:
        succ.setdefault(a, set()).add(b)
    return all(succ.get(b, set()) <= succ[a] for a, b in rel)


def build_canonical(pre: PreCanonicalModel, T: int = 2) -> CanonicalModel:
    if T < 1:
        raise CanonicalError("T must be at least 1")
    names = pre.names()
    n = len(names)
    warnings = []
    for label, rel in [("R_box", pre.R_box)] + [(f"R_{i}", r) for i, r in enumerate(pre.R_i)]:
        if not _is_equivalence(rel, n):
            warnings.append(f"degenerate closure: {label} is not an equivalence relation")
    lift = lambda rel: frozenset((names[a], names[b]) for a, b in rel)
    letters = sorted({f.name for w in pre.worlds for f in w.members if isinstance(f, fm.Atom)})
    valuation = {p: frozenset(names[k] for k, w in enumerate(pre.worlds) if fm.Atom(p) in w.members) for p in letters}
    m = mdl.LayeredModel(
        agents=pre.agents,
        base_worlds=names,
        T=T,
        R_box_0=lift(pre.R_box),
        R_i_0=tuple(lift(r) for r in pre.R_i),
        R_fut=lift(pre.R_fut),
        R_Ag_0=lift(pre.R_fut),
        valuation=valuation,
    )
    return CanonicalModel(m, pre, tuple(warnings))


# ---------------------------------------------------------------- checks


@dataclass
class TruthLemmaReport:
    formula: str
    agents: int
    mode: str
    mcs_count: int
    possible: int
    mismatches: list
    existence_failures: list
    c2_failures: list
    frame: mdl.FrameReport | None
    layer_locality: list
    ag_stability: list
    stationarity: list
    warnings: list
    oracle_calls: dict

    @property
    def ok(self) -> bool:
        return not (
            self.mismatches
            or self.existence_failures
            or self.c2_failures
            or self.layer_locality
            or self.ag_stability
            or self.stationarity
            or self.warnings
            or (self.frame is not None and not self.frame.all_pass)
        )

    def lines(self) -> list:
        out = [
            f"formula      {self.formula}",
            f"agents       {self.agents}   mode {self.mode}",
            f"MCS          {self.mcs_count} ({self.possible} undecided)",
            f"truth        {len(self.mismatches)} mismatches",
            f"existence    {len(self.existence_failures)} failures",
            f"C2 (layer 0) {len(self.c2_failures)} failures",
            f"locality     {len(self.layer_locality)} cross-layer edges",
            f"Ag levels    {len(self.ag_stability)} unstable layers",
            f"stationary   {len(self.stationarity)} violations",
        ]
        if self.frame is not None:
            out += ["frame:"] + ["  " + s for s in self.frame.lines()]
        out += [f"warning      {w}" for w in self.warnings]
        out.append("result       " + ("ok" if self.ok else "FAILED"))
        return out

    def to_json(self) -> dict:
        show = lambda xs: [[fm.render(x) if isinstance(x, Formula) else x for x in t] for t in xs]
        return {
            "formula": self.formula,
            "agents": self.agents,
            "mode": self.mode,
            "mcs": self.mcs_count,
            "possible": self.possible,
            "mismatches": show(self.mismatches),
            "existence_failures": show(self.existence_failures),
            "c2_failures": [list(t) for t in self.c2_failures],
            "frame": self.frame.to_json() if self.frame is not None else None,
            "layer_locality": [list(e) for e in self.layer_locality],
            "ag_stability": [[j, a, b] for j, a, b in self.ag_stability],
            "stationarity": show(self.stationarity),
            "warnings": list(self.warnings),
            "oracle_calls": dict(self.oracle_calls),
            "ok": self.ok,
        }


def _c2_failures(pre: PreCanonicalModel) -> list:
    n = len(pre.worlds)
    succ_i = [{a: {b for x, b in r if x == a} for a in range(n)} for r in pre.R_i]
    box = {a: {b for x, b in pre.R_box if x == a} for a in range(n)}
    bad = []
    for a in range(n):
        for tup in itertools.product(sorted(box[a]), repeat=pre.agents):
            if not all(t in box[a] for t in tup):
                continue
            common = set(range(n))
            for i, t in enumerate(tup):
                common &= succ_i[i][t]
            if not common:
                bad.append(tuple(tup))
    return sorted(set(bad))


def truth_lemma_check(
    phi0: Formula,
    agents: int = 2,
    T: int = 2,
    mode: str = "s5",
    oracle: ConsistencyOracle | None = None,
) -> TruthLemmaReport:
    """Compare membership with truth at layer 0 for every closure formula and MCS."""
    if not fm.is_ldm(phi0):
        raise CanonicalError("the canonical construction covers box, diamond and agent operators only")
    if fm.max_agent(phi0) > agents:
        raise CanonicalError("formula mentions agents beyond the given count")
    oracle = oracle or ConsistencyOracle(agents=agents)
    c = closure(phi0)
    mcs = enumerate_mcs(c, oracle)
    pre = build_pre_canonical(mcs, agents, mode)
    can = build_canonical(pre, T)
    model = can.model
    names = pre.names()
    ev = mdl.evaluator_for(model, c)
    strict = [k for k, w in enumerate(mcs) if not w.possible]
    mismatches, existence = [], []
    for k in strict:
        w = mcs[k]
        for psi in sorted(c, key=fm.render):
            if ev.holds((names[k], 0), psi) != (psi in w.members):
                mismatches.append((psi, names[k]))
            if isinstance(psi, (fm.Dia, fm.CoStit)) and psi in w.members:
                rel = pre.R_box if isinstance(psi, fm.Dia) else pre.R_i[psi.agent]
                if not any((k, u) in rel and psi.sub in mcs[u].members for u in range(len(mcs))):
                    existence.append((psi, names[k]))
    explicit = model.to_explicit()
    return TruthLemmaReport(
        formula=fm.render(phi0),
        agents=agents,
        mode=mode,
        mcs_count=len(mcs),
        possible=len(mcs) - len(strict),
        mismatches=mismatches,
        existence_failures=existence,
        c2_failures=_c2_failures(pre),
        frame=mdl.check_frame(explicit),
        layer_locality=mdl.layer_locality(model),
        ag_stability=mdl.ag_level_stability(model, max(3, T)),
        stationarity=mdl.stationarity_violations(model, sorted(c, key=fm.render)),
        warnings=list(can.warnings),
        oracle_calls=dict(oracle.calls),
    )
