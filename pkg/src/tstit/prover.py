"""Reduction-tree proof search for Ldm and Tstit.

The root sequent is ``x0 : nnf(phi)``.  Rules are applied bottom-up with a
fixed priority that is still fair: closure is checked on every addition;
non-branching rules that create no label run to a fixpoint in rounds; then
one branching rule (And, connG, connH, compG2), round-robin by rule; then
one label-creating rule (box-type rules, IOA, ncuh), round-robin by rule.
An instance is never applied when everything it would add is present
(for label-creating rules: when a witness label already exists).

Seriality is handled lazily.  When a branch saturates, the open sequent is
turned into a model whose G-maximal classes are continued by a stationary
tail; if some tail valuation falsifies every pending F-obligation the
branch is refuted, otherwise ``serG`` is applied to a G-maximal label and
the search goes on.  Every countermodel is verified by the model checker
before it is reported.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field

from . import formula as fm
from . import model as mdl
from .formula import Formula
from .sequent import LF, ProofTree, Rel, RuleContext, Sequent, label_key, sequent

LOGICS = ("ldm", "tstit")


class BudgetError(ValueError):
    pass


class ExtractionError(RuntimeError):
    """An open saturated branch did not yield a countermodel: a rule-schema bug."""


@dataclass(frozen=True)
class SearchBudget:
    max_labels: int = 12
    max_nodes: int = 200_000
    max_depth: int = 100_000

    def __post_init__(self):
        for name in ("max_labels", "max_nodes", "max_depth"):
            if getattr(self, name) < 1:
                raise BudgetError(f"{name} must be at least 1")


@dataclass(frozen=True)
class ProverConfig:
    compg2: str = "lazy"  # "lazy" | "off"
    irrg: str = "all-box"  # "all-box" | "g-overlap"
    prune: bool = True
    schedule: str = "create-first"  # "create-first" | "split-first"


@dataclass
class Stats:
    nodes: int = 0
    labels: int = 0
    branches: int = 0


@dataclass(frozen=True)
class Proved:
    tree: ProofTree
    stats: Stats

    verdict = "Proved"


@dataclass(frozen=True)
class Refuted:
    model: mdl.ExplicitModel
    interpretation: dict
    sequent: Sequent
    stats: Stats

    verdict = "Refuted"


@dataclass(frozen=True)
class Unknown:
    reason: str
    stats: Stats

    verdict = "Unknown"


ProverVerdict = Proved | Refuted | Unknown


# ---------------------------------------------------------------- branch state


@dataclass
class _Step:
    rule: str
    inst: dict
    adds: tuple
    used: tuple


@dataclass
class _Split:
    rule: str
    inst: dict
    alternatives: list
    used: tuple


class _Branch:
    def __init__(self, logic: str, agents: int):
        self.logic = logic
        self.agents = agents
        self.rels: set = set()
        self.fmls: set = set()
        self.succ: dict = defaultdict(lambda: defaultdict(set))
        self.fml_at: dict = defaultdict(set)
        self.labels: list = []
        self.label_set: set = set()
        self.counter = 0
        self.steps: list = []
        self.closed: tuple | None = None
        self.g_extended: set = set()

    def copy(self) -> "_Branch":
        b = _Branch.__new__(_Branch)
        b.logic, b.agents = self.logic, self.agents
        b.rels, b.fmls = set(self.rels), set(self.fmls)
        b.succ = defaultdict(lambda: defaultdict(set))
        for key, table in self.succ.items():
            inner = b.succ[key]
            for x, ys in table.items():
                inner[x] = set(ys)
        b.fml_at = defaultdict(set, {k: set(v) for k, v in self.fml_at.items()})
        b.labels, b.label_set = list(self.labels), set(self.label_set)
        b.counter = self.counter
        b.steps = []
        b.closed = None
        b.g_extended = set(self.g_extended)
        return b

    def _note_label(self, x: str) -> None:
        if x not in self.label_set:
            self.label_set.add(x)
            self.labels.append(x)

    def has(self, item) -> bool:
        return item in (self.rels if isinstance(item, Rel) else self.fmls)

    def add(self, item) -> bool:
        if isinstance(item, Rel):
            if item in self.rels:
                return False
            self.rels.add(item)
            self.succ[(item.kind, item.param)][item.x].add(item.y)
            self._note_label(item.x)
            self._note_label(item.y)
            if self.closed is None:
                other = {"RG": "RGbar", "RGbar": "RG"}.get(item.kind)
                if other and Rel(other, item.x, item.y) in self.rels:
                    self.closed = ("compG1", {"x": item.x, "y": item.y})
            return True
        if item in self.fmls:
            return False
        self.fmls.add(item)
        self.fml_at[item.label].add(item.formula)
        self._note_label(item.label)
        phi = item.formula
        if self.closed is None and isinstance(phi, (fm.Atom, fm.NegAtom)):
            dual = fm.NegAtom(phi.name) if isinstance(phi, fm.Atom) else fm.Atom(phi.name)
            if dual in self.fml_at[item.label]:
                self.closed = ("id", {"label": item.label, "atom": phi.name})
        return True

    def apply(self, rule: str, inst: dict, adds, used) -> None:
        new = tuple(it for it in adds if not self.has(it))
        for it in new:
            self.add(it)
        self.steps.append(_Step(rule, inst, new, tuple(used)))

    def fresh(self) -> str:
        while f"x{self.counter}" in self.label_set:
            self.counter += 1
        name = f"x{self.counter}"
        self.counter += 1
        return name

    def out(self, kind: str, x: str, param=None) -> set:
        table = self.succ.get((kind, param))
        if not table:
            return set()
        return table.get(x, set())

    def pairs(self, kind: str, param=None):
        table = self.succ.get((kind, param), {})
        for x in sorted(table, key=label_key):
            for y in sorted(table[x], key=label_key):
                yield x, y

    def sorted_labels(self) -> list:
        return sorted(self.labels, key=label_key)

    def sequent(self) -> Sequent:
        return Sequent(frozenset(self.rels), frozenset(self.fmls))

    def witness_item(self, x: str):
        """A canonical item mentioning ``x`` (for rules whose only premise is a label)."""
        cands = [LF(x, f) for f in self.fml_at.get(x, ())]
        for key, table in self.succ.items():
            for y in table.get(x, ()):
                cands.append(Rel(key[0], x, y, key[1]))
        if not cands:
            for key, table in self.succ.items():
                for src, ys in table.items():
                    if x in ys:
                        cands.append(Rel(key[0], src, x, key[1]))
        from .sequent import item_key

        return min(cands, key=item_key)


def _sorted_fmls(b: _Branch, x: str) -> list:
    return sorted(b.fml_at.get(x, ()), key=fm.render)


# ---------------------------------------------------------------- rule instances

_DIA_NAME = {fm.Dia: "Dia", fm.CoStit: "CoStit", fm.AgCoStit: "AgCoStit", fm.F: "F", fm.P: "P"}
_BOX_NAME = {fm.Box: "Box", fm.Stit: "Stit", fm.AgStit: "AgStit", fm.G: "G", fm.H: "H"}


def _modal_key(phi: Formula):
    if isinstance(phi, (fm.Box, fm.Dia)):
        return ("Rbox", None)
    if isinstance(phi, (fm.Stit, fm.CoStit)):
        return ("Ri", phi.agent)
    if isinstance(phi, (fm.AgStit, fm.AgCoStit)):
        return ("RAg", None)
    if isinstance(phi, (fm.G, fm.F)):
        return ("RG", None)
    return ("RH", None)


def _deterministic(b: _Branch, cfg: ProverConfig):
    """One round of non-branching, non-creating instances over a snapshot."""
    tstit = b.logic == "tstit"
    labels = b.sorted_labels()
    n = b.agents
    out = []
    for x in labels:
        for phi in _sorted_fmls(b, x):
            if isinstance(phi, fm.Or):
                if not (b.has(LF(x, phi.left)) and b.has(LF(x, phi.right))):
                    out.append(
                        ("Or", {"label": x, "formula": phi}, [LF(x, phi.left), LF(x, phi.right)], [LF(x, phi)])
                    )
            elif type(phi) in _DIA_NAME:
                kind, param = _modal_key(phi)
                for y in sorted(b.out(kind, x, param), key=label_key):
                    if not b.has(LF(y, phi.sub)):
                        out.append(
                            (
                                _DIA_NAME[type(phi)],
                                {"label": x, "formula": phi, "target": y},
                                [LF(y, phi.sub)],
                                [LF(x, phi), Rel(kind, x, y, param)],
                            )
                        )
    refl = [("reflBox", "Rbox", None)] + [("refl_i", "Ri", i) for i in range(n)]
    eucl = [("euclBox", "Rbox", None)] + [("eucl_i", "Ri", i) for i in range(n)]
    if tstit:
        refl += [("reflAg", "RAg", None), ("ref=", "Eq", None)]
        eucl += [("euclAg", "RAg", None), ("eucl=", "Eq", None)]
    for name, kind, param in refl:
        for x in labels:
            atom = Rel(kind, x, x, param)
            if not b.has(atom):
                inst = {"label": x} if param is None else {"label": x, "agent": param}
                out.append((name, inst, [atom], [b.witness_item(x)]))
    for name, kind, param in eucl:
        table = b.succ.get((kind, param), {})
        for x in sorted(table, key=label_key):
            ys = sorted(table[x], key=label_key)
            for y in ys:
                for z in ys:
                    atom = Rel(kind, y, z, param)
                    if not b.has(atom):
                        inst = {"x": x, "y": y, "z": z}
                        if param is not None:
                            inst["agent"] = param
                        out.append((name, inst, [atom], [Rel(kind, x, y, param), Rel(kind, x, z, param)]))
    for i in range(n):
        for x, y in b.pairs("Ri", i):
            if not b.has(Rel("Rbox", x, y)):
                out.append(("br_i", {"agent": i, "x": x, "y": y}, [Rel("Rbox", x, y)], [Rel("Ri", x, y, i)]))
    if not tstit:
        return out
    for x, y in b.pairs("RAg"):
        for i in range(n):
            if not b.has(Rel("Ri", x, y, i)):
                out.append(("agd", {"agent": i, "x": x, "y": y}, [Rel("Ri", x, y, i)], [Rel("RAg", x, y)]))
    for x, y in b.pairs("Ri", 0):
        if not b.has(Rel("RAg", x, y)) and all(b.has(Rel("Ri", x, y, i)) for i in range(n)):
            out.append(("agi", {"x": x, "y": y}, [Rel("RAg", x, y)], [Rel("Ri", x, y, i) for i in range(n)]))
    for x, y in b.pairs("RG"):
        for z in sorted(b.out("RG", y), key=label_key):
            if not b.has(Rel("RG", x, z)):
                out.append(("transG", {"x": x, "y": y, "z": z}, [Rel("RG", x, z)], [Rel("RG", x, y), Rel("RG", y, z)]))
        if not b.has(Rel("RH", y, x)):
            out.append(("convG", {"x": x, "y": y}, [Rel("RH", y, x)], [Rel("RG", x, y)]))
    for x, y in b.pairs("RH"):
        if not b.has(Rel("RG", y, x)):
            out.append(("convH", {"x": x, "y": y}, [Rel("RG", y, x)], [Rel("RH", x, y)]))
    for x, y in b.pairs("Rbox"):
        if cfg.irrg == "g-overlap" and not (b.has(Rel("RG", x, y))):
            continue
        if not b.has(Rel("RGbar", x, y)):
            out.append(("irrG", {"x": x, "y": y}, [Rel("RGbar", x, y)], [Rel("Rbox", x, y)]))
    for x, y in b.pairs("Eq"):
        if x == y:
            continue
        eq = Rel("Eq", x, y)
        for r in sorted(b.rels, key=lambda r: (r.kind, label_key(r.x), label_key(r.y), str(r.param))):
            if r.kind == "Eq":
                continue
            for pos in (0, 1):
                if (r.x, r.y)[pos] != x:
                    continue
                new = r._replace(x=y) if pos == 0 else r._replace(y=y)
                if not b.has(new):
                    out.append(("repl=", {"x": x, "y": y, "rel": r, "pos": pos}, [new], [eq, r]))
        for phi in _sorted_fmls(b, x):
            if not b.has(LF(y, phi)):
                out.append(("repl=", {"x": x, "y": y, "fml": LF(x, phi)}, [LF(y, phi)], [eq, LF(x, phi)]))
    return out


def _branching(b: _Branch, rule: str, cfg: ProverConfig):
    """First applicable instance of one branching rule, or None."""
    labels = b.sorted_labels()
    if rule == "And":
        for x in labels:
            for phi in _sorted_fmls(b, x):
                if isinstance(phi, fm.And) and not (b.has(LF(x, phi.left)) or b.has(LF(x, phi.right))):
                    return _Split("And", {"label": x, "formula": phi}, [[LF(x, phi.left)], [LF(x, phi.right)]], (LF(x, phi),))
        return None
    if rule in ("connG", "connH"):
        kind = "RG" if rule == "connG" else "RH"
        table = b.succ.get((kind, None), {})
        for x in sorted(table, key=label_key):
            ys = sorted(table[x], key=label_key)
            for y, z in itertools.combinations(ys, 2):
                alts = [[Rel(kind, y, z)], [Rel("Eq", y, z)], [Rel(kind, z, y)]]
                if not any(b.has(a[0]) for a in alts):
                    return _Split(rule, {"x": x, "y": y, "z": z}, alts, (Rel(kind, x, y), Rel(kind, x, z)))
        return None
    if rule == "compG2":
        if cfg.compg2 == "off":
            return None
        linked = set()
        for kind in ("RG", "RH", "Rbox"):
            for x, y in b.pairs(kind):
                if x != y:
                    linked.add((x, y))
                    linked.add((y, x))
        for x, y in sorted(linked, key=lambda p: (label_key(p[0]), label_key(p[1]))):
            if not b.has(Rel("RG", x, y)) and not b.has(Rel("RGbar", x, y)):
                return _Split(
                    "compG2",
                    {"x": x, "y": y},
                    [[Rel("RG", x, y)], [Rel("RGbar", x, y)]],
                    (b.witness_item(x), b.witness_item(y)),
                )
        return None
    raise ValueError(rule)


def _creating(b: _Branch, rule: str):
    """First instance of a label-creating rule lacking a witness, as (inst-builder, used)."""
    labels = b.sorted_labels()
    if rule in ("Box", "Stit", "AgStit", "G", "H"):
        want = {"Box": fm.Box, "Stit": fm.Stit, "AgStit": fm.AgStit, "G": fm.G, "H": fm.H}[rule]
        for x in labels:
            for phi in _sorted_fmls(b, x):
                if type(phi) is not want:
                    continue
                kind, param = _modal_key(phi)
                if any(b.has(LF(y, phi.sub)) for y in b.out(kind, x, param)):
                    continue

                def make(u, x=x, phi=phi, kind=kind, param=param):
                    inst = {"label": x, "formula": phi, "fresh": u}
                    return inst, [Rel(kind, x, u, param), LF(u, phi.sub)]

                return make, (LF(x, phi),), rule
        return None
    if rule in ("IOA", "IOA*"):
        n = b.agents
        if n < 2:
            return None
        for x0 in labels:
            cell = sorted(b.out("Rbox", x0), key=label_key)
            for rest in itertools.product(cell, repeat=n - 1):
                tup = (x0,) + rest
                if len(set(tup)) < 2:
                    continue
                links = [(tup[a], tup[c]) for a in range(n) for c in range(n) if a != c]
                if not all(b.has(Rel("Rbox", s, t)) for s, t in links):
                    continue
                if rule == "IOA" and not all(_agentive_cell(b, x, i) for i, x in enumerate(tup)):
                    continue
                common = set(b.out("Ri", tup[0], 0))
                for i in range(1, n):
                    common &= b.out("Ri", tup[i], i)
                    if not common:
                        break
                if common:
                    continue

                def make(u, tup=tup):
                    return {"labels": list(tup), "fresh": u}, [Rel("Ri", x, u, i) for i, x in enumerate(tup)]

                return make, tuple(Rel("Rbox", s, t) for s, t in links), "IOA"
        return None
    if rule == "ncuh":
        for x, y in b.pairs("RG"):
            for z in sorted(b.out("Rbox", y), key=label_key):
                if any(z in b.out("RG", u) for u in b.out("RAg", x)):
                    continue

                def make(u, x=x, y=y, z=z):
                    return {"x": x, "y": y, "z": z, "fresh": u}, [Rel("RAg", x, u), Rel("RG", u, z)]

                return make, (Rel("RG", x, y), Rel("Rbox", y, z)), "ncuh"
        return None
    raise ValueError(rule)


def _agentive_cell(b: _Branch, x: str, i: int) -> bool:
    """Whether some label in the i-cell of ``x`` carries an ``<i>`` formula."""
    return any(
        isinstance(phi, fm.CoStit) and phi.agent == i
        for y in b.out("Ri", x, i) | {x}
        for phi in b.fml_at.get(y, ())
    )


BRANCHING = {"ldm": ("And",), "tstit": ("And", "connG", "connH", "compG2")}
CREATING = {
    "ldm": ("Box", "Stit", "IOA"),
    "tstit": ("Box", "Stit", "AgStit", "G", "H", "IOA", "ncuh"),
}
# applied only when nothing in CREATING is applicable: IOA witnesses that
# cannot receive any <i>-formula are needed for the frame, not for closure
LAST_RESORT = ("IOA*",)


# ---------------------------------------------------------------- extraction


def _classes(s: Sequent) -> dict:
    parent = {x: x for x in s.labels}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for r in s.rels:
        if r.kind == "Eq":
            a, c = find(r.x), find(r.y)
            if a != c:
                lo, hi = sorted((a, c), key=label_key)
                parent[hi] = lo
    return {x: find(x) for x in s.labels}


def _obligations(s: Sequent, cls: dict, members: set) -> list:
    out = set()
    for lf in s.fmls:
        if isinstance(lf.formula, fm.F) and cls[lf.label] in members:
            out.add(lf.formula.sub)
    return sorted(out, key=fm.render)


def _depends_on_future(phi: Formula) -> bool:
    return any(isinstance(s, (fm.G, fm.F)) for s in fm.subformulas(phi))


def _build(s, cls, logic, agents, tail_val, true_default=frozenset()):
    worlds = sorted(set(cls.values()), key=label_key)
    rel = defaultdict(set)
    for r in s.rels:
        if r.kind in ("Eq", "RGbar"):
            continue
        rel[(r.kind, r.param)].add((cls[r.x], cls[r.y]))
    r_i = [frozenset(rel[("Ri", i)]) for i in range(agents)]
    r_ag = frozenset.intersection(*r_i) if r_i else frozenset(rel[("Rbox", None)])
    val = defaultdict(set)
    for lf in s.fmls:
        if isinstance(lf.formula, fm.NegAtom):
            val[lf.formula.name].add(cls[lf.label])
    if true_default:
        forced_false = defaultdict(set)
        for lf in s.fmls:
            if isinstance(lf.formula, fm.Atom):
                forced_false[lf.formula.name].add(cls[lf.label])
        for p in true_default:
            val[p] |= set(worlds) - forced_false[p]
    r_box = set(rel[("Rbox", None)])
    r_i = [set(r) for r in r_i]
    r_ag = set(r_ag)
    r_g, r_h = (set(rel[("RG", None)]), set(rel[("RH", None)])) if logic == "tstit" else (set(), set())
    all_worlds = list(worlds)
    if logic == "tstit":
        has_succ = {a for a, _ in r_g}
        for m in [w for w in worlds if w not in has_succ]:
            t = tail_name(m)
            all_worlds.append(t)
            for r in (r_box, r_ag, *r_i):
                r.add((t, t))
            before = {a for a, c in r_g if c == m} | {m}
            for a in before:
                r_g.add((a, t))
                r_h.add((t, a))
            for p in tail_val.get(m, ()):
                val[p].add(t)
    return mdl.ExplicitModel(
        agents=agents,
        worlds=tuple(all_worlds),
        R_box=frozenset(r_box),
        R_i=tuple(frozenset(r) for r in r_i),
        R_Ag=frozenset(r_ag),
        R_G=frozenset(r_g),
        R_H=frozenset(r_h),
        valuation={p: frozenset(ws) for p, ws in sorted(val.items())},
        serial_mode="omega-tail",
    )


def tail_name(world: str) -> str:
    return f"{world}+"


def falsified(model: mdl.ExplicitModel, s: Sequent, interp: dict) -> list:
    """Items of ``s`` that are not falsified under ``interp`` (empty means a countermodel)."""
    ev = mdl.evaluator_for(model, [lf.formula for lf in s.fmls])
    bad = []
    for lf in sorted(s.fmls, key=lambda lf: (label_key(lf.label), fm.render(lf.formula))):
        if ev.holds(interp[lf.label], lf.formula):
            bad.append(lf)
    rels = {
        "Rbox": model.R_box,
        "RAg": model.R_Ag,
        "RG": model.R_G,
        "RH": model.R_H,
    }
    for r in s.rels:
        a, c = interp[r.x], interp[r.y]
        if r.kind == "Eq":
            ok = a == c
        elif r.kind == "RGbar":
            ok = (a, c) not in model.R_G
        elif r.kind == "Ri":
            ok = (a, c) in model.R_i[r.param]
        elif r.kind in rels:
            ok = (a, c) in rels[r.kind]
        else:
            ok = False
        if not ok:
            bad.append(r)
    return bad


def _with_tails(s, cls, agents):
    """Pick unconstrained-atom defaults and tail valuations meeting every F-obligation.

    An atom with no literal at a class is free there; its value matters only
    to obligations looking back from a tail, so a global default per atom is
    searched along with each tail's own valuation.
    """
    base = _build(s, cls, "tstit", agents, {})
    preds = defaultdict(set)
    for a, c in base.R_G:
        preds[c].add(a)
    maximal = [w for w in sorted(set(cls.values()), key=label_key) if tail_name(w) in base.worlds]
    duties = {}
    for m in maximal:
        obligations = _obligations(s, cls, (preds[tail_name(m)] - {tail_name(m)}) | {m})
        if obligations:
            duties[m] = obligations
    if not duties:
        return base
    letters = sorted(set().union(*(fm.atoms(o) for obs in duties.values() for o in obs)))
    subsets = [set(c) for k in range(len(letters) + 1) for c in itertools.combinations(letters, k)]
    for default in subsets[:64]:
        tail_val: dict = {}
        for m, obligations in duties.items():
            for chosen in subsets:
                tail_val[m] = chosen
                cand = _build(s, cls, "tstit", agents, tail_val, frozenset(default))
                # F o at m ranges over the tail and all its stationary copies
                checks = [fm.F(o) for o in obligations]
                ev = mdl.evaluator_for(cand, checks)
                if not any(ev.holds(m, c) for c in checks):
                    break
            else:
                break
        else:
            return _build(s, cls, "tstit", agents, tail_val, frozenset(default))
    return None


def extract_countermodel(s: Sequent, logic: str = "tstit", agents: int = 2):
    """Countermodel of an open saturated sequent, or ``None`` when no tail works.

    Worlds are the Eq-classes of labels; ``V(p)`` holds at ``[x]`` iff
    ``x : ~p`` is in the sequent; ``R_Ag`` is set to the intersection of the
    agents' relations; G-maximal classes get a stationary tail whose
    valuation is searched so that every pending F-obligation is false there.
    Raises ``ExtractionError`` when a failure cannot be blamed on the tail.
    """
    cls = _classes(s)
    if logic != "tstit":
        model = _build(s, cls, logic, agents, {})
    else:
        model = _with_tails(s, cls, agents)
        if model is None:
            return None
    bad = falsified(model, s, cls)
    if bad:
        blame_tail = logic == "tstit" and all(
            isinstance(it, LF) and _depends_on_future(it.formula) for it in bad
        )
        if blame_tail:
            return None
        raise ExtractionError(f"open branch is not falsified: {bad[:3]}")
    return model, dict(sorted(cls.items(), key=lambda kv: label_key(kv[0])))


# ---------------------------------------------------------------- search


@dataclass
class _Closed:
    steps: list
    end: object  # leaf _Step or (_Split, [children])


class _Search:
    def __init__(self, logic, agents, budget, cfg):
        self.logic = logic
        self.agents = agents
        self.budget = budget
        self.cfg = cfg
        self.stats = Stats()
        self.exhausted: str | None = None
        self.rr_split = 0
        self.rr_create = 0

    def run_branch(self, b: _Branch, depth: int):
        splits = BRANCHING[self.logic]
        creates = CREATING[self.logic]
        while True:
            self.stats.labels = max(self.stats.labels, len(b.labels))
            if b.closed:
                rule, inst = b.closed
                used = (
                    (LF(inst["label"], fm.Atom(inst["atom"])), LF(inst["label"], fm.NegAtom(inst["atom"])))
                    if rule == "id"
                    else (Rel("RG", inst["x"], inst["y"]), Rel("RGbar", inst["x"], inst["y"]))
                )
                return _Closed(b.steps, _Step(rule, inst, (), used))
            if self.stats.nodes >= self.budget.max_nodes:
                self.exhausted = "max_nodes"
                return None
            if depth + len(b.steps) >= self.budget.max_depth:
                self.exhausted = "max_depth"
                return None
            cands = _deterministic(b, self.cfg)
            if cands:
                for rule, inst, adds, used in cands:
                    if b.closed:
                        break
                    if all(b.has(a) for a in adds):
                        continue
                    b.apply(rule, inst, adds, used)
                    self.stats.nodes += 1
                continue
            if self.cfg.schedule == "create-first":
                made = self.create(b, creates, tier=True)
                if made is None:
                    return None
                if made:
                    continue
            split = None
            for k in range(len(splits)):
                rule = splits[(self.rr_split + k) % len(splits)]
                split = _branching(b, rule, self.cfg)
                if split:
                    self.rr_split = (self.rr_split + k + 1) % len(splits)
                    break
            if split:
                return self.split(b, split, depth)
            made = self.create(b, creates, tier=self.cfg.schedule != "create-first")
            if made is None:
                return None
            if made:
                continue
            made = self.create(b, LAST_RESORT, tier=False)
            if made is None:
                return None
            if made:
                continue
            s = b.sequent()
            found = extract_countermodel(s, self.logic, self.agents)
            if found is not None:
                return ("open", found, s)
            target = next(
                (x for x in b.sorted_labels() if not b.out("RG", x) and x not in b.g_extended), None
            )
            if target is None:
                self.exhausted = "no serial extension left"
                return None
            if len(b.labels) >= self.budget.max_labels:
                self.exhausted = "max_labels"
                return None
            b.g_extended.add(target)
            u = b.fresh()
            b.apply("serG", {"label": target, "fresh": u}, [Rel("RG", target, u)], [b.witness_item(target)])
            self.stats.nodes += 1

    def create(self, b: _Branch, rules, tier: bool):
        """Apply one label-creating rule; True if applied, None on budget exhaustion."""
        order = [rules[(self.rr_create + k) % len(rules)] for k in range(len(rules))] if tier else list(rules)
        for k, rule in enumerate(order):
            hit = _creating(b, rule)
            if not hit:
                continue
            if tier:
                self.rr_create = (self.rr_create + k + 1) % len(rules)
            if len(b.labels) >= self.budget.max_labels:
                self.exhausted = "max_labels"
                return None
            make, used, name = hit
            inst, adds = make(b.fresh())
            b.apply(name, inst, adds, used)
            self.stats.nodes += 1
            return True
        return False

    def split(self, b: _Branch, split: _Split, depth: int):
        self.stats.nodes += 1
        self.stats.branches += 1
        children = []
        unknown = False
        for alt in split.alternatives:
            child = b.copy()
            for it in alt:
                child.add(it)
            res = self.run_branch(child, depth + len(b.steps) + 1)
            if isinstance(res, tuple):
                return res
            if res is None:
                unknown = True
                if self.stats.nodes >= self.budget.max_nodes:
                    return None
                continue
            children.append(res)
        if unknown:
            return None
        return _Closed(b.steps, (split, children))


def _prune(c: _Closed):
    """Drop steps whose additions are never used; returns (pruned, needed-set)."""
    if isinstance(c.end, _Step):
        needed = set(c.end.used)
        end = c.end
    else:
        split, children = c.end
        results = [_prune(ch) for ch in children]
        end = None
        for alt, (pruned, need) in zip(split.alternatives, results):
            if not (set(alt) & need):
                # this premise never uses its addition: skip the split
                needed = need
                end = ("inline", pruned)
                break
        if end is None:
            needed = set(split.used)
            for alt, (_, need) in zip(split.alternatives, results):
                needed |= need - set(alt)
            end = (split, [p for p, _ in results])
    kept = []
    for step in reversed(c.steps):
        if set(step.adds) & needed:
            needed -= set(step.adds)
            needed |= set(step.used)
            kept.append(step)
    kept.reverse()
    if isinstance(end, tuple) and end[0] == "inline":
        inner = end[1]
        return _Closed(kept + inner.steps, inner.end), needed
    return _Closed(kept, end), needed


def _materialize(c: _Closed, s: Sequent) -> ProofTree:
    seqs = [s]
    for step in c.steps:
        seqs.append(seqs[-1].add(step.adds))
    top = seqs[-1]
    if isinstance(c.end, _Step):
        node = ProofTree(top, c.end.rule, c.end.inst)
    else:
        split, children = c.end
        node = ProofTree(
            top,
            split.rule,
            split.inst,
            tuple(_materialize(ch, top.add(alt)) for ch, alt in zip(children, split.alternatives)),
        )
    for step, concl in zip(reversed(c.steps), reversed(seqs[:-1])):
        node = ProofTree(concl, step.rule, step.inst, (node,))
    return node


def prove_sequent(
    root: Sequent,
    logic: str = "tstit",
    agents: int = 2,
    budget: SearchBudget | None = None,
    config: ProverConfig | None = None,
) -> ProverVerdict:
    """Search for a derivation of ``root`` (a sequent of NNF formulas)."""
    logic = logic.lower()
    if logic not in LOGICS:
        raise ValueError(f"proof search supports {LOGICS}, not {logic!r}")
    budget = budget or SearchBudget()
    cfg = config or ProverConfig()
    for lf in root.fmls:
        if not fm.is_nnf(lf.formula):
            raise ValueError("root formulas must be in NNF")
        if fm.uses_xstit(lf.formula):
            raise ValueError("no proof search for Xstit formulas")
        if logic == "ldm" and not fm.is_ldm(lf.formula):
            raise ValueError("Ldm search only accepts box/diamond/agentive formulas")
        if fm.max_agent(lf.formula) > agents:
            raise ValueError(f"formula mentions agents beyond {agents}")
    b = _Branch(logic, agents)
    for it in sorted(root.rels, key=lambda r: (r.kind, r.x, r.y)):
        b.add(it)
    for lf in sorted(root.fmls, key=lambda lf: (label_key(lf.label), fm.render(lf.formula))):
        b.add(lf)
    b.counter = len(b.labels)
    search = _Search(logic, agents, budget, cfg)
    res = search.run_branch(b, 0)
    if isinstance(res, tuple):
        _, (model, interp), s = res
        return Refuted(model, interp, s, search.stats)
    if res is None:
        return Unknown(f"budget exhausted ({search.exhausted})", search.stats)
    if cfg.prune:
        res, _ = _prune(res)
    return Proved(_materialize(res, root), search.stats)


def prove(
    phi: Formula,
    logic: str = "tstit",
    agents: int = 2,
    budget: SearchBudget | None = None,
    config: ProverConfig | None = None,
) -> ProverVerdict:
    """Prove ``phi``: the root sequent is ``x0 : nnf(phi)``."""
    root = sequent(fmls=[LF("x0", fm.to_nnf(phi))])
    return prove_sequent(root, logic, agents, budget, config)


def root_world(verdict: Refuted, label: str = "x0"):
    return verdict.interpretation[label]


# ---------------------------------------------------------------- single steps


@dataclass(frozen=True)
class ScheduleState:
    """Round-robin pointers of the branching and label-creating rule queues."""

    rr_split: int = 0
    rr_create: int = 0


@dataclass(frozen=True)
class StepResult:
    kind: str  # "closed" | "premises" | "saturated"
    rule: str | None
    inst: dict | None
    premises: tuple
    state: ScheduleState


def _branch_of(s: Sequent, logic: str, agents: int) -> _Branch:
    b = _Branch(logic, agents)
    for it in sorted(s.rels, key=lambda r: (r.kind, label_key(r.x), label_key(r.y), str(r.param))):
        b.add(it)
    for lf in sorted(s.fmls, key=lambda lf: (label_key(lf.label), fm.render(lf.formula))):
        b.add(lf)
    b.counter = len(b.labels)
    return b


def saturate_step(
    s: Sequent,
    state: ScheduleState | None = None,
    logic: str = "tstit",
    agents: int = 2,
    config: ProverConfig | None = None,
) -> StepResult:
    """Apply exactly one rule instance to ``s`` following the search schedule.

    ``saturated`` means no instance adds material; lazy seriality is not
    part of saturation.
    """
    state = state or ScheduleState()
    cfg = config or ProverConfig()
    b = _branch_of(s, logic, agents)
    if b.closed:
        rule, inst = b.closed
        return StepResult("closed", rule, inst, (), state)
    for rule, inst, adds, _ in _deterministic(b, cfg):
        return StepResult("premises", rule, inst, (s.add(adds),), state)
    splits, creates = BRANCHING[logic], CREATING[logic]

    def create(rules, rr, tier):
        order = [rules[(rr + k) % len(rules)] for k in range(len(rules))] if tier else list(rules)
        for k, rule in enumerate(order):
            hit = _creating(b, rule)
            if hit:
                make, _, name = hit
                inst, adds = make(b.fresh())
                return name, inst, adds, ((rr + k + 1) % len(rules) if tier else rr)
        return None

    stages = []
    if cfg.schedule == "create-first":
        stages.append(("create", True))
    stages.append(("split", None))
    stages.append(("create", cfg.schedule != "create-first"))
    stages.append(("last", False))
    for stage, tier in stages:
        if stage == "split":
            for k in range(len(splits)):
                sp = _branching(b, splits[(state.rr_split + k) % len(splits)], cfg)
                if sp:
                    nxt = ScheduleState((state.rr_split + k + 1) % len(splits), state.rr_create)
                    return StepResult("premises", sp.rule, sp.inst, tuple(s.add(a) for a in sp.alternatives), nxt)
            continue
        rules = LAST_RESORT if stage == "last" else creates
        hit = create(rules, state.rr_create, tier)
        if hit:
            name, inst, adds, rr = hit
            return StepResult("premises", name, inst, (s.add(adds),), ScheduleState(state.rr_split, rr))
    return StepResult("saturated", None, None, (), state)
