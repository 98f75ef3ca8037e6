"""Temporal Kripke STIT models, satisfaction and frame validation.

Two representations are supported.

``LayeredModel`` is a finite description of a model over ``W x N``: layer 0
uses its own settledness / choice relations, every later layer uses the
single relation ``R_fut`` for settledness, every agent and the grand
coalition.  ``R_G`` links ``(w, j)`` to ``(w, k)`` for ``j < k`` (same base
world).  Layers ``>= 1`` are structurally identical, so truth is eventually
constant along a base world; the evaluator unrolls exactly as many layers as
the H/P nesting of a formula requires and treats the last one as stationary.

``ExplicitModel`` lists every relation.  With ``serial_mode="omega-tail"``
each world without an ``R_G`` successor is continued by an infinite chain of
copies: same valuation, and ``R_G`` from the world, its ``R_G`` predecessors
and earlier copies.  The k-th copies of all such worlds form one layer in
which box, agent and group cells coincide: each is the group-choice cell of
the original restricted to G-maximal worlds, so no choice is left once time
has run out.  That extension preserves every other frame condition, so
seriality holds by construction.
"""

from __future__ import annotations

import itertools
import json
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Mapping, NamedTuple

from . import formula as fm
from .formula import Formula

World = Hashable
Pair = tuple

DEFAULT_C2_BOUND = 10**7
CONDITIONS = (
    "equiv_box",
    "equiv_i",
    "equiv_Ag",
    "C1",
    "C2",
    "C3",
    "C4",
    "C5",
    "C6",
    "C7",
    "G_transitive",
    "G_serial",
    "H_converse",
)


class ModelError(ValueError):
    pass


class UnsupportedOperator(ModelError):
    pass


def _rel(pairs: Iterable) -> frozenset:
    return frozenset((a, b) for a, b in pairs)


def identity(worlds: Iterable) -> frozenset:
    return frozenset((w, w) for w in worlds)


def total(worlds: Iterable) -> frozenset:
    ws = list(worlds)
    return frozenset(itertools.product(ws, ws))


def partition_relation(blocks: Iterable[Iterable]) -> frozenset:
    out = set()
    for block in blocks:
        block = list(block)
        out.update(itertools.product(block, block))
    return frozenset(out)


@dataclass(frozen=True)
class LayeredModel:
    agents: int
    base_worlds: tuple
    T: int
    R_box_0: frozenset
    R_i_0: tuple
    R_fut: frozenset
    R_Ag_0: frozenset
    valuation: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        if self.T < 1:
            raise ModelError("a layered model needs T >= 1")
        if len(self.R_i_0) != self.agents:
            raise ModelError(f"expected {self.agents} agent relations, got {len(self.R_i_0)}")
        base = set(self.base_worlds)
        for rel in (self.R_box_0, self.R_fut, self.R_Ag_0, *self.R_i_0):
            for a, b in rel:
                if a not in base or b not in base:
                    raise ModelError(f"edge ({a!r}, {b!r}) leaves the base worlds")

    def worlds(self, layers: int | None = None) -> list[tuple]:
        top = self.T if layers is None else layers
        return [(w, j) for j in range(top + 1) for w in self.base_worlds]

    def to_explicit(self, layers: int | None = None) -> "ExplicitModel":
        """The frame on layers ``0..T`` with string world ids ``"w@j"``.

        Meant for frame validation; the last layer is continued by the
        omega-tail convention.
        """
        top = self.T if layers is None else layers
        name = lambda w, j: f"{w}@{j}"
        worlds = [name(w, j) for j in range(top + 1) for w in self.base_worlds]

        def lift(rel0, relf):
            out = {(name(a, 0), name(b, 0)) for a, b in rel0}
            for j in range(1, top + 1):
                out.update((name(a, j), name(b, j)) for a, b in relf)
            return frozenset(out)

        rg = frozenset(
            (name(w, j), name(w, k))
            for w in self.base_worlds
            for j in range(top + 1)
            for k in range(j + 1, top + 1)
        )
        return ExplicitModel(
            agents=self.agents,
            worlds=tuple(worlds),
            R_box=lift(self.R_box_0, self.R_fut),
            R_i=tuple(lift(r, self.R_fut) for r in self.R_i_0),
            R_Ag=lift(self.R_Ag_0, self.R_fut),
            R_G=rg,
            R_H=frozenset((b, a) for a, b in rg),
            valuation={
                p: frozenset(name(w, j) for w in ws for j in range(top + 1))
                for p, ws in self.valuation.items()
            },
            serial_mode="omega-tail",
        )


@dataclass(frozen=True)
class ExplicitModel:
    agents: int
    worlds: tuple
    R_box: frozenset
    R_i: tuple
    R_Ag: frozenset
    R_G: frozenset = frozenset()
    R_H: frozenset = frozenset()
    valuation: Mapping[str, frozenset] = field(default_factory=dict)
    serial_mode: str = "closed"

    def __post_init__(self):
        if self.serial_mode not in ("closed", "omega-tail"):
            raise ModelError(f"unknown serial mode {self.serial_mode!r}")
        if len(self.R_i) != self.agents:
            raise ModelError(f"expected {self.agents} agent relations, got {len(self.R_i)}")
        ws = set(self.worlds)
        if len(ws) != len(self.worlds):
            raise ModelError("duplicate world ids")
        for rel in (self.R_box, self.R_Ag, self.R_G, self.R_H, *self.R_i):
            for a, b in rel:
                if a not in ws or b not in ws:
                    raise ModelError(f"edge ({a!r}, {b!r}) leaves the worlds")


Model = LayeredModel | ExplicitModel


# ---------------------------------------------------------------- evaluation


class Copy(NamedTuple):
    """k-th omega-tail copy of a G-maximal world of an explicit model."""

    world: Any
    k: int


def _succ(rel: Iterable[Pair], worlds: Iterable) -> dict:
    out = {w: set() for w in worlds}
    for a, b in rel:
        out[a].add(b)
    return out


class _Frame:
    """Finite unrolled structure the evaluator works on."""

    def __init__(self, worlds, box, agent, ag, gsucc, hsucc, val):
        self.worlds = worlds
        self.box = box
        self.agent = agent
        self.ag = ag
        self.gsucc = gsucc
        self.hsucc = hsucc
        self.val = val


def _layered_frame(m: LayeredModel, horizon: int) -> _Frame:
    top = max(m.T, horizon)
    worlds = [(w, j) for j in range(top + 1) for w in m.base_worlds]

    def lift(rel0, relf):
        s0, sf = _succ(rel0, m.base_worlds), _succ(relf, m.base_worlds)
        return {
            (w, j): frozenset((u, j) for u in (s0 if j == 0 else sf)[w]) for (w, j) in worlds
        }

    gsucc = {
        (w, j): frozenset([(w, k) for k in range(j + 1, top + 1)] + ([(w, top)] if j == top else []))
        for (w, j) in worlds
    }
    hsucc = {(w, j): frozenset((w, k) for k in range(j)) for (w, j) in worlds}
    val = {p: frozenset((w, j) for (w, j) in worlds if w in ws) for p, ws in m.valuation.items()}
    return _Frame(
        worlds,
        lift(m.R_box_0, m.R_fut),
        [lift(r, m.R_fut) for r in m.R_i_0],
        lift(m.R_Ag_0, m.R_fut),
        gsucc,
        hsucc,
        val,
    )


def g_maximal(m: ExplicitModel) -> list:
    has_succ = {a for a, _ in m.R_G}
    return [w for w in m.worlds if w not in has_succ]


def _explicit_frame(m: ExplicitModel, horizon: int) -> _Frame:
    worlds = list(m.worlds)
    box = {w: frozenset(s) for w, s in _succ(m.R_box, worlds).items()}
    agent = [{w: frozenset(s) for w, s in _succ(r, worlds).items()} for r in m.R_i]
    ag = {w: frozenset(s) for w, s in _succ(m.R_Ag, worlds).items()}
    gsucc = _succ(m.R_G, worlds)
    hsucc = _succ(m.R_H, worlds)
    val = {p: set(ws) for p, ws in m.valuation.items()}
    if m.serial_mode == "omega-tail":
        count = 1 + horizon
        preds = defaultdict(set)
        for a, b in m.R_G:
            preds[b].add(a)
        maximal = g_maximal(m)
        top = set(maximal)

        def mirror(cells, w, k):
            # copy level k repeats the group cells among G-maximal worlds
            return frozenset(Copy(u, k) for u in cells[w] if u in top)

        for w in maximal:
            copies = [Copy(w, k) for k in range(1, count + 1)]
            before = preds[w] | {w}
            for x in before:
                gsucc[x].update(copies)
            for k, c in enumerate(copies):
                worlds.append(c)
                cell = mirror(ag, w, k + 1)
                box[c] = cell
                for a in agent:
                    a[c] = cell
                ag[c] = cell
                later = set(copies[k + 1 :])
                if k == count - 1:
                    later.add(c)  # stationary representative of all later copies
                gsucc[c] = later
                hsucc[c] = before | set(copies[:k])
                for p, ws in val.items():
                    if w in ws:
                        ws.add(c)
    return _Frame(
        worlds,
        box,
        agent,
        ag,
        {w: frozenset(s) for w, s in gsucc.items()},
        {w: frozenset(s) for w, s in hsucc.items()},
        {p: frozenset(s) for p, s in val.items()},
    )


class Evaluator:
    """Memoised truth sets of formulas over one model.

    ``horizon`` is the largest H/P nesting depth that will be asked about.
    """

    def __init__(self, model: Model, horizon: int = 0):
        self.model = model
        self.horizon = horizon
        if isinstance(model, LayeredModel):
            self.frame = _layered_frame(model, 1 + horizon)
            self.top = max(model.T, 1 + horizon)
        else:
            self.frame = _explicit_frame(model, horizon)
        self.cache: dict[Formula, frozenset] = {}

    def _key(self, w):
        if isinstance(self.model, LayeredModel):
            b, j = w
            return (b, min(j, self.top))
        return w

    def holds(self, w, phi: Formula) -> bool:
        if fm.past_depth(phi) > self.horizon:
            raise ModelError("formula exceeds the evaluator horizon")
        key = self._key(w)
        if key not in self.frame.box:
            raise ModelError(f"unknown world {w!r}")
        return key in self.truth(phi)

    def truth(self, phi: Formula) -> frozenset:
        hit = self.cache.get(phi)
        if hit is None:
            hit = self._compute(phi)
            self.cache[phi] = hit
        return hit

    def _compute(self, phi: Formula) -> frozenset:
        fr = self.frame
        ws = fr.worlds
        if isinstance(phi, fm.Atom):
            return fr.val.get(phi.name, frozenset())
        if isinstance(phi, fm.NegAtom):
            v = fr.val.get(phi.name, frozenset())
            return frozenset(w for w in ws if w not in v)
        if isinstance(phi, fm.Not):
            s = self.truth(phi.sub)
            return frozenset(w for w in ws if w not in s)
        if isinstance(phi, fm.And):
            return self.truth(phi.left) & self.truth(phi.right)
        if isinstance(phi, fm.Or):
            return self.truth(phi.left) | self.truth(phi.right)
        if isinstance(phi, fm.Implies):
            a, b = self.truth(phi.left), self.truth(phi.right)
            return frozenset(w for w in ws if w not in a or w in b)
        if isinstance(phi, (fm.XStit, fm.XCoStit)):
            raise UnsupportedOperator("Xstit operators are not interpreted on Tstit models")
        if isinstance(phi, (fm.Box, fm.Dia)):
            rel = fr.box
        elif isinstance(phi, (fm.Stit, fm.CoStit)):
            if phi.agent >= len(fr.agent):
                raise ModelError(f"agent {phi.agent} not in model")
            rel = fr.agent[phi.agent]
        elif isinstance(phi, (fm.AgStit, fm.AgCoStit)):
            rel = fr.ag
        elif isinstance(phi, (fm.G, fm.F)):
            rel = fr.gsucc
        else:
            rel = fr.hsucc
        s = self.truth(phi.sub)
        if isinstance(phi, fm.BOXES):
            return frozenset(w for w in ws if rel[w] <= s)
        return frozenset(w for w in ws if not rel[w].isdisjoint(s))


def satisfies(model: Model, w, phi: Formula) -> bool:
    """Truth of ``phi`` at world ``w``; layered worlds are ``(base, layer)`` pairs."""
    return Evaluator(model, fm.past_depth(phi)).holds(w, phi)


def evaluator_for(model: Model, phis: Iterable[Formula]) -> Evaluator:
    return Evaluator(model, max((fm.past_depth(p) for p in phis), default=0))


def valid_in(model: Model, phi: Formula, worlds: Iterable | None = None) -> bool:
    ev = Evaluator(model, fm.past_depth(phi))
    if worlds is None:
        worlds = model.worlds() if isinstance(model, LayeredModel) else model.worlds
    return all(ev.holds(w, phi) for w in worlds)


# ---------------------------------------------------------------- frame conditions


@dataclass(frozen=True)
class Verdict:
    status: str  # "pass" | "fail" | "skipped"
    witness: tuple | None = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


PASS = Verdict("pass")


@dataclass
class FrameReport:
    results: dict[str, Verdict]

    def __getitem__(self, name: str) -> Verdict:
        return self.results[name]

    @property
    def all_pass(self) -> bool:
        return all(v.passed for v in self.results.values())

    def failures(self, ignore: Iterable[str] = ()) -> dict[str, Verdict]:
        skip = set(ignore)
        return {k: v for k, v in self.results.items() if not v.passed and k not in skip}

    def lines(self) -> list[str]:
        out = []
        for name in CONDITIONS:
            v = self.results[name]
            extra = ""
            if v.witness is not None:
                extra = f"  witness={v.witness!r}"
            if v.note:
                extra += f"  ({v.note})"
            out.append(f"{name:<13} {v.status}{extra}")
        return out

    def to_json(self) -> dict:
        return {
            k: {"status": v.status, "witness": _jsonable(v.witness), "note": v.note}
            for k, v in self.results.items()
        }


def _jsonable(x):
    if isinstance(x, (tuple, list)):
        return [_jsonable(y) for y in x]
    return x


def _equivalence(worlds, succ) -> Verdict:
    for w in worlds:
        if w not in succ[w]:
            return Verdict("fail", ("reflexive", w))
    for w in worlds:
        for u in succ[w]:
            if w not in succ[u]:
                return Verdict("fail", ("symmetric", w, u))
    for w in worlds:
        for u in succ[w]:
            for v in succ[u]:
                if v not in succ[w]:
                    return Verdict("fail", ("transitive", w, u, v))
    return PASS


def _connected(worlds, succ) -> Verdict:
    for x in worlds:
        ys = sorted(succ[x], key=repr)
        for y, z in itertools.combinations(ys, 2):
            if z not in succ[y] and y not in succ[z]:
                return Verdict("fail", (x, y, z))
    return PASS


def _check_c2(worlds, box, agent, n, bound) -> Verdict:
    biggest = max((len(box[w]) for w in worlds), default=0)
    if biggest**n > bound:
        return Verdict("skipped", note=f"cell size {biggest}^{n} exceeds bound {bound}")
    order = {w: i for i, w in enumerate(worlds)}

    def extend(prefix: list, common: set):
        if len(prefix) == n:
            inter = set(agent[0][prefix[0]])
            for i in range(1, n):
                inter &= agent[i][prefix[i]]
                if not inter:
                    break
            return None if inter else tuple(prefix)
        for u in sorted(common, key=order.__getitem__):
            if u not in box[u]:
                continue
            if all(u in box[x] and x in box[u] for x in prefix):
                hit = extend(prefix + [u], common)
                if hit:
                    return hit
        return None

    for u1 in worlds:
        if u1 not in box[u1]:
            continue
        cands = {u for u in box[u1] if u1 in box[u]}
        hit = extend([u1], cands)
        if hit:
            return Verdict("fail", hit)
    return PASS


def check_frame(
    model: Model, c7: str = "disjoint", c2_bound: int = DEFAULT_C2_BOUND
) -> FrameReport:
    """Exhaustive check of the Tstit frame conditions with witnesses."""
    if isinstance(model, LayeredModel):
        model = model.to_explicit()
    if c7 not in ("disjoint", "irreflexive"):
        raise ModelError(f"unknown C7 variant {c7!r}")
    ws = list(model.worlds)
    box = _succ(model.R_box, ws)
    agent = [_succ(r, ws) for r in model.R_i]
    ag = _succ(model.R_Ag, ws)
    gs = _succ(model.R_G, ws)
    hs = _succ(model.R_H, ws)
    res: dict[str, Verdict] = {}

    res["equiv_box"] = _equivalence(ws, box)
    res["equiv_i"] = PASS
    for i, a in enumerate(agent):
        v = _equivalence(ws, a)
        if not v.passed:
            res["equiv_i"] = Verdict("fail", (i,) + v.witness)
            break
    res["equiv_Ag"] = _equivalence(ws, ag)

    res["C1"] = PASS
    for i, a in enumerate(agent):
        bad = next(((w, u) for w in ws for u in a[w] if u not in box[w]), None)
        if bad:
            res["C1"] = Verdict("fail", (i,) + bad)
            break

    n = model.agents
    res["C2"] = _check_c2(ws, box, agent, n, c2_bound) if n else PASS

    res["C3"] = PASS
    for w in ws:
        inter = set(ws) if n else set(box[w])
        for a in agent:
            inter &= a[w]
        if inter != ag[w]:
            diff = sorted(inter ^ ag[w], key=repr)[0]
            res["C3"] = Verdict("fail", (w, diff))
            break

    res["C4"] = _connected(ws, gs)
    res["C5"] = _connected(ws, hs)

    res["C6"] = PASS
    ag_then_g = {x: set().union(*(gs[u] for u in ag[x])) if ag[x] else set() for x in ws}
    for x in ws:
        for y in gs[x]:
            bad = next((z for z in box[y] if z not in ag_then_g[x]), None)
            if bad is not None:
                res["C6"] = Verdict("fail", (x, y, bad))
                break
        if not res["C6"].passed:
            break

    if c7 == "disjoint":
        bad = next(((x, y) for x in ws for y in gs[x] if y in box[x]), None)
    else:
        bad = next(((x,) for x in ws if x in gs[x]), None)
    res["C7"] = Verdict("fail", bad) if bad else PASS

    bad = next(((x, y, z) for x in ws for y in gs[x] for z in gs[y] if z not in gs[x]), None)
    res["G_transitive"] = Verdict("fail", bad) if bad else PASS

    if model.serial_mode == "omega-tail":
        res["G_serial"] = Verdict("pass", note="omega-tail")
    else:
        bad = next(((x,) for x in ws if not gs[x]), None)
        res["G_serial"] = Verdict("fail", bad) if bad else PASS

    conv = {(b, a) for a, b in model.R_G}
    diff = sorted(conv ^ set(model.R_H), key=repr)
    res["H_converse"] = Verdict("fail", diff[0]) if diff else PASS
    return FrameReport(res)


# ---------------------------------------------------------------- generation


@dataclass(frozen=True)
class GenParams:
    """Shape of a generated layered model.

    ``cell_shape`` gives the number of choices per agent in every
    settledness cell and ``multiplicity`` the largest number of worlds
    sharing one joint choice profile; ``None`` draws them from the seed.
    """

    agents: int = 2
    cells: int = 1
    cell_shape: tuple | None = None
    multiplicity: int | None = None
    atoms: tuple = ("p", "q")
    T: int = 1
    max_worlds: int = 64


def generate_model(params: GenParams, seed: int) -> LayeredModel:
    """A random layered model satisfying every frame condition by construction.

    Each settledness cell is a grid of joint choice profiles (one coordinate
    per agent, so all choice combinations intersect) with one or more worlds
    per profile; ``R_fut`` and ``R_Ag_0`` relate worlds of the same profile.
    """
    if params.agents < 1 or params.cells < 1:
        raise ModelError("need at least one agent and one cell")
    rng = random.Random(seed)
    worlds: list[str] = []
    box_blocks, agent_blocks, profile_blocks = [], [[] for _ in range(params.agents)], []
    for c in range(params.cells):
        shape = params.cell_shape or tuple(rng.randint(1, 2) for _ in range(params.agents))
        if len(shape) != params.agents:
            raise ModelError("cell_shape needs one entry per agent")
        cell_worlds = []
        by_choice = [defaultdict(list) for _ in range(params.agents)]
        for profile in itertools.product(*(range(k) for k in shape)):
            mult = params.multiplicity or rng.randint(1, 2)
            members = []
            for _ in range(mult):
                w = f"c{c}w{len(cell_worlds)}"
                cell_worlds.append(w)
                members.append(w)
                for i, choice in enumerate(profile):
                    by_choice[i][choice].append(w)
            profile_blocks.append(members)
        worlds.extend(cell_worlds)
        if len(worlds) > params.max_worlds:
            raise ModelError(f"model would exceed {params.max_worlds} base worlds")
        box_blocks.append(cell_worlds)
        for i in range(params.agents):
            agent_blocks[i].extend(by_choice[i].values())
    fut = partition_relation(profile_blocks)
    valuation = {p: frozenset(w for w in worlds if rng.random() < 0.5) for p in params.atoms}
    return LayeredModel(
        agents=params.agents,
        base_worlds=tuple(worlds),
        T=params.T,
        R_box_0=partition_relation(box_blocks),
        R_i_0=tuple(partition_relation(b) for b in agent_blocks),
        R_fut=fut,
        R_Ag_0=fut,
        valuation=valuation,
    )


def random_explicit_model(
    rng: random.Random, max_worlds: int = 6, agents: int = 2, atoms=("p",), corrupt: int = 2
) -> ExplicitModel:
    """A small explicit model: a valid layered frame, then ``corrupt`` random edge flips."""
    while True:
        params = GenParams(
            agents=agents,
            cells=rng.randint(1, 2),
            multiplicity=1,
            atoms=atoms,
            T=rng.randint(1, 2),
        )
        base = generate_model(params, rng.randrange(2**31))
        explicit = base.to_explicit()
        if len(explicit.worlds) <= max_worlds:
            break
    rels = {
        "R_box": set(explicit.R_box),
        "R_Ag": set(explicit.R_Ag),
        "R_G": set(explicit.R_G),
        "R_H": set(explicit.R_H),
    }
    for i, r in enumerate(explicit.R_i):
        rels[f"R_{i}"] = set(r)
    ws = list(explicit.worlds)
    for _ in range(corrupt):
        name = rng.choice(sorted(rels))
        edge = (rng.choice(ws), rng.choice(ws))
        rels[name] ^= {edge}
    return ExplicitModel(
        agents=agents,
        worlds=explicit.worlds,
        R_box=frozenset(rels["R_box"]),
        R_i=tuple(frozenset(rels[f"R_{i}"]) for i in range(agents)),
        R_Ag=frozenset(rels["R_Ag"]),
        R_G=frozenset(rels["R_G"]),
        R_H=frozenset(rels["R_H"]),
        valuation=explicit.valuation,
        serial_mode=rng.choice(["closed", "omega-tail"]),
    )


# ---------------------------------------------------------------- JSON


def _pairs(rel) -> list:
    return sorted(([a, b] for a, b in rel), key=repr)


def _world_list(ws) -> list:
    return [w for w in ws]


def model_to_json(model: Model) -> dict:
    if isinstance(model, LayeredModel):
        return {
            "mode": "layered",
            "agents": model.agents,
            "base_worlds": _world_list(model.base_worlds),
            "T": model.T,
            "R_box_0": _pairs(model.R_box_0),
            "R_i_0": {str(i): _pairs(r) for i, r in enumerate(model.R_i_0)},
            "R_fut": _pairs(model.R_fut),
            "R_Ag_0": _pairs(model.R_Ag_0),
            "valuation": {p: sorted(ws, key=repr) for p, ws in sorted(model.valuation.items())},
        }
    return {
        "mode": "explicit",
        "agents": model.agents,
        "worlds": _world_list(model.worlds),
        "serial_mode": model.serial_mode,
        "R_box": _pairs(model.R_box),
        "R_i": {str(i): _pairs(r) for i, r in enumerate(model.R_i)},
        "R_Ag": _pairs(model.R_Ag),
        "R_G": _pairs(model.R_G),
        "R_H": _pairs(model.R_H),
        "valuation": {p: sorted(ws, key=repr) for p, ws in sorted(model.valuation.items())},
    }


def _agent_rels(data: dict, key: str, n: int) -> tuple:
    table = data.get(key, {})
    if isinstance(table, list):
        table = {str(i): r for i, r in enumerate(table)}
    return tuple(_rel(map(tuple, table.get(str(i), []))) for i in range(n))


def model_from_json(data: dict) -> Model:
    try:
        mode = data.get("mode", "layered")
        n = int(data["agents"])
        val = {p: frozenset(ws) for p, ws in data.get("valuation", {}).items()}
        if mode == "layered":
            return LayeredModel(
                agents=n,
                base_worlds=tuple(data["base_worlds"]),
                T=int(data["T"]),
                R_box_0=_rel(map(tuple, data["R_box_0"])),
                R_i_0=_agent_rels(data, "R_i_0", n),
                R_fut=_rel(map(tuple, data["R_fut"])),
                R_Ag_0=_rel(map(tuple, data["R_Ag_0"])),
                valuation=val,
            )
        if mode == "explicit":
            return ExplicitModel(
                agents=n,
                worlds=tuple(data["worlds"]),
                R_box=_rel(map(tuple, data["R_box"])),
                R_i=_agent_rels(data, "R_i", n),
                R_Ag=_rel(map(tuple, data["R_Ag"])),
                R_G=_rel(map(tuple, data.get("R_G", []))),
                R_H=_rel(map(tuple, data.get("R_H", []))),
                valuation=val,
                serial_mode=data.get("serial_mode", "closed"),
            )
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model file: {exc}") from exc
    raise ModelError(f"unknown model mode {mode!r}")


def dump_model(model: Model, path, extra: dict | None = None) -> None:
    data = model_to_json(model)
    if extra:
        data.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1, sort_keys=False)
        fh.write("\n")


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return model_from_json(json.load(fh))


# ---------------------------------------------------------------- layer lemmas


def _split_layer(name: str) -> tuple[str, int]:
    base, _, j = name.rpartition("@")
    return base, int(j)


def layer_locality(model: LayeredModel, layers: int | None = None) -> list:
    """Box, agent and Ag edges joining different layers (expected: none)."""
    ex = model.to_explicit(layers)
    bad = []
    for rel in (ex.R_box, ex.R_Ag, *ex.R_i):
        for a, b in sorted(rel):
            if _split_layer(a)[1] != _split_layer(b)[1]:
                bad.append((a, b))
    return bad


def ag_level_stability(model: LayeredModel, layers: int = 3) -> list:
    """Layers ``j >= 2`` whose Ag edges differ from layer 1, as ``(j, extra, missing)``."""
    ex = model.to_explicit(max(layers, 2))
    by_layer: dict[int, set] = {}
    for a, b in ex.R_Ag:
        (ba, ja), (bb, _) = _split_layer(a), _split_layer(b)
        by_layer.setdefault(ja, set()).add((ba, bb))
    ref = by_layer.get(1, set())
    out = []
    for j in sorted(by_layer):
        if j >= 2 and by_layer[j] != ref:
            out.append((j, sorted(by_layer[j] - ref), sorted(ref - by_layer[j])))
    return out


def stationarity_violations(model: LayeredModel, formulas: Iterable[Formula], extra: int = 2) -> list:
    """``(phi, w, j, k)`` where truth at layers ``j, k`` differs past the formula's reach.

    Layers are unrolled explicitly up to ``T + extra``.  A formula of past
    depth ``d`` is only expected to be stable from layer ``1 + d`` on, since
    H and P can still see layer 0 before that.
    """
    formulas = list(formulas)
    depth = max((fm.past_depth(f) for f in formulas), default=0)
    top = max(model.T, 1 + depth) + extra
    ev = Evaluator(model, horizon=top - 1)
    out = []
    for phi in formulas:
        start = 1 + fm.past_depth(phi)
        for w in model.base_worlds:
            first = ev.holds((w, start), phi)
            for k in range(start + 1, top + 1):
                if ev.holds((w, k), phi) != first:
                    out.append((phi, w, start, k))
                    break
    return out
