"""Labelled sequents, the rule catalogue and a proof checker.

Sequents are one-sided and cumulative: a sequent is a set of relational
atoms and labelled NNF formulas, read as "some labelled formula is true or
some atom fails", and every rule reads bottom-up, adding material to its
conclusion to form its premises.  A derivation is checked node by node: the
named rule, applied to the node's conclusion with the recorded
instantiation, must produce exactly the premises' conclusions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, NamedTuple

from . import formula as fm
from .formula import Formula

REL_KINDS = ("Rbox", "Ri", "RAg", "RG", "RGbar", "RH", "RA", "Eq")


class Rel(NamedTuple):
    kind: str
    x: str
    y: str
    param: Any = None  # agent index for Ri, frozenset of agents for RA


class LF(NamedTuple):
    label: str
    formula: Formula


Item = Rel | LF


def label_key(label: str):
    """Sort labels like x0 < x1 < x10 and w1 < w2 deterministically."""
    head = label.rstrip("0123456789")
    tail = label[len(head) :]
    return (head, int(tail) if tail else -1, label)


def _param_key(p):
    if p is None:
        return ()
    if isinstance(p, frozenset):
        return tuple(sorted(p))
    return (p,)


def item_key(item: Item):
    if isinstance(item, Rel):
        return (0, item.kind, label_key(item.x), label_key(item.y), _param_key(item.param))
    return (1, label_key(item.label), fm.render(item.formula))


@dataclass(frozen=True)
class Sequent:
    rels: frozenset = frozenset()
    fmls: frozenset = frozenset()

    @cached_property
    def labels(self) -> frozenset:
        out = {lf.label for lf in self.fmls}
        for r in self.rels:
            out.add(r.x)
            out.add(r.y)
        return frozenset(out)

    def __contains__(self, item) -> bool:
        if isinstance(item, Rel):
            return item in self.rels
        return item in self.fmls

    def add(self, items: Iterable[Item]) -> "Sequent":
        rels, fmls = set(self.rels), set(self.fmls)
        for it in items:
            (rels if isinstance(it, Rel) else fmls).add(it)
        return Sequent(frozenset(rels), frozenset(fmls))

    def items(self) -> list[Item]:
        return sorted([*self.rels, *self.fmls], key=item_key)

    def __len__(self) -> int:
        return len(self.rels) + len(self.fmls)

    def to_json(self) -> dict:
        return {
            "rel": [rel_to_json(r) for r in sorted(self.rels, key=item_key)],
            "fml": [[lf.label, fm.render(lf.formula)] for lf in sorted(self.fmls, key=item_key)],
        }

    @staticmethod
    def from_json(data: dict) -> "Sequent":
        rels = frozenset(rel_from_json(r) for r in data.get("rel", []))
        fmls = frozenset(LF(lab, _formula(text)) for lab, text in data.get("fml", []))
        return Sequent(rels, fmls)

    def __str__(self) -> str:
        parts = [rel_text(r) for r in sorted(self.rels, key=item_key)]
        parts += [f"{lf.label}: {fm.render(lf.formula)}" for lf in sorted(self.fmls, key=item_key)]
        return ", ".join(parts)


def sequent(rels: Iterable[Rel] = (), fmls: Iterable[LF] = ()) -> Sequent:
    return Sequent(frozenset(rels), frozenset(fmls))


def rel_to_json(r: Rel) -> list:
    if r.param is None:
        return [r.kind, r.x, r.y]
    if isinstance(r.param, frozenset):
        return [r.kind, r.x, r.y, sorted(r.param)]
    return [r.kind, r.x, r.y, r.param]


def rel_from_json(data) -> Rel:
    kind, x, y, *rest = data
    if kind not in REL_KINDS:
        raise ValueError(f"unknown relational atom kind {kind!r}")
    param = rest[0] if rest else None
    if kind == "RA":
        param = frozenset(param)
    elif kind == "Ri":
        param = int(param)
    return Rel(kind, x, y, param)


def rel_text(r: Rel) -> str:
    if r.kind == "Ri":
        return f"R{r.param} {r.x} {r.y}"
    if r.kind == "RA":
        return f"R{{{','.join(map(str, sorted(r.param)))}}} {r.x} {r.y}"
    return f"{r.kind} {r.x} {r.y}"


_PARSED: dict[str, Formula] = {}


def _formula(value) -> Formula:
    if isinstance(value, Formula):
        return value
    hit = _PARSED.get(value)
    if hit is None:
        hit = fm.parse(value)
        _PARSED[value] = hit
    return hit


# ---------------------------------------------------------------- rule catalogue

# operator class -> relational atom kind it quantifies over
BOX_RULES = {"Box": fm.Box, "Stit": fm.Stit, "AgStit": fm.AgStit, "G": fm.G, "H": fm.H, "XStit": fm.XStit}
DIA_RULES = {
    "Dia": fm.Dia,
    "CoStit": fm.CoStit,
    "AgCoStit": fm.AgCoStit,
    "F": fm.F,
    "P": fm.P,
    "XCoStit": fm.XCoStit,
}


def modal_atom(phi: Formula, x: str, y: str) -> Rel:
    """Relational atom a modal formula at ``x`` quantifies over, towards ``y``."""
    if isinstance(phi, (fm.Box, fm.Dia)):
        return Rel("Rbox", x, y)
    if isinstance(phi, (fm.Stit, fm.CoStit)):
        return Rel("Ri", x, y, phi.agent)
    if isinstance(phi, (fm.AgStit, fm.AgCoStit)):
        return Rel("RAg", x, y)
    if isinstance(phi, (fm.G, fm.F)):
        return Rel("RG", x, y)
    if isinstance(phi, (fm.H, fm.P)):
        return Rel("RH", x, y)
    if isinstance(phi, (fm.XStit, fm.XCoStit)):
        return Rel("RA", x, y, phi.group)
    raise ValueError(f"not a modal formula: {phi!r}")


LEAF_RULES = ("id", "compG1")
LOGICAL = ("id", "And", "Or")
LDM_RULES = LOGICAL + (
    "Box", "Dia", "Stit", "CoStit",
    "reflBox", "euclBox", "refl_i", "eucl_i", "br_i", "IOA",
)  # fmt: skip
TSTIT_RULES = LDM_RULES + (
    "AgStit", "AgCoStit", "G", "F", "H", "P",
    "reflAg", "euclAg", "agd", "agi",
    "transG", "serG", "convG", "convH", "connG", "connH", "ncuh",
    "irrG", "compG1", "compG2", "ref=", "eucl=", "repl=",
)  # fmt: skip
XSTIT_RULES = LOGICAL + (
    "Box", "Dia", "XStit", "XCoStit", "reflBox", "euclBox", "IOA-E", "IOA-U",
)  # fmt: skip
RULES_BY_LOGIC = {"ldm": LDM_RULES, "tstit": TSTIT_RULES, "xstit": XSTIT_RULES}


class InapplicableRule(ValueError):
    pass


@dataclass
class RuleContext:
    logic: str = "tstit"
    agents: int = 2
    # IOA-E instances visible from the current node (instance id -> inst)
    instances: dict = field(default_factory=dict)


def rule_family(name: str) -> str:
    return "IOA-U" if name.startswith("IOA-U") else name


def _need(cond: bool, message: str) -> None:
    if not cond:
        raise InapplicableRule(message)


def _has(s: Sequent, item: Item, what: str = "") -> Item:
    if item not in s:
        text = rel_text(item) if isinstance(item, Rel) else f"{item.label}: {fm.render(item.formula)}"
        raise InapplicableRule(f"missing {what or 'item'} {text}")
    return item


def _label_witness(s: Sequent, label: str) -> Item:
    _need(label in s.labels, f"label {label} does not occur in the conclusion")
    return min((it for it in s.items() if label in _labels_of(it)), key=item_key)


def _labels_of(item: Item) -> tuple:
    return (item.x, item.y) if isinstance(item, Rel) else (item.label,)


def _fresh(s: Sequent, label: str) -> None:
    _need(isinstance(label, str) and label != "", "fresh label missing")
    _need(label not in s.labels, f"label {label} is not fresh")


def _agent(inst: dict, ctx: RuleContext) -> int:
    i = inst.get("agent")
    _need(isinstance(i, int) and 0 <= i < ctx.agents, f"bad agent index {i!r}")
    return i


def _expand(s: Sequent, rule: str, inst: dict, ctx: RuleContext) -> tuple[list[list[Item]], list[Item]]:
    """Items each premise adds, and the conclusion items the instance relies on."""
    fam = rule_family(rule)
    g = inst.get

    if fam == "id":
        x, p = g("label"), g("atom")
        used = [_has(s, LF(x, fm.Atom(p))), _has(s, LF(x, fm.NegAtom(p)))]
        return [], used
    if fam == "compG1":
        used = [_has(s, Rel("RG", g("x"), g("y"))), _has(s, Rel("RGbar", g("x"), g("y")))]
        return [], used
    if fam in ("And", "Or"):
        x, phi = g("label"), _formula(g("formula"))
        want = fm.And if fam == "And" else fm.Or
        _need(isinstance(phi, want), f"{fam} needs a principal {want.__name__}")
        used = [_has(s, LF(x, phi), "principal formula")]
        if fam == "And":
            return [[LF(x, phi.left)], [LF(x, phi.right)]], used
        return [[LF(x, phi.left), LF(x, phi.right)]], used
    if fam in BOX_RULES:
        x, phi, y = g("label"), _formula(g("formula")), g("fresh")
        _need(type(phi) is BOX_RULES[fam], f"{fam} needs a principal {BOX_RULES[fam].__name__}")
        used = [_has(s, LF(x, phi), "principal formula")]
        _fresh(s, y)
        return [[modal_atom(phi, x, y), LF(y, phi.sub)]], used
    if fam in DIA_RULES:
        x, phi, y = g("label"), _formula(g("formula")), g("target")
        _need(type(phi) is DIA_RULES[fam], f"{fam} needs a principal {DIA_RULES[fam].__name__}")
        used = [_has(s, LF(x, phi), "principal formula"), _has(s, modal_atom(phi, x, y), "relational atom")]
        return [[LF(y, phi.sub)]], used

    if fam in ("reflBox", "reflAg", "refl_i", "ref="):
        x = g("label")
        used = [_label_witness(s, x)]
        atom = {
            "reflBox": Rel("Rbox", x, x),
            "reflAg": Rel("RAg", x, x),
            "ref=": Rel("Eq", x, x),
        }.get(fam) or Rel("Ri", x, x, _agent(inst, ctx))
        return [[atom]], used
    if fam in ("euclBox", "euclAg", "eucl_i", "eucl="):
        kind = {"euclBox": "Rbox", "euclAg": "RAg", "eucl_i": "Ri", "eucl=": "Eq"}[fam]
        param = _agent(inst, ctx) if fam == "eucl_i" else None
        x, y, z = g("x"), g("y"), g("z")
        used = [_has(s, Rel(kind, x, y, param)), _has(s, Rel(kind, x, z, param))]
        return [[Rel(kind, y, z, param)]], used
    if fam == "br_i":
        i, x, y = _agent(inst, ctx), g("x"), g("y")
        return [[Rel("Rbox", x, y)]], [_has(s, Rel("Ri", x, y, i))]
    if fam == "agd":
        i, x, y = _agent(inst, ctx), g("x"), g("y")
        return [[Rel("Ri", x, y, i)]], [_has(s, Rel("RAg", x, y))]
    if fam == "agi":
        x, y = g("x"), g("y")
        used = [_has(s, Rel("Ri", x, y, i)) for i in range(ctx.agents)]
        return [[Rel("RAg", x, y)]], used
    if fam == "IOA":
        labels, u = g("labels"), g("fresh")
        _need(
            isinstance(labels, list) and len(labels) == ctx.agents,
            f"IOA needs one label per agent ({ctx.agents})",
        )
        used = []
        for a in range(len(labels)):
            for b in range(len(labels)):
                if a != b:
                    used.append(_has(s, Rel("Rbox", labels[a], labels[b]), "settledness link"))
        if not used:
            used.append(_label_witness(s, labels[0]))
        _fresh(s, u)
        return [[Rel("Ri", x, u, i) for i, x in enumerate(labels)]], used
    if fam == "transG":
        x, y, z = g("x"), g("y"), g("z")
        return [[Rel("RG", x, z)]], [_has(s, Rel("RG", x, y)), _has(s, Rel("RG", y, z))]
    if fam == "serG":
        x, y = g("label"), g("fresh")
        used = [_label_witness(s, x)]
        _fresh(s, y)
        return [[Rel("RG", x, y)]], used
    if fam == "convG":
        x, y = g("x"), g("y")
        return [[Rel("RH", y, x)]], [_has(s, Rel("RG", x, y))]
    if fam == "convH":
        x, y = g("x"), g("y")
        return [[Rel("RG", y, x)]], [_has(s, Rel("RH", x, y))]
    if fam in ("connG", "connH"):
        kind = "RG" if fam == "connG" else "RH"
        x, y, z = g("x"), g("y"), g("z")
        used = [_has(s, Rel(kind, x, y)), _has(s, Rel(kind, x, z))]
        return [[Rel(kind, y, z)], [Rel("Eq", y, z)], [Rel(kind, z, y)]], used
    if fam == "ncuh":
        x, y, z, u = g("x"), g("y"), g("z"), g("fresh")
        used = [_has(s, Rel("RG", x, y)), _has(s, Rel("Rbox", y, z))]
        _fresh(s, u)
        return [[Rel("RAg", x, u), Rel("RG", u, z)]], used
    if fam == "irrG":
        x, y = g("x"), g("y")
        return [[Rel("RGbar", x, y)]], [_has(s, Rel("Rbox", x, y))]
    if fam == "compG2":
        x, y = g("x"), g("y")
        used = [_label_witness(s, x), _label_witness(s, y)]
        return [[Rel("RG", x, y)], [Rel("RGbar", x, y)]], used
    if fam == "repl=":
        x, y = g("x"), g("y")
        eq = _has(s, Rel("Eq", x, y), "equality atom")
        if g("rel") is not None:
            r = g("rel")
            r = r if isinstance(r, Rel) else rel_from_json(r)
            _has(s, r, "replaced atom")
            pos = g("pos")
            _need(pos in (0, 1), "repl= on an atom needs pos 0 or 1")
            _need((r.x, r.y)[pos] == x, f"position {pos} of the atom is not {x}")
            new = r._replace(x=y) if pos == 0 else r._replace(y=y)
            return [[new]], [eq, r]
        f = g("fml")
        _need(f is not None, "repl= needs a rel or fml item")
        lab, phi = f if isinstance(f, LF) else (f[0], _formula(f[1]))
        _need(lab == x, f"formula is not labelled {x}")
        lf = _has(s, LF(lab, _formula(phi)), "replaced formula")
        return [[LF(y, lf.formula)]], [eq, lf]

    if fam == "IOA-E":
        base, u, targets = g("base"), g("fresh"), g("targets")
        _need(isinstance(targets, list) and len(targets) >= 2, "IOA-E needs at least two targets")
        groups = []
        used = []
        for t in targets:
            lab, grp = t[0], frozenset(t[1])
            _need(len(grp) > 0, "IOA-E groups must be nonempty")
            _need(all(0 <= i < ctx.agents for i in grp), f"bad agent group {sorted(grp)}")
            _need(all(grp.isdisjoint(o) for o in groups), "IOA-E groups must be pairwise disjoint")
            groups.append(grp)
            used.append(_has(s, Rel("Rbox", base, lab), "settledness link"))
        _fresh(s, u)
        return [[Rel("Rbox", base, u)]], used
    if fam == "IOA-U":
        try:
            k = int(rule[len("IOA-U") :])
        except ValueError:
            raise InapplicableRule(f"malformed rule name {rule!r}") from None
        inst_id = g("instance")
        _need(inst_id in ctx.instances, f"no IOA-E instance {inst_id!r} below this node")
        e = ctx.instances[inst_id]
        _need(1 <= k <= len(e["targets"]), f"instance {inst_id!r} has no target {k}")
        lab, grp = e["targets"][k - 1][0], frozenset(e["targets"][k - 1][1])
        z = g("target")
        used = [_has(s, Rel("RA", e["fresh"], z, grp), "group choice atom")]
        return [[Rel("RA", lab, z, grp)]], used
    raise InapplicableRule(f"unknown rule {rule!r}")


def expand(s: Sequent, rule: str, inst: dict, ctx: RuleContext | None = None):
    """Premise additions and used items of a rule instance (checked against the logic)."""
    ctx = ctx or RuleContext()
    allowed = RULES_BY_LOGIC[ctx.logic]
    if rule_family(rule) not in allowed:
        raise InapplicableRule(f"rule {rule!r} is not part of {ctx.logic}")
    return _expand(s, rule, inst, ctx)


def apply_rule(s: Sequent, rule: str, inst: dict, ctx: RuleContext | None = None) -> list[Sequent]:
    """Premises of ``rule`` read bottom-up from conclusion ``s``."""
    adds, _ = expand(s, rule, inst, ctx)
    return [s.add(a) for a in adds]


# ---------------------------------------------------------------- proof trees


@dataclass(frozen=True)
class ProofTree:
    conclusion: Sequent
    rule: str
    inst: dict
    premises: tuple = ()

    def nodes(self):
        """All nodes with their paths, pre-order, without recursion."""
        stack = [(self, ())]
        while stack:
            node, path = stack.pop()
            yield node, path
            for k in range(len(node.premises) - 1, -1, -1):
                stack.append((node.premises[k], path + (k,)))

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def leaves(self) -> list["ProofTree"]:
        return [n for n, _ in self.nodes() if not n.premises]

    def at(self, path: tuple) -> "ProofTree":
        node = self
        for k in path:
            node = node.premises[k]
        return node

    def to_json(self) -> dict:
        # iterative post-order so deep derivations do not hit the recursion limit
        done: dict[int, dict] = {}
        stack = [(self, False)]
        while stack:
            node, ready = stack.pop()
            if ready:
                done[id(node)] = {
                    "rule": node.rule,
                    "inst": inst_to_json(node.inst),
                    "conclusion": node.conclusion.to_json(),
                    "premises": [done.pop(id(p)) for p in node.premises],
                }
            else:
                stack.append((node, True))
                stack.extend((p, False) for p in node.premises)
        return done[id(self)]

    @staticmethod
    def from_json(data: dict) -> "ProofTree":
        built: dict[int, ProofTree] = {}
        stack = [(data, False)]
        while stack:
            node, ready = stack.pop()
            if ready:
                built[id(node)] = ProofTree(
                    Sequent.from_json(node["conclusion"]),
                    node["rule"],
                    inst_from_json(node.get("inst", {})),
                    tuple(built.pop(id(p)) for p in node.get("premises", [])),
                )
            else:
                stack.append((node, True))
                stack.extend((p, False) for p in node.get("premises", []))
        return built[id(data)]


def inst_to_json(inst: dict) -> dict:
    out = {}
    for k, v in inst.items():
        if isinstance(v, Formula):
            v = fm.render(v)
        elif isinstance(v, Rel):
            v = rel_to_json(v)
        elif isinstance(v, LF):
            v = [v.label, fm.render(v.formula)]
        elif isinstance(v, frozenset):
            v = sorted(v)
        out[k] = v
    return out


def inst_from_json(inst: dict) -> dict:
    out = dict(inst)
    if isinstance(out.get("formula"), str):
        out["formula"] = _formula(out["formula"])
    if isinstance(out.get("rel"), list):
        out["rel"] = rel_from_json(out["rel"])
    if isinstance(out.get("fml"), list):
        out["fml"] = LF(out["fml"][0], _formula(out["fml"][1]))
    return out


@dataclass(frozen=True)
class CheckResult:
    accepted: bool
    reason: str = ""
    path: tuple | None = None
    warnings: tuple = ()

    def __bool__(self) -> bool:
        return self.accepted


def infer_agents(t: ProofTree) -> int:
    n = 0
    for node, _ in t.nodes():
        for r in node.conclusion.rels:
            if r.kind == "Ri":
                n = max(n, r.param + 1)
            elif r.kind == "RA":
                n = max(n, max(r.param) + 1)
        for lf in node.conclusion.fmls:
            n = max(n, fm.max_agent(lf.formula))
    return max(n, 1)


def _origin_warning(path_fresh: dict, e: dict, k: int, z: str) -> str | None:
    origin = path_fresh.get(z)
    grp = frozenset(e["targets"][k - 1][1])
    if origin is None or origin[0] != "XStit" or origin[1] != e["fresh"] or origin[2] != grp:
        return (
            f"IOA-U{k} targets {z}, which was not introduced by a group-{sorted(grp)} "
            f"choice rule at {e['fresh']}"
        )
    return None


def check_proof(t: ProofTree, logic: str = "tstit", agents: int | None = None) -> CheckResult:
    """Validate every node of ``t``; reject at the first violated side condition."""
    logic = logic.lower()
    if logic not in RULES_BY_LOGIC:
        return CheckResult(False, f"unknown logic {logic!r}", ())
    n = agents if agents is not None else infer_agents(t)
    warnings = []
    stack = [(t, (), {}, {})]
    while stack:
        node, path, instances, fresh_origin = stack.pop()
        ctx = RuleContext(logic, n, instances)
        if any(not fm.is_nnf(lf.formula) for lf in node.conclusion.fmls):
            return CheckResult(False, "conclusion contains a formula not in NNF", path)
        try:
            adds, _ = expand(node.conclusion, node.rule, node.inst, ctx)
        except InapplicableRule as exc:
            return CheckResult(False, f"{node.rule}: {exc}", path)
        expected = [node.conclusion.add(a) for a in adds]
        got = [p.conclusion for p in node.premises]
        if len(expected) != len(got):
            return CheckResult(
                False, f"{node.rule}: expected {len(expected)} premise(s), found {len(got)}", path
            )
        for k, (want, have) in enumerate(zip(expected, got)):
            if want != have:
                missing = sorted(want.rels ^ have.rels, key=item_key) + sorted(
                    want.fmls ^ have.fmls, key=item_key
                )
                shown = ", ".join(
                    rel_text(it) if isinstance(it, Rel) else f"{it.label}: {fm.render(it.formula)}"
                    for it in missing[:3]
                )
                return CheckResult(False, f"{node.rule}: premise {k} differs on {shown}", path)
        fam = rule_family(node.rule)
        child_instances, child_origin = instances, fresh_origin
        if fam == "IOA-E":
            inst_id = node.inst.get("instance")
            if inst_id in instances:
                return CheckResult(False, f"IOA-E instance {inst_id!r} reused", path)
            child_instances = {**instances, inst_id: node.inst}
        elif fam == "IOA-U":
            e = instances[node.inst["instance"]]
            w = _origin_warning(fresh_origin, e, int(node.rule[5:]), node.inst.get("target"))
            if w:
                warnings.append((path, w))
        if "fresh" in node.inst:
            phi = node.inst.get("formula")
            grp = phi.group if isinstance(phi, fm.XStit) else None
            child_origin = {**fresh_origin, node.inst["fresh"]: (fam, node.inst.get("label"), grp)}
        for k in range(len(node.premises) - 1, -1, -1):
            stack.append((node.premises[k], path + (k,), child_instances, child_origin))
    return CheckResult(True, warnings=tuple(warnings))


def derive(s: Sequent, steps: list[tuple[str, dict]], ctx: RuleContext, tail) -> ProofTree:
    """Chain single-premise ``steps`` upward from ``s``; ``tail(top)`` builds the rest."""
    seqs = [s]
    for rule, inst in steps:
        prem = apply_rule(seqs[-1], rule, inst, ctx)
        if len(prem) != 1:
            raise InapplicableRule(f"{rule} is not a single-premise step")
        seqs.append(prem[0])
    node = tail(seqs[-1])
    for (rule, inst), concl in zip(reversed(steps), reversed(seqs[:-1])):
        node = ProofTree(concl, rule, inst, (node,))
    return node


def appendix_b_fixture() -> ProofTree:
    """The G3Xstit derivation of the Xstit independence axiom.

    phi, psi are instantiated as atoms p, q and the groups as A = {0},
    B = {1}.  Printed inferences that apply a rule twice (the two
    disjunctions and the two boxes below IOA-E) appear as two nodes.
    """
    A, B = frozenset({0}), frozenset({1})
    p, q = fm.Atom("p"), fm.Atom("q")
    box_a = fm.Box(fm.XCoStit(A, fm.NegAtom("p")))
    box_b = fm.Box(fm.XCoStit(B, fm.NegAtom("q")))
    conj = fm.And(fm.XStit(A, p), fm.XStit(B, q))
    dia = fm.Dia(conj)
    goal = fm.Or(fm.Or(box_a, box_b), dia)
    ctx = RuleContext("xstit", 2)
    ioa_e = {
        "instance": 1,
        "base": "w1",
        "targets": [["w2", [0]], ["w3", [1]]],
        "fresh": "w4",
    }

    def branch(label: str, group, atom: str, source: str, k: int):
        stit = fm.XStit(group, fm.Atom(atom))
        costit = fm.XCoStit(group, fm.NegAtom(atom))

        def leaf(s):
            return ProofTree(s, "id", {"label": label, "atom": atom})

        def top(s):
            return derive(
                s,
                [
                    ("XStit", {"label": "w4", "formula": stit, "fresh": label}),
                    (f"IOA-U{k}", {"instance": 1, "target": label}),
                    ("XCoStit", {"label": source, "formula": costit, "target": label}),
                ],
                RuleContext("xstit", 2, {1: ioa_e}),
                leaf,
            )

        return top

    def join(s):
        left, right = apply_rule(s, "And", {"label": "w4", "formula": conj}, ctx)
        return ProofTree(
            s,
            "And",
            {"label": "w4", "formula": conj},
            (branch("w5", A, "p", "w2", 1)(left), branch("w6", B, "q", "w3", 2)(right)),
        )

    root = sequent(fmls=[LF("w1", goal)])
    return derive(
        root,
        [
            ("Or", {"label": "w1", "formula": goal}),
            ("Or", {"label": "w1", "formula": goal.left}),
            ("Box", {"label": "w1", "formula": box_a, "fresh": "w2"}),
            ("Box", {"label": "w1", "formula": box_b, "fresh": "w3"}),
            ("IOA-E", ioa_e),
            ("Dia", {"label": "w1", "formula": dia, "target": "w4"}),
        ],
        ctx,
        join,
    )


def dump_proof(t: ProofTree, path, logic: str, agents: int) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"logic": logic, "agents": agents, "proof": t.to_json()}, fh, indent=1)
        fh.write("\n")


def load_proof(path) -> tuple[ProofTree, dict]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    meta = {}
    if "proof" in data:
        meta = {k: v for k, v in data.items() if k != "proof"}
        data = data["proof"]
    return ProofTree.from_json(data), meta
