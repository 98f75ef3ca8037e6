"""Syntax of the STIT languages.

Formulas are immutable dataclasses.  The prover, the sequent calculus and
the canonical construction only ever see negation normal form (NNF), where
negation survives solely as ``NegAtom``; ``Not`` and ``Implies`` are surface
sugar produced by the parser and removed by :func:`to_nnf`.

Concrete syntax (loosest to tightest)::

    F -> F      right associative
    F | F       left associative
    F & F       left associative
    ~F  []F  <>F  [0]F  <0>F  [Ag]F  <Ag>F  G F  F F  H F  P F
    [x:{0,2}]F  <x:{0,2}>F
    atoms  [a-z][a-z0-9_]*   and parentheses

``~p`` directly on an atom parses to ``NegAtom``; ``~(p)`` keeps an explicit
``Not(Atom)`` so that rendering and parsing round-trip exactly.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterable, Iterator


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class NegAtom(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Box(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class Dia(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class Stit(Formula):
    agent: int
    sub: Formula


@dataclass(frozen=True, slots=True)
class CoStit(Formula):
    agent: int
    sub: Formula


@dataclass(frozen=True, slots=True)
class AgStit(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class AgCoStit(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class G(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class F(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class H(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class P(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class XStit(Formula):
    group: frozenset
    sub: Formula


@dataclass(frozen=True, slots=True)
class XCoStit(Formula):
    group: frozenset
    sub: Formula


BINARY = (And, Or, Implies)
# unary operators without an index, with their duals
PLAIN_UNARY = {Box: Dia, Dia: Box, AgStit: AgCoStit, AgCoStit: AgStit, G: F, F: G, H: P, P: H}
INDEXED_UNARY = {Stit: CoStit, CoStit: Stit}
GROUP_UNARY = {XStit: XCoStit, XCoStit: XStit}

# box-type operators (universal over a relation) and diamond-type ones
BOXES = (Box, Stit, AgStit, G, H, XStit)
DIAMONDS = (Dia, CoStit, AgCoStit, F, P, XCoStit)
TEMPORAL = (G, F, H, P)


class FormulaError(ValueError):
    pass


class ParseError(FormulaError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UnknownAgentError(ParseError):
    pass


def children(phi: Formula) -> tuple[Formula, ...]:
    if isinstance(phi, (Atom, NegAtom)):
        return ()
    if isinstance(phi, BINARY):
        return (phi.left, phi.right)
    return (phi.sub,)


def rebuild(phi: Formula, subs: tuple[Formula, ...]) -> Formula:
    """Same constructor as ``phi`` with new children."""
    if isinstance(phi, BINARY):
        return type(phi)(*subs)
    if isinstance(phi, (Stit, CoStit)):
        return type(phi)(phi.agent, subs[0])
    if isinstance(phi, (XStit, XCoStit)):
        return type(phi)(phi.group, subs[0])
    return type(phi)(subs[0])


def subformulas(phi: Formula) -> Iterator[Formula]:
    stack = [phi]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(children(cur))


def size(phi: Formula) -> int:
    return sum(1 for _ in subformulas(phi))


def modal_depth(phi: Formula) -> int:
    subs = children(phi)
    inner = max((modal_depth(s) for s in subs), default=0)
    if isinstance(phi, BOXES + DIAMONDS):
        return inner + 1
    return inner


def past_depth(phi: Formula) -> int:
    """Nesting depth of H/P; bounds how many layers a formula can tell apart."""
    subs = children(phi)
    inner = max((past_depth(s) for s in subs), default=0)
    return inner + 1 if isinstance(phi, (H, P)) else inner


def atoms(phi: Formula) -> set[str]:
    return {s.name for s in subformulas(phi) if isinstance(s, (Atom, NegAtom))}


def agents_used(phi: Formula) -> set[int]:
    out: set[int] = set()
    for s in subformulas(phi):
        if isinstance(s, (Stit, CoStit)):
            out.add(s.agent)
        elif isinstance(s, (XStit, XCoStit)):
            out.update(s.group)
    return out


def is_nnf(phi: Formula) -> bool:
    return not any(isinstance(s, (Not, Implies)) for s in subformulas(phi))


def is_temporal_free(phi: Formula) -> bool:
    return not any(isinstance(s, TEMPORAL) for s in subformulas(phi))


def is_ldm(phi: Formula) -> bool:
    """Only booleans, settledness and individual agency."""
    return not any(
        isinstance(s, TEMPORAL + (AgStit, AgCoStit, XStit, XCoStit)) for s in subformulas(phi)
    )


def uses_xstit(phi: Formula) -> bool:
    return any(isinstance(s, (XStit, XCoStit)) for s in subformulas(phi))


# ---------------------------------------------------------------- NNF


def to_nnf(phi: Formula) -> Formula:
    if isinstance(phi, (Atom, NegAtom)):
        return phi
    if isinstance(phi, Not):
        return _negate(phi.sub)
    if isinstance(phi, Implies):
        return Or(_negate(phi.left), to_nnf(phi.right))
    return rebuild(phi, tuple(to_nnf(s) for s in children(phi)))


def _negate(phi: Formula) -> Formula:
    """NNF of the negation of an arbitrary formula."""
    if isinstance(phi, Atom):
        return NegAtom(phi.name)
    if isinstance(phi, NegAtom):
        return Atom(phi.name)
    if isinstance(phi, Not):
        return to_nnf(phi.sub)
    if isinstance(phi, Implies):
        return And(to_nnf(phi.left), _negate(phi.right))
    if isinstance(phi, And):
        return Or(_negate(phi.left), _negate(phi.right))
    if isinstance(phi, Or):
        return And(_negate(phi.left), _negate(phi.right))
    if type(phi) in PLAIN_UNARY:
        return PLAIN_UNARY[type(phi)](_negate(phi.sub))
    if type(phi) in INDEXED_UNARY:
        return INDEXED_UNARY[type(phi)](phi.agent, _negate(phi.sub))
    if type(phi) in GROUP_UNARY:
        return GROUP_UNARY[type(phi)](phi.group, _negate(phi.sub))
    raise FormulaError(f"unknown formula node {phi!r}")


def complement(phi: Formula) -> Formula:
    """The NNF of ``~phi`` for an NNF formula (the overlined formula)."""
    if not is_nnf(phi):
        raise FormulaError("complement expects a formula in negation normal form")
    return _negate(phi)


def closure_of(phis: Iterable[Formula]) -> frozenset[Formula]:
    """Smallest set containing ``phis`` closed under subformulas and complements."""
    out: set[Formula] = set()
    for phi in phis:
        if not is_nnf(phi):
            raise FormulaError("closure_of expects formulas in negation normal form")
        for s in subformulas(phi):
            out.add(s)
            out.add(_negate(s))
    return frozenset(out)


# ---------------------------------------------------------------- printing

_PREC = {Implies: 1, Or: 2, And: 3}
_PREFIX_PREC = 4
_SYMBOL = {Implies: "->", Or: "|", And: "&"}


def _group_text(group: Iterable[int]) -> str:
    return "{" + ",".join(str(i) for i in sorted(group)) + "}"


def _prefix(phi: Formula) -> str:
    if isinstance(phi, Not):
        return "~"
    if isinstance(phi, Box):
        return "[]"
    if isinstance(phi, Dia):
        return "<>"
    if isinstance(phi, Stit):
        return f"[{phi.agent}]"
    if isinstance(phi, CoStit):
        return f"<{phi.agent}>"
    if isinstance(phi, AgStit):
        return "[Ag]"
    if isinstance(phi, AgCoStit):
        return "<Ag>"
    if isinstance(phi, XStit):
        return f"[x:{_group_text(phi.group)}]"
    if isinstance(phi, XCoStit):
        return f"<x:{_group_text(phi.group)}>"
    return type(phi).__name__ + " "


def render(phi: Formula, prec: int = 0) -> str:
    if isinstance(phi, Atom):
        return phi.name
    if isinstance(phi, NegAtom):
        return "~" + phi.name
    if isinstance(phi, BINARY):
        p = _PREC[type(phi)]
        if isinstance(phi, Implies):
            left, right = render(phi.left, p + 1), render(phi.right, p)
        else:
            left, right = render(phi.left, p), render(phi.right, p + 1)
        text = f"{left} {_SYMBOL[type(phi)]} {right}"
        return f"({text})" if p < prec else text
    if isinstance(phi, Not) and isinstance(phi.sub, Atom):
        return f"~({phi.sub.name})"
    return _prefix(phi) + render(phi.sub, _PREFIX_PREC)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<boxdia>\[\]|<>)|(?P<atom>[a-z][a-z0-9_]*)"
    r"|(?P<temporal>[GFHP])(?![A-Za-z0-9_])|(?P<ag>Ag)|(?P<num>\d+)|(?P<sym>[~&|()\[\]<>{},:]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        value = m.group(kind)
        tokens.append((kind, value, m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, agents: int | None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.agents = agents

    def peek(self, offset: int = 0) -> tuple[str, str, int]:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, val, pos = self.take()
        if val != value or kind == "atom":
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos, self.text)

    def agent(self, tok: tuple[str, str, int]) -> int:
        kind, val, pos = tok
        if kind != "num":
            raise ParseError(f"expected agent index, found {val!r}", pos, self.text)
        idx = int(val)
        if self.agents is not None and idx >= self.agents:
            raise UnknownAgentError(
                f"agent {idx} out of range for {self.agents} agent(s)", pos, self.text
            )
        return idx

    def parse(self) -> Formula:
        phi = self.implication()
        kind, val, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {val!r}", pos, self.text)
        return phi

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek()[0] == "arrow":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek()[1] == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek()[1] == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def group(self) -> frozenset:
        self.expect("{")
        members = {self.agent(self.take())}
        while self.peek()[1] == ",":
            self.take()
            members.add(self.agent(self.take()))
        self.expect("}")
        return frozenset(members)

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if val == "~":
            self.take()
            if self.peek()[0] == "atom":
                return NegAtom(self.take()[1])
            return Not(self.unary())
        if kind == "boxdia":
            self.take()
            return (Box if val == "[]" else Dia)(self.unary())
        if kind == "temporal":
            self.take()
            return {"G": G, "F": F, "H": H, "P": P}[val](self.unary())
        if val in ("[", "<"):
            self.take()
            close = "]" if val == "[" else ">"
            nkind, nval, npos = self.peek()
            if nkind == "ag":
                self.take()
                self.expect(close)
                return (AgStit if val == "[" else AgCoStit)(self.unary())
            if nkind == "atom" and nval == "x" and self.peek(1)[1] == ":":
                self.take()
                self.take()
                grp = self.group()
                if not grp:
                    raise ParseError("empty agent group", npos, self.text)
                self.expect(close)
                return (XStit if val == "[" else XCoStit)(grp, self.unary())
            idx = self.agent(self.take())
            self.expect(close)
            return (Stit if val == "[" else CoStit)(idx, self.unary())
        if kind == "atom":
            self.take()
            return Atom(val)
        if val == "(":
            self.take()
            phi = self.implication()
            self.expect(")")
            return phi
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos, self.text)


def parse(text: str, agents: int | None = None) -> Formula:
    """Parse concrete syntax; ``agents`` bounds the admissible agent indices."""
    return _Parser(text, agents).parse()


def max_agent(phi: Formula) -> int:
    used = agents_used(phi)
    return max(used) + 1 if used else 0


# ---------------------------------------------------------------- random formulas


def random_formula(
    rng: random.Random,
    size: int,
    agents: int = 2,
    atom_names: tuple[str, ...] = ("p", "q"),
    temporal: bool = True,
    ag: bool = True,
    sugar: bool = False,
    xstit: bool = False,
) -> Formula:
    """A random formula with exactly ``size`` nodes (size >= 1)."""
    unary: list = [Box, Dia, Stit, CoStit]
    if ag:
        unary += [AgStit, AgCoStit]
    if temporal:
        unary += [G, F, H, P]
    if xstit:
        unary += [XStit, XCoStit]
    binary: list = [And, Or]
    if sugar:
        unary.append(Not)
        binary.append(Implies)

    def build(n: int) -> Formula:
        if n == 1:
            name = rng.choice(atom_names)
            return Atom(name) if rng.random() < 0.5 else NegAtom(name)
        if n == 2 or rng.random() < 0.5:
            op = rng.choice(unary)
            sub = build(n - 1)
            if op in (Stit, CoStit):
                return op(rng.randrange(agents), sub)
            if op in (XStit, XCoStit):
                grp = frozenset(i for i in range(agents) if rng.random() < 0.5) or frozenset({0})
                return op(grp, sub)
            return op(sub)
        k = rng.randint(1, n - 2)
        return rng.choice(binary)(build(k), build(n - 1 - k))

    return build(size)


def sort_key(phi: Formula) -> str:
    return render(phi)
