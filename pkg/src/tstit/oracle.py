"""Brute-force satisfiability for the atemporal fragment.

Without temporal operators the truth of a formula at a world depends only
on that world's moment (its box-cell).  A cell with independent choices is
a grid: every agent picks one of ``c_i`` options, every joint profile holds
at least one world, and ``R_Ag`` relates worlds of the same profile.  The
oracle enumerates such cells up to ``max_worlds`` worlds and, for each, all
valuations at once as rows of a boolean matrix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import formula as fm
from .formula import Formula


@dataclass(frozen=True)
class Cell:
    """A single moment: ``profiles[w]`` is the tuple of choices of world ``w``."""

    profiles: tuple

    @property
    def size(self) -> int:
        return len(self.profiles)


@dataclass(frozen=True)
class SatResult:
    satisfiable: bool
    cell: Cell | None = None
    valuation: dict | None = None
    world: int | None = None
    frames_tried: int = 0


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def cells(agents: int, max_worlds: int):
    """Every grid cell up to ``max_worlds`` worlds, smallest first."""
    out = []
    for shape in itertools.product(range(1, max_worlds + 1), repeat=agents):
        if int(np.prod(shape)) > max_worlds:
            continue
        profiles = list(itertools.product(*(range(c) for c in shape)))
        k = len(profiles)
        for extra in range(max_worlds - k + 1):
            for mult in _compositions(extra, k):
                out.append(Cell(tuple(p for p, m in zip(profiles, mult) for _ in range(m + 1))))
    out.sort(key=lambda c: (c.size, c.profiles))
    return out


def _groups(keys):
    """Index arrays of worlds sharing the same key."""
    table: dict = {}
    for w, k in enumerate(keys):
        table.setdefault(k, []).append(w)
    return [np.array(v) for v in table.values()]


class _CellEvaluator:
    def __init__(self, cell: Cell, letters: list, agents: int):
        self.cell = cell
        self.letters = letters
        n = cell.size
        bits = len(letters) * n
        self.rows = 1 << bits
        idx = np.arange(self.rows, dtype=np.int64)
        self.atom = {}
        for a, name in enumerate(letters):
            cols = [((idx >> (a * n + w)) & 1).astype(bool) for w in range(n)]
            self.atom[name] = np.stack(cols, axis=1) if cols else np.zeros((self.rows, 0), bool)
        self.agent_groups = [_groups([p[i] for p in cell.profiles]) for i in range(agents)]
        self.ag_groups = _groups(cell.profiles)
        self.memo: dict = {}

    def _grouped(self, val: np.ndarray, groups, reducer) -> np.ndarray:
        out = np.empty_like(val)
        for g in groups:
            out[:, g] = reducer(val[:, g], axis=1, keepdims=True)
        return out

    def truth(self, phi: Formula) -> np.ndarray:
        hit = self.memo.get(phi)
        if hit is not None:
            return hit
        t = type(phi)
        if t is fm.Atom:
            r = self.atom[phi.name]
        elif t is fm.NegAtom:
            r = ~self.atom[phi.name]
        elif t is fm.Not:
            r = ~self.truth(phi.sub)
        elif t is fm.And:
            r = self.truth(phi.left) & self.truth(phi.right)
        elif t is fm.Or:
            r = self.truth(phi.left) | self.truth(phi.right)
        elif t is fm.Implies:
            r = ~self.truth(phi.left) | self.truth(phi.right)
        elif t in (fm.Box, fm.Dia):
            red = np.all if t is fm.Box else np.any
            s = self.truth(phi.sub)
            r = np.repeat(red(s, axis=1, keepdims=True), s.shape[1], axis=1)
        elif t in (fm.Stit, fm.CoStit):
            red = np.all if t is fm.Stit else np.any
            r = self._grouped(self.truth(phi.sub), self.agent_groups[phi.agent], red)
        elif t in (fm.AgStit, fm.AgCoStit):
            red = np.all if t is fm.AgStit else np.any
            r = self._grouped(self.truth(phi.sub), self.ag_groups, red)
        else:
            raise ValueError(f"oracle handles atemporal formulas only, got {fm.render(phi)}")
        self.memo[phi] = r
        return r


def satisfiable(
    formulas,
    agents: int = 2,
    max_worlds: int = 6,
    max_rows: int = 1 << 20,
) -> SatResult | None:
    """Search for a world satisfying every formula; ``None`` means the bound ran out.

    Returns a negative result only when all cells up to ``max_worlds`` were
    covered, which is conclusive for the atemporal fragment only if a model
    of that size exists whenever one exists.  Callers treat a negative
    answer as "not found within the bound".
    """
    formulas = list(formulas)
    for phi in formulas:
        if not fm.is_temporal_free(phi) or fm.uses_xstit(phi):
            raise ValueError(f"oracle handles atemporal formulas only, got {fm.render(phi)}")
        if fm.max_agent(phi) > agents:
            raise ValueError("formula mentions an unknown agent")
    letters = sorted(set().union(*(fm.atoms(f) for f in formulas))) if formulas else []
    tried = 0
    skipped = False
    for cell in cells(agents, max_worlds):
        if (1 << (len(letters) * cell.size)) > max_rows:
            skipped = True
            continue
        tried += 1
        ev = _CellEvaluator(cell, letters, agents)
        ok = np.ones((ev.rows, cell.size), dtype=bool)
        for phi in formulas:
            ok &= ev.truth(phi)
            if not ok.any():
                break
        hits = np.argwhere(ok)
        if len(hits):
            row, w = (int(v) for v in hits[0])
            n = cell.size
            val = {
                name: frozenset(x for x in range(n) if (row >> (a * n + x)) & 1)
                for a, name in enumerate(letters)
            }
            return SatResult(True, cell, val, w, tried)
    if skipped:
        return None
    return SatResult(False, frames_tried=tried)


def cell_model(result: SatResult, agents: int):
    """The satisfying cell of ``result`` as a one-moment LayeredModel (T = 1)."""
    from .model import LayeredModel

    cell = result.cell
    ws = tuple(f"w{i}" for i in range(cell.size))
    total = frozenset((a, b) for a in ws for b in ws)
    r_i = tuple(
        frozenset((ws[a], ws[b]) for a in range(cell.size) for b in range(cell.size)
                  if cell.profiles[a][i] == cell.profiles[b][i])
        for i in range(agents)
    )
    r_ag = frozenset((ws[a], ws[b]) for a in range(cell.size) for b in range(cell.size)
                     if cell.profiles[a] == cell.profiles[b])
    return LayeredModel(
        agents=agents,
        base_worlds=ws,
        T=1,
        R_box_0=total,
        R_i_0=r_i,
        R_fut=r_ag,
        R_Ag_0=r_ag,
        valuation={p: frozenset(ws[x] for x in xs) for p, xs in result.valuation.items()},
    ), ws[result.world]
