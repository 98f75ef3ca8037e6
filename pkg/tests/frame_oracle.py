"""Frame conditions written directly from their definitions, with plain loops.

Deliberately shares no code with the validator in the package.
"""

import itertools


def _rel(pairs):
    return set(pairs)


def _equiv(W, R):
    refl = all((w, w) in R for w in W)
    sym = all((b, a) in R for (a, b) in R)
    trans = all((a, c) in R for a in W for b in W for c in W if (a, b) in R and (b, c) in R)
    return refl and sym and trans


def _connected(W, R):
    return all(
        y == z or (y, z) in R or (z, y) in R
        for x in W
        for y in W
        for z in W
        if (x, y) in R and (x, z) in R
    )


def oracle_verdicts(m) -> dict:
    W = list(m.worlds)
    box, ag, g, h = _rel(m.R_box), _rel(m.R_Ag), _rel(m.R_G), _rel(m.R_H)
    agents = [_rel(r) for r in m.R_i]
    n = m.agents
    out = {}
    out["equiv_box"] = _equiv(W, box)
    out["equiv_i"] = all(_equiv(W, r) for r in agents)
    out["equiv_Ag"] = _equiv(W, ag)
    out["C1"] = all((a, b) in box for r in agents for (a, b) in r)
    c2 = True
    for tup in itertools.product(W, repeat=n):
        if all((a, b) in box for a in tup for b in tup):
            if not any(all((tup[i], v) in agents[i] for i in range(n)) for v in W):
                c2 = False
                break
    out["C2"] = c2
    out["C3"] = all(
        ((w, v) in ag) == all((w, v) in r for r in agents) for w in W for v in W
    )
    out["C4"] = _connected(W, g)
    out["C5"] = _connected(W, h)
    out["C6"] = all(
        any((x, u) in ag and (u, z) in g for u in W)
        for x in W
        for y in W
        for z in W
        if (x, y) in g and (y, z) in box
    )
    out["C7"] = not any((x, y) in g and (x, y) in box for x in W for y in W)
    out["G_transitive"] = all(
        (x, z) in g for x in W for y in W for z in W if (x, y) in g and (y, z) in g
    )
    out["G_serial"] = m.serial_mode == "omega-tail" or all(any((x, y) in g for y in W) for x in W)
    out["H_converse"] = h == {(b, a) for (a, b) in g}
    return out

