"""Systematic corruptions of the Xstit fixture derivation.

Each mutation returns ``(tree, path)`` where ``path`` is the node the
checker is expected to reject (``None`` when any path will do).
"""

from dataclasses import replace

from tstit import formula as fm
from tstit.sequent import LF, ProofTree, Rel, Sequent


def rebuild(node: ProofTree, path: tuple, fn) -> ProofTree:
    """Copy of ``node`` with the subtree at ``path`` replaced by ``fn(subtree)``."""
    if not path:
        return fn(node)
    k = path[0]
    prem = list(node.premises)
    prem[k] = rebuild(prem[k], path[1:], fn)
    return replace(node, premises=tuple(prem))


def map_conclusions(node: ProofTree, fn) -> ProofTree:
    return ProofTree(
        fn(node.conclusion),
        node.rule,
        node.inst,
        tuple(map_conclusions(p, fn) for p in node.premises),
    )


def find(tree: ProofTree, pred) -> tuple:
    return next(path for node, path in tree.nodes() if pred(node))


def freshness(tree):
    """Make ``w5`` occur everywhere, so the step that introduces it is not fresh."""
    path = find(tree, lambda n: n.rule == "XStit" and n.inst.get("fresh") == "w5")
    extra = LF("w5", fm.Atom("r"))
    return map_conclusions(tree, lambda s: s.add([extra])), path


def dropped_rel(tree):
    """Remove the settledness link w1->w2 above the step that adds it."""
    path = find(tree, lambda n: n.rule == "Box" and n.inst.get("fresh") == "w2")
    gone = Rel("Rbox", "w1", "w2")

    def strip(s: Sequent) -> Sequent:
        return Sequent(s.rels - {gone}, s.fmls)

    return rebuild(tree, path + (0,), lambda sub: map_conclusions(sub, strip)), path


def swapped_rule(tree):
    """Relabel the conjunction split as a disjunction step."""
    path = find(tree, lambda n: n.rule == "And")
    return rebuild(tree, path, lambda n: replace(n, rule="Or")), path


def broken_instance(tree):
    """Point the first IOA-U step at an instance id that no IOA-E introduced."""
    path = find(tree, lambda n: n.rule == "IOA-U1")
    return rebuild(tree, path, lambda n: replace(n, inst={**n.inst, "instance": 99})), path


def altered_leaf(tree):
    """Close the first leaf on an atom it does not contain complementary."""
    path = find(tree, lambda n: n.rule == "id")
    return rebuild(tree, path, lambda n: replace(n, inst={**n.inst, "atom": "q"})), path


MUTATIONS = {
    "freshness": freshness,
    "dropped-rel-atom": dropped_rel,
    "swapped-rule": swapped_rule,
    "broken-instance": broken_instance,
    "altered-leaf": altered_leaf,
}
