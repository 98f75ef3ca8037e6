import itertools
import time

import pytest

from tstit import formula as fm
from tstit import model as mdl
from tstit.canonical import (
    CanonicalError,
    ConsistencyOracle,
    FiniteMCS,
    OracleDisagreement,
    build_canonical,
    build_pre_canonical,
    closure,
    enumerate_mcs,
    is_boolean_coherent,
    truth_lemma_check,
)

P = fm.Atom("p")


def mcs_of(text, agents=1):
    c = closure(fm.parse(text))
    return c, enumerate_mcs(c, ConsistencyOracle(agents=agents))


def rendered(mcs):
    return sorted(sorted(fm.render(f) for f in m.members) for m in mcs)


class TestEnumeration:
    def test_atom(self):
        _, mcs = mcs_of("p")
        assert rendered(mcs) == [["p"], ["~p"]]

    def test_box_excludes_box_without_instance(self):
        _, mcs = mcs_of("[]p")
        assert rendered(mcs) == [["<>~p", "p"], ["<>~p", "~p"], ["[]p", "p"]]

    def test_conjunction(self):
        c, mcs = mcs_of("p & q")
        assert len(mcs) == 4
        assert all(is_boolean_coherent(c, m.members) for m in mcs)
        assert sum(fm.parse("p & q") in m for m in mcs) == 1

    def test_empty_closure_rejected(self):
        with pytest.raises(CanonicalError):
            enumerate_mcs(frozenset())

    @pytest.mark.parametrize("text", ["[]p -> [0]p", "<>p", "<>[0]p & <>[1]q", "[0]p | [1]~p"])
    def test_count_matches_exhaustive_subsets(self, text):
        c = closure(fm.parse(text))
        oracle = ConsistencyOracle(agents=2)
        fast = enumerate_mcs(c, oracle)
        # independent: every subset with one member per complementary pair
        pairs = sorted({frozenset((f, fm.complement(f))) for f in c}, key=lambda s: sorted(map(fm.render, s)))
        slow = []
        for pick in itertools.product(*(sorted(pr, key=fm.render) for pr in pairs)):
            s = frozenset(pick)
            ok = all(
                (not isinstance(f, fm.And) or f not in s or (f.left in s and f.right in s))
                and (not isinstance(f, fm.Or) or f not in s or (f.left in s or f.right in s))
                for f in c
            )
            if ok and oracle.consistent(s) is not False:
                slow.append(s)
        assert sorted(map(sorted_render, (m.members for m in fast))) == sorted(map(sorted_render, slow))

    def test_cross_check_runs_both_oracles(self):
        c = closure(fm.parse("<>[0]p -> [1]p"))
        oracle = ConsistencyOracle(agents=2, cross_check=True)
        assert enumerate_mcs(c, oracle)
        assert oracle.calls["undecided"] == 0


def sorted_render(s):
    return tuple(sorted(fm.render(f) for f in s))


def test_disagreement_is_raised():
    class Lying(ConsistencyOracle):
        def by_brute_force(self, formulas):
            return True

    with pytest.raises(OracleDisagreement):
        Lying(agents=1, cross_check=True).consistent([P, fm.NegAtom("p")])


class TestPreCanonical:
    def test_no_modal_formulas_gives_total_box(self):
        _, mcs = mcs_of("p")
        pre = build_pre_canonical(mcs, 1)
        assert pre.R_box == {(a, b) for a in range(2) for b in range(2)}

    @pytest.mark.parametrize("mode", ["s5", "literal"])
    def test_box_condition(self, mode):
        _, mcs = mcs_of("[]p")
        pre = build_pre_canonical(mcs, 1, mode)
        box = fm.Box(P)
        for a, w in enumerate(mcs):
            for b, u in enumerate(mcs):
                literal = not (box in w and P not in u)
                if mode == "literal":
                    assert ((a, b) in pre.R_box) == literal
                else:
                    assert ((a, b) in pre.R_box) == (literal and ((box in w) == (box in u)))

    def test_future_is_intersection(self):
        _, mcs = mcs_of("<>[0]p & <>[1]q", agents=2)
        pre = build_pre_canonical(mcs, 2)
        assert all(pre.R_fut <= r for r in pre.R_i)
        assert pre.R_fut == pre.R_i[0] & pre.R_i[1]

    def test_existence_lemma_restated(self):
        # literal relation: box access iff u's formulas are possible at w
        c, mcs = mcs_of("<>p & [0]q", agents=1)
        pre = build_pre_canonical(mcs, 1, "literal")
        for a, w in enumerate(mcs):
            for b, u in enumerate(mcs):
                possible = all(fm.Dia(psi) in w for psi in u.members if fm.Dia(psi) in c)
                assert ((a, b) in pre.R_box) == possible

    def test_unknown_mode(self):
        with pytest.raises(CanonicalError):
            build_pre_canonical([FiniteMCS(frozenset({P}))], 1, "kripke")


class TestCanonicalModel:
    def test_frame_for_box_to_stit(self):
        _, mcs = mcs_of("[]p -> [0]p")
        can = build_canonical(build_pre_canonical(mcs, 1), T=2)
        assert not can.warnings
        assert mdl.check_frame(can.model.to_explicit()).all_pass
        assert mdl.layer_locality(can.model) == []
        assert mdl.ag_level_stability(can.model, 3) == []

    def test_literal_mode_warns_on_degenerate_closure(self):
        _, mcs = mcs_of("<>p")
        can = build_canonical(build_pre_canonical(mcs, 1, "literal"), T=1)
        assert any("not an equivalence" in w for w in can.warnings)

    def test_layers_must_be_positive(self):
        _, mcs = mcs_of("p")
        with pytest.raises(CanonicalError):
            build_canonical(build_pre_canonical(mcs, 1), T=0)


@pytest.mark.parametrize(
    "text, agents, T",
    [
        ("p", 1, 1),
        ("<>p", 1, 2),
        ("[]p -> [0]p", 2, 2),
        ("(<>[0]p & <>[1]q) -> <>([0]p & [1]q)", 2, 2),
    ],
)
def test_truth_lemma(text, agents, T):
    t0 = time.perf_counter()
    rep = truth_lemma_check(fm.parse(text), agents, T)
    assert rep.ok, "\n".join(rep.lines())
    assert rep.possible == 0
    assert rep.frame.all_pass
    assert time.perf_counter() - t0 < 60


def test_truth_lemma_counts():
    assert truth_lemma_check(fm.parse("p"), 1, 1).mcs_count == 2
    assert truth_lemma_check(fm.parse("<>p"), 1, 2).mcs_count == 3


def test_truth_lemma_report_json():
    rep = truth_lemma_check(fm.parse("<>p"), 1, 2)
    data = rep.to_json()
    assert data["ok"] is True and data["mcs"] == rep.mcs_count
    assert rep.lines()[-1].endswith("ok")


def test_truth_lemma_rejects_temporal():
    with pytest.raises(CanonicalError):
        truth_lemma_check(fm.parse("G p"), 1, 2)
