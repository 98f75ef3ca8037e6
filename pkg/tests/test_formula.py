import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tstit import formula as fm
from tstit import model as mdl

from strategies import formulas, layered_models, nnf_formulas

p, q = fm.Atom("p"), fm.Atom("q")


class TestParse:
    def test_atom(self):
        assert fm.parse("p") == p

    def test_box_implies_stit(self):
        assert fm.parse("[]p -> [0]p") == fm.Implies(fm.Box(p), fm.Stit(0, p))

    def test_ioa_instance(self):
        got = fm.parse("(<>[0]p & <>[1]q) -> <>([0]p & [1]q)")
        want = fm.Implies(
            fm.And(fm.Dia(fm.Stit(0, p)), fm.Dia(fm.Stit(1, q))),
            fm.Dia(fm.And(fm.Stit(0, p), fm.Stit(1, q))),
        )
        assert got == want

    def test_precedence(self):
        assert fm.parse("p | q & p -> q") == fm.Implies(fm.Or(p, fm.And(q, p)), q)
        assert fm.parse("p -> q -> p") == fm.Implies(p, fm.Implies(q, p))
        assert fm.parse("p | q | p") == fm.Or(fm.Or(p, q), p)

    def test_temporal_and_group_operators(self):
        assert fm.parse("G F H P p") == fm.G(fm.F(fm.H(fm.P(p))))
        assert fm.parse("[x:{0,2}]p", agents=3) == fm.XStit(frozenset({0, 2}), p)
        assert fm.parse("<Ag>~q") == fm.AgCoStit(fm.NegAtom("q"))

    def test_negated_atom_forms(self):
        assert fm.parse("~p") == fm.NegAtom("p")
        assert fm.parse("~(p)") == fm.Not(p)

    @pytest.mark.parametrize("text", ["", "p &", "(p", "[0p", "p q", "[x:{}]p", "<>", "P"])
    def test_syntax_errors_carry_position(self, text):
        with pytest.raises(fm.ParseError) as err:
            fm.parse(text)
        assert err.value.position >= 0

    def test_unknown_agent(self):
        with pytest.raises(fm.UnknownAgentError):
            fm.parse("[2]p", agents=2)

    @given(formulas(xstit=True, agents=3, max_leaves=25))
    def test_round_trip(self, phi):
        assert fm.parse(fm.render(phi)) == phi

    def test_round_trip_thousand_random(self):
        rng = random.Random(11)
        for _ in range(1000):
            phi = fm.random_formula(rng, rng.randint(1, 25), agents=3, sugar=True, xstit=True)
            assert fm.parse(fm.render(phi), agents=3) == phi


class TestNNF:
    def test_examples(self):
        assert fm.to_nnf(fm.Not(fm.Box(p))) == fm.Dia(fm.NegAtom("p"))
        assert fm.to_nnf(fm.Not(fm.Implies(p, q))) == fm.And(p, fm.NegAtom("q"))
        a = frozenset({0})
        assert fm.to_nnf(fm.Not(fm.XStit(a, p))) == fm.XCoStit(a, fm.NegAtom("p"))

    def test_complement_examples(self):
        assert fm.complement(p) == fm.NegAtom("p")
        assert fm.complement(fm.G(p)) == fm.F(fm.NegAtom("p"))
        assert fm.complement(fm.And(p, fm.Box(q))) == fm.Or(fm.NegAtom("p"), fm.Dia(fm.NegAtom("q")))

    def test_complement_requires_nnf(self):
        with pytest.raises(fm.FormulaError):
            fm.complement(fm.Not(p))

    @given(formulas())
    def test_nnf_shape(self, phi):
        n = fm.to_nnf(phi)
        assert fm.is_nnf(n)
        assert fm.to_nnf(n) == n

    @given(nnf_formulas(xstit=True))
    def test_complement_involution(self, phi):
        assert fm.complement(fm.complement(phi)) == phi

    @given(formulas(), layered_models(), st.data())
    def test_nnf_preserves_truth(self, phi, m, data):
        w = data.draw(st.sampled_from(m.worlds()))
        assert mdl.satisfies(m, w, phi) == mdl.satisfies(m, w, fm.to_nnf(phi))

    @given(nnf_formulas(), layered_models(), st.data())
    def test_complement_negates(self, phi, m, data):
        w = data.draw(st.sampled_from(m.worlds()))
        assert mdl.satisfies(m, w, fm.complement(phi)) != mdl.satisfies(m, w, phi)


class TestClosure:
    def test_atom(self):
        assert fm.closure_of([p]) == {p, fm.NegAtom("p")}

    def test_diamond(self):
        assert fm.closure_of([fm.Dia(p)]) == {fm.Dia(p), fm.Box(fm.NegAtom("p")), p, fm.NegAtom("p")}

    def test_box_implies_stit_has_eight_members(self):
        # nnf: <>~p | [0]p ; members: the disjunction, its two disjuncts,
        # ~p and p, and the three complements []p, <0>~p, []p & <0>~p
        c = fm.closure_of([fm.to_nnf(fm.parse("[]p -> [0]p"))])
        assert len(c) == 8

    def test_requires_nnf(self):
        with pytest.raises(fm.FormulaError):
            fm.closure_of([fm.Not(p)])

    @given(st.lists(nnf_formulas(), min_size=1, max_size=3))
    def test_idempotent_and_closed(self, phis):
        c = fm.closure_of(phis)
        assert fm.closure_of(c) == c
        for phi in c:
            assert fm.complement(phi) in c
            assert all(s in c for s in fm.subformulas(phi))

    @given(st.lists(nnf_formulas(), min_size=2, max_size=3))
    def test_monotone(self, phis):
        assert fm.closure_of(phis[:1]) <= fm.closure_of(phis)


class TestMeasures:
    def test_size_and_depths(self):
        phi = fm.parse("[](p & H P q)")
        assert fm.size(phi) == 6
        assert fm.modal_depth(phi) == 3
        assert fm.past_depth(phi) == 2
        assert fm.atoms(phi) == {"p", "q"}

    def test_fragments(self):
        assert fm.is_ldm(fm.parse("[]p -> <1>q"))
        assert not fm.is_ldm(fm.parse("[Ag]p"))
        assert not fm.is_temporal_free(fm.parse("G p"))
        assert fm.uses_xstit(fm.parse("[x:{0}]p"))
