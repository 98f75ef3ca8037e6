"""Hypothesis strategies for formulas and models."""

from hypothesis import strategies as st

from tstit import formula as fm
from tstit import model as mdl

ATOMS = ("p", "q")


def formulas(agents=2, temporal=True, ag=True, sugar=True, xstit=False, atoms=ATOMS, max_leaves=12):
    leaf = st.sampled_from(atoms).flatmap(lambda a: st.sampled_from([fm.Atom(a), fm.NegAtom(a)]))
    agent = st.integers(0, agents - 1)

    def extend(inner):
        opts = [
            st.builds(fm.And, inner, inner),
            st.builds(fm.Or, inner, inner),
            st.builds(fm.Box, inner),
            st.builds(fm.Dia, inner),
            st.builds(fm.Stit, agent, inner),
            st.builds(fm.CoStit, agent, inner),
        ]
        if sugar:
            opts += [st.builds(fm.Not, inner), st.builds(fm.Implies, inner, inner)]
        if ag:
            opts += [st.builds(fm.AgStit, inner), st.builds(fm.AgCoStit, inner)]
        if temporal:
            opts += [st.builds(c, inner) for c in (fm.G, fm.F, fm.H, fm.P)]
        if xstit:
            group = st.frozensets(agent, min_size=1)
            opts += [st.builds(fm.XStit, group, inner), st.builds(fm.XCoStit, group, inner)]
        return st.one_of(*opts)

    return st.recursive(leaf, extend, max_leaves=max_leaves)


def nnf_formulas(**kw):
    return formulas(**kw).map(fm.to_nnf)


@st.composite
def layered_models(draw, agents=2, max_cells=2, max_T=2):
    params = mdl.GenParams(
        agents=agents,
        cells=draw(st.integers(1, max_cells)),
        atoms=ATOMS,
        T=draw(st.integers(1, max_T)),
        max_worlds=32,
    )
    return mdl.generate_model(params, draw(st.integers(0, 10_000)))
