import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from naive import qcsp_truth
from qcsp.core import (
    EQ,
    EXISTS,
    FALSE,
    FORALL,
    Atom,
    Const,
    Language,
    MalformedFormula,
    MalformedRelation,
    PPFormula,
    QCSPInstance,
    Relation,
    canonicalize,
    conjoin,
    expand_constants,
    false_instance,
    fresh,
    inline_constants,
    propagate_equalities,
)
from qcsp.catalog import make_strange_languages

GAMMA, _ = make_strange_languages()

small_tuples = st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), max_size=12)


def test_canonicalize_dedups_and_sorts():
    rel = Relation.from_tuples(1, 3, [(1,), (0,), (1,)])
    assert rel.tuples == [(0,), (1,)]
    assert Relation.from_tuples(2, 3, [(2, 0), (0, 2)]).tuples == [(0, 2), (2, 0)]


def test_canonicalize_idempotent_on_canonical():
    rel = Relation.from_tuples(2, 3, [(0, 1), (2, 2)])
    assert canonicalize(rel) == rel
    assert canonicalize(canonicalize(rel)) == rel


@given(small_tuples, st.randoms())
def test_canonicalize_order_insensitive(tuples, rnd):
    shuffled = list(tuples)
    rnd.shuffle(shuffled)
    assert Relation.from_tuples(2, 3, shuffled) == Relation.from_tuples(2, 3, tuples)
    assert canonicalize(Relation.from_tuples(2, 3, tuples)) == Relation.from_tuples(2, 3, tuples)


def test_malformed_relations():
    with pytest.raises(MalformedRelation):
        Relation.from_tuples(2, 3, [(0, 3)])
    with pytest.raises(MalformedRelation):
        Relation.from_tuples(2, 3, [(0,)])


def test_relation_set_algebra():
    a = Relation.from_tuples(1, 3, [(0,), (1,)])
    b = Relation.from_tuples(1, 3, [(1,), (2,)])
    assert a.union(b).tuples == [(0,), (1,), (2,)]
    assert a.intersection(b).tuples == [(1,)]
    assert a.difference(b).tuples == [(0,)]
    assert a.complement().tuples == [(2,)]
    assert (2,) in b and (0,) not in b and (5,) not in b


def test_language_lookup_builtins():
    lang = Language(3, {}, with_constants=True)
    assert lang.lookup("=").tuples == [(0, 0), (1, 1), (2, 2)]
    assert lang.lookup("{1}").tuples == [(1,)]
    assert len(lang.lookup(FALSE)) == 0
    assert set(lang.all_relations()) == {"{0}", "{1}", "{2}"}
    with pytest.raises(KeyError):
        lang.lookup("nope")


def test_language_rejects_mixed_domains():
    with pytest.raises(MalformedRelation):
        Language(3, {"R": Relation.full(1, 2)})


def test_ppformula_invariants():
    with pytest.raises(MalformedFormula):
        PPFormula(["x"], ["x"], [])
    with pytest.raises(MalformedFormula):
        PPFormula(["x"], [], [Atom("R", ["y"])])


def test_conjoin_renames_bound_variables_apart():
    phi = PPFormula(["x"], ["y"], [Atom("R", ["x", "y"])])
    both = conjoin([phi, phi])
    assert len(both.bound_vars) == 2 and len(set(both.bound_vars)) == 2


def test_fresh_uses_separator():
    assert fresh("v", {"a"}) == "v"
    assert fresh("v", {"v", "v#1"}) == "v#2"


def test_instance_invariants():
    with pytest.raises(MalformedFormula):
        QCSPInstance([(EXISTS, "x"), (FORALL, "x")], [])
    with pytest.raises(MalformedFormula):
        QCSPInstance([(EXISTS, "x")], [Atom("R", ["y"])])
    inst = QCSPInstance([(FORALL, "x"), (FORALL, "u"), (EXISTS, "y")], [])
    assert inst.blocks() == [(FORALL, ["x", "u"]), (EXISTS, ["y"])]
    assert inst.is_pi2()


# ------------------------------------------------------------ equalities


def test_propagate_substitutes_constant():
    inst = QCSPInstance([(EXISTS, "y")], [Atom(EQ, ["y", Const(0)]), Atom("{0}", ["y"])])
    out = propagate_equalities(inst)
    assert out.prefix == ()
    assert out.atoms == (Atom("{0}", [Const(0)]),)


def test_propagate_without_equalities_is_identity():
    inst = QCSPInstance([(FORALL, "x"), (EXISTS, "y")], [Atom("delta", ["x", "y"])])
    assert propagate_equalities(inst) == inst


def test_propagate_drops_reflexive_equality():
    inst = QCSPInstance([(EXISTS, "y")], [Atom(EQ, ["y", "y"])])
    assert propagate_equalities(inst).atoms == ()


def test_propagate_universal_constant_becomes_singleton():
    inst = QCSPInstance([(FORALL, "x")], [Atom(EQ, ["x", Const(2)])])
    assert propagate_equalities(inst).atoms == (Atom("{2}", ["x"]),)


def test_propagate_distinct_constants_is_false():
    inst = QCSPInstance([], [Atom(EQ, [Const(0), Const(1)])])
    assert propagate_equalities(inst) == false_instance()
    assert not qcsp_truth(false_instance(), GAMMA)


def _random_eq_instance(rng: random.Random) -> QCSPInstance:
    n = rng.randint(1, 4)
    prefix = [(rng.choice((FORALL, EXISTS)), f"v{i}") for i in range(n)]
    names = [v for _, v in prefix]
    terms = names + [Const(0), Const(1), Const(2)]
    atoms = []
    for _ in range(rng.randint(1, 4)):
        if rng.random() < 0.5:
            atoms.append(Atom(EQ, [rng.choice(terms), rng.choice(terms)]))
        else:
            rel = rng.choice(["R_and2", "delta", "{1}"])
            arity = GAMMA.lookup(rel).arity
            atoms.append(Atom(rel, [rng.choice(terms) for _ in range(arity)]))
    return QCSPInstance(prefix, atoms)


@given(st.integers(0, 10 ** 9))
def test_propagate_preserves_truth(seed):
    inst = _random_eq_instance(random.Random(seed))
    assert qcsp_truth(propagate_equalities(inst), GAMMA) == qcsp_truth(inst, GAMMA)


@given(st.integers(0, 10 ** 9))
def test_constant_encodings_interconvert(seed):
    inst = _random_eq_instance(random.Random(seed))
    expanded = expand_constants(inst)
    assert not any(isinstance(t, Const) for a in expanded.atoms for t in a.args)
    truth = qcsp_truth(inst, GAMMA)
    assert qcsp_truth(expanded, GAMMA) == truth
    assert qcsp_truth(inline_constants(expanded), GAMMA) == truth
