import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from naive import pp_relation
from qcsp.catalog import f_ac, g_ac, make_strange_languages, make_tau, s2, s_ac
from qcsp.core import Atom, Const, Language, MalformedFormula, Operation, PPFormula, Relation
from qcsp.gen import random_relation
from qcsp.relalg import (
    ProjectivityPair,
    all_pairs,
    close_tuples,
    identify_vars,
    is_ab_projective,
    is_polymorphism,
    pp_eval,
    pp_holds,
    pp_member,
    preserves,
    project,
)

GAMMA, GAMMA_P = make_strange_languages()
R_AND2 = GAMMA["R_and2"]
PAIR = ProjectivityPair((0, 2), (1, 2))


def test_pp_eval_equality_projection():
    phi = PPFormula(["x"], ["y"], [Atom("=", ["x", "y"])])
    assert pp_eval(phi, GAMMA) == Relation.full(1, 3)


def test_pp_eval_identified_and():
    phi = PPFormula(["x", "y"], [], [Atom("R_and2", ["x", "x", "y"])])
    expected = {(x, y) for x in range(3) for y in range(3) if (x, x, y) in set(R_AND2.tuples)}
    assert expected == {(0, 0), (1, 1), (2, 0), (2, 1), (2, 2)}
    assert set(pp_eval(phi, GAMMA).tuples) == expected


def test_pp_eval_contradictory_singletons():
    phi = PPFormula(["x"], [], [Atom("{0}", ["x"]), Atom("{1}", ["x"])])
    assert len(pp_eval(phi, GAMMA)) == 0
    assert not pp_holds(phi.atoms, GAMMA)


def test_pp_eval_errors():
    with pytest.raises(KeyError):
        pp_eval(PPFormula(["x"], [], [Atom("nope", ["x"])]), GAMMA)
    with pytest.raises(MalformedFormula):
        pp_eval(PPFormula(["x"], [], [Atom("delta", ["x"])]), GAMMA)


def _random_formula(rng: random.Random, domain: int):
    rels = {f"R{i}": random_relation(rng, rng.randint(1, 3), domain, rng.uniform(0.2, 0.8)) for i in range(3)}
    lang = Language(domain, rels, with_constants=True)
    n_free = rng.randint(1, 3)
    n_bound = rng.randint(0, 6 - n_free)
    free = [f"x{i}" for i in range(n_free)]
    bound = [f"y{i}" for i in range(n_bound)]
    terms = free + bound
    atoms = []
    for _ in range(rng.randint(1, 5)):
        name = rng.choice(sorted(rels) + ["="])
        arity = 2 if name == "=" else rels[name].arity
        args = [Const(rng.randrange(domain)) if rng.random() < 0.1 else rng.choice(terms) for _ in range(arity)]
        atoms.append(Atom(name, args))
    return PPFormula(free, bound, atoms), lang


@given(st.integers(0, 10 ** 9), st.integers(2, 4))
def test_pp_eval_matches_enumeration(seed, domain):
    phi, lang = _random_formula(random.Random(seed), domain)
    got = set(pp_eval(phi, lang).tuples)
    assert got == pp_relation(phi, lang)
    for t in itertools.islice(itertools.product(range(domain), repeat=phi.arity), 20):
        assert pp_member(phi, lang, t) == (t in got)


# ---------------------------------------------------------------- preservation


def test_preservation_facts():
    assert preserves(s_ac(0, 2), R_AND2)
    assert preserves(f_ac(0, 2), GAMMA_P["delta_p"])
    first = Operation.projection(2, 3, 0)
    assert preserves(first, R_AND2) and preserves(first, GAMMA["delta"])


def test_preserves_domain_mismatch():
    with pytest.raises(ValueError):
        preserves(s2(), Relation.full(1, 2))


def _naive_preserves(op, rel):
    tuples = rel.tuples
    member = set(tuples)
    for rows in itertools.product(tuples, repeat=op.arity):
        image = tuple(op(*col) for col in zip(*rows))
        if image not in member:
            return False
    return True


def test_s2_on_hardness_pair_matches_brute_force():
    from qcsp.catalog import hardness_language

    lang = hardness_language(["sigma0", "sigma1p"])
    expected = all(_naive_preserves(s2(), r) for r in lang.all_relations().values())
    assert is_polymorphism(s2(), lang) == expected


@given(st.integers(0, 10 ** 9))
def test_preserves_matches_brute_force(seed):
    rng = random.Random(seed)
    rel = random_relation(rng, rng.randint(1, 3), 3, rng.uniform(0.1, 0.7))
    op = Operation(2, 3, tuple(rng.randrange(3) for _ in range(9)))
    assert preserves(op, rel) == _naive_preserves(op, rel)


def test_polymorphism_trivia():
    identity = Operation.projection(1, 3, 0)
    assert is_polymorphism(identity, GAMMA)
    const0 = Operation(1, 3, (0, 0, 0))
    assert not is_polymorphism(const0, Language(3, {}, with_constants=True))


# ---------------------------------------------------------------- projectivity


def test_projectivity_pair_validation():
    with pytest.raises(ValueError):
        ProjectivityPair((0,), (1,))
    with pytest.raises(ValueError):
        ProjectivityPair((0, 1, 2), (1,))
    assert len(all_pairs(3)) == 6


def test_s2_projective_first_coordinate():
    assert is_ab_projective(s2(), PAIR) == 1
    assert is_ab_projective(Operation.projection(2, 3, 0), PAIR) == 1


def test_majority_extended_by_two_not_projective():
    def maj(x, y, z):
        if x == y or x == z:
            return x
        if y == z:
            return y
        return 2

    op = Operation.from_function(3, 3, maj)
    assert any(is_ab_projective(op, p) is None for p in all_pairs(3))


@given(st.integers(0, 10 ** 9))
def test_projective_coordinate_holds_on_samples(seed):
    rng = random.Random(seed)
    op = Operation(2, 3, tuple(rng.randrange(3) for _ in range(9)))
    pair = rng.choice(all_pairs(3))
    i = is_ab_projective(op, pair)
    if i is None:
        return
    for _ in range(200):
        args = [rng.randrange(3) for _ in range(2)]
        if args[i - 1] in pair.alpha:
            assert op(*args) in pair.alpha
        if args[i - 1] in pair.beta:
            assert op(*args) in pair.beta


# ---------------------------------------------------------------- closure


def test_close_under_s2():
    rel = close_tuples([(0, 1), (1, 0)], [s2()], arity=2, domain=3)
    assert rel.tuples == [(0, 1), (1, 0), (2, 2)]
    assert close_tuples([(0,)], [s2()], arity=1, domain=3).tuples == [(0,)]
    assert close_tuples([(0, 1)], [], arity=2, domain=3).tuples == [(0, 1)]
    assert len(close_tuples([], [s2()], arity=2, domain=3)) == 0


@given(st.integers(0, 10 ** 9))
def test_close_tuples_is_closed(seed):
    rng = random.Random(seed)
    arity = rng.randint(1, 3)
    seed_tuples = [tuple(rng.randrange(3) for _ in range(arity)) for _ in range(rng.randint(1, 4))]
    ops = rng.sample([s2(), g_ac(0, 2), s_ac(0, 2), f_ac(0, 2)], rng.randint(1, 2))
    rel = close_tuples(seed_tuples, ops, arity=arity, domain=3)
    assert set(seed_tuples) <= set(rel.tuples)
    if len(rel) <= 200:
        assert all(_naive_preserves(op, rel) for op in ops)


# ---------------------------------------------------------------- identify / project


def test_identify_tau1():
    tau1 = make_tau(1)
    got = identify_vars(tau1, [0, 0, 1])
    expected = {(x, y) for x in range(3) for y in range(3) if (x, x, y) in tau1}
    assert set(got.tuples) == expected
    assert identify_vars(tau1, [0, 1, 2]) == tau1
    assert len(identify_vars(Relation.empty(3, 3), [0, 0, 1])) == 0
    with pytest.raises(IndexError):
        identify_vars(tau1, [0, 5, 1], out_arity=2)


def test_project():
    assert project(R_AND2, [2]) == Relation.full(1, 3)
    assert project(R_AND2, [0, 1, 2]) == R_AND2
    assert len(project(Relation.empty(2, 3), [0])) == 0
    with pytest.raises(ValueError):
        project(R_AND2, [])
