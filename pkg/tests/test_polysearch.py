import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcsp.catalog import hardness_language, make_boolean_gadgets, make_strange_languages, s2, s_ac
from qcsp.core import Language, Operation, Relation, SizeError
from qcsp.gen import random_closed_language, random_relation
from qcsp.polysearch import (
    all_polymorphisms_ab_projective,
    check_named_polymorphisms,
    find_identity_polymorphism,
    find_semilattice,
    find_stable,
    has_wnu,
    parse_identity,
    pgp_egp_verdict,
    satisfies_identity,
)
from qcsp.relalg import ProjectivityPair, is_ab_projective, is_polymorphism

GAMMA, GAMMA_P = make_strange_languages()
NEQ = Relation.from_tuples(2, 3, [(a, b) for a in range(3) for b in range(3) if a != b])
NAE01 = Language(3, {"N": make_boolean_gadgets()["NAE3"]}, with_constants=True)
PAIR = ProjectivityPair((0, 2), (1, 2))


def _naive_stable_exists(lang, a, c):
    others = [b for b in range(3) if b not in (a, c)]
    cells = [(x, b) for b in others for x in range(3)]
    for vals in itertools.product(range(3), repeat=len(cells)):
        t = {(x, a): x for x in range(3)}
        t.update({(x, c): c for x in range(3)})
        t.update(zip(cells, vals))
        op = Operation.from_function(2, 3, lambda x, y: t[(x, y)])
        if is_polymorphism(op, lang):
            return True
    return False


def test_find_stable_properties():
    op = find_stable(GAMMA.add_constants(), 0, 2)
    assert op is not None
    for x in range(3):
        assert op(x, 0) == x and op(x, 2) == 2
    assert is_polymorphism(op, GAMMA.add_constants())
    with pytest.raises(ValueError):
        find_stable(GAMMA, 1, 1)


@settings(max_examples=25)
@given(st.integers(0, 10 ** 9))
def test_find_stable_matches_enumeration(seed):
    rng = random.Random(seed)
    lang = Language(3, {"R": random_relation(rng, 2, 3, 0.5)}, with_constants=True)
    a, c = rng.sample(range(3), 2)
    assert (find_stable(lang, a, c) is not None) == _naive_stable_exists(lang, a, c)


def test_named_polymorphisms_on_the_strange_languages():
    named = check_named_polymorphisms(GAMMA)
    assert named[(0, 2)]["s"] and named[(0, 2)]["g"]
    assert check_named_polymorphisms(GAMMA_P)[(0, 2)]["f"]
    assert len(named) == 6


def test_find_semilattice():
    op = find_semilattice(Language(3, {"R": Relation.from_tuples(2, 3, [(0, 1), (1, 0), (2, 2)])}))
    assert op is not None
    for x, y, z in itertools.product(range(3), repeat=3):
        assert op(x, x) == x and op(x, y) == op(y, x) and op(op(x, y), z) == op(x, op(y, z))
    assert find_semilattice(NAE01) is None


# ------------------------------------------------------------ identities


def test_parse_identity():
    assert parse_identity("siggers4") == ("siggers", 4)
    assert parse_identity("wnu(3)") == ("wnu", 3)
    with pytest.raises(ValueError):
        parse_identity("wnu7")
    with pytest.raises(ValueError):
        parse_identity("maltsev")


def test_siggers_found_for_semilattice_language():
    lang = GAMMA.add_constants()
    op = find_identity_polymorphism(lang, "siggers4")
    assert op is not None and satisfies_identity(op, "siggers4")
    assert is_polymorphism(op, lang)


def test_wnu_found_and_valid():
    op = find_identity_polymorphism(GAMMA.add_constants(), "wnu2")
    assert op is not None and satisfies_identity(op, "wnu2")
    assert not satisfies_identity(s_ac(0, 2), "wnu3")


def test_no_wnu_for_nae_and_neq():
    assert has_wnu(NAE01)[0] is False
    assert has_wnu(Language(3, {"neq": NEQ}, with_constants=True))[0] is False
    ok, ev = has_wnu(GAMMA.add_constants())
    assert ok and ev["test"] == "siggers4"


# ------------------------------------------------------------ projectivity


def test_only_projections_means_projective():
    lang = Language(3, {"neq": NEQ}, with_constants=True)
    res = all_polymorphisms_ab_projective(lang, PAIR)
    assert res.holds


def test_strange_language_is_projective_on_its_pair():
    assert all_polymorphisms_ab_projective(GAMMA.add_constants(), PAIR).holds


def test_counterexample_is_a_non_projective_polymorphism():
    lang = hardness_language(["sigma0"])
    res = all_polymorphisms_ab_projective(lang, PAIR)
    assert not res.holds
    op = res.counterexample
    assert is_polymorphism(op, lang)
    assert is_ab_projective(op, PAIR) is None


def test_projectivity_bound_guard():
    with pytest.raises(SizeError):
        all_polymorphisms_ab_projective(GAMMA, PAIR, arity_bound=4)


def test_pgp_egp_verdicts():
    assert pgp_egp_verdict(hardness_language(["sigma0"])).kind == "PGP"
    assert pgp_egp_verdict(GAMMA.add_constants()).kind == "EGP"
    v = pgp_egp_verdict(hardness_language(["sigma0", "sigma1p"]))
    assert v.kind == "EGP" and v.heuristic and v.pair is not None
    neq = Language(3, {"neq": NEQ}, with_constants=True)
    assert pgp_egp_verdict(neq, arity_bound=1).kind == "inconclusive"


@settings(max_examples=15)
@given(st.integers(0, 10 ** 9))
def test_semilattice_closed_languages_are_pgp(seed):
    lang = random_closed_language(random.Random(seed), [s2()], n_rels=2, max_arity=2)
    # s2 is not projective for any pair of two-element subsets
    assert pgp_egp_verdict(lang, arity_bound=2).kind == "PGP"
