import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from naive import qcsp_truth
from qcsp.catalog import xi_language
from qcsp.core import EXISTS, FORALL, Atom, Const, Language, MalformedFormula, QCSPInstance, csp_instance
from qcsp.gen import random_atoms, random_qcsp, random_relation
from qcsp.monsters import (
    NAE,
    SIGMA1,
    boolean_nae_language,
    build_conj1,
    build_conj2,
    build_disj_csp,
    build_disj_qcsp,
    combine_conj1,
    combine_conj2,
    combine_disj_csp,
    combine_disj_qcsp,
    decompose_disj_qcsp,
    demo_dp,
    demo_theta2,
    split_conj1,
)
from qcsp.solver import oracle_qcsp


def orc(inst, lang):
    return oracle_qcsp(inst, lang, max_vars=40, tail_search=True).value


def rlang(rng, d, constants=None):
    rels = {f"R{k}": random_relation(rng, rng.randint(1, 2), d, 0.6) for k in range(2)}
    return Language(d, rels, with_constants=rng.random() < 0.5 if constants is None else constants)


def rcsp(rng, lang):
    xs = [f"y{i}" for i in range(rng.randint(1, 3))]
    return csp_instance(random_atoms(lang, rng, xs, rng.randint(1, 3)))


def rq(rng, lang):
    return random_qcsp(lang, rng, max_blocks=3, max_vars=3, max_atoms=3)


def rnae(rng, k):
    return csp_instance([Atom(NAE, [rng.choice("abc") for _ in range(3)]) for _ in range(k)])


# ----------------------------------------------------------------- sizes


def test_domain_sizes():
    g3 = xi_language().add_constants()
    g2 = boolean_nae_language()
    assert build_conj1(g3, 0).domain == 4
    assert build_conj2(g3, g3).domain == 9 + 3 + 3
    assert build_disj_qcsp(g3, g2).domain == 6 + 3 + 2 + 2
    assert build_disj_csp(g3, g2).domain == 2 * 3 + 2 + 2
    assert demo_dp().domain == 4
    assert demo_theta2()[0].domain == 10


def test_conj1_nae_relation():
    m = build_conj1(xi_language().add_constants(), 0)
    nae = m[NAE]
    assert len(nae) == 6
    assert {v for t in nae.tuples for v in t} == {0, 3}
    # every other relation is the preimage under the copy-to-original map
    phi = [0, 1, 2, 0]
    for name, rel in m.gamma1.relations.items():
        lifted = m[name + "'"]
        for t in itertools.product(range(4), repeat=rel.arity):
            assert (t in lifted) == (tuple(phi[v] for v in t) in rel)


def test_conj1_needs_the_singleton():
    with pytest.raises(ValueError):
        build_conj1(Language(3, dict(xi_language().relations)), 0)


def test_sigma1_membership_disj_qcsp():
    m = build_disj_qcsp(xi_language().add_constants(), boolean_nae_language())
    s1 = set(m[SIGMA1].tuples)
    for a, b in itertools.product(range(3), range(2)):
        assert (m.code(("left", a)), m.code(("pair", a, b))) in s1
        assert (m.code(("left", (a + 1) % 3)), m.code(("pair", a, b))) not in s1
    m2 = m.marker(2)
    assert all((m2, v) in s1 for v in range(m.domain))


def test_domain_map_is_a_bijection():
    m = build_disj_csp(xi_language().add_constants(), boolean_nae_language())
    assert len(set(m.domain_map)) == m.domain
    assert [m.code(t) for t in m.domain_map] == list(range(m.domain))


# ------------------------------------------------------- decision suites


@settings(max_examples=15)
@given(st.integers(0, 10 ** 9))
def test_conj1_and_split(seed):
    rng = random.Random(seed)
    g = rlang(rng, 2).add_constants()
    m = build_conj1(g, 0)
    inst, nae = rq(rng, g), rnae(rng, rng.randint(0, 2))
    expected = orc(inst, g) and orc(nae, m)
    combined = combine_conj1(m, inst, nae)
    assert orc(combined, m) == expected
    left, right = split_conj1(m, combined)
    assert (orc(left, g) and orc(right, m)) == expected


@settings(max_examples=15)
@given(st.integers(0, 10 ** 9))
def test_conj2(seed):
    rng = random.Random(seed)
    g1, g2 = rlang(rng, 2), rlang(rng, 2)
    i1, i2 = rq(rng, g1), rq(rng, g2)
    m = build_conj2(g1, g2)
    assert orc(combine_conj2(m, i1, i2), m) == (orc(i1, g1) and orc(i2, g2))


@settings(max_examples=15)
@given(st.integers(0, 10 ** 9))
def test_disj_csp(seed):
    rng = random.Random(seed)
    g1, g2 = rlang(rng, 2), rlang(rng, 2)
    pairs = [(rq(rng, g1), rcsp(rng, g2)) for _ in range(rng.randint(0, 2))]
    m = build_disj_csp(g1, g2)
    expected = all(orc(i, g1) or orc(j, g2) for i, j in pairs)
    assert orc(combine_disj_csp(m, pairs), m) == expected


@settings(max_examples=15)
@given(st.integers(0, 10 ** 9))
def test_disj_qcsp_and_decompose(seed):
    rng = random.Random(seed)
    g1, g2 = rlang(rng, 2), rlang(rng, 2)
    pairs = [(rq(rng, g1), rq(rng, g2)) for _ in range(rng.randint(0, 2))]
    m = build_disj_qcsp(g1, g2)
    expected = all(orc(i, g1) or orc(j, g2) for i, j in pairs)
    combined = combine_disj_qcsp(m, pairs)
    assert orc(combined, m) == expected
    parts = decompose_disj_qcsp(m, combined)
    assert all(orc(k1, m.gamma1) or orc(k2, m.gamma2) for k1, k2 in parts) == expected


@settings(max_examples=40)
@given(st.integers(0, 10 ** 9))
def test_decompose_arbitrary_instances(seed):
    rng = random.Random(seed)
    d1, d2 = rng.choice([(1, 2), (2, 2), (2, 1)])
    g1, g2 = rlang(rng, d1, False), rlang(rng, d2, False)
    m = build_disj_qcsp(g1, g2)
    prefix = [(rng.choice([FORALL, EXISTS, EXISTS]), f"v{i}") for i in range(rng.randint(2, 4))]
    vs = [v for _, v in prefix]
    names = sorted(m.relations) + ["sigma1", "sigma2", "="]
    atoms = []
    for _ in range(rng.randint(1, 5)):
        r = rng.choice(names)
        arity = 2 if r == "=" else m[r].arity
        atoms.append(Atom(r, [rng.choice(vs) for _ in range(arity)]))
    inst = QCSPInstance(prefix, atoms)
    parts = decompose_disj_qcsp(m, inst)
    assert qcsp_truth(inst, m) == all(orc(a, m.gamma1) or orc(b, m.gamma2) for a, b in parts)


# ------------------------------------------------------------- edge cases


def test_empty_conjunctions_are_true():
    g = rlang(random.Random(1), 2)
    for m, combine in ((build_disj_csp(g, g), combine_disj_csp), (build_disj_qcsp(g, g), combine_disj_qcsp)):
        inst = combine(m, [])
        assert inst.atoms == () and orc(inst, m)


def test_decompose_errors():
    g = rlang(random.Random(2), 2, False)
    m = build_disj_qcsp(g, g)
    with pytest.raises(ValueError):
        decompose_disj_qcsp(m, QCSPInstance([(EXISTS, "x")], [Atom("nope", ["x"])]))
    with pytest.raises(ValueError):
        decompose_disj_qcsp(m, QCSPInstance([(EXISTS, "x")], [Atom(SIGMA1, ["x", Const(0)])]))
    with pytest.raises(ValueError):
        decompose_disj_qcsp(build_disj_csp(g, g), QCSPInstance([], []))


def test_combine_input_contracts():
    g = rlang(random.Random(3), 2).add_constants()
    m = build_conj1(g, 0)
    with pytest.raises(MalformedFormula):
        combine_conj1(m, QCSPInstance([], []), QCSPInstance([(FORALL, "a")], []))
    with pytest.raises(MalformedFormula):
        combine_conj1(m, QCSPInstance([], []), csp_instance([Atom("R0", ["a"])]))
    d = build_disj_csp(g, g)
    with pytest.raises(MalformedFormula):
        combine_disj_csp(d, [(QCSPInstance([], []), QCSPInstance([(FORALL, "a")], [Atom("R0", ["a"] * g["R0"].arity)]))])


def test_theta2_builder_checks_length():
    m, build = demo_theta2(2)
    with pytest.raises(ValueError):
        build([])
