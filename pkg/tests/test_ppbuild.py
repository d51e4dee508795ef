import itertools

import pytest

from naive import pp_relation
from qcsp.catalog import make_sigma_n, make_strange_languages, make_tau, xi_language, zeta_language
from qcsp.core import MalformedFormula, Relation, SizeError
from qcsp.ppbuild import (
    boolean_slice,
    build_and_chain,
    build_delta1,
    build_delta2,
    build_delta3,
    build_omega,
    build_rho,
    build_sigma_via_omega,
    build_tau_recursive,
    build_xi,
    build_zeta,
    default_language_for,
    sigma_conjunction,
    tau_language,
    verify_ppdef,
)
from qcsp.relalg import ProjectivityPair, pp_eval, pp_member

GAMMA, GAMMA_P = make_strange_languages()
BOOL = (0, 1)


def _full_minus(arity, missing):
    return {t for t in itertools.product(range(3), repeat=arity) if t != missing}


def _slice(k, clause_ok):
    return {t for t in itertools.product(BOOL, repeat=3 * k)
            if any(clause_ok(t[3 * i:3 * i + 3]) for i in range(k))}


# ------------------------------------------------------------------ tau


@pytest.mark.parametrize("k", [3, 4])
def test_tau_recursive_exact(k):
    assert verify_ppdef(build_tau_recursive(k), make_tau(k), tau_language())


def test_tau_recursive_random_membership():
    import random

    rng = random.Random(7)
    k = 6
    phi = build_tau_recursive(k)
    lang = tau_language()
    for _ in range(300):
        t = tuple(rng.randrange(3) for _ in range(3 * k))
        if rng.random() < 0.5:
            # bias toward the interesting region: every block in the excluded set
            t = sum((rng.choice([(0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)])
                     for _ in range(k)), ())
        blocks_ok = any(set(t[3 * i:3 * i + 3]) <= {0, 1} and len(set(t[3 * i:3 * i + 3])) == 1
                        or 2 in t[3 * i:3 * i + 3] for i in range(k))
        assert pp_member(phi, lang, t) == blocks_ok


def test_tau_recursive_atom_count_linear():
    for k in (5, 9, 17, 33):
        assert len(build_tau_recursive(k).atoms) <= 2 * k


def test_tau_recursive_other_pair():
    pair = ProjectivityPair((1, 2), (0, 2))
    k = 3
    assert verify_ppdef(build_tau_recursive(k, pair), make_tau(k, [1, 2], [0, 2], 3), tau_language(pair))


def test_tau_recursive_rejects_small_k():
    with pytest.raises(ValueError):
        build_tau_recursive(2)


# ------------------------------------------------------------ and-chains


def test_and_chain_semantics():
    phi = build_and_chain(3, "R_and2")
    rel = pp_eval(phi, GAMMA)
    for t in itertools.product(BOOL, repeat=4):
        assert (t in rel) == (t[3] == int(all(t[:3])))
    with pytest.raises(ValueError):
        build_and_chain(1, "R_and2")


# ------------------------------------------------------------------- rho


@pytest.mark.parametrize("n", [1, 2, 3])
def test_rho(n):
    got = set(pp_eval(build_rho(n), GAMMA).tuples)
    assert got == _full_minus(2 * n, (1,) * n + (0,) * n)


def test_rho_matches_naive_evaluator():
    phi = build_rho(1)
    assert set(pp_eval(phi, GAMMA).tuples) == pp_relation(phi, GAMMA)


def test_rho_size_guard():
    with pytest.raises(SizeError):
        build_rho(10)


# ----------------------------------------------------------------- omega


@pytest.mark.parametrize("n", [1, 2, 3])
def test_omega(n):
    got = set(pp_eval(build_omega(n), GAMMA_P).tuples)
    assert got == _full_minus(2 * n, (1, 0) * n)


@pytest.mark.parametrize("n", [1, 2])
def test_sigma_via_omega(n):
    parts = build_sigma_via_omega(n)
    assert len(parts) == 2 ** n
    assert verify_ppdef(sigma_conjunction(n), make_sigma_n(n), GAMMA_P)


def test_sigma_via_omega_size_guard():
    with pytest.raises(SizeError):
        build_sigma_via_omega(7)


# -------------------------------------------------------------------- xi


@pytest.mark.parametrize("n", [1, 2])
def test_xi_boolean_slice(n):
    rel = pp_eval(build_xi(n), xi_language())
    assert boolean_slice(rel) == _slice(n, lambda tri: len(set(tri)) == 1)


def test_xi_needs_and_and_or():
    with pytest.raises(MalformedFormula):
        build_xi(1, zeta_language())


# ------------------------------------------------------------------ zeta


def test_delta_gadgets():
    lang = zeta_language()
    d1 = boolean_slice(pp_eval(build_delta1(), lang))
    assert d1 == {t for t in itertools.product(BOOL, repeat=4) if t[0] or t[1] or t[2] == t[3]}

    def pinned(t):
        s = sum(t[:3])
        return s >= 2 or t[3] == s

    for phi in (build_delta2(), build_delta3()):
        assert boolean_slice(pp_eval(phi, lang)) == {t for t in itertools.product(BOOL, repeat=4) if pinned(t)}


@pytest.mark.parametrize("n", [1, 2])
def test_zeta_boolean_slice(n):
    rel = pp_eval(build_zeta(n), zeta_language())
    assert boolean_slice(rel) == _slice(n, lambda tri: sum(tri) != 1)


def test_zeta_needs_delta_or_eq():
    with pytest.raises(MalformedFormula):
        build_zeta(1, xi_language())


# ---------------------------------------------------------- verification


def test_verify_ppdef_detects_mismatch_and_infers_language():
    phi = build_rho(1)
    assert verify_ppdef(phi, Relation.from_tuples(2, 3, _full_minus(2, (1, 0))))
    assert not verify_ppdef(phi, Relation.full(2, 3))
    assert not verify_ppdef(phi, Relation.full(2, 3), tau_language())
    assert default_language_for("omega") == GAMMA_P
