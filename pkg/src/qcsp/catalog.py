"""Named relations and operations over small domains (mostly {0,1,2})."""

from __future__ import annotations

import itertools
from typing import Iterable

import numpy as np

from .core import (
    Language,
    Operation,
    Relation,
    SizeError,
    check_universe,
    decode,
)
from .relalg import ProjectivityPair, preserves

D3 = 3

# ---------------------------------------------------------------- operations


def s_c(c: int, domain: int = D3) -> Operation:
    return Operation.from_function(2, domain, lambda x, y: x if x == y else c, f"s_{c}")


def s_ac(a: int, c: int, domain: int = D3) -> Operation:
    _distinct(a, c)
    return Operation.from_function(
        2, domain, lambda x, y: x if (x == y or y == a) else c, f"s_{a}{c}"
    )


def g_ac(a: int, c: int, domain: int = D3) -> Operation:
    _distinct(a, c)
    return Operation.from_function(
        2, domain, lambda x, y: x if (x == a or y != c) else c, f"g_{a}{c}"
    )


def f_ac(a: int, c: int, domain: int = D3) -> Operation:
    _distinct(a, c)
    return Operation.from_function(
        3, domain, lambda x, y, z: x if (x == y or y == z == a) else c, f"f_{a}{c}"
    )


def h_02(domain: int = D3) -> Operation:
    """g_02(s_02(x, z), s_2(y, z)) written out by cases.

    The plain case list "x if x = z = 0, x if x = 1 and y = z, else 2" differs
    from this composition at (1, 2, 2) only, and that variant is not a
    polymorphism of {R_and2, delta}; the composition is the clone member used
    here, so the y = z case excludes y = z = 2.
    """

    def h(x, y, z):
        if x == z == 0:
            return x
        if x == 1 and y == z != 2:
            return x
        return 2

    return Operation.from_function(3, domain, h, "h_02")


def h_02_case_list(domain: int = D3) -> Operation:
    """The literal case list without the y = z != 2 restriction (kept for comparison)."""

    def h(x, y, z):
        if x == z == 0 or (x == 1 and y == z):
            return x
        return 2

    return Operation.from_function(3, domain, h, "h_02_case_list")


def s2(domain: int = D3) -> Operation:
    return s_c(2, domain)


def _distinct(a, c):
    if a == c:
        raise ValueError("parameters a and c must differ")


_NAMED = {
    "s_c": (s_c, 1),
    "s_ac": (s_ac, 2),
    "g_ac": (g_ac, 2),
    "f_ac": (f_ac, 2),
    "h_02": (h_02, 0),
}


def make_named_operation(name: str, params: Iterable[int] = (), domain: int = D3) -> Operation:
    """Build ``s_c``, ``s_ac``, ``g_ac``, ``f_ac`` or ``h_02`` with the given parameters."""
    if name not in _NAMED:
        raise ValueError(f"unknown operation {name!r}; choose from {sorted(_NAMED)}")
    fn, nparams = _NAMED[name]
    params = tuple(params)
    if len(params) != nparams:
        raise ValueError(f"{name} takes {nparams} parameters")
    if any(not 0 <= p < domain for p in params):
        raise ValueError("parameter outside the domain")
    return fn(*params, domain=domain)


def compose(outer: Operation, *inner: Operation) -> Operation:
    """outer(inner_1(x..), ..., inner_k(x..)) with all inner operations of one arity."""
    if len(inner) != outer.arity:
        raise ValueError("wrong number of inner operations")
    n, d = inner[0].arity, outer.domain
    return Operation.from_function(n, d, lambda *xs: outer(*(g(*xs) for g in inner)))


# ------------------------------------------------------------ tau and sigma


def _pair(alpha, beta, domain) -> ProjectivityPair:
    return ProjectivityPair(alpha, beta, domain)


def make_S(alpha=(0, 2), beta=(1, 2), domain: int = D3) -> Relation:
    """(D minus alpha∩beta)^3 minus (alpha^3 ∪ beta^3): a not-all-equal relation."""
    p = _pair(alpha, beta, domain)
    core = set(range(domain)) - (p.alpha & p.beta)
    return Relation.from_predicate(
        3,
        domain,
        lambda t: all(v in core for v in t)
        and not all(v in p.alpha for v in t)
        and not all(v in p.beta for v in t),
    )


def make_tau(n: int, alpha=(0, 2), beta=(1, 2), domain: int = D3) -> Relation:
    """3n-ary: some triple (x_i, y_i, z_i) lies outside S."""
    if n < 1:
        raise ValueError("n must be positive")
    check_universe(3 * n, domain)
    s_codes = make_S(alpha, beta, domain).codes
    codes = np.arange(domain ** (3 * n), dtype=np.int64)
    rows = decode(codes, 3 * n, domain).astype(np.int64)
    in_s_all = np.ones(codes.shape[0], dtype=bool)
    for i in range(n):
        tri = rows[:, 3 * i] * domain * domain + rows[:, 3 * i + 1] * domain + rows[:, 3 * i + 2]
        in_s_all &= np.isin(tri, s_codes)
    return Relation(3 * n, domain, codes[~in_s_all])


def make_sigma_n(n: int, domain: int = D3) -> Relation:
    """2n-ary: some pair {x_i, y_i} differs from {0, 1}."""
    if n < 1:
        raise ValueError("n must be positive")
    if 2 * n * np.log2(domain) > 24:
        raise SizeError("sigma_n universe exceeds 2^24 tuples")
    codes = np.arange(domain ** (2 * n), dtype=np.int64)
    rows = decode(codes, 2 * n, domain).astype(np.int64)
    all_01 = np.ones(codes.shape[0], dtype=bool)
    for i in range(n):
        x, y = rows[:, 2 * i], rows[:, 2 * i + 1]
        all_01 &= ((x == 0) & (y == 1)) | ((x == 1) & (y == 0))
    return Relation(2 * n, domain, codes[~all_01])


# ------------------------------------------------------ hardness relations


def make_hardness_relations() -> dict[str, Relation]:
    """sigma, sigma0, sigma0p, sigma1, sigma1p over {0,1,2}."""
    A = range(3)
    t3 = list(itertools.product(A, repeat=3))

    def rel3(bc, a_ok):
        return Relation.from_tuples(
            3, 3, [(a, b, c) for a, b, c in t3 if b in bc and c in bc and (a in a_ok or b == c)]
        )

    sigma = Relation.from_tuples(
        2, 3, [t for t in itertools.product(A, repeat=2) if set(t) <= {0, 2} or set(t) <= {1, 2}]
    )
    return {
        "sigma": sigma,
        "sigma0": rel3({1, 2}, {0, 2}),
        "sigma0p": rel3({0, 2}, {0, 2}),
        "sigma1": rel3({0, 2}, {1, 2}),
        "sigma1p": rel3({1, 2}, {1, 2}),
    }


def hardness_language(names: Iterable[str]) -> Language:
    rels = make_hardness_relations()
    return Language(3, {n: rels[n] for n in names}, with_constants=True)


# ------------------------------------------------------ strange languages


def _two_rows() -> list[tuple[int, int, int]]:
    return [t for t in itertools.product(range(3), repeat=3) if t[0] == 2 or t[1] == 2]


def make_r_and2() -> Relation:
    boolean = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 1)]
    return Relation.from_tuples(3, 3, boolean + _two_rows())


def make_r_or2() -> Relation:
    """The 0/1-swapped R_and2: Boolean disjunction plus every row with a 2 in front."""
    boolean = [(0, 0, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)]
    rel = Relation.from_tuples(3, 3, boolean + _two_rows())
    if not preserves(s2(), rel):
        raise RuntimeError("OR-type relation is not closed under s_2")
    return rel


def make_strange_languages() -> tuple[Language, Language]:
    """The languages {R_and2, delta} and {R_and2p, delta_p}, both with constants."""
    r_and2 = make_r_and2()
    delta = Relation.from_tuples(2, 3, [(0, 0), (1, 0), (2, 0), (1, 2), (2, 2)])
    removed = Relation.from_tuples(3, 3, [(0, 2, 1), (0, 2, 2), (2, 0, 1), (2, 0, 2)])
    r_and2p = r_and2.difference(removed)
    delta_p = Relation.from_tuples(
        2, 3, [(0, 1)] + [(a, b) for a in (1, 2) for b in range(3)]
    )
    gamma = Language(3, {"R_and2": r_and2, "delta": delta}, with_constants=True)
    gamma_p = Language(3, {"R_and2p": r_and2p, "delta_p": delta_p}, with_constants=True)
    return gamma, gamma_p


# --------------------------------------------------------- boolean gadgets


def make_nae3(low: int = 0, high: int = 1, domain: int = D3) -> Relation:
    vals = (low, high)
    return Relation.from_tuples(
        3, domain, [t for t in itertools.product(vals, repeat=3) if len(set(t)) > 1]
    )


def make_boolean_gadgets(domain: int = D3) -> dict[str, Relation]:
    """NAE3, AE3, 1IN3 over {0,1} and the canonical OR-type relation."""
    return {
        "NAE3": make_nae3(0, 1, domain),
        "AE3": Relation.from_tuples(3, domain, [(0, 0, 0), (1, 1, 1)]),
        "1IN3": Relation.from_tuples(3, domain, [(1, 0, 0), (0, 1, 0), (0, 0, 1)]),
        "R_or2": make_r_or2() if domain == 3 else _or_type_other(domain),
    }


def _or_type_other(domain: int) -> Relation:
    boolean = [(0, 0, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)]
    return Relation.from_tuples(3, domain, boolean)


def make_delta_or_eq(domain: int = D3) -> Relation:
    """Ternary (x != 0) or (y = z)."""
    return Relation.from_predicate(3, domain, lambda t: t[0] != 0 or t[1] == t[2])


def xi_language() -> Language:
    """An AND-type and an OR-type relation, both closed under s_2."""
    return Language(3, {"R_and2": make_r_and2(), "R_or2": make_r_or2()}, with_constants=True)


def zeta_language() -> Language:
    """The ternary (x != 0) or (y = z) relation together with an AND-type relation."""
    return Language(
        3, {"delta_or_eq": make_delta_or_eq(), "R_and2": make_r_and2()}, with_constants=True
    )


def _slice(rel: Relation) -> set:
    if rel.arity != 3 or rel.domain != 3:
        raise ValueError("type recognizers need a ternary relation over {0,1,2}")
    return {t for t in rel.tuples if t[0] in (0, 1) and t[1] in (0, 1)}


def is_and_type(rel: Relation) -> bool:
    return _slice(rel) == {(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 1)}


def is_or_type(rel: Relation) -> bool:
    return _slice(rel) == {(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 1)}
