"""Explicit pp-definitions, emitted as PPFormula values.

Every builder returns a formula over a fixed vocabulary; the matching
``*_language`` helper (or the catalog languages) supplies the relations.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

from .catalog import (
    is_and_type,
    is_or_type,
    make_r_and2,
    make_tau,
    xi_language,
    zeta_language,
)
from .core import (
    Atom,
    Const,
    Language,
    MalformedFormula,
    PPFormula,
    Relation,
    SizeError,
    Term,
    canonicalize,
    conjoin,
    const_name,
    fresh,
    unary,
)
from .relalg import ProjectivityPair, pp_eval

TAU3 = "tau3"
U01 = "U01"


def _vars(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(1, n + 1)]


def _triple_vars(k: int) -> list[str]:
    out = []
    for i in range(1, k + 1):
        out += [f"x{i}", f"y{i}", f"z{i}"]
    return out


# ---------------------------------------------------------------- tau_k


def tau_language(pair: ProjectivityPair | None = None) -> Language:
    """tau3 for the pair plus U01 = {d0, d1} (d0 in alpha-beta, d1 in beta-alpha) and constants."""
    pair = pair or ProjectivityPair((0, 2), (1, 2), 3)
    d0, d1 = _d0_d1(pair)
    return Language(
        pair.domain,
        {
            TAU3: make_tau(3, sorted(pair.alpha), sorted(pair.beta), pair.domain),
            U01: unary((d0, d1), pair.domain),
        },
        with_constants=True,
    )


def _d0_d1(pair: ProjectivityPair) -> tuple[int, int]:
    return min(pair.alpha - pair.beta), min(pair.beta - pair.alpha)


def _tau_atoms(k: int, args: list, taken: set, d0: int, d1: int) -> list[Atom]:
    if k == 3:
        return [Atom(TAU3, args)]
    # double from m triples to 2(m-1) >= k, then drop the surplus triple by
    # repeating the previous one (a repeated disjunct changes nothing)
    m = math.ceil(k / 2) + 1
    big = 2 * (m - 1)
    args = list(args)
    while len(args) < 3 * big:
        args += args[-3:]
    w = fresh("w", taken)
    taken.add(w)
    half = 3 * (m - 1)
    left = args[:half] + [Const(d0), Const(d0), w]
    right = args[half:] + [Const(d1), Const(d1), w]
    return (
        _tau_atoms(m, left, taken, d0, d1)
        + _tau_atoms(m, right, taken, d0, d1)
        + [Atom(U01, [w])]
    )


def build_tau_recursive(k: int, pair: ProjectivityPair | None = None) -> PPFormula:
    """pp-definition of tau_k from tau3, U01 and constants, with O(k) atoms."""
    if k < 3:
        raise ValueError("the recursion starts at k = 3")
    pair = pair or ProjectivityPair((0, 2), (1, 2), 3)
    d0, d1 = _d0_d1(pair)
    free = _triple_vars(k)
    taken = set(free)
    atoms = _tau_atoms(k, list(free), taken, d0, d1)
    bound = [v for v in dict.fromkeys(a for at in atoms for a in at.variables) if v not in free]
    return PPFormula(free, bound, atoms)


# ------------------------------------------------------------ and-chains


def build_and_chain(n: int, and_rel_name: str, swap: bool = False, out_name: str = "y") -> PPFormula:
    """R_n(x1..xn, y) from a ternary R_2 via R_{k+1}(.., x_{k+1}, y) = ∃z R_k(.., z) ∧ R_2(x_{k+1}, z, y).

    With ``swap`` the step atom is R_2(z, x_{k+1}, y) instead.
    """
    if n < 2:
        raise ValueError("chains start at n = 2")
    xs = _vars("x", n)
    return PPFormula(xs + [out_name], *_chain_body(xs, out_name, and_rel_name, swap, set(xs) | {out_name}))


def _chain_body(xs: Sequence[Term], out: Term, rel: str, swap: bool, taken: set):
    """Atoms of the n-ary chain on given terms; for n = 1 the chain is R_2(x, x, out)."""
    n = len(xs)
    if n == 1:
        return [], [Atom(rel, [xs[0], xs[0], out])]
    bound: list[str] = []
    atoms: list[Atom] = []
    prev: Term = None
    for k in range(2, n + 1):
        target = out if k == n else fresh("c", taken)
        if k != n:
            taken.add(target)
            bound.append(target)
        if k == 2:
            atoms.append(Atom(rel, [xs[0], xs[1], target]))
        else:
            pair = [prev, xs[k - 1]] if swap else [xs[k - 1], prev]
            atoms.append(Atom(rel, pair + [target]))
        prev = target
    return bound, atoms


def chain_atoms(xs: Sequence[Term], out: Term, rel: str, taken: set, swap: bool = False):
    """(bound variables, atoms) for R_n(xs, out); updates ``taken``."""
    return _chain_body(xs, out, rel, swap, taken)


# ------------------------------------------------------------------- rho


def build_rho(n: int, and_rel: str = "R_and2", delta: str = "delta") -> PPFormula:
    """2n-ary relation over {R_and2, delta} missing exactly 1^n 0^n."""
    if n < 1:
        raise ValueError("n must be positive")
    if 2 * n * math.log2(3) > 24:
        raise SizeError("rho arity beyond materialization cap")
    xs, ys = _vars("x", n), _vars("y", n)
    taken = set(xs) | set(ys)
    yp = [fresh(f"v{i}", taken) for i in range(1, n + 1)]
    taken |= set(yp)
    z, t = fresh("z", taken), fresh("t", taken)
    taken |= {z, t}
    b1, a1 = chain_atoms(xs, z, and_rel, taken)
    b2, a2 = chain_atoms(yp, t, and_rel, taken)
    atoms = a1 + [Atom(delta, [y, v]) for y, v in zip(ys, yp)] + a2 + [Atom(and_rel, [z, z, t])]
    return PPFormula(xs + ys, yp + [z, t] + b1 + b2, atoms)


# --------------------------------------------------------- omega / sigma


def _pair_vars(n: int) -> list[str]:
    out = []
    for i in range(1, n + 1):
        out += [f"x{i}", f"y{i}"]
    return out


def build_omega(n: int, and_rel: str = "R_and2p", delta: str = "delta_p") -> PPFormula:
    """2n-ary relation over {R_and2p, delta_p, {0}} missing exactly (1,0,...,1,0)."""
    if n < 1:
        raise ValueError("n must be positive")
    free = _pair_vars(n)
    xs, ys = free[0::2], free[1::2]
    taken = set(free)
    us = [fresh(f"u{i}", taken) for i in range(1, n + 1)]
    taken |= set(us)
    z = fresh("z", taken)
    taken.add(z)
    bound, chain = chain_atoms(xs + us, z, and_rel, taken)
    atoms = chain + [Atom(delta, [y, u]) for y, u in zip(ys, us)] + [Atom(const_name(0), [z])]
    return PPFormula(free, us + [z] + bound, atoms)


def build_sigma_via_omega(n: int, **names) -> list[PPFormula]:
    """2^n copies of omega_n, one per pattern of swapping x_i with y_i; their conjunction is sigma_n."""
    if n > 6:
        raise SizeError("sigma_n via omega is materialized only up to n = 6")
    base = build_omega(n, **names)
    free = list(base.free_vars)
    out = []
    for signs in itertools.product((0, 1), repeat=n):
        perm = {}
        for i, s in enumerate(signs):
            x, y = free[2 * i], free[2 * i + 1]
            if s:
                perm[x], perm[y] = y, x
        atoms = [a.substitute(perm) for a in base.atoms]
        out.append(PPFormula(free, base.bound_vars, atoms))
    return out


def sigma_conjunction(n: int) -> PPFormula:
    return conjoin(build_sigma_via_omega(n))


# -------------------------------------------------------------------- xi


def _find(lang: Language, pred, what: str) -> str:
    for name, rel in sorted(lang.relations.items()):
        if rel.arity == 3 and rel.domain == 3 and pred(rel):
            return name
    raise MalformedFormula(f"language has no {what} relation")


def build_xi(n: int, lang: Language | None = None) -> PPFormula:
    """3n-ary formula whose {0,1} slice is the disjunction of AE3 over the triples."""
    if n < 1:
        raise ValueError("n must be positive")
    lang = lang or xi_language()
    r_and = _find(lang, is_and_type, "AND-type")
    r_or = _find(lang, is_or_type, "OR-type")
    free = _triple_vars(n)
    taken = set(free)

    def new(base):
        v = fresh(base, taken)
        taken.add(v)
        return v

    u, v = new("u"), new("v")
    us = [new(f"u{i}") for i in range(1, n + 1)]
    vs = [new(f"v{i}") for i in range(1, n + 1)]
    bound = [u, v] + us + vs
    atoms = [Atom(r_and, [u, v, v])]
    for i in range(n):
        tri = free[3 * i : 3 * i + 3]
        b, a = chain_atoms(tri, us[i], r_and, taken)
        bound += b
        atoms += a
    b, a = chain_atoms(us, u, r_or, taken)
    bound += b
    atoms += a
    for i in range(n):
        tri = free[3 * i : 3 * i + 3]
        b, a = chain_atoms(tri, vs[i], r_or, taken)
        bound += b
        atoms += a
    b, a = chain_atoms(vs, v, r_and, taken)
    bound += b
    atoms += a
    return PPFormula(free, bound, atoms)


# ------------------------------------------------------------------ zeta

DELTA_OR_EQ = "delta_or_eq"


def _zeta_and(lang: Language) -> str:
    return _find(lang, is_and_type, "AND-type")


def _check_zeta_lang(lang: Language) -> None:
    rel = lang.relations.get(DELTA_OR_EQ)
    if rel is None:
        raise MalformedFormula(f"language lacks {DELTA_OR_EQ!r}")


def build_delta1() -> PPFormula:
    t = "t"
    return PPFormula(
        ["x1", "x2", "x3", "x4"],
        [t],
        [Atom(DELTA_OR_EQ, ["x1", "x3", t]), Atom(DELTA_OR_EQ, ["x2", t, "x4"])],
    )


def _delta1_atoms(args, taken):
    t = fresh("t", taken)
    taken.add(t)
    a1, a2, a3, a4 = args
    return [t], [Atom(DELTA_OR_EQ, [a1, a3, t]), Atom(DELTA_OR_EQ, [a2, t, a4])]


def _delta2_atoms(args, taken):
    a1, a2, a3, a4 = args
    bound, atoms = [], []
    for perm in ((a1, a2, a3, a4), (a1, a3, a2, a4), (a2, a3, a1, a4)):
        b, a = _delta1_atoms(perm, taken)
        bound += b
        atoms += a
    return bound, atoms


def build_delta2() -> PPFormula:
    free = ["x1", "x2", "x3", "x4"]
    bound, atoms = _delta2_atoms(free, set(free))
    return PPFormula(free, bound, atoms)


def _delta3_atoms(args, taken, r_and):
    a1, a2, a3, a4 = args
    primes = []
    for base in ("p1", "p2", "p3"):
        v = fresh(base, taken)
        taken.add(v)
        primes.append(v)
    bound, atoms = _delta2_atoms(primes + [a4], taken)
    # R'(x, y) = R_2(x, x, y)
    atoms += [Atom(r_and, [x, x, p]) for x, p in zip((a1, a2, a3), primes)]
    return primes + bound, atoms


def build_delta3(lang: Language | None = None) -> PPFormula:
    lang = lang or zeta_language()
    _check_zeta_lang(lang)
    free = ["x1", "x2", "x3", "x4"]
    bound, atoms = _delta3_atoms(free, set(free), _zeta_and(lang))
    return PPFormula(free, bound, atoms)


def build_zeta(n: int, lang: Language | None = None) -> PPFormula:
    """3n-ary formula whose {0,1} slice is the disjunction of (not 1IN3) over the triples."""
    if n < 1:
        raise ValueError("n must be positive")
    lang = lang or zeta_language()
    _check_zeta_lang(lang)
    r_and = _zeta_and(lang)
    free = _triple_vars(n)
    taken = set(free)
    zs = []
    for i in range(1, n + 1):
        v = fresh(f"w{i}", taken)
        taken.add(v)
        zs.append(v)
    t = fresh("t", taken)
    taken.add(t)
    bound = zs + [t]
    b, atoms = chain_atoms(zs, t, r_and, taken, swap=True)
    bound += b
    for i in range(n):
        b, a = _delta3_atoms(free[3 * i : 3 * i + 3] + [zs[i]], taken, r_and)
        bound += b
        atoms += a
    atoms.append(Atom(const_name(0), [t]))
    return PPFormula(free, bound, atoms)


# ------------------------------------------------------------ verification


def verify_ppdef(phi: PPFormula, expected: Relation, lang: Language | None = None) -> bool:
    """Materialize ``phi`` and compare with ``expected``.

    Without ``lang`` the first builder language defining every relation name
    used by ``phi`` is taken.
    """
    if lang is None:
        lang = infer_language(phi)
    try:
        got = pp_eval(phi, lang)
    except (KeyError, MalformedFormula):
        return False
    return got == canonicalize(expected)


def boolean_slice(rel: Relation) -> set:
    return {t for t in rel.tuples if all(v in (0, 1) for v in t)}


def infer_language(phi: PPFormula) -> Language:
    names = {a.rel for a in phi.atoms}
    for key in ("tau", "rho", "omega", "xi", "zeta"):
        lang = default_language_for(key)
        try:
            for n in names:
                lang.lookup(n)
        except KeyError:
            continue
        return lang
    raise KeyError(f"no builder language defines {sorted(names)}")


def default_language_for(builder: str) -> Language:
    from .catalog import make_strange_languages

    gamma, gamma_p = make_strange_languages()
    return {
        "tau": tau_language(),
        "rho": gamma,
        "omega": gamma_p,
        "xi": xi_language(),
        "zeta": zeta_language(),
    }[builder]

