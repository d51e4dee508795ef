"""Hardness gadgets: reductions from (complements of) Boolean satisfiability
problems into QCSP over three-element languages.

Every builder here is validated by comparing the truth of its output (game-tree
oracle) with the truth of its input (Boolean evaluator).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .catalog import hardness_language, xi_language, zeta_language
from .core import (
    EQ,
    EXISTS,
    FORALL,
    Atom,
    Language,
    MalformedFormula,
    QCSPInstance,
    SizeError,
    const_name,
    false_instance,
)
from .ppbuild import U01, build_tau_recursive, build_xi, build_zeta, tau_language
from .relalg import ProjectivityPair

MAX_BOOL_VARS = 12


@dataclass(frozen=True)
class QNAEInstance:
    """Quantified monotone NAE-3SAT: the matrix is a conjunction of NAE over each triple."""

    prefix: tuple
    clauses: tuple

    def __init__(self, prefix, clauses):
        prefix = tuple((q, v) for q, v in prefix)
        clauses = tuple(tuple(c) for c in clauses)
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "clauses", clauses)
        names = [v for _, v in prefix]
        if len(set(names)) != len(names):
            raise MalformedFormula("variable quantified twice")
        for q, _ in prefix:
            if q not in (FORALL, EXISTS):
                raise MalformedFormula(f"unknown quantifier {q!r}")
        for c in clauses:
            if len(c) != 3:
                raise MalformedFormula(f"clause {c} is not a triple")
            stray = set(c) - set(names)
            if stray:
                raise MalformedFormula(f"clause {c} uses unquantified {sorted(stray)}")

    @property
    def variables(self) -> list[str]:
        return [v for _, v in self.prefix]

    def dual(self) -> "QNAEInstance":
        flip = {FORALL: EXISTS, EXISTS: FORALL}
        return QNAEInstance([(flip[q], v) for q, v in self.prefix], self.clauses)


def _nae(a, b, c) -> bool:
    return not (a == b == c)


def qnae_eval(inst: QNAEInstance) -> bool:
    """Game-tree evaluation over {0, 1}."""
    if len(inst.prefix) > MAX_BOOL_VARS:
        raise SizeError(f"{len(inst.prefix)} variables exceed the cap {MAX_BOOL_VARS}")
    env: dict[str, int] = {}

    def rec(i):
        if i == len(inst.prefix):
            return all(_nae(*(env[v] for v in c)) for c in inst.clauses)
        q, v = inst.prefix[i]
        results = []
        for b in (0, 1):
            env[v] = b
            results.append(rec(i + 1))
        del env[v]
        return any(results) if q == EXISTS else all(results)

    return rec(0)


def coqnae_eval(inst: QNAEInstance) -> bool:
    return not qnae_eval(inst)


# ----------------------------------------------------- PSpace gadget

PSPACE_VARIANTS = ("sigma-sigma0-sigma1", "sigma0p-sigma1", "sigma0-sigma1p")
VARIANT_RELATIONS = {
    "sigma-sigma0-sigma1": ("sigma", "sigma0", "sigma1"),
    "sigma0p-sigma1": ("sigma0p", "sigma1"),
    "sigma0-sigma1p": ("sigma0", "sigma1p"),
}


def pspace_language(variant: str) -> Language:
    if variant not in VARIANT_RELATIONS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {PSPACE_VARIANTS}")
    return hardness_language(VARIANT_RELATIONS[variant])


def reduce_coqnae_pspace(inst: QNAEInstance, variant: str = "sigma-sigma0-sigma1",
                         construction: str = "auto", final_guard: str = "display") -> QCSPInstance:
    """Instance over the variant's relations (plus constants) meant to be true iff ``inst`` is false.

    Each source variable x becomes a pair (x^0, x^1) with x = 0 as (1, 0) and
    x = 1 as (0, 1).  A chain of y variables carries the disjunction of the
    all-equal triples; variables existential in the complemented prefix are
    simulated by ∃y ∀x^0 ∀x^1 ∃y' blocks that let the existential player pick
    the pair.  Guard chains t and z are meant to make any universal play
    outside the encoding a win for the existential player.

    ``construction``:
      "literal"  every chain edge is a single atom labelled by one coordinate.
                 The universal pair (0, 0) played under a nested simulation
                 block then forces two already committed chain ends together,
                 so the guards cannot rescue the existential player and the
                 output can be false on a true input.
      "repaired" (primed variants only) every chain edge is a two-atom path
                 labelled by both coordinates, one atom of each polarity, so
                 an off-encoding pair only loosens edges.
      "auto"     "repaired" where available, else "literal".

    ``final_guard`` selects how the primed variants tie the t and z chains:
    "display" joins t_n with z_n and pins z_0, "text" joins t_n with z_0 and
    pins z_n.
    """
    if variant not in VARIANT_RELATIONS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {PSPACE_VARIANTS}")
    if final_guard not in ("display", "text"):
        raise ValueError("final_guard must be 'display' or 'text'")
    if construction == "auto":
        construction = "literal" if variant == "sigma-sigma0-sigma1" else "repaired"
    if construction not in ("literal", "repaired"):
        raise ValueError("construction must be 'auto', 'literal' or 'repaired'")
    if construction == "repaired" and variant == "sigma-sigma0-sigma1":
        raise ValueError("no repaired construction over sigma, sigma0, sigma1")
    if variant == "sigma0-sigma1p":
        # the 0/1 swap maps sigma1 to sigma0 and sigma0p to sigma1p
        out = reduce_coqnae_pspace(inst, "sigma0p-sigma1", construction, final_guard)
        return _swap01(out, {"sigma1": "sigma0", "sigma0p": "sigma1p"})
    return _pspace_gadget(inst, variant, construction == "repaired", final_guard)


def _swap01(inst: QCSPInstance, rename: dict) -> QCSPInstance:
    consts = {const_name(0): const_name(1), const_name(1): const_name(0)}
    atoms = [Atom(rename.get(a.rel, consts.get(a.rel, a.rel)), a.args) for a in inst.atoms]
    return QCSPInstance(inst.prefix, atoms)


def _pspace_gadget(inst: QNAEInstance, variant: str, repaired: bool, final_guard: str) -> QCSPInstance:
    co = inst.dual()
    names = co.variables
    x0 = {v: f"{v}^0" for v in names}
    x1 = {v: f"{v}^1" for v in names}
    s = len(co.clauses)
    atoms: list[Atom] = []
    witnesses: list[str] = []

    def edge(label, other, b, c):
        # b = c is forced when label = 0 (and, repaired, also other = 1)
        if not repaired:
            atoms.append(Atom("sigma1", [label, b, c]))
            return
        w = f"w{len(witnesses) + 1}"
        witnesses.append(w)
        atoms.append(Atom("sigma1", [label, b, w]))
        atoms.append(Atom("sigma0p", [other, w, c]))

    def y(i):
        return f"y{i}" if i >= 0 else f"y_{-i}"

    for i, clause in enumerate(co.clauses, start=1):
        for v in clause:
            edge(x0[v], x1[v], y(i - 1), y(i))
    for i, clause in enumerate(co.clauses, start=s + 1):
        for v in clause:
            edge(x1[v], x0[v], y(i - 1), y(i))
    inner = [(EXISTS, y(i)) for i in range(1, 2 * s)]

    k, l = 0, 2 * s
    outer: list[tuple[str, str]] = []
    for q, v in reversed(co.prefix):
        if q == FORALL:
            outer = [(FORALL, x0[v]), (FORALL, x1[v])] + outer
            continue
        ends = [y(k)] if k == l else [y(k), y(l)]
        block = [(EXISTS, ends[0]), (FORALL, x0[v]), (FORALL, x1[v])]
        block += [(EXISTS, e) for e in ends[1:]]
        edge(x0[v], x1[v], y(k - 1), y(l))
        edge(x1[v], x0[v], y(l), y(l + 1))
        outer = block + outer
        k, l = k - 1, l + 1

    n = len(names)
    t = [f"t{i}" for i in range(n + 1)]
    z = [f"z{i}" for i in range(n + 1)]
    guard = "sigma0" if variant == "sigma-sigma0-sigma1" else "sigma0p"
    for i, v in enumerate(names, start=1):
        atoms.append(Atom("sigma1", [x0[v], t[i - 1], t[i]]))
        atoms.append(Atom("sigma1", [x1[v], t[i - 1], t[i]]))
    for i, v in enumerate(names, start=1):
        atoms.append(Atom(guard, [x0[v], z[i - 1], z[i]]))
        atoms.append(Atom(guard, [x1[v], z[i - 1], z[i]]))
    atoms.append(Atom(const_name(0), [y(k)]))
    atoms.append(Atom(EQ, [y(l), t[0]]))
    if variant == "sigma-sigma0-sigma1":
        atoms.append(Atom("sigma", [t[n], z[n]]))
        atoms.append(Atom(const_name(1), [z[0]]))
    elif final_guard == "display":
        atoms.append(Atom(EQ, [t[n], z[n]]))
        atoms.append(Atom(const_name(2), [z[0]]))
    else:
        atoms.append(Atom(EQ, [t[n], z[0]]))
        atoms.append(Atom(const_name(2), [z[n]]))

    ends = [y(k)] if k == l else [y(k), y(l)]
    tail = [(EXISTS, v) for v in t + z + ends + witnesses]
    return QCSPInstance(outer + inner + tail, atoms)


# ------------------------------------------- conservative (tau_k) gadget


def reduce_coqnae_conservative(inst: QNAEInstance, pair: Optional[ProjectivityPair] = None,
                               tau_provider=build_tau_recursive) -> QCSPInstance:
    """Instance over tau3, U01 and constants that is true iff ``inst`` is false.

    The complemented prefix is kept; its existential variables are restricted
    to {d0, d1} (d0 in alpha minus beta, d1 in beta minus alpha) and the
    matrix is tau_k on the clause triples, expanded via ``tau_provider``.
    """
    pair = pair or ProjectivityPair((0, 2), (1, 2), 3)
    co = inst.dual()
    if not co.clauses:
        return false_instance()
    clauses = list(co.clauses)
    while len(clauses) < 3:
        clauses.append(clauses[-1])
    k = len(clauses)
    phi = tau_provider(k, pair)
    args = [v for c in clauses for v in c]
    taken = set(co.variables)
    body, bound = phi.instantiate(args, taken)
    atoms = [Atom(U01, [v]) for q, v in co.prefix if q == EXISTS] + body
    prefix = list(co.prefix) + [(EXISTS, b) for b in bound]
    return QCSPInstance(prefix, atoms)


def conservative_target_language(pair: Optional[ProjectivityPair] = None) -> Language:
    return tau_language(pair)


# ------------------------------------------------ co-NP gadgets (xi, zeta)


def _clause_vars(clauses: Sequence[Sequence[str]]) -> list[str]:
    return list(dict.fromkeys(v for c in clauses for v in c))


def _all_universal(clauses, phi) -> QCSPInstance:
    ys = _clause_vars(clauses)
    taken = set(ys)
    body, bound = phi.instantiate([v for c in clauses for v in c], taken)
    prefix = [(FORALL, v) for v in ys] + [(EXISTS, b) for b in bound]
    return QCSPInstance(prefix, body)


def reduce_nae_complement_xi(clauses: Sequence[Sequence[str]], lang: Optional[Language] = None) -> QCSPInstance:
    """∀-instance true iff the NAE-3SAT instance ``clauses`` is unsatisfiable."""
    lang = lang or xi_language()
    clauses = [tuple(c) for c in clauses]
    if not clauses:
        return false_instance()
    return _all_universal(clauses, build_xi(len(clauses), lang))


def reduce_1in3_complement_zeta(clauses: Sequence[Sequence[str]], lang: Optional[Language] = None) -> QCSPInstance:
    """∀-instance true iff the 1-in-3 SAT instance ``clauses`` is unsatisfiable."""
    lang = lang or zeta_language()
    clauses = [tuple(c) for c in clauses]
    if not clauses:
        return false_instance()
    return _all_universal(clauses, build_zeta(len(clauses), lang))


def nae_satisfiable(clauses) -> bool:
    vs = _clause_vars(clauses)
    for bits in itertools.product((0, 1), repeat=len(vs)):
        env = dict(zip(vs, bits))
        if all(_nae(*(env[v] for v in c)) for c in clauses):
            return True
    return False


def one_in_three_satisfiable(clauses) -> bool:
    vs = _clause_vars(clauses)
    for bits in itertools.product((0, 1), repeat=len(vs)):
        env = dict(zip(vs, bits))
        if all(sum(env[v] for v in c) == 1 for c in clauses):
            return True
    return False


# ------------------------------------------------------- exhaustive suites


def all_clause_sets(variables: Sequence[str], max_clauses: int):
    """Every set of at most ``max_clauses`` monotone triples (as multisets) over ``variables``."""
    triples = list(itertools.combinations_with_replacement(variables, 3))
    for m in range(max_clauses + 1):
        yield from itertools.combinations(triples, m)


def all_qnae_instances(max_vars: int = 3, max_clauses: int = 2):
    """Every QNAE instance on x1..xn (n <= max_vars) in prefix order, all quantifier patterns."""
    for n in range(1, max_vars + 1):
        names = [f"x{i}" for i in range(1, n + 1)]
        for quants in itertools.product((FORALL, EXISTS), repeat=n):
            prefix = list(zip(quants, names))
            for clauses in all_clause_sets(names, max_clauses):
                yield QNAEInstance(prefix, clauses)

