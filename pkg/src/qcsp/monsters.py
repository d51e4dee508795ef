"""Language combinators whose QCSP realizes Boolean combinations of smaller problems.

Four builders are provided:

* ``build_conj1``: one extra element turns QCSP(Γ) into QCSP(Γ) ∧ CSP(NAE₃).
* ``build_conj2``: QCSP(Γ₁) ∧ QCSP(Γ₂) over (A₁×A₂) ∪ A₁ ∪ A₂.
* ``build_disj_csp``: conjunctions of QCSP(Γ₁) ∨ CSP(Γ₂).
* ``build_disj_qcsp``: conjunctions of QCSP(Γ₁) ∨ QCSP(Γ₂), with a decomposition
  of arbitrary instances back into such conjunctions.

Combined domains are described by tagged elements (``left``, ``right``,
``pair``, ``copy``, ``marker``) flattened to integers in that order; the
flattening is kept on the built language as ``domain_map``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import networkx as nx

from .core import (
    EQ,
    EXISTS,
    FALSE,
    FORALL,
    Atom,
    Const,
    Language,
    MalformedFormula,
    QCSPInstance,
    Relation,
    _parse_const_name,
    const_name,
    expand_constants,
    false_instance,
    fresh,
    propagate_equalities,
    singleton,
)
from .catalog import make_nae3

NAE = "NAE3"
SIGMA = "sigma"
SIGMA1 = "sigma1"
SIGMA2 = "sigma2"
LEFT, RIGHT = "1:", "2:"

Tag = tuple  # ("left", a) | ("right", b) | ("pair", a, b) | ("copy", a) | ("marker", i)


@dataclass(frozen=True, eq=False)
class MonsterLanguage(Language):
    """A built language that remembers its parts and its domain flattening."""

    kind: str = ""
    domain_map: tuple = ()
    gamma1: Optional[Language] = None
    gamma2: Optional[Language] = None
    base: Optional[int] = None  # the duplicated element of build_conj1

    def code(self, tag: Tag) -> int:
        return self.domain_map.index(tuple(tag))

    @property
    def n1(self) -> int:
        return self.gamma1.domain

    @property
    def n2(self) -> int:
        return self.gamma2.domain if self.gamma2 is not None else 0

    def marker(self, i: int) -> int:
        return self.code(("marker", i))


def domain_map_json(lang: Language) -> Optional[list]:
    dm = getattr(lang, "domain_map", None)
    return [list(t) for t in dm] if dm else None


# ------------------------------------------------------------------ helpers


def _explicit(lang: Language) -> Language:
    return lang.explicit() if lang.with_constants else lang


def _check_reserved(lang: Language, reserved: Sequence[str]) -> None:
    clash = set(lang.relations) & set(reserved)
    if clash:
        raise ValueError(f"relation names {sorted(clash)} are reserved by the combinator")


def _lift(rel: Relation, domain: int, embed: Callable[[int], int], fill: Optional[int]) -> Relation:
    tuples = [tuple(embed(v) for v in t) for t in rel.tuples]
    if fill is not None:
        tuples.append((fill,) * rel.arity)
    return Relation.from_tuples(rel.arity, domain, tuples)


def _has_false(inst: QCSPInstance) -> bool:
    return any(a.rel == FALSE for a in inst.atoms)


def _translate(inst: QCSPInstance, gamma: Language, tag: str, embed: Callable[[int], int],
               expand: bool, taken: set) -> QCSPInstance:
    """Rename ``inst`` apart from ``taken`` and prefix its relation names with ``tag``.

    With ``expand`` constant literals become pinned existentials first, so that
    the padding tuple of a lifted relation is never blocked by a literal.
    """
    if _has_false(inst):
        raise MalformedFormula("instances containing the $false atom cannot be combined")
    if expand:
        inst = expand_constants(inst)
    inst = inst.rename_apart(taken)
    names = set(gamma.relations)
    atoms = []
    for atom in inst.atoms:
        if atom.rel == EQ:
            rel = EQ
        elif atom.rel in names:
            rel = tag + atom.rel
        else:
            raise MalformedFormula(f"atom {atom!r}: relation not in the component language")
        args = [Const(embed(a.value)) if isinstance(a, Const) else a for a in atom.args]
        atoms.append(Atom(rel, args))
    return QCSPInstance(inst.prefix, atoms)


def _guard_universals(inst: QCSPInstance, sigma_name: str, taken: set):
    """Replace every ∀x by ∀y ∃x with sigma(x, y); return the prefix and the new atoms."""
    prefix, atoms = [], []
    for q, v in inst.prefix:
        if q == FORALL:
            y = fresh(f"{v}_u", taken)
            taken.add(y)
            prefix += [(FORALL, y), (EXISTS, v)]
            atoms.append(Atom(sigma_name, [v, y]))
        else:
            prefix.append((q, v))
    return prefix, atoms


def _flatten(parts: Sequence[Sequence[Tag]]) -> tuple:
    return tuple(t for part in parts for t in part)


# ------------------------------------------------------------ conjunction 1


def build_conj1(gamma1: Language, a: int) -> MonsterLanguage:
    """Add a copy a′ of ``a``; relations become preimages under a′ ↦ a, plus NAE₃ on {a, a′}."""
    g = _explicit(gamma1)
    if not any(r == singleton(a, g.domain) for r in g.relations.values()):
        raise ValueError(f"the language must contain the singleton {{{a}}}")
    _check_reserved(g, [NAE])
    n = g.domain
    d = n + 1
    phi = list(range(n)) + [a]
    rels = {}
    for name, rel in g.relations.items():
        tuples = [t for t in itertools.product(range(d), repeat=rel.arity)
                  if tuple(phi[v] for v in t) in rel]
        rels[name + "'"] = Relation.from_tuples(rel.arity, d, tuples)
    rels[NAE] = Relation.from_tuples(
        3, d, [t for t in itertools.product((a, n), repeat=3) if len(set(t)) > 1]
    )
    dmap = tuple(("left", i) for i in range(n)) + (("copy", a),)
    return MonsterLanguage(d, rels, False, kind="conj1", domain_map=dmap, gamma1=g, base=a)


def combine_conj1(m: MonsterLanguage, inst: QCSPInstance, nae: QCSPInstance) -> QCSPInstance:
    """I′ ∧ J: relation-renamed I followed by the NAE₃ instance J on fresh names."""
    if any(q != EXISTS for q, _ in nae.prefix):
        raise MalformedFormula("the NAE part must be existential")
    if any(atom.rel != NAE for atom in nae.atoms):
        raise MalformedFormula(f"the NAE part may only use {NAE}")
    taken: set = set()
    left = _translate(inst, m.gamma1, "", lambda v: v, expand=False, taken=taken)
    left = QCSPInstance(left.prefix, [_prime(atom) for atom in left.atoms])
    right = nae.rename_apart(taken)
    return QCSPInstance(left.prefix + right.prefix, left.atoms + right.atoms)


def _prime(atom: Atom) -> Atom:
    return atom if atom.rel == EQ else Atom(atom.rel + "'", atom.args)


def split_conj1(m: MonsterLanguage, inst: QCSPInstance) -> tuple[QCSPInstance, QCSPInstance]:
    """Recover (I over Γ, J over NAE₃) with ``inst`` ⇔ I ∧ J."""
    a, copy = m.base, m.domain - 1
    inst = propagate_equalities(inst)
    single = next(n for n, r in m.gamma1.relations.items() if r == singleton(a, m.gamma1.domain))
    g_atoms, nae_atoms = [], []
    for atom in inst.atoms:
        args = [Const(a) if isinstance(t, Const) and t.value == copy else t for t in atom.args]
        if atom.rel == NAE:
            nae_atoms.append(atom)
            for t in args:
                if isinstance(t, str):
                    g_atoms.append(Atom(single, [t]))
                elif t.value != a:
                    g_atoms.append(Atom(FALSE, [Const(0)]))
        elif atom.rel.endswith("'"):
            g_atoms.append(Atom(atom.rel[:-1], args))
        else:
            g_atoms.append(Atom(atom.rel, args))
    left = QCSPInstance(inst.prefix, list(dict.fromkeys(g_atoms)))
    nae_vars = list(dict.fromkeys(v for atom in nae_atoms for v in atom.variables))
    right = QCSPInstance([(EXISTS, v) for v in nae_vars], nae_atoms)
    return left, right


# ------------------------------------------------------------ conjunction 2


def build_conj2(g1: Language, g2: Language) -> MonsterLanguage:
    """Domain (A₁×A₂) ∪ A₁ ∪ A₂; Γ₁ ∪ Γ₂ ∪ {σ₁, σ₂} with projections guarded by σᵢ."""
    g1, g2 = _explicit(g1), _explicit(g2)
    n1, n2 = g1.domain, g2.domain
    dmap = _flatten([
        [("left", a) for a in range(n1)],
        [("right", b) for b in range(n2)],
        [("pair", a, b) for a in range(n1) for b in range(n2)],
    ])
    d = len(dmap)
    L = lambda a: a
    R = lambda b: n1 + b
    P = lambda a, b: n1 + n2 + a * n2 + b
    plain = [L(a) for a in range(n1)] + [R(b) for b in range(n2)]
    s1 = [(L(a), P(a, b)) for a in range(n1) for b in range(n2)]
    s1 += [(L(a), v) for a in range(n1) for v in plain]
    s2 = [(R(b), P(a, b)) for a in range(n1) for b in range(n2)]
    s2 += [(R(b), v) for b in range(n2) for v in plain]
    rels = {LEFT + k: _lift(r, d, L, None) for k, r in g1.relations.items()}
    rels.update({RIGHT + k: _lift(r, d, R, None) for k, r in g2.relations.items()})
    rels[SIGMA1] = Relation.from_tuples(2, d, s1)
    rels[SIGMA2] = Relation.from_tuples(2, d, s2)
    return MonsterLanguage(d, rels, False, kind="conj2", domain_map=dmap, gamma1=g1, gamma2=g2)


def combine_conj2(m: MonsterLanguage, i1: QCSPInstance, i2: QCSPInstance) -> QCSPInstance:
    """I′ ∧ J′ where each ∀x becomes ∀y ∃x with σᵢ(x, y)."""
    taken: set = set()
    parts = []
    for inst, gamma, tag, sig, off in ((i1, m.gamma1, LEFT, SIGMA1, 0), (i2, m.gamma2, RIGHT, SIGMA2, m.n1)):
        t = _translate(inst, gamma, tag, lambda v, off=off: v + off, expand=False, taken=taken)
        prefix, guards = _guard_universals(t, sig, taken)
        parts.append((prefix, list(t.atoms) + guards))
    return QCSPInstance(parts[0][0] + parts[1][0], parts[0][1] + parts[1][1])


# ------------------------------------------------------------ disjunctions


def _disj_language(g1: Language, g2: Language, kind: str) -> MonsterLanguage:
    g1, g2 = _explicit(g1), _explicit(g2)
    n1, n2 = g1.domain, g2.domain
    middle = ([("pair", a, b) for a in range(n1) for b in range(n2)] if kind == "disj_qcsp"
              else [("copy", a) for a in range(n1)])
    dmap = _flatten([
        [("left", a) for a in range(n1)],
        [("right", b) for b in range(n2)],
        middle,
        [("marker", 1), ("marker", 2)],
    ])
    d = len(dmap)
    code = {t: i for i, t in enumerate(dmap)}
    m1, m2 = code[("marker", 1)], code[("marker", 2)]
    A1 = [code[("left", a)] for a in range(n1)]
    A2 = [code[("right", b)] for b in range(n2)]
    flat = A1 + A2 + [m1, m2]
    sigma = [(x, m1) for x in A1] + [(m2, y) for y in A2]
    if kind == "disj_qcsp":
        s1 = [(code[("left", a)], code[("pair", a, b)]) for a in range(n1) for b in range(n2)]
    else:
        s1 = [(code[("left", a)], code[("copy", a)]) for a in range(n1)]
    s1 += [(m2, v) for v in range(d)] + [(x, v) for x in A1 for v in flat]
    rels = {LEFT + k: _lift(r, d, lambda a: code[("left", a)], m2) for k, r in g1.relations.items()}
    rels.update({RIGHT + k: _lift(r, d, lambda b: code[("right", b)], m1) for k, r in g2.relations.items()})
    rels[SIGMA] = Relation.from_tuples(2, d, sigma)
    rels[SIGMA1] = Relation.from_tuples(2, d, s1)
    if kind == "disj_qcsp":
        s2 = [(code[("right", b)], code[("pair", a, b)]) for a in range(n1) for b in range(n2)]
        s2 += [(m1, v) for v in range(d)] + [(y, v) for y in A2 for v in flat]
        rels[SIGMA2] = Relation.from_tuples(2, d, s2)
    return MonsterLanguage(d, rels, False, kind=kind, domain_map=dmap, gamma1=g1, gamma2=g2)


def build_disj_csp(g1: Language, g2: Language) -> MonsterLanguage:
    """Domain A₁′ ∪ A₁ ∪ A₂ ∪ {a₁, a₂} of size 2|A₁| + |A₂| + 2."""
    return _disj_language(g1, g2, "disj_csp")


def build_disj_qcsp(g1: Language, g2: Language) -> MonsterLanguage:
    """Domain (A₁×A₂) ∪ A₁ ∪ A₂ ∪ {a₁, a₂} of size |A₁||A₂| + |A₁| + |A₂| + 2."""
    return _disj_language(g1, g2, "disj_qcsp")


def _trivially_true(inst: QCSPInstance) -> bool:
    return not inst.atoms


def _combine_pair(m: MonsterLanguage, i1: QCSPInstance, i2: QCSPInstance, taken: set):
    code = m.code
    e1 = lambda a: code(("left", a))
    e2 = lambda b: code(("right", b))
    t1 = _translate(i1, m.gamma1, LEFT, e1, expand=True, taken=taken)
    t2 = _translate(i2, m.gamma2, RIGHT, e2, expand=True, taken=taken)
    p1, g1 = _guard_universals(t1, SIGMA1, taken)
    if m.kind == "disj_qcsp":
        p2, g2 = _guard_universals(t2, SIGMA2, taken)
    else:
        p2, g2 = list(t2.prefix), []
    vars1, vars2 = t1.variables, t2.variables
    if p1 and p1[0][0] == FORALL:
        dummy = fresh("d", taken)
        taken.add(dummy)
        p1 = [(EXISTS, dummy)] + p1
        vars1 = [dummy] + vars1
    coupling = [Atom(SIGMA, [u, v]) for u in vars1 for v in vars2]
    return p1 + p2, list(t1.atoms) + g1 + list(t2.atoms) + g2 + coupling


def _combine_disj(m: MonsterLanguage, pairs) -> QCSPInstance:
    taken: set = set()
    prefix, atoms = [], []
    for i1, i2 in pairs:
        if _trivially_true(i1) or _trivially_true(i2):
            continue
        p, a = _combine_pair(m, i1, i2, taken)
        prefix += p
        atoms += a
    return QCSPInstance(prefix, atoms)


def combine_disj_csp(m: MonsterLanguage, pairs) -> QCSPInstance:
    """Instance true iff every pair has a true QCSP part or a satisfiable CSP part."""
    for _, j in pairs:
        if any(q != EXISTS for q, _ in j.prefix):
            raise MalformedFormula("the CSP side of every pair must be existential")
    return _combine_disj(m, pairs)


def combine_disj_qcsp(m: MonsterLanguage, pairs) -> QCSPInstance:
    """Instance true iff every pair (I, J) has I true or J true."""
    return _combine_disj(m, pairs)


# ----------------------------------------------------------- decomposition

T1, T2 = 1, 2


class _Inconsistent(Exception):
    pass


def _false_pair():
    return [(false_instance(), false_instance())]


def _types(inst: QCSPInstance, atoms) -> dict:
    """Per-variable side: 1 for A₁∪{a₂}, 2 for A₂∪{a₁}; absent means the whole domain."""
    types: dict = {}

    def put(v, t):
        if not isinstance(v, str):
            return
        if types.setdefault(v, t) != t:
            raise _Inconsistent(f"variable {v} has both sides")

    for atom in atoms:
        if atom.rel.startswith(LEFT):
            for v in atom.args:
                put(v, T1)
        elif atom.rel.startswith(RIGHT):
            for v in atom.args:
                put(v, T2)
        elif atom.rel == SIGMA:
            put(atom.args[0], T1)
            put(atom.args[1], T2)
        elif atom.rel == SIGMA1:
            put(atom.args[0], T1)
        elif atom.rel == SIGMA2:
            put(atom.args[0], T2)
    for v in inst.universals:
        if v in types:
            raise _Inconsistent(f"universal {v} is restricted to one side")
    return types


def _substitute(prefix, atoms, mapping):
    prefix = [(q, v) for q, v in prefix if v not in mapping]
    return prefix, list(dict.fromkeys(a.substitute(mapping) for a in atoms))


def decompose_disj_qcsp(m: MonsterLanguage, inst: QCSPInstance) -> list[tuple[QCSPInstance, QCSPInstance]]:
    """Split ``inst`` into pairs (K₁, K₂), one per connected component.

    ``inst`` holds iff every pair has K₁ true over Γ₁ or K₂ true over Γ₂.
    An inconsistent input yields a single pair of false instances.
    """
    if m.kind != "disj_qcsp":
        raise ValueError("decomposition is only defined for the QCSP disjunction language")
    known = set(m.relations) | {EQ}
    for atom in inst.atoms:
        if atom.rel not in known:
            raise ValueError(f"atom {atom!r}: relation is not part of the language")
        if any(isinstance(a, Const) for a in atom.args):
            raise ValueError(f"atom {atom!r}: constants are not part of the language")
    m1, m2 = m.marker(1), m.marker(2)

    # equalities: whatever propagation leaves behind pins a universal, which is false
    inst = propagate_equalities(inst)
    if any(a.rel == EQ or a.rel == FALSE or _parse_const_name(a.rel) is not None for a in inst.atoms):
        return _false_pair()
    prefix, atoms = list(inst.prefix), list(inst.atoms)
    try:
        types = _types(inst, atoms)
    except _Inconsistent:
        return _false_pair()
    quant = dict((v, q) for q, v in prefix)

    # σᵢ with an existential (or any, when Aᵢ is a singleton) second argument always holds
    trivial = {SIGMA1: m.n1 == 1, SIGMA2: m.n2 == 1}
    atoms = [a for a in atoms if not (a.rel in trivial and (trivial[a.rel] or quant[a.args[1]] == EXISTS))]

    # x quantified before its universal y: x is forced to the opposite marker
    pos = {v: i for i, (_, v) in enumerate(prefix)}
    pin = {}
    for a in atoms:
        if a.rel in (SIGMA1, SIGMA2):
            x, y = a.args
            if pos[x] < pos[y]:
                pin[x] = Const(m2 if a.rel == SIGMA1 else m1)
    prefix, atoms = _substitute(prefix, atoms, pin)

    # σᵢ(x₁, y) ∧ σᵢ(x₂, y): identify x₁ and x₂, keeping the outer one
    while True:
        pos = {v: i for i, (_, v) in enumerate(prefix)}
        groups: dict = {}
        for a in atoms:
            if a.rel in (SIGMA1, SIGMA2) and isinstance(a.args[0], str):
                groups.setdefault((a.rel, a.args[1]), set()).add(a.args[0])
        merge = {}
        for xs in groups.values():
            if len(xs) > 1:
                keep = min(xs, key=pos.get)
                merge.update({x: keep for x in xs if x != keep})
                break
        if not merge:
            break
        prefix, atoms = _substitute(prefix, atoms, merge)

    # ∀y bound on both sides: give the σ₂ side its own universal
    sides: dict = {}
    for a in atoms:
        if a.rel in (SIGMA1, SIGMA2):
            sides.setdefault(a.args[1], set()).add(a.rel)
    taken = set(v for _, v in prefix)
    split = {}
    for y, rels in sides.items():
        if len(rels) == 2:
            y2 = fresh(f"{y}_2", taken)
            taken.add(y2)
            split[y] = y2
    if split:
        atoms = [Atom(a.rel, [a.args[0], split[a.args[1]]]) if a.rel == SIGMA2 and a.args[1] in split else a
                 for a in atoms]
        new_prefix = []
        for q, v in prefix:
            new_prefix.append((q, v))
            if v in split:
                new_prefix.append((FORALL, split[v]))
        prefix = new_prefix

    # ground atoms are decided outright
    lang = m
    rest = []
    for a in atoms:
        if a.variables:
            rest.append(a)
        elif tuple(t.value for t in a.args) not in lang.lookup(a.rel):
            return _false_pair()
    atoms = rest

    existentials = {v for q, v in prefix if q == EXISTS}
    graph = nx.Graph()
    for a in atoms:
        vs = [v for v in a.variables if v in existentials]
        graph.add_nodes_from(vs)
        graph.add_edges_from(zip(vs, vs[1:]))
    out = []
    for comp in nx.connected_components(graph):
        comp_atoms = [a for a in atoms if any(v in comp for v in a.variables)]
        k1 = _side_instance(prefix, comp, comp_atoms, types, T1, m1, m2)
        k2 = _side_instance(prefix, comp, comp_atoms, types, T2, m1, m2)
        out.append((k1, k2))
    return out


def _side_instance(prefix, comp, atoms, types, side, m1, m2) -> QCSPInstance:
    tag, sig = (LEFT, SIGMA1) if side == T1 else (RIGHT, SIGMA2)
    blocked = m2 if side == T1 else m1  # the marker meaning "this side is switched off"
    kept, binders = [], {}
    for a in atoms:
        if a.rel.startswith(tag):
            if any(isinstance(t, Const) for t in a.args):
                return false_instance()
            kept.append(Atom(a.rel[len(tag):], a.args))
        elif a.rel == SIGMA:
            u, v = a.args
            if (side == T1 and u == Const(blocked)) or (side == T2 and v == Const(blocked)):
                return false_instance()
        elif a.rel == sig and isinstance(a.args[0], str):
            binders.setdefault(a.args[0], set()).add(a.args[1])
    if any(len(ys) > 1 for ys in binders.values()):
        return false_instance()
    bound_by = {next(iter(ys)): x for x, ys in binders.items()}
    new_prefix = []
    for q, v in prefix:
        if q == FORALL and v in bound_by:
            new_prefix.append((FORALL, bound_by[v]))
        elif q == EXISTS and v in comp and types.get(v) == side and v not in binders:
            new_prefix.append((EXISTS, v))
    declared = {v for _, v in new_prefix}
    extra = [(EXISTS, v) for a in kept for v in a.variables if v not in declared]
    return QCSPInstance(new_prefix + list(dict.fromkeys(extra)), kept)


# ------------------------------------------------------------------- demos


def boolean_nae_language() -> Language:
    """CSP(NAE₃) over {0, 1}: the standard NP-complete Boolean language."""
    return Language(2, {NAE: make_nae3(0, 1, 2)})


def demo_dp() -> MonsterLanguage:
    """Four-element language whose QCSP is a coNP problem conjoined with an NP problem."""
    from .catalog import xi_language

    base = xi_language().add_constants()
    return build_conj1(base, 0)


def demo_theta2(n: Optional[int] = None):
    """Ten-element language for conjunctions of (coNP-instance ∨ NAE-instance).

    Returns the language and a builder taking a list of (I, J) pairs, with I
    over the three-element coNP language and J a NAE₃ instance over {0, 1}.
    """
    from .catalog import xi_language

    m = build_disj_csp(xi_language().add_constants(), boolean_nae_language())

    def builder(pairs) -> QCSPInstance:
        pairs = list(pairs)
        if n is not None and len(pairs) != n:
            raise ValueError(f"expected {n} pairs, got {len(pairs)}")
        return combine_disj_csp(m, pairs)

    return m, builder
