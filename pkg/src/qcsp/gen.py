"""Seeded random corpora: instances, languages and QNAE formulas."""

from __future__ import annotations

import itertools
import random
from typing import Optional

from .core import EXISTS, FORALL, Atom, Const, Language, QCSPInstance, Relation, const_name
from .relalg import close_tuples


def _pick_relations(lang: Language, include_constants: bool):
    rels = dict(lang.relations)
    if include_constants and lang.with_constants:
        for c in range(lang.domain):
            rels[const_name(c)] = lang.lookup(const_name(c))
    return sorted(rels.items())


def random_atoms(lang: Language, rng: random.Random, variables: list[str], n_atoms: int,
                 const_prob: float = 0.1, eq_prob: float = 0.05) -> list[Atom]:
    rels = _pick_relations(lang, include_constants=True)
    atoms = []
    for _ in range(n_atoms):
        if rng.random() < eq_prob and len(variables) >= 2:
            atoms.append(Atom("=", rng.sample(variables, 2)))
            continue
        name, rel = rng.choice(rels)
        args = []
        for _ in range(rel.arity):
            if lang.with_constants and rng.random() < const_prob:
                args.append(Const(rng.randrange(lang.domain)))
            else:
                args.append(rng.choice(variables))
        atoms.append(Atom(name, args))
    return atoms


def random_pi2(lang: Language, rng: random.Random, max_univ: int = 3, max_exist: int = 4,
               max_atoms: int = 6) -> QCSPInstance:
    nu = rng.randint(0, max_univ)
    ne = rng.randint(1, max_exist)
    xs = [f"x{i}" for i in range(1, nu + 1)]
    ys = [f"y{i}" for i in range(1, ne + 1)]
    atoms = random_atoms(lang, rng, xs + ys, rng.randint(1, max_atoms))
    prefix = [(FORALL, x) for x in xs] + [(EXISTS, y) for y in ys]
    return QCSPInstance(prefix, atoms)


def random_qcsp(lang: Language, rng: random.Random, max_blocks: int = 3, max_vars: int = 8,
                max_atoms: int = 6) -> QCSPInstance:
    """Random prefix with up to ``max_blocks`` alternating quantifier blocks."""
    nblocks = rng.randint(1, max_blocks)
    first = rng.choice((FORALL, EXISTS))
    total = rng.randint(nblocks, max(nblocks, max_vars))
    sizes = [1] * nblocks
    for _ in range(total - nblocks):
        sizes[rng.randrange(nblocks)] += 1
    prefix = []
    q = first
    k = 0
    for size in sizes:
        for _ in range(size):
            k += 1
            prefix.append((q, f"{'x' if q == FORALL else 'y'}{k}"))
        q = EXISTS if q == FORALL else FORALL
    variables = [v for _, v in prefix]
    atoms = random_atoms(lang, rng, variables, rng.randint(1, max_atoms))
    return QCSPInstance(prefix, atoms)


def random_closed_language(rng: random.Random, ops, domain: int = 3, n_rels: Optional[int] = None,
                           max_arity: int = 3, seeds: int = 3, with_constants: bool = True) -> Language:
    """Relations generated by closing random seed tuples under ``ops``."""
    n_rels = n_rels or rng.randint(1, 3)
    rels = {}
    for i in range(n_rels):
        arity = rng.randint(1, max_arity)
        universe = list(itertools.product(range(domain), repeat=arity))
        seed = rng.sample(universe, min(len(universe), rng.randint(1, seeds)))
        rels[f"R{i}"] = close_tuples(seed, ops, arity=arity, domain=domain)
    return Language(domain, rels, with_constants=with_constants)


def random_relation(rng: random.Random, arity: int, domain: int, density: float = 0.5) -> Relation:
    universe = itertools.product(range(domain), repeat=arity)
    return Relation.from_tuples(arity, domain, [t for t in universe if rng.random() < density])
