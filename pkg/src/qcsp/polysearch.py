"""Searching Pol(Γ) for operations with prescribed properties.

Table searches are SAT encodings solved with CaDiCaL through python-sat:
one Boolean per (cell, value), exactly one value per cell, a clause per
forbidden image tuple for every relation, unit clauses for idempotency and
equivalences for identities.  The solver is complete, so "no model" means
no such operation exists.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from pysat.card import CardEnc, EncType
from pysat.formula import IDPool
from pysat.solvers import Solver

from .catalog import f_ac, g_ac, s_ac
from .core import Language, Operation, Relation, SizeError, encode
from .relalg import ProjectivityPair, all_pairs, is_polymorphism

MAX_CELLS = 3 ** 5
MAX_COMBOS = 1 << 23
SAT_BACKEND = "cadical153"


# ------------------------------------------------------------ stable ops


def find_stable(lang: Language, a: int, c: int) -> Optional[Operation]:
    """A binary polymorphism with f(x, a) = x and f(x, c) = c, or None."""
    if a == c:
        raise ValueError("a and c must differ")
    d = lang.domain
    others = [b for b in range(d) if b not in (a, c)]
    free_cells = [(x, b) for b in others for x in range(d)]
    for values in itertools.product(range(d), repeat=len(free_cells)):
        table = {}
        for x in range(d):
            table[(x, a)] = x
            table[(x, c)] = c
        table.update(zip(free_cells, values))
        op = Operation.from_function(2, d, lambda x, y: table[(x, y)], f"stable_{a}{c}")
        if is_polymorphism(op, lang):
            return op
    return None


def check_named_polymorphisms(lang: Language) -> dict:
    """For each ordered pair a != c: whether s_ac, g_ac, f_ac are polymorphisms."""
    d = lang.domain
    out = {}
    for a, c in itertools.permutations(range(d), 2):
        out[(a, c)] = {
            "s": is_polymorphism(s_ac(a, c, d), lang),
            "g": is_polymorphism(g_ac(a, c, d), lang),
            "f": is_polymorphism(f_ac(a, c, d), lang),
        }
    return out


def find_semilattice(lang: Language) -> Optional[Operation]:
    """A semilattice polymorphism (binary, idempotent, commutative, associative)."""
    d = lang.domain
    if d > 4:
        return None
    pairs = list(itertools.combinations(range(d), 2))
    for values in itertools.product(range(d), repeat=len(pairs)):
        table = {(x, x): x for x in range(d)}
        for (x, y), v in zip(pairs, values):
            table[(x, y)] = table[(y, x)] = v
        if all(
            table[(table[(x, y)], z)] == table[(x, table[(y, z)])]
            for x, y, z in itertools.product(range(d), repeat=3)
        ):
            op = Operation.from_function(2, d, lambda x, y: table[(x, y)], "semilattice")
            if is_polymorphism(op, lang):
                return op
    return None


# ------------------------------------------------------------ SAT model


class TableModel:
    """SAT variables for an operation table of the given arity."""

    def __init__(self, arity: int, domain: int):
        if domain ** arity > MAX_CELLS:
            raise SizeError(f"{domain}^{arity} table cells exceed the {MAX_CELLS} cap")
        self.arity, self.domain = arity, domain
        self.ncells = domain ** arity
        self.pool = IDPool()
        # variable id of (cell, value) is cell * domain + value + 1
        self.clauses: list[list[int]] = []
        for cell in range(self.ncells):
            lits = [self.lit(cell, v) for v in range(domain)]
            self.clauses.append(lits)
            for u, w in itertools.combinations(lits, 2):
                self.clauses.append([-u, -w])
        self.top = self.ncells * domain

    def lit(self, cell: int, value: int) -> int:
        return cell * self.domain + value + 1

    def cell(self, args: Sequence[int]) -> int:
        c = 0
        for a in args:
            c = c * self.domain + a
        return c

    def new_var(self) -> int:
        self.top += 1
        return self.top

    def idempotent(self):
        for x in range(self.domain):
            self.clauses.append([self.lit(self.cell([x] * self.arity), x)])

    def equal_cells(self, c1: int, c2: int):
        if c1 == c2:
            return
        for v in range(self.domain):
            self.clauses.append([-self.lit(c1, v), self.lit(c2, v)])
            self.clauses.append([self.lit(c1, v), -self.lit(c2, v)])

    def preserve(self, rel: Relation):
        """Forbid every image tuple outside ``rel``."""
        if rel.domain != self.domain:
            raise ValueError("relation domain differs from the table domain")
        n, k, m, d = len(rel), rel.arity, self.arity, self.domain
        if n == 0:
            return
        if n ** m > MAX_COMBOS:
            raise SizeError(f"{n}^{m} tuple selections exceed the search cap")
        rows = rel.rows.astype(np.int64)
        cells = np.zeros((1, k), dtype=np.int64)
        for _ in range(m):
            cells = (cells[:, None, :] * d + rows[None, :, :]).reshape(-1, k)
        cells = np.unique(cells, axis=0)
        comp = rel.complement().rows.astype(np.int64) if k * np.log2(d) <= 24 else None
        if comp is None or comp.shape[0] == 0:
            return
        # literal id of (cells[u, j], comp[w, j]) is cells*d + comp + 1
        lits = -(cells[:, None, :] * d + comp[None, :, :] + 1)
        for clause in lits.reshape(-1, k).tolist():
            self.clauses.append(clause)

    def preserve_language(self, lang: Language):
        for rel in lang.all_relations().values():
            self.preserve(rel)
        if lang.with_constants:
            self.idempotent()

    def decode(self, model: Sequence[int], name: str = "") -> Operation:
        true = {v for v in model if v > 0}
        table = np.zeros(self.ncells, dtype=np.int64)
        for cell in range(self.ncells):
            for v in range(self.domain):
                if self.lit(cell, v) in true:
                    table[cell] = v
        return Operation(self.arity, self.domain, table, name)

    def solve(self, name: str = "") -> Optional[Operation]:
        with Solver(name=SAT_BACKEND, bootstrap_with=self.clauses) as s:
            if s.solve():
                return self.decode(s.get_model(), name)
        return None


# ------------------------------------------------------------ identities


def _siggers_pairs(d: int):
    for a, r, e in itertools.product(range(d), repeat=3):
        yield (a, r, e, a), (r, a, r, e)


def _wnu_pairs(m: int, d: int):
    for x, y in itertools.product(range(d), repeat=2):
        first = tuple([y] + [x] * (m - 1))
        for i in range(1, m):
            other = tuple([x] * i + [y] + [x] * (m - 1 - i))
            yield first, other


def parse_identity(identity: str) -> tuple[str, int]:
    if identity == "siggers4":
        return "siggers", 4
    if identity.startswith("wnu"):
        m = int(identity[3:].strip("()") or 0)
        if not 2 <= m <= 4:
            raise ValueError("wnu arity must be between 2 and 4")
        return "wnu", m
    raise ValueError(f"unknown identity {identity!r}")


def satisfies_identity(op: Operation, identity: str) -> bool:
    kind, m = parse_identity(identity)
    if op.arity != m:
        return False
    pairs = _siggers_pairs(op.domain) if kind == "siggers" else _wnu_pairs(m, op.domain)
    return all(op(*p) == op(*q) for p, q in pairs) and op.is_idempotent()


def find_identity_polymorphism(lang: Language, identity: str = "siggers4") -> Optional[Operation]:
    """An idempotent polymorphism satisfying ``siggers4`` or ``wnu(m)``, or None."""
    kind, m = parse_identity(identity)
    model = TableModel(m, lang.domain)
    model.preserve_language(lang)
    model.idempotent()
    pairs = _siggers_pairs(lang.domain) if kind == "siggers" else _wnu_pairs(m, lang.domain)
    for p, q in pairs:
        model.equal_cells(model.cell(p), model.cell(q))
    return model.solve(identity)


def has_wnu(lang: Language) -> tuple[bool, dict]:
    """Siggers test plus wnu(2)/wnu(3) corroboration."""
    sig = find_identity_polymorphism(lang, "siggers4")
    w2 = find_identity_polymorphism(lang, "wnu2")
    w3 = find_identity_polymorphism(lang, "wnu3")
    evidence = {
        "test": "siggers4",
        "siggers4": sig is not None,
        "wnu2": w2 is not None,
        "wnu3": w3 is not None,
    }
    if sig is None and (w2 is not None or w3 is not None):
        raise AssertionError("a WNU exists but the Siggers search found nothing")
    return sig is not None, evidence


# ------------------------------------------------------------ projectivity


@dataclass
class ProjectivityResult:
    pair: ProjectivityPair
    bound: int
    counterexample: Optional[Operation] = None

    @property
    def holds(self) -> bool:
        return self.counterexample is None


def all_polymorphisms_ab_projective(lang: Language, pair: ProjectivityPair,
                                    arity_bound: int = 3) -> ProjectivityResult:
    """Look for a polymorphism of arity <= bound that is not αβ-projective."""
    if arity_bound > 3:
        raise SizeError("projectivity search is bounded by arity 3")
    d = lang.domain
    alpha, beta = sorted(pair.alpha), sorted(pair.beta)
    not_alpha = [v for v in range(d) if v not in pair.alpha]
    not_beta = [v for v in range(d) if v not in pair.beta]
    for n in range(1, arity_bound + 1):
        model = TableModel(n, d)
        model.preserve_language(lang)
        for i in range(n):
            # coordinate i fails: some input with x_i in alpha leaves alpha, or same for beta
            clause = []
            for args in itertools.product(range(d), repeat=n):
                c = model.cell(args)
                if args[i] in pair.alpha:
                    clause += [model.lit(c, v) for v in not_alpha]
                if args[i] in pair.beta:
                    clause += [model.lit(c, v) for v in not_beta]
            model.clauses.append(clause)
        op = model.solve(f"non_projective_{n}")
        if op is not None:
            return ProjectivityResult(pair, arity_bound, op)
    return ProjectivityResult(pair, arity_bound)


@dataclass
class PgpEgpVerdict:
    kind: str  # "PGP", "EGP" or "inconclusive"
    pair: Optional[ProjectivityPair]
    bound: int
    heuristic: bool
    per_pair: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "pair": None if self.pair is None else [sorted(self.pair.alpha), sorted(self.pair.beta)],
            "arity_bound": self.bound,
            "heuristic": self.heuristic,
            "per_pair": self.per_pair,
        }


def pgp_egp_verdict(lang: Language, arity_bound: int = 3) -> PgpEgpVerdict:
    """PGP when every pair has a non-projective polymorphism (a sound verdict);
    EGP(pair) when some pair survives the bounded search (heuristic); inconclusive for bound < 2."""
    per_pair = {}
    survivor = None
    for pair in all_pairs(lang.domain):
        res = all_polymorphisms_ab_projective(lang, pair, arity_bound)
        key = f"{sorted(pair.alpha)}|{sorted(pair.beta)}"
        per_pair[key] = (
            "projective-up-to-bound" if res.holds else f"counterexample(arity {res.counterexample.arity})"
        )
        if res.holds and survivor is None:
            survivor = pair
    if survivor is None:
        return PgpEgpVerdict("PGP", None, arity_bound, False, per_pair)
    if arity_bound < 2:
        return PgpEgpVerdict("inconclusive", survivor, arity_bound, True, per_pair)
    return PgpEgpVerdict("EGP", survivor, arity_bound, True, per_pair)
