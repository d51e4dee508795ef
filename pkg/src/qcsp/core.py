"""Finite-domain relations, operations, languages, pp-formulas and QCSP instances.

Everything here is an immutable value.  Relations store their tuples as a
sorted, duplicate-free ``int8`` row array together with the base-``domain``
integer code of every row; because the first coordinate is the most
significant digit, numeric order of codes is lexicographic order of tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

FORALL = "forall"
EXISTS = "exists"

# builtin relation names, resolvable in every language
EQ = "="
FALSE = "$false"

FRESH_SEP = "#"

# 2**24 tuple universes are the largest we materialize
MAX_UNIVERSE = 1 << 24


class MalformedRelation(ValueError):
    pass


class MalformedFormula(ValueError):
    pass


class SizeError(ValueError):
    """Raised when a request would exceed a desk-scale cap."""


def check_universe(arity: int, domain: int) -> None:
    if domain ** arity > MAX_UNIVERSE:
        raise SizeError(f"{domain}^{arity} tuples exceeds the 2^24 cap")


def _weights(arity: int, domain: int) -> np.ndarray:
    return domain ** np.arange(arity - 1, -1, -1, dtype=np.int64)


def encode(rows: np.ndarray, domain: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim != 2:
        raise MalformedRelation("rows must be a 2-d array")
    return rows @ _weights(rows.shape[1], domain)


def decode(codes: np.ndarray, arity: int, domain: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty((codes.shape[0], arity), dtype=np.int8)
    rest = codes.copy()
    for j in range(arity - 1, -1, -1):
        out[:, j] = rest % domain
        rest //= domain
    return out


@dataclass(frozen=True, eq=False)
class Relation:
    """A finite relation in canonical form.

    Build instances with :meth:`from_tuples` or :meth:`from_rows`; the raw
    constructor trusts its inputs.
    """

    arity: int
    domain: int
    codes: np.ndarray = field(repr=False)

    @classmethod
    def from_rows(cls, arity: int, domain: int, rows) -> "Relation":
        if arity < 1 or domain < 1:
            raise MalformedRelation("arity and domain must be positive")
        if domain ** arity >= 1 << 62:
            raise SizeError(f"{domain}^{arity} does not fit 64-bit tuple codes")
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size == 0:
            return cls(arity, domain, np.zeros(0, dtype=np.int64))
        if rows.ndim != 2 or rows.shape[1] != arity:
            raise MalformedRelation(f"tuple length differs from arity {arity}")
        if rows.min() < 0 or rows.max() >= domain:
            raise MalformedRelation(f"entry outside domain 0..{domain - 1}")
        return cls(arity, domain, np.unique(encode(rows, domain)))

    @classmethod
    def from_tuples(cls, arity: int, domain: int, tuples: Iterable[Sequence[int]]) -> "Relation":
        tuples = [tuple(t) for t in tuples]
        for t in tuples:
            if len(t) != arity:
                raise MalformedRelation(f"tuple {t} has length {len(t)}, arity is {arity}")
        return cls.from_rows(arity, domain, np.array(tuples, dtype=np.int64).reshape(-1, arity))

    @classmethod
    def from_predicate(cls, arity: int, domain: int, pred) -> "Relation":
        check_universe(arity, domain)
        return cls.from_tuples(
            arity, domain, (t for t in itertools.product(range(domain), repeat=arity) if pred(t))
        )

    @classmethod
    def full(cls, arity: int, domain: int) -> "Relation":
        check_universe(arity, domain)
        return cls(arity, domain, np.arange(domain ** arity, dtype=np.int64))

    @classmethod
    def empty(cls, arity: int, domain: int) -> "Relation":
        return cls(arity, domain, np.zeros(0, dtype=np.int64))

    @cached_property
    def rows(self) -> np.ndarray:
        return decode(self.codes, self.arity, self.domain)

    @cached_property
    def _code_set(self) -> frozenset:
        return frozenset(self.codes.tolist())

    @property
    def tuples(self) -> list[tuple[int, ...]]:
        return [tuple(r) for r in self.rows.tolist()]

    def code_of(self, t: Sequence[int]) -> int:
        c = 0
        for v in t:
            c = c * self.domain + v
        return c

    def __contains__(self, t) -> bool:
        if len(t) != self.arity:
            return False
        if any(v < 0 or v >= self.domain for v in t):
            return False
        return self.code_of(t) in self._code_set

    def __len__(self) -> int:
        return int(self.codes.shape[0])

    def __iter__(self):
        return iter(self.tuples)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return (
            self.arity == other.arity
            and self.domain == other.domain
            and np.array_equal(self.codes, other.codes)
        )

    def __hash__(self) -> int:
        return hash((self.arity, self.domain, self.codes.tobytes()))

    def __repr__(self) -> str:
        return f"Relation(arity={self.arity}, domain={self.domain}, size={len(self)})"

    def complement(self) -> "Relation":
        check_universe(self.arity, self.domain)
        universe = np.arange(self.domain ** self.arity, dtype=np.int64)
        return Relation(self.arity, self.domain, np.setdiff1d(universe, self.codes))

    def union(self, other: "Relation") -> "Relation":
        _same_shape(self, other)
        return Relation(self.arity, self.domain, np.union1d(self.codes, other.codes))

    def intersection(self, other: "Relation") -> "Relation":
        _same_shape(self, other)
        return Relation(self.arity, self.domain, np.intersect1d(self.codes, other.codes))

    def difference(self, other: "Relation") -> "Relation":
        _same_shape(self, other)
        return Relation(self.arity, self.domain, np.setdiff1d(self.codes, other.codes))

    def with_domain(self, domain: int) -> "Relation":
        """The same tuple set viewed over a larger domain."""
        if domain < self.domain:
            raise MalformedRelation("cannot shrink the domain")
        return Relation.from_rows(self.arity, domain, self.rows)


def _same_shape(a: Relation, b: Relation) -> None:
    if a.arity != b.arity or a.domain != b.domain:
        raise MalformedRelation("relations differ in arity or domain")


def canonicalize(rel: Relation) -> Relation:
    """Return ``rel`` with sorted, duplicate-free tuples (validating entries)."""
    return Relation.from_rows(rel.arity, rel.domain, decode(rel.codes, rel.arity, rel.domain))


def singleton(value: int, domain: int) -> Relation:
    return Relation.from_tuples(1, domain, [(value,)])


def unary(values: Iterable[int], domain: int) -> Relation:
    return Relation.from_tuples(1, domain, [(v,) for v in values])


def equality(domain: int) -> Relation:
    return Relation.from_tuples(2, domain, [(v, v) for v in range(domain)])


def const_name(value: int) -> str:
    return "{%d}" % value


def _parse_const_name(name: str):
    if len(name) > 2 and name[0] == "{" and name[-1] == "}" and name[1:-1].isdigit():
        return int(name[1:-1])
    return None


# ---------------------------------------------------------------- operations


@dataclass(frozen=True, eq=False)
class Operation:
    """A total operation ``domain^arity -> domain`` stored as a flat table.

    ``table[code(args)]`` is the value, with the same encoding as relation rows.
    """

    arity: int
    domain: int
    table: np.ndarray = field(repr=False)
    name: str = ""

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.int64).reshape(-1)
        if table.shape[0] != self.domain ** self.arity:
            raise ValueError("operation table is not total")
        if table.size and (table.min() < 0 or table.max() >= self.domain):
            raise ValueError("operation value outside domain")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_function(cls, arity: int, domain: int, fn, name: str = "") -> "Operation":
        table = [fn(*args) for args in itertools.product(range(domain), repeat=arity)]
        return cls(arity, domain, np.array(table, dtype=np.int64), name)

    @classmethod
    def projection(cls, arity: int, domain: int, index: int) -> "Operation":
        return cls.from_function(arity, domain, lambda *a: a[index], f"pr{index}")

    def __call__(self, *args: int) -> int:
        c = 0
        for v in args:
            c = c * self.domain + v
        return int(self.table[c])

    def apply_rows(self, *rows: np.ndarray) -> np.ndarray:
        """Apply componentwise to ``arity`` equally shaped integer arrays."""
        if len(rows) != self.arity:
            raise ValueError("wrong number of arguments")
        code = np.zeros(np.shape(rows[0]), dtype=np.int64)
        for r in rows:
            code = code * self.domain + np.asarray(r, dtype=np.int64)
        return self.table[code]

    def is_idempotent(self) -> bool:
        return all(self(*([x] * self.arity)) == x for x in range(self.domain))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Operation):
            return NotImplemented
        return (
            self.arity == other.arity
            and self.domain == other.domain
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self) -> int:
        return hash((self.arity, self.domain, self.table.tobytes()))

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"Operation({label.strip() or '?'}, arity={self.arity}, domain={self.domain})"


# ----------------------------------------------------------------- languages


@dataclass(frozen=True)
class Language:
    domain: int
    relations: Mapping[str, Relation]
    with_constants: bool = False

    def __post_init__(self):
        rels = dict(self.relations)
        for name, rel in rels.items():
            if rel.domain != self.domain:
                raise MalformedRelation(f"relation {name!r} has domain {rel.domain}, not {self.domain}")
            if name in (EQ, FALSE):
                raise MalformedRelation(f"{name!r} is a reserved relation name")
        object.__setattr__(self, "relations", rels)

    def __hash__(self):
        return hash((self.domain, self.with_constants, tuple(sorted(self.relations.items()))))

    def __eq__(self, other):
        if not isinstance(other, Language):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.with_constants == other.with_constants
            and self.relations == other.relations
        )

    def __getitem__(self, name: str) -> Relation:
        return self.lookup(name)

    def lookup(self, name: str) -> Relation:
        """Resolve a relation name; ``=``, ``$false`` and ``{c}`` are always available."""
        rel = self.relations.get(name)
        if rel is not None:
            return rel
        if name == EQ:
            return equality(self.domain)
        if name == FALSE:
            return Relation.empty(1, self.domain)
        c = _parse_const_name(name)
        if c is not None and c < self.domain:
            return singleton(c, self.domain)
        raise KeyError(f"unknown relation {name!r}")

    def all_relations(self) -> dict[str, Relation]:
        """Named relations plus the singleton constants when ``with_constants`` is set."""
        out = dict(self.relations)
        if self.with_constants:
            for c in range(self.domain):
                out.setdefault(const_name(c), singleton(c, self.domain))
        return out

    def add_constants(self) -> "Language":
        return Language(self.domain, self.relations, True)

    def with_relations(self, extra: Mapping[str, Relation]) -> "Language":
        rels = dict(self.relations)
        rels.update(extra)
        return Language(self.domain, rels, self.with_constants)

    def explicit(self) -> "Language":
        """Materialize auto-constants as ordinary named relations."""
        return Language(self.domain, self.all_relations(), False)


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Const:
    value: int

    def __repr__(self):
        return f"Const({self.value})"


Term = Union[str, Const]


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple

    def __init__(self, rel: str, args: Iterable[Term]):
        object.__setattr__(self, "rel", rel)
        object.__setattr__(self, "args", tuple(args))

    @property
    def variables(self) -> list[str]:
        return [a for a in self.args if isinstance(a, str)]

    def substitute(self, mapping: Mapping[str, Term]) -> "Atom":
        return Atom(self.rel, [mapping.get(a, a) if isinstance(a, str) else a for a in self.args])

    def __repr__(self):
        args = ", ".join(a if isinstance(a, str) else str(a.value) for a in self.args)
        return f"{self.rel}({args})"


def check_atoms(atoms: Iterable[Atom], lang: Language) -> None:
    for atom in atoms:
        rel = lang.lookup(atom.rel)
        if len(atom.args) != rel.arity:
            raise MalformedFormula(f"atom {atom!r}: {len(atom.args)} args for arity {rel.arity}")
        for a in atom.args:
            if isinstance(a, Const) and not 0 <= a.value < lang.domain:
                raise MalformedFormula(f"atom {atom!r}: constant outside domain")


def atom_vars(atoms: Iterable[Atom]) -> list[str]:
    seen: dict[str, None] = {}
    for atom in atoms:
        for v in atom.variables:
            seen.setdefault(v, None)
    return list(seen)


@dataclass(frozen=True)
class PPFormula:
    free_vars: tuple
    bound_vars: tuple
    atoms: tuple

    def __init__(self, free_vars, bound_vars, atoms):
        object.__setattr__(self, "free_vars", tuple(free_vars))
        object.__setattr__(self, "bound_vars", tuple(bound_vars))
        object.__setattr__(self, "atoms", tuple(atoms))
        free, bound = set(self.free_vars), set(self.bound_vars)
        if len(free) != len(self.free_vars) or len(bound) != len(self.bound_vars):
            raise MalformedFormula("repeated variable in quantifier lists")
        if free & bound:
            raise MalformedFormula(f"variables both free and bound: {sorted(free & bound)}")
        stray = set(atom_vars(self.atoms)) - free - bound
        if stray:
            raise MalformedFormula(f"undeclared variables {sorted(stray)}")

    @property
    def arity(self) -> int:
        return len(self.free_vars)

    def instantiate(self, args: Sequence[Term], taken: set) -> tuple[list[Atom], list[str]]:
        """Plug ``args`` in for the free variables, renaming bound variables apart.

        Returns the atoms and the fresh bound names; ``taken`` is updated in place.
        """
        if len(args) != len(self.free_vars):
            raise MalformedFormula("wrong number of arguments for pp-formula")
        mapping: dict[str, Term] = dict(zip(self.free_vars, args))
        fresh_bound = []
        for b in self.bound_vars:
            nb = fresh(b, taken)
            taken.add(nb)
            mapping[b] = nb
            fresh_bound.append(nb)
        return [a.substitute(mapping) for a in self.atoms], fresh_bound


def fresh(base: str, taken) -> str:
    root = base.split(FRESH_SEP)[0]
    if root not in taken:
        return root
    k = 1
    while f"{root}{FRESH_SEP}{k}" in taken:
        k += 1
    return f"{root}{FRESH_SEP}{k}"


def conjoin(formulas: Sequence[PPFormula]) -> PPFormula:
    """Conjunction of pp-formulas sharing the free variable list of the first."""
    if not formulas:
        raise MalformedFormula("empty conjunction")
    free = formulas[0].free_vars
    taken = set(free)
    atoms: list[Atom] = []
    bound: list[str] = []
    for phi in formulas:
        if set(phi.free_vars) != set(free):
            raise MalformedFormula("conjuncts must share their free variables")
        new_atoms, new_bound = phi.instantiate(list(phi.free_vars), taken)
        atoms += new_atoms
        bound += new_bound
    return PPFormula(free, bound, atoms)


# ----------------------------------------------------------------- instances


@dataclass(frozen=True)
class QCSPInstance:
    prefix: tuple
    atoms: tuple

    def __init__(self, prefix, atoms):
        prefix = tuple((q, v) for q, v in prefix)
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "atoms", tuple(atoms))
        names = [v for _, v in prefix]
        if len(set(names)) != len(names):
            raise MalformedFormula("variable quantified twice")
        for q, _ in prefix:
            if q not in (FORALL, EXISTS):
                raise MalformedFormula(f"unknown quantifier {q!r}")
        stray = set(atom_vars(self.atoms)) - set(names)
        if stray:
            raise MalformedFormula(f"unquantified variables {sorted(stray)}")

    @property
    def variables(self) -> list[str]:
        return [v for _, v in self.prefix]

    @property
    def universals(self) -> list[str]:
        return [v for q, v in self.prefix if q == FORALL]

    @property
    def existentials(self) -> list[str]:
        return [v for q, v in self.prefix if q == EXISTS]

    def quantifier(self, var: str) -> str:
        for q, v in self.prefix:
            if v == var:
                return q
        raise KeyError(var)

    def is_pi2(self) -> bool:
        seen_exists = False
        for q, _ in self.prefix:
            if q == EXISTS:
                seen_exists = True
            elif seen_exists:
                return False
        return True

    def blocks(self) -> list[tuple[str, list[str]]]:
        """Maximal runs of equal quantifiers, outermost first."""
        out: list[tuple[str, list[str]]] = []
        for q, v in self.prefix:
            if out and out[-1][0] == q:
                out[-1][1].append(v)
            else:
                out.append((q, [v]))
        return out

    def rename_apart(self, taken: set) -> "QCSPInstance":
        mapping = {}
        for v in self.variables:
            nv = fresh(v, taken)
            taken.add(nv)
            mapping[v] = nv
        return QCSPInstance(
            [(q, mapping[v]) for q, v in self.prefix], [a.substitute(mapping) for a in self.atoms]
        )


def false_instance() -> QCSPInstance:
    return QCSPInstance([], [Atom(FALSE, [Const(0)])])


def csp_instance(atoms: Sequence[Atom]) -> QCSPInstance:
    return QCSPInstance([(EXISTS, v) for v in atom_vars(atoms)], atoms)


Assignment = dict


def propagate_equalities(inst: QCSPInstance) -> QCSPInstance:
    """Eliminate ``=`` atoms wherever substitution is sound.

    ``y = c`` and ``y = z`` with ``y`` existential and quantified after every
    variable it is equated with are removed by substituting into ``y``.
    ``x = c`` for universal ``x`` becomes the singleton atom ``{c}(x)``.
    Two distinct constants give the canonical false instance.
    """
    prefix = list(inst.prefix)
    atoms = list(inst.atoms)
    while True:
        pos = {v: i for i, (_, v) in enumerate(prefix)}
        quant = {v: q for q, v in prefix}
        changed = False
        for k, atom in enumerate(atoms):
            if atom.rel != EQ:
                continue
            a, b = atom.args
            if a == b:
                del atoms[k]
                changed = True
                break
            if isinstance(a, Const) and isinstance(b, Const):
                return false_instance()
            if isinstance(a, Const):
                a, b = b, a
            if isinstance(b, Const):
                if quant[a] == EXISTS:
                    atoms = _subst(atoms[:k] + atoms[k + 1 :], {a: b})
                    del prefix[pos[a]]
                else:
                    atoms[k] = Atom(const_name(b.value), [a])
                changed = True
                break
            # two variables: eliminate the inner one if it is existential
            inner, outer = (a, b) if pos[a] > pos[b] else (b, a)
            if quant[inner] == EXISTS:
                atoms = _subst(atoms[:k] + atoms[k + 1 :], {inner: outer})
                del prefix[pos[inner]]
                changed = True
                break
        if not changed:
            break
    return QCSPInstance(prefix, _dedupe(atoms))


def _subst(atoms: Sequence[Atom], mapping) -> list[Atom]:
    return [a.substitute(mapping) for a in atoms]


def _dedupe(atoms: Sequence[Atom]) -> list[Atom]:
    return list(dict.fromkeys(atoms))


def expand_constants(inst: QCSPInstance) -> QCSPInstance:
    """Replace constant literals by fresh innermost existentials pinned by ``{c}`` atoms."""
    taken = set(inst.variables)
    pinned: dict[int, str] = {}
    atoms = []
    for atom in inst.atoms:
        args = []
        for a in atom.args:
            if isinstance(a, Const):
                if a.value not in pinned:
                    v = fresh(f"c{a.value}", taken)
                    taken.add(v)
                    pinned[a.value] = v
                args.append(pinned[a.value])
            else:
                args.append(a)
        atoms.append(Atom(atom.rel, args))
    atoms += [Atom(const_name(c), [v]) for c, v in pinned.items()]
    prefix = list(inst.prefix) + [(EXISTS, v) for v in pinned.values()]
    return QCSPInstance(prefix, atoms)


def inline_constants(inst: QCSPInstance) -> QCSPInstance:
    """Turn ``{c}(y)`` atoms on existential ``y`` into constant literals."""
    quant = {v: q for q, v in inst.prefix}
    atoms = []
    for atom in inst.atoms:
        c = _parse_const_name(atom.rel)
        if c is not None and isinstance(atom.args[0], str) and quant[atom.args[0]] == EXISTS:
            atoms.append(Atom(EQ, [atom.args[0], Const(c)]))
        else:
            atoms.append(atom)
    return propagate_equalities(QCSPInstance(inst.prefix, atoms))
