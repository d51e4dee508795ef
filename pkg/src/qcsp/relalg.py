"""Relational algebra over finite domains.

pp-formulas are evaluated by join-and-project: each atom becomes a table
over its distinct variables, tables are joined greedily (smallest first,
preferring shared variables), and a bound variable is projected away as soon
as no pending atom mentions it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import (
    Atom,
    Const,
    Language,
    MalformedFormula,
    MalformedRelation,
    Operation,
    PPFormula,
    Relation,
    SizeError,
    check_atoms,
    encode,
)

# joins producing more rows than this abort instead of exhausting memory
MAX_JOIN_ROWS = 1 << 26


@dataclass(frozen=True)
class ProjectivityPair:
    alpha: frozenset
    beta: frozenset
    domain: int = 3

    def __init__(self, alpha: Iterable[int], beta: Iterable[int], domain: int = 3):
        alpha, beta = frozenset(alpha), frozenset(beta)
        full = frozenset(range(domain))
        if not (alpha <= full and beta <= full):
            raise ValueError("pair mentions elements outside the domain")
        if alpha | beta != full:
            raise ValueError("alpha and beta must cover the domain")
        if alpha == full or beta == full:
            raise ValueError("alpha and beta must be proper subsets")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "domain", domain)

    def __repr__(self):
        return f"ProjectivityPair({sorted(self.alpha)}, {sorted(self.beta)})"


def all_pairs(domain: int = 3) -> list[ProjectivityPair]:
    """Every valid pair, each unordered pair listed once."""
    out = []
    subsets = [
        frozenset(s)
        for k in range(1, domain)
        for s in itertools.combinations(range(domain), k)
    ]
    full = frozenset(range(domain))
    seen = set()
    for a in subsets:
        for b in subsets:
            if a | b == full and frozenset((a, b)) not in seen:
                seen.add(frozenset((a, b)))
                out.append(ProjectivityPair(sorted(a), sorted(b), domain))
    return out


# ------------------------------------------------------------------ tables


class _Table:
    """Rows over an ordered list of distinct variables (int64 matrix)."""

    __slots__ = ("vars", "rows")

    def __init__(self, vars_: list, rows: np.ndarray):
        self.vars = vars_
        self.rows = rows

    def __len__(self):
        return self.rows.shape[0]


def _unique_rows(rows: np.ndarray, domain: int) -> np.ndarray:
    if rows.shape[0] <= 1 or rows.shape[1] == 0:
        return rows[: min(rows.shape[0], 1)] if rows.shape[1] == 0 else rows
    if domain ** rows.shape[1] < 1 << 62:
        codes = encode(rows, domain)
        _, idx = np.unique(codes, return_index=True)
        return rows[np.sort(idx)]
    return np.unique(rows, axis=0)


def _atom_table(atom: Atom, rel: Relation) -> _Table:
    rows = rel.rows.astype(np.int64)
    mask = np.ones(rows.shape[0], dtype=bool)
    first: dict[str, int] = {}
    keep_vars: list[str] = []
    keep_cols: list[int] = []
    for j, a in enumerate(atom.args):
        if isinstance(a, Const):
            mask &= rows[:, j] == a.value
        elif a in first:
            mask &= rows[:, j] == rows[:, first[a]]
        else:
            first[a] = j
            keep_vars.append(a)
            keep_cols.append(j)
    rows = rows[mask][:, keep_cols]
    return _Table(keep_vars, _unique_rows(rows, rel.domain))


def _join(left: _Table, right: _Table, domain: int) -> _Table:
    shared = [v for v in left.vars if v in right.vars]
    r_only = [v for v in right.vars if v not in left.vars]
    r_only_cols = [right.vars.index(v) for v in r_only]
    if len(left) == 0 or len(right) == 0:
        return _Table(left.vars + r_only, np.zeros((0, len(left.vars) + len(r_only)), np.int64))
    if shared:
        lk = left.rows[:, [left.vars.index(v) for v in shared]] @ (
            domain ** np.arange(len(shared) - 1, -1, -1, dtype=np.int64)
        )
        rk = right.rows[:, [right.vars.index(v) for v in shared]] @ (
            domain ** np.arange(len(shared) - 1, -1, -1, dtype=np.int64)
        )
    else:
        lk = np.zeros(len(left), np.int64)
        rk = np.zeros(len(right), np.int64)
    order = np.argsort(rk, kind="stable")
    rk_sorted = rk[order]
    lo = np.searchsorted(rk_sorted, lk, side="left")
    hi = np.searchsorted(rk_sorted, lk, side="right")
    counts = hi - lo
    total = int(counts.sum())
    if total > MAX_JOIN_ROWS:
        raise SizeError(f"intermediate join of {total} rows exceeds cap")
    left_idx = np.repeat(np.arange(len(left)), counts)
    # position inside each matching run
    starts = np.repeat(lo, counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    right_idx = order[starts + offsets]
    rows = np.hstack([left.rows[left_idx], right.rows[right_idx][:, r_only_cols]])
    return _Table(left.vars + r_only, rows)


def _project_table(t: _Table, keep: list, domain: int) -> _Table:
    cols = [t.vars.index(v) for v in keep]
    rows = t.rows[:, cols]
    return _Table(list(keep), _unique_rows(rows, domain))


def _eval_tables(tables: list[_Table], free: list, domain: int) -> _Table:
    """Join all tables and project onto ``free`` (missing free vars range freely)."""
    free_set = set(free)
    pending = list(tables)
    if any(len(t) == 0 for t in pending):
        return _Table(list(free), np.zeros((0, len(free)), np.int64))
    current: Optional[_Table] = None
    while pending:
        if current is None:
            k = min(range(len(pending)), key=lambda i: (len(pending[i]), -len(pending[i].vars)))
        else:
            cur_vars = set(current.vars)

            def score(i):
                t = pending[i]
                shared = len(cur_vars & set(t.vars))
                return (shared == 0, len(t) / (domain ** shared), -shared)

            k = min(range(len(pending)), key=score)
        nxt = pending.pop(k)
        current = nxt if current is None else _join(current, nxt, domain)
        if len(current) == 0:
            return _Table(list(free), np.zeros((0, len(free)), np.int64))
        still_needed = free_set.union(*(set(t.vars) for t in pending)) if pending else free_set
        keep = [v for v in current.vars if v in still_needed]
        if len(keep) < len(current.vars):
            current = _project_table(current, keep, domain)
    if current is None:
        current = _Table([], np.zeros((1, 0), np.int64))
    missing = [v for v in free if v not in current.vars]
    for v in missing:
        n = len(current)
        rows = np.hstack(
            [np.repeat(current.rows, domain, axis=0), np.tile(np.arange(domain), n).reshape(-1, 1)]
        )
        current = _Table(current.vars + [v], rows)
    return _project_table(current, list(free), domain) if free else current


def _tables_for(atoms: Sequence[Atom], lang: Language) -> list[_Table]:
    check_atoms(atoms, lang)
    return [_atom_table(a, lang.lookup(a.rel)) for a in atoms]


def pp_eval(phi: PPFormula, lang: Language) -> Relation:
    """The relation defined by ``phi`` over its free variables, in canonical form."""
    if not phi.free_vars:
        raise MalformedFormula("pp_eval needs at least one free variable; use pp_holds")
    t = _eval_tables(_tables_for(phi.atoms, lang), list(phi.free_vars), lang.domain)
    return Relation.from_rows(len(phi.free_vars), lang.domain, t.rows)


def pp_holds(atoms: Sequence[Atom], lang: Language) -> bool:
    """Whether the existential closure of the conjunction is satisfiable."""
    t = _eval_tables(_tables_for(atoms, lang), [], lang.domain)
    return len(t) > 0


def pp_member(phi: PPFormula, lang: Language, tup: Sequence[int]) -> bool:
    """Membership of one tuple in the relation defined by ``phi``, without materializing it."""
    if len(tup) != phi.arity:
        raise MalformedFormula("tuple length differs from formula arity")
    mapping = {v: Const(int(c)) for v, c in zip(phi.free_vars, tup)}
    return pp_holds([a.substitute(mapping) for a in phi.atoms], lang)


# ------------------------------------------------------------- preservation


def _images(op: Operation, rel: Relation, chunk: int = 1 << 20):
    """Yield code arrays of op applied componentwise to every selection of tuples."""
    rows = rel.rows.astype(np.int64)
    n, m = rows.shape[0], op.arity
    if n == 0:
        return
    weights = rel.domain ** np.arange(rel.arity - 1, -1, -1, dtype=np.int64)
    # leading argument indices are enumerated in python, the last one vectorized
    lead_block = max(1, chunk // n)
    lead = itertools.product(range(n), repeat=m - 1)
    while True:
        batch = list(itertools.islice(lead, lead_block))
        if not batch:
            break
        idx = np.array(batch, dtype=np.int64).reshape(len(batch), m - 1)
        cell = np.zeros((len(batch), n, rel.arity), dtype=np.int64)
        for p in range(m - 1):
            cell = cell * op.domain + rows[idx[:, p]][:, None, :]
        cell = cell * op.domain + rows[None, :, :]
        out = op.table[cell]
        yield out.reshape(-1, rel.arity) @ weights


def preserves(op: Operation, rel: Relation) -> bool:
    if op.domain != rel.domain:
        raise ValueError("operation and relation have different domains")
    for codes in _images(op, rel):
        pos = np.searchsorted(rel.codes, codes)
        pos[pos >= len(rel)] = 0
        if not np.all(rel.codes[pos] == codes):
            return False
    return True


def is_polymorphism(op: Operation, lang: Language) -> bool:
    if op.domain != lang.domain:
        raise ValueError("operation and language have different domains")
    if lang.with_constants and not op.is_idempotent():
        return False
    return all(preserves(op, r) for r in lang.all_relations().values())


def is_ab_projective(op: Operation, pair: ProjectivityPair) -> Optional[int]:
    """Least 1-based coordinate witnessing αβ-projectivity, or None."""
    if op.domain != pair.domain:
        raise ValueError("operation and pair have different domains")
    d = op.domain
    args = np.array(list(itertools.product(range(d), repeat=op.arity)), dtype=np.int64)
    out = op.table
    in_a = np.isin(out, list(pair.alpha))
    in_b = np.isin(out, list(pair.beta))
    for i in range(op.arity):
        col = args[:, i]
        ok_a = np.all(in_a[np.isin(col, list(pair.alpha))])
        ok_b = np.all(in_b[np.isin(col, list(pair.beta))])
        if ok_a and ok_b:
            return i + 1
    return None


# ----------------------------------------------------------------- closure


def close_tuples(seed: Iterable[Sequence[int]], ops: Iterable[Operation], arity: int | None = None,
                 domain: int | None = None) -> Relation:
    """Least superset of ``seed`` closed under every operation (semi-naive saturation)."""
    ops = list(ops)
    seed = [tuple(t) for t in seed]
    if domain is None:
        if not ops:
            domain = max((max(t) for t in seed if t), default=0) + 1
        else:
            domain = ops[0].domain
    if arity is None:
        if not seed:
            raise MalformedRelation("arity required for an empty seed")
        arity = len(seed[0])
    if any(o.domain != domain for o in ops):
        raise ValueError("operations differ in domain")
    if arity * np.log2(max(domain, 2)) > 24:
        raise SizeError("closure universe exceeds 2^24 tuples")
    start = Relation.from_tuples(arity, domain, seed)
    known = start.codes
    delta = start.rows.astype(np.int64)
    weights = domain ** np.arange(arity - 1, -1, -1, dtype=np.int64)
    while delta.shape[0]:
        all_rows = _decode_rows(known, arity, domain)
        old_rows = _decode_rows(np.setdiff1d(known, encode(delta, domain)), arity, domain)
        fresh = []
        for op in ops:
            m = op.arity
            # selections using at least one new tuple: first new position is p
            for p in range(m):
                pools = [old_rows] * p + [delta] + [all_rows] * (m - p - 1)
                if any(pl.shape[0] == 0 for pl in pools):
                    continue
                fresh.append(_apply_product(op, pools) @ weights)
        if not fresh:
            break
        new_codes = np.setdiff1d(np.unique(np.concatenate(fresh)), known)
        known = np.union1d(known, new_codes)
        delta = _decode_rows(new_codes, arity, domain)
    return Relation(arity, domain, known)


def _decode_rows(codes, arity, domain):
    from .core import decode

    return decode(codes, arity, domain).astype(np.int64)


def _apply_product(op: Operation, pools: list[np.ndarray]) -> np.ndarray:
    """op applied to every combination drawn one row from each pool."""
    sizes = [p.shape[0] for p in pools]
    total = int(np.prod(sizes))
    if total > MAX_JOIN_ROWS:
        raise SizeError("closure step too large")
    grids = np.meshgrid(*[np.arange(s) for s in sizes], indexing="ij")
    cell = np.zeros((total, pools[0].shape[1]), dtype=np.int64)
    for pool, g in zip(pools, grids):
        cell = cell * op.domain + pool[g.reshape(-1)]
    return op.table[cell]


# ------------------------------------------------------- identify / project


def identify_vars(rel: Relation, pattern: Sequence[int], out_arity: int | None = None) -> Relation:
    """R'(y_0..y_{m-1}) holds iff (y_{pattern[0]}, y_{pattern[1]}, ...) is in ``rel``."""
    pattern = list(pattern)
    if len(pattern) != rel.arity:
        raise MalformedRelation("pattern length must equal the relation arity")
    m = out_arity if out_arity is not None else (max(pattern) + 1 if pattern else 0)
    if any(p < 0 or p >= m for p in pattern):
        raise IndexError("pattern index out of range")
    args = [f"y{p}" for p in pattern]
    free = [f"y{j}" for j in range(m)]
    phi = PPFormula(free, [], [Atom("R", args)])
    return pp_eval(phi, Language(rel.domain, {"R": rel}))


def project(rel: Relation, coords) -> Relation:
    """Existential projection onto ``coords`` (0-based; a set is taken in increasing order)."""
    if isinstance(coords, (set, frozenset)):
        coords = sorted(coords)
    coords = list(coords)
    if not coords:
        raise ValueError("projection onto no coordinates")
    if any(c < 0 or c >= rel.arity for c in coords):
        raise IndexError("projection coordinate out of range")
    return Relation.from_rows(len(coords), rel.domain, rel.rows[:, coords])
