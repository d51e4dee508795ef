"""Decision procedures for CSP and QCSP instances.

Reference oracles (``csp_brute``, ``oracle_qcsp``) only test atoms against
relation membership; the polynomial procedures run on generalized arc
consistency (``csp_ac``), which is complete for languages closed under a
semilattice operation.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import (
    EXISTS,
    FORALL,
    Atom,
    Const,
    Language,
    MalformedFormula,
    QCSPInstance,
    SizeError,
    atom_vars,
    check_atoms,
    fresh,
)

DEFAULT_ORACLE_CAP = 12
DEFAULT_BRUTE_CAP = 16
SMALL_TABLE = 64  # constraint tables up to this size are scanned in pure Python


class ContractError(ValueError):
    """A solver precondition on the language does not hold."""


def oracle_cap() -> int:
    return int(os.environ.get("QCSP_MAX_ORACLE_VARS", DEFAULT_ORACLE_CAP))


@dataclass
class Verdict:
    value: bool
    witness: Optional[dict] = None

    def __bool__(self):
        return self.value


@dataclass(frozen=True)
class Pi2Instance:
    universal_vars: tuple
    existential_vars: tuple
    atoms: tuple

    def __init__(self, universal_vars, existential_vars, atoms):
        object.__setattr__(self, "universal_vars", tuple(universal_vars))
        object.__setattr__(self, "existential_vars", tuple(existential_vars))
        object.__setattr__(self, "atoms", tuple(atoms))
        if set(self.universal_vars) & set(self.existential_vars):
            raise MalformedFormula("universal and existential variables overlap")
        stray = set(atom_vars(self.atoms)) - set(self.universal_vars) - set(self.existential_vars)
        if stray:
            raise MalformedFormula(f"unquantified variables {sorted(stray)}")

    @classmethod
    def from_qcsp(cls, inst: QCSPInstance) -> "Pi2Instance":
        if not inst.is_pi2():
            raise MalformedFormula("instance is not of the form forall* exists*")
        return cls(inst.universals, inst.existentials, inst.atoms)

    def to_qcsp(self) -> QCSPInstance:
        prefix = [(FORALL, v) for v in self.universal_vars]
        prefix += [(EXISTS, v) for v in self.existential_vars]
        return QCSPInstance(prefix, self.atoms)


@dataclass(frozen=True)
class MinimalOneSet:
    variable: str
    tuple: Optional[tuple]


# ------------------------------------------------------------------ oracles


def _atom_holds(atom: Atom, rel, env: Mapping[str, int]) -> bool:
    vals = tuple(a.value if isinstance(a, Const) else env[a] for a in atom.args)
    return vals in rel


def _schedule(order: Sequence[str], atoms: Sequence[Atom], lang: Language):
    """For each position, the atoms whose last variable (in ``order``) sits there."""
    pos = {v: i for i, v in enumerate(order)}
    at: list[list] = [[] for _ in order]
    ground = []
    for atom in atoms:
        rel = lang.lookup(atom.rel)
        vs = atom.variables
        if not vs:
            ground.append((atom, rel))
        else:
            at[max(pos[v] for v in vs)].append((atom, rel))
    return ground, at


def csp_brute(atoms: Sequence[Atom], lang: Language, max_vars: int = DEFAULT_BRUTE_CAP,
              fixed: Optional[Mapping[str, int]] = None) -> Optional[dict]:
    """A satisfying assignment by plain backtracking, or None."""
    atoms = list(atoms)
    check_atoms(atoms, lang)
    fixed = dict(fixed or {})
    order = [v for v in atom_vars(atoms) if v not in fixed]
    if len(order) > max_vars:
        raise SizeError(f"{len(order)} variables exceed the brute-force cap {max_vars}")
    ground, at = _schedule(order, [a.substitute({k: Const(v) for k, v in fixed.items()}) for a in atoms], lang)
    if not all(_atom_holds(a, r, {}) for a, r in ground):
        return None
    env: dict[str, int] = {}
    d = lang.domain

    def rec(i):
        if i == len(order):
            return True
        v = order[i]
        for val in range(d):
            env[v] = val
            if all(_atom_holds(a, r, env) for a, r in at[i]) and rec(i + 1):
                return True
        del env[v]
        return False

    if rec(0):
        out = dict(fixed)
        out.update(env)
        return out
    return None


def oracle_qcsp(inst: QCSPInstance, lang: Language, max_vars: Optional[int] = None,
                tail_search: bool = False) -> Verdict:
    """Exact truth by game-tree search; false Π₂ verdicts carry a falsifying universal assignment.

    With ``tail_search`` every node runs arc consistency on the whole matrix
    (a wipe-out, or a universal whose domain shrank, loses at once) and the
    innermost existential block is handed to ``CompiledCSP.search``.  This
    makes gadget-sized instances (20+ variables) tractable.
    """
    cap = oracle_cap() if max_vars is None else max_vars
    if len(inst.prefix) > cap:
        raise SizeError(f"{len(inst.prefix)} variables exceed the oracle cap {cap}")
    check_atoms(inst.atoms, lang)
    order = inst.variables
    quants = [q for q, _ in inst.prefix]
    ground, at = _schedule(order, inst.atoms, lang)
    n, d = len(order), lang.domain
    pi2 = inst.is_pi2()
    universals = inst.universals
    # suffix_exists[i]: every quantifier from i on is existential
    suffix_exists = [all(q == EXISTS for q in quants[i:]) for i in range(n + 1)]
    env: dict[str, int] = {}
    witness: dict = {}
    tail = None
    if tail_search:
        tail = CompiledCSP(inst.atoms, lang, extra_vars=order)

    def record():
        if pi2 and not witness:
            witness.update({u: env.get(u, 0) for u in universals})

    def rec_ac(i, doms):
        # doms: arc-consistent domains given env
        if suffix_exists[i]:
            if tail._search(doms) is not None:
                return True
            record()
            return False
        v = order[i]
        iv = tail.index[v]
        dom = doms[iv]
        if quants[i] == FORALL and dom != tail.full:
            env[v] = next(val for val in range(d) if not dom >> val & 1)
            record()
            del env[v]
            return False
        for val in range(d):
            if not dom >> val & 1:
                continue
            env[v] = val
            nd = list(doms)
            nd[iv] = 1 << val
            nd = tail.refine(nd, [iv])
            ok = nd is not None and rec_ac(i + 1, nd)
            if nd is None and quants[i] == FORALL:
                record()
            del env[v]
            if quants[i] == EXISTS and ok:
                return True
            if quants[i] == FORALL and not ok:
                return False
        if quants[i] == EXISTS:
            return False
        return True

    def rec(i):
        if i == n:
            return True
        v = order[i]
        if quants[i] == EXISTS:
            for val in range(d):
                env[v] = val
                if all(_atom_holds(a, r, env) for a, r in at[i]) and rec(i + 1):
                    del env[v]
                    return True
            del env[v]
            if suffix_exists[i]:
                record()
            return False
        for val in range(d):
            env[v] = val
            if not all(_atom_holds(a, r, env) for a, r in at[i]):
                record()
                del env[v]
                return False
            if not rec(i + 1):
                del env[v]
                return False
        del env[v]
        return True

    if not all(_atom_holds(a, r, {}) for a, r in ground):
        return Verdict(False, {u: 0 for u in universals} if pi2 else None)
    if tail is not None:
        doms = tail.propagate()
        if doms is None:
            return Verdict(False, {u: 0 for u in universals} if pi2 else None)
        if rec_ac(0, doms):
            return Verdict(True)
        return Verdict(False, dict(witness) if pi2 else None)
    if rec(0):
        return Verdict(True)
    return Verdict(False, dict(witness) if pi2 else None)


# ------------------------------------------------------- arc consistency


class CompiledCSP:
    """A conjunction of atoms prepared for repeated arc-consistency runs.

    Constants and repeated variables are folded into the constraint tables at
    compile time; domains are bitmasks.
    """

    def __init__(self, atoms: Sequence[Atom], lang: Language, extra_vars: Sequence[str] = ()):
        atoms = list(atoms)
        check_atoms(atoms, lang)
        self.domain = lang.domain
        self.vars = list(dict.fromkeys(list(atom_vars(atoms)) + list(extra_vars)))
        self.index = {v: i for i, v in enumerate(self.vars)}
        self.full = (1 << self.domain) - 1
        self.trivially_false = False
        self.cons: list[tuple[tuple[int, ...], np.ndarray]] = []
        self.watch: list[list[int]] = [[] for _ in self.vars]
        seen = {}
        for atom in atoms:
            rows = lang.lookup(atom.rel).rows.astype(np.int64)
            mask = np.ones(rows.shape[0], dtype=bool)
            first: dict[str, int] = {}
            cols, scope = [], []
            for j, a in enumerate(atom.args):
                if isinstance(a, Const):
                    mask &= rows[:, j] == a.value
                elif a in first:
                    mask &= rows[:, j] == rows[:, first[a]]
                else:
                    first[a] = j
                    cols.append(j)
                    scope.append(self.index[a])
            table = np.unique(rows[mask][:, cols], axis=0) if cols else rows[mask][:, :0]
            if table.shape[0] == 0:
                self.trivially_false = True
                continue
            if not scope:
                continue
            key = (tuple(scope), table.tobytes())
            if key in seen:
                continue
            seen[key] = True
            k = len(self.cons)
            bits = np.left_shift(1, table)
            if bits.shape[0] <= SMALL_TABLE:
                bits = [tuple(r) for r in bits.tolist()]
            self.cons.append((tuple(scope), bits))
            for s in set(scope):
                self.watch[s].append(k)

    def initial(self, fixed: Optional[Mapping[str, int]] = None) -> Optional[list[int]]:
        """Domains with ``fixed`` applied, before any propagation."""
        if self.trivially_false:
            return None
        doms = [self.full] * len(self.vars)
        for v, val in (fixed or {}).items():
            i = self.index.get(v)
            if i is None:
                continue
            if not 0 <= val < self.domain:
                return None
            doms[i] &= 1 << val
        return doms

    def propagate(self, fixed: Optional[Mapping[str, int]] = None) -> Optional[list[int]]:
        """Arc-consistent domains (bitmasks), or None on a wipe-out."""
        doms = self.initial(fixed)
        if doms is None:
            return None
        return self._revise(doms, list(range(len(self.cons))))

    def refine(self, doms: list[int], changed: Sequence[int]) -> Optional[list[int]]:
        """Re-establish arc consistency on a copy of ``doms`` after the given variable indices shrank."""
        queue = list(dict.fromkeys(k for i in changed for k in self.watch[i]))
        return self._revise(list(doms), queue)

    def _revise(self, doms: list[int], queue: list[int]) -> Optional[list[int]]:
        queued = [False] * len(self.cons)
        for k in queue:
            queued[k] = True
        while queue:
            k = queue.pop()
            queued[k] = False
            scope, bits = self.cons[k]
            if isinstance(bits, list):
                live = [r for r in bits if all(r[j] & doms[s] for j, s in enumerate(scope))]
                if not live:
                    return None
                support = [0] * len(scope)
                for r in live:
                    for j in range(len(scope)):
                        support[j] |= r[j]
            else:
                mask = None
                for j, s in enumerate(scope):
                    m = (bits[:, j] & doms[s]) != 0
                    mask = m if mask is None else mask & m
                live = bits[mask]
                if live.shape[0] == 0:
                    return None
                support = np.bitwise_or.reduce(live, axis=0).tolist()
            for j, s in enumerate(scope):
                nd = doms[s] & support[j]
                if nd != doms[s]:
                    if nd == 0:
                        return None
                    doms[s] = nd
                    for k2 in self.watch[s]:
                        if k2 != k and not queued[k2]:
                            queued[k2] = True
                            queue.append(k2)
        return doms

    def satisfiable(self, fixed: Optional[Mapping[str, int]] = None) -> bool:
        return self.propagate(fixed) is not None

    def search(self, fixed: Optional[Mapping[str, int]] = None,
               doms: Optional[list[int]] = None) -> Optional[dict]:
        """A solution by backtracking with full arc consistency at every node, or None.

        Complete for every language (unlike ``satisfiable``, which is only a
        decision procedure when a semilattice preserves the language).
        ``doms`` may pass in domains that are already arc consistent.
        """
        if doms is None:
            doms = self.propagate(fixed)
        if doms is None:
            return None
        sol = self._search(doms)
        if sol is not None and fixed:
            sol.update(fixed)
        return sol

    def _search(self, doms: list[int]) -> Optional[dict]:
        best, i = None, -1
        for j, m in enumerate(doms):
            if m & (m - 1):
                c = bin(m).count("1")
                if best is None or c < best:
                    best, i = c, j
        if i < 0:
            return {v: doms[j].bit_length() - 1 for j, v in enumerate(self.vars)}
        for val in range(self.domain):
            if doms[i] >> val & 1:
                nd = list(doms)
                nd[i] = 1 << val
                nd = self.refine(nd, [i])
                if nd is not None:
                    sol = self._search(nd)
                    if sol is not None:
                        return sol
        return None


def csp_ac(atoms: Sequence[Atom], lang: Language, fixed: Optional[Mapping[str, int]] = None,
           check: bool = False) -> bool:
    """Satisfiability by generalized arc consistency (complete for semilattice-closed languages)."""
    if check:
        require_semilattice(lang)
    return CompiledCSP(atoms, lang).satisfiable(fixed)


def require_semilattice(lang: Language) -> None:
    from .polysearch import find_semilattice

    if find_semilattice(lang) is None:
        raise ContractError("language is not preserved by any semilattice operation")


def _require_ops(lang: Language, ops, what: str) -> None:
    from .relalg import is_polymorphism

    for op in ops:
        if not is_polymorphism(op, lang):
            raise ContractError(f"language is not preserved by {op.name or what}")


# ------------------------------------------------------------- Solve_1


def solve1(inst: Pi2Instance, lang: Language, check: bool = False,
           universals_as_targets: bool = True) -> bool:
    """Π₂ decision for languages preserved by g_02 and s_02.

    The j-loop runs over every existential variable and, unless
    ``universals_as_targets`` is switched off, over the universal variables
    as well: a universal x_k behaves like an existential pinned to x_k, and
    skipping it misses instances whose only obstruction sits on universals.
    """
    if check:
        from .catalog import g_ac, s_ac

        _require_ops(lang, [g_ac(0, 2, lang.domain), s_ac(0, 2, lang.domain)], "g_02/s_02")
    xs = list(inst.universal_vars)
    csp = CompiledCSP(inst.atoms, lang, xs + list(inst.existential_vars))
    n = len(xs)

    def sat(xvals, extra=None):
        fixed = dict(zip(xs, xvals))
        if extra:
            fixed.update(extra)
        return csp.satisfiable(fixed)

    if not sat([0] * n) or not sat([1] * n):
        return False
    targets = list(inst.existential_vars)
    if universals_as_targets:
        targets += xs
    for y in targets:
        h = []
        for i in range(n):
            c = [1] * n
            c[i] = 0
            if y in xs:
                # a pinned universal has exactly the value the context gives it
                D = {c[xs.index(y)]}
            else:
                D = {a for a in range(lang.domain) if sat(c, {y: a})}
            if not D:
                return False
            h.append(0 if D == {1} else 1)
        if not sat(h):
            return False
    return True


# ------------------------------------------------------------- Solve_2


MAX_SOLVE2_ARITY = 12


def minimal_one_sets(inst: Pi2Instance, lang: Language, csp: Optional[CompiledCSP] = None):
    """α_j for every existential y_j, or None if some context is unsatisfiable."""
    xs = list(inst.universal_vars)
    n = len(xs)
    csp = csp or CompiledCSP(inst.atoms, lang, xs + list(inst.existential_vars))
    out = []
    for y in inst.existential_vars:
        alpha = [0] * n
        for i in range(n):
            c = [2] * n
            c[i] = 0
            fixed = dict(zip(xs, c))
            D = set()
            for a in range(lang.domain):
                fixed[y] = a
                if csp.satisfiable(fixed):
                    D.add(a)
            if not D:
                return None
            if D == {0}:
                alpha[i] = 1
        out.append(MinimalOneSet(y, tuple(alpha)))
    return out


def solve2(inst: Pi2Instance, lang: Language, check: bool = False) -> bool:
    """Π₂ decision for languages preserved by f_02."""
    if check:
        from .catalog import f_ac

        _require_ops(lang, [f_ac(0, 2, lang.domain)], "f_02")
    xs = list(inst.universal_vars)
    n = len(xs)
    csp = CompiledCSP(inst.atoms, lang, xs + list(inst.existential_vars))

    def sat(xvals):
        return csp.satisfiable(dict(zip(xs, xvals)))

    if not sat([0] * n):
        return False
    for i in range(n):
        c = [0] * n
        c[i] = 1
        if not sat(c):
            return False
    sets = minimal_one_sets(inst, lang, csp)
    if sets is None:
        return False
    alpha = {m.variable: m.tuple for m in sets}
    xpos = {x: i for i, x in enumerate(xs)}
    for atom in inst.atoms:
        zs = atom.args
        if len(zs) > MAX_SOLVE2_ARITY:
            raise SizeError(f"constraint arity {len(zs)} exceeds {MAX_SOLVE2_ARITY}")
        vecs = []
        for z in zs:
            if isinstance(z, Const):
                vecs.append(None)
            elif z in xpos:
                e = [0] * n
                e[xpos[z]] = 1
                vecs.append(tuple(e))
            else:
                vecs.append(alpha[z])
        seen = set()
        for V in itertools.product((0, 1), repeat=len(zs)):
            beta = [0] * n
            for take, vec in zip(V, vecs):
                if take and vec is not None:
                    beta = [b | v for b, v in zip(beta, vec)]
            beta = tuple(beta)
            if beta in seen:
                continue
            seen.add(beta)
            if not sat(beta):
                return False
    return True


# --------------------------------------------------------- QCSP -> Π₂


def quantifier_blocks(inst: QCSPInstance) -> list[tuple[list[str], list[str]]]:
    """(X_i, Y_i) pairs: universal run then existential run; either may be empty."""
    out: list[tuple[list[str], list[str]]] = []
    for q, vs in inst.blocks():
        if q == FORALL:
            out.append((list(vs), []))
        elif out and not out[-1][1]:
            out[-1] = (out[-1][0], list(vs))
        else:
            out.append(([], list(vs)))
    return out


def reduce_to_pi2(inst: QCSPInstance, lang: Language, check: bool = False) -> Pi2Instance:
    """Equivalent Π₂ instance for languages preserved by s_2 and a 0-stable operation.

    Each block i gets a copy of the matrix in which the later universals are
    replaced by the constant 0 and the later existentials by fresh names.
    """
    if not lang.with_constants:
        raise ContractError("the reduction needs the constants in the language")
    if check:
        from .catalog import s2
        from .polysearch import find_stable

        _require_ops(lang, [s2(lang.domain)], "s_2")
        if find_stable(lang, 0, 2) is None:
            raise ContractError("language has no 0-stable polymorphism")
    blocks = quantifier_blocks(inst)
    xs = [x for X, _ in blocks for x in X]
    ys = [y for _, Y in blocks for y in Y]
    if len(blocks) <= 1:
        return Pi2Instance(xs, ys, inst.atoms)
    taken = set(inst.variables)
    atoms: list[Atom] = []
    extra: list[str] = []
    for i in range(len(blocks)):
        later_x = [x for X, _ in blocks[i + 1 :] for x in X]
        later_y = [y for _, Y in blocks[i + 1 :] for y in Y]
        mapping: dict = {x: Const(0) for x in later_x}
        for y in later_y:
            ny = fresh(y, taken)
            taken.add(ny)
            mapping[y] = ny
            extra.append(ny)
        atoms += [a.substitute(mapping) for a in inst.atoms]
    used = set(atom_vars(atoms))
    extra = [v for v in extra if v in used]
    return Pi2Instance(xs, ys + extra, list(dict.fromkeys(atoms)))


# -------------------------------------------------- stable game solver


def solve_stable(inst: QCSPInstance, lang: Language, check: bool = False) -> bool:
    """Depth-first play: universals branch, each existential is fixed by one CSP probe."""
    if check:
        from .catalog import s2
        from .polysearch import find_stable

        _require_ops(lang, [s2(lang.domain)], "s_2")
        if find_stable(lang, 0, 2) is None:
            raise ContractError("language has no 0-stable polymorphism")
    csp = CompiledCSP(inst.atoms, lang, inst.variables)
    prefix = list(inst.prefix)
    n = len(prefix)
    fixed: dict[str, int] = {}

    def rec(i):
        if i == n:
            return csp.satisfiable(fixed)
        q, v = prefix[i]
        if q == FORALL:
            for val in range(lang.domain):
                fixed[v] = val
                ok = rec(i + 1)
                del fixed[v]
                if not ok:
                    return False
            return True
        probe = dict(fixed)
        for q2, v2 in prefix[i + 1 :]:
            if q2 == FORALL:
                probe[v2] = 0
        Y = []
        for a in range(lang.domain):
            probe[v] = a
            if csp.satisfiable(probe):
                Y.append(a)
        if not Y:
            return False
        if len(Y) > 1 and 2 not in Y:
            raise AssertionError("semilattice closure violated: several values but not 2")
        fixed[v] = Y[0] if len(Y) == 1 else 2
        ok = rec(i + 1)
        del fixed[v]
        return ok

    return rec(0)


# ------------------------------------------------------------- dispatch


def solve_method(inst: QCSPInstance, lang: Language) -> str:
    """Name of the procedure ``solve_auto`` would run."""
    from .catalog import f_ac, g_ac, s2, s_ac
    from .polysearch import find_stable
    from .relalg import is_polymorphism

    if lang.domain == 3 and lang.with_constants:
        if is_polymorphism(f_ac(0, 2), lang):
            return "solve2"
        if is_polymorphism(g_ac(0, 2), lang) and is_polymorphism(s_ac(0, 2), lang):
            return "solve1"
        if is_polymorphism(s2(), lang) and find_stable(lang, 0, 2) is not None:
            return "stable"
    return "oracle"


def solve_auto(inst: QCSPInstance, lang: Language) -> bool:
    method = solve_method(inst, lang)
    if method == "solve2":
        return solve2(reduce_to_pi2(inst, lang), lang)
    if method == "solve1":
        return solve1(reduce_to_pi2(inst, lang), lang)
    if method == "stable":
        return solve_stable(inst, lang)
    return oracle_qcsp(inst, lang).value


def solve(inst: QCSPInstance, lang: Language, method: str = "auto") -> Verdict:
    """Front door used by the CLI: method in auto, brute, solve1, solve2, stable."""
    if method == "auto":
        return Verdict(solve_auto(inst, lang))
    if method == "brute":
        return oracle_qcsp(inst, lang)
    if method == "solve1":
        return Verdict(solve1(reduce_to_pi2(inst, lang), lang))
    if method == "solve2":
        return Verdict(solve2(reduce_to_pi2(inst, lang), lang))
    if method == "stable":
        return Verdict(solve_stable(inst, lang))
    raise ValueError(f"unknown method {method!r}")
