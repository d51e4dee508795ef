"""Reference evaluators written against the plain definitions, sharing no code with the solvers."""

import itertools

from qcsp.core import Const


def _value(term, env):
    return term.value if isinstance(term, Const) else env[term]


def _rel_tuples(lang, name):
    return set(lang.lookup(name).tuples)


def holds(atoms, lang, env):
    for atom in atoms:
        vals = tuple(_value(t, env) for t in atom.args)
        if atom.rel == "=":
            if vals[0] != vals[1]:
                return False
        elif vals not in _rel_tuples(lang, atom.rel):
            return False
    return True


def qcsp_truth(inst, lang):
    """Full expansion of the quantifier prefix."""
    prefix = list(inst.prefix)

    def rec(i, env):
        if i == len(prefix):
            return holds(inst.atoms, lang, env)
        q, v = prefix[i]
        results = (rec(i + 1, {**env, v: a}) for a in range(lang.domain))
        return all(results) if q == "forall" else any(results)

    return rec(0, {})


def pp_relation(phi, lang):
    """Tuples over the free variables extendable to a satisfying assignment."""
    out = set()
    n_free, n_bound = len(phi.free_vars), len(phi.bound_vars)
    for free in itertools.product(range(lang.domain), repeat=n_free):
        env = dict(zip(phi.free_vars, free))
        for bound in itertools.product(range(lang.domain), repeat=n_bound):
            env.update(zip(phi.bound_vars, bound))
            if holds(phi.atoms, lang, env):
                out.add(free)
                break
    return out


def csp_satisfiable(atoms, lang):
    names = sorted({v for a in atoms for v in a.args if isinstance(v, str)})
    for vals in itertools.product(range(lang.domain), repeat=len(names)):
        if holds(atoms, lang, dict(zip(names, vals))):
            return True
    return False
