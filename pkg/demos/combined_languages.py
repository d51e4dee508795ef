"""Languages whose QCSP mixes NP and coNP behaviour.

The four-element language conjoins a coNP-complete QCSP with CSP(NAE₃);
the ten-element one takes conjunctions of (coNP instance or NAE instance).
"""

from qcsp.core import FORALL, Atom, QCSPInstance, csp_instance
from qcsp.monsters import NAE, combine_conj1, demo_dp, demo_theta2
from qcsp.reductions import reduce_nae_complement_xi
from qcsp.solver import oracle_qcsp


def truth(inst, lang):
    return oracle_qcsp(inst, lang, max_vars=200, tail_search=True).value


dp = demo_dp()
print(f"conjunction language: {dp.domain} elements, relations {sorted(dp.relations)}")
co = reduce_nae_complement_xi([("a", "a", "a")])  # NAE(a,a,a) has no solution, so this is true
nae = csp_instance([Atom(NAE, ["p", "q", "r"]), Atom(NAE, ["p", "p", "q"])])
inst = combine_conj1(dp, co, nae)
print(f"  coNP part true: {truth(co, dp.gamma1)}, NAE part satisfiable: {truth(nae, dp)}, "
      f"combined: {truth(inst, dp)}")

theta, build = demo_theta2()
print(f"disjunction language: {theta.domain} elements, domain map {list(theta.domain_map)}")
never = QCSPInstance([(FORALL, "x")], [Atom("{0}", ["x"])])  # false over three elements
stuck = csp_instance([Atom(NAE, ["u", "u", "u"])])  # unsatisfiable
for pairs in ([(never, nae), (co, stuck)], [(never, nae), (never, stuck)]):
    sides = [(truth(i, theta.gamma1), truth(j, theta.gamma2)) for i, j in pairs]
    print(f"  pair verdicts {sides} -> combined {truth(build(pairs), theta)}")
