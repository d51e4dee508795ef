"""Two three-element languages whose QCSP is in P for different reasons.

Prints their classification, the operations that witness tractability,
and the verdicts of the matching Π₂ algorithm against brute force on a
few random instances.
"""

import random

from qcsp.catalog import make_strange_languages
from qcsp.classify import classify3
from qcsp.gen import random_pi2
from qcsp.solver import Pi2Instance, oracle_qcsp, solve1, solve2

gamma, gamma_p = make_strange_languages()

for name, lang, algo in (("Gamma", gamma, solve1), ("Gamma'", gamma_p, solve2)):
    v = classify3(lang)
    print(f"{name}: {v.cls} (case {v.case_id}), witness pair {v.evidence.get('pair_ac')}")
    rng = random.Random(1)
    for i in range(5):
        inst = random_pi2(lang, rng, max_atoms=3)
        fast = algo(Pi2Instance.from_qcsp(inst), lang)
        slow = oracle_qcsp(inst, lang).value
        print(f"  instance {i}: {len(inst.universals)} universal, {len(inst.existentials)} existential, "
              f"{len(inst.atoms)} atoms -> {algo.__name__}={fast} brute={slow}")
