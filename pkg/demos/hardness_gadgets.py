"""Reducing complemented quantified NAE-3SAT into QCSP over three elements.

Builds the PSpace gadget for one source formula in every variant, solves
each output, and shows the source where the unrepaired construction
gives the wrong answer.
"""

from qcsp.core import EXISTS, FORALL
from qcsp.reductions import (
    PSPACE_VARIANTS,
    QNAEInstance,
    coqnae_eval,
    pspace_language,
    reduce_coqnae_conservative,
    conservative_target_language,
    reduce_coqnae_pspace,
)
from qcsp.solver import oracle_qcsp


def truth(inst, lang):
    return oracle_qcsp(inst, lang, max_vars=500, tail_search=True).value


sources = [
    QNAEInstance([(EXISTS, "a"), (FORALL, "b"), (EXISTS, "c")], [("a", "b", "c")]),
    QNAEInstance([(FORALL, "x1"), (FORALL, "x2")], [("x1", "x1", "x1")]),
]

for src in sources:
    print(f"source {src.prefix} {src.clauses}: complement is {coqnae_eval(src)}")
    for variant in PSPACE_VARIANTS:
        out = reduce_coqnae_pspace(src, variant)
        print(f"  {variant:20s} {len(out.prefix):3d} variables {len(out.atoms):3d} atoms -> "
              f"{truth(out, pspace_language(variant))}")
    out = reduce_coqnae_conservative(src)
    print(f"  {'conservative (tau)':20s} {len(out.prefix):3d} variables {len(out.atoms):3d} atoms -> "
          f"{truth(out, conservative_target_language())}")
