"""Complexity verdicts for QCSP over 3-element languages with constants, and over
conservative languages."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .core import Language, Relation
from .polysearch import (
    check_named_polymorphisms,
    find_stable,
    has_wnu,
    pgp_egp_verdict,
)

P = "P"
NP_COMPLETE = "NP-complete"
CONP_COMPLETE = "coNP-complete"
PSPACE_COMPLETE = "PSpace-complete"
INCONCLUSIVE = "inconclusive"

CASE_CLASS = {
    1: P,
    2: NP_COMPLETE,
    3: PSPACE_COMPLETE,
    4: PSPACE_COMPLETE,
    5: P,
    6: P,
    7: CONP_COMPLETE,
}


@dataclass
class ComplexityVerdict:
    cls: str
    case_id: Optional[object]
    evidence: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"class": self.cls, "case": self.case_id, "evidence": self.evidence}


def _op_table(op) -> Optional[list]:
    return None if op is None else op.table.tolist()


def classify3(lang: Language, arity_bound: int = 3) -> ComplexityVerdict:
    """Run the seven-case dispatch in order; the first case that fires decides."""
    if lang.domain != 3:
        raise ValueError("the three-element classifier needs domain 3")
    lang = lang.add_constants()
    checks: list[dict] = []
    ev: dict = {"checks": checks}

    growth = pgp_egp_verdict(lang, arity_bound)
    ev["growth"] = growth.as_dict()
    if growth.kind == "inconclusive":
        checks.append({"check": "pgp_egp", "outcome": "inconclusive"})
        return ComplexityVerdict(INCONCLUSIVE, None, ev)

    wnu, wnu_ev = has_wnu(lang)
    ev["wnu"] = wnu_ev
    pgp = growth.kind == "PGP"

    checks.append({"case": 1, "condition": "PGP and WNU", "fires": pgp and wnu})
    if pgp and wnu:
        return ComplexityVerdict(P, 1, ev)
    checks.append({"case": 2, "condition": "PGP and no WNU", "fires": pgp and not wnu})
    if pgp:
        return ComplexityVerdict(NP_COMPLETE, 2, ev)

    case3 = not wnu
    stable = {}
    for a, c in itertools.permutations(range(3), 2):
        stable[f"{a}{c}"] = _op_table(find_stable(lang, a, c))
    case4 = all(v is None for v in stable.values())
    ev["stable"] = stable
    ev["pspace_cases_firing"] = [k for k, f in ((3, case3), (4, case4)) if f]
    checks.append({"case": 3, "condition": "EGP and no WNU", "fires": case3})
    checks.append({"case": 4, "condition": "EGP and no stable operation", "fires": case4})
    if case3:
        return ComplexityVerdict(PSPACE_COMPLETE, 3, ev)
    if case4:
        return ComplexityVerdict(PSPACE_COMPLETE, 4, ev)

    named = check_named_polymorphisms(lang)
    ev["named"] = {f"{a}{c}": v for (a, c), v in named.items()}
    sg = [k for k, v in named.items() if v["s"] and v["g"]]
    checks.append({"case": 5, "condition": "s_ac and g_ac", "fires": bool(sg)})
    if sg:
        ev["pair_ac"] = list(sg[0])
        return ComplexityVerdict(P, 5, ev)
    fs = [k for k, v in named.items() if v["f"]]
    checks.append({"case": 6, "condition": "f_ac", "fires": bool(fs)})
    if fs:
        ev["pair_ac"] = list(fs[0])
        return ComplexityVerdict(P, 6, ev)
    checks.append({"case": 7, "condition": "otherwise", "fires": True})
    return ComplexityVerdict(CONP_COMPLETE, 7, ev)


def is_conservative(lang: Language) -> bool:
    have = {frozenset(t[0] for t in r.tuples) for r in lang.all_relations().values() if r.arity == 1}
    elements = range(lang.domain)
    for k in range(1, lang.domain + 1):
        for subset in itertools.combinations(elements, k):
            if frozenset(subset) not in have:
                return False
    return True


def conservative_closure(lang: Language) -> Language:
    """Add every non-empty unary relation."""
    extra = {}
    for k in range(1, lang.domain + 1):
        for subset in itertools.combinations(range(lang.domain), k):
            name = "U_" + "".join(map(str, subset))
            extra[name] = Relation.from_tuples(1, lang.domain, [(v,) for v in subset])
    return lang.with_relations(extra)


def classify_conservative(lang: Language, arity_bound: int = 3) -> ComplexityVerdict:
    """PGP: P with a WNU, NP-complete without; EGP: PSpace-complete."""
    if not is_conservative(lang):
        raise ValueError("language is not conservative: some unary relation is missing")
    growth = pgp_egp_verdict(lang, arity_bound)
    ev: dict = {"growth": growth.as_dict()}
    if growth.kind == "inconclusive":
        return ComplexityVerdict(INCONCLUSIVE, None, ev)
    if growth.kind == "EGP":
        return ComplexityVerdict(PSPACE_COMPLETE, "EGP", ev)
    wnu, wnu_ev = has_wnu(lang)
    ev["wnu"] = wnu_ev
    return ComplexityVerdict(P if wnu else NP_COMPLETE, "PGP+WNU" if wnu else "PGP", ev)
