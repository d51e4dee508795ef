"""Command-line front end: ``qcsp <command> ...``.

Exit status is 0 for a true/successful result, 1 for false, 2 for any error.
Only the decision or the result document goes to stdout.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import random
import sys
import time
from typing import Callable, Optional

from . import catalog, io, monsters, ppbuild, reductions, solver
from .classify import classify3, classify_conservative
from .core import MalformedFormula, MalformedRelation, Relation, SizeError
from .gen import random_pi2, random_qcsp

EXIT_TRUE, EXIT_FALSE, EXIT_ERROR = 0, 1, 2


class UsageError(ValueError):
    pass


def _emit(doc) -> None:
    print(io.dumps(doc))


# ------------------------------------------------------------------ solve


def cmd_solve(args) -> int:
    lang = io.load_language(args.language)
    inst = io.load_instance(args.instance)
    verdict = solver.solve(inst, lang, args.method)
    print("true" if verdict.value else "false")
    if args.witness and not verdict.value:
        witness = verdict.witness
        if witness is None and inst.is_pi2():
            witness = solver.oracle_qcsp(inst, lang, tail_search=True).witness
        if witness:
            print(json.dumps({"witness": witness}, sort_keys=True))
    return EXIT_TRUE if verdict.value else EXIT_FALSE


# --------------------------------------------------------------- classify


def cmd_classify(args) -> int:
    lang = io.load_language(args.language)
    if args.conservative:
        verdict = classify_conservative(lang, args.arity_bound)
    else:
        verdict = classify3(lang, args.arity_bound)
    _emit(verdict.as_dict())
    return EXIT_TRUE


# --------------------------------------------------------------- relation


def _complement_of(arity: int, missing) -> Relation:
    return Relation.full(arity, 3).difference(Relation.from_tuples(arity, 3, [missing]))


def expected_rho(n: int) -> Relation:
    return _complement_of(2 * n, (1,) * n + (0,) * n)


def expected_omega(n: int) -> Relation:
    return _complement_of(2 * n, (1, 0) * n)


RELATIONS: dict[str, Callable[[int], Relation]] = {
    "tau": catalog.make_tau,
    "sigma_n": catalog.make_sigma_n,
    "rho": expected_rho,
    "omega": expected_omega,
}


def _named_relation(kind: str, n: Optional[int]) -> Relation:
    if kind in RELATIONS:
        if n is None:
            raise UsageError(f"relation {kind!r} needs --n")
        return RELATIONS[kind](n)
    fixed = dict(catalog.make_hardness_relations())
    gamma, gamma_p = catalog.make_strange_languages()
    fixed.update(gamma.relations)
    fixed.update(gamma_p.relations)
    fixed.update(catalog.make_boolean_gadgets())
    fixed.update({"S": catalog.make_S(), "delta_or_eq": catalog.make_delta_or_eq()})
    if kind not in fixed:
        raise UsageError(f"unknown relation kind {kind!r}")
    return fixed[kind]


def cmd_relation(args) -> int:
    rel = _named_relation(args.kind, args.n)
    doc = {"kind": args.kind, "arity": rel.arity, "domain": rel.domain, "tuples": len(rel)}
    if args.n is not None:
        doc["n"] = args.n
    if args.list:
        doc["members"] = [list(t) for t in rel.tuples]
    _emit(doc)
    return EXIT_TRUE


# ----------------------------------------------------------------- ppdef


def _ppdef_target(builder: str, k: int):
    """(formula, language, expected relation, compare Boolean slices only)."""
    if builder == "tau-rec":
        return ppbuild.build_tau_recursive(k), ppbuild.tau_language(), catalog.make_tau(k), False
    if builder == "rho":
        return ppbuild.build_rho(k), ppbuild.default_language_for("rho"), expected_rho(k), False
    if builder == "omega":
        return ppbuild.build_omega(k), ppbuild.default_language_for("omega"), expected_omega(k), False
    if builder == "sigma-omega":
        return (ppbuild.sigma_conjunction(k), ppbuild.default_language_for("omega"),
                catalog.make_sigma_n(k), False)
    if builder == "xi":
        return ppbuild.build_xi(k), catalog.xi_language(), _slice_relation(k, _any_all_equal), True
    if builder == "zeta":
        return ppbuild.build_zeta(k), catalog.zeta_language(), _slice_relation(k, _any_not_one_in_three), True
    raise UsageError(f"unknown builder {builder!r}")


def _any_all_equal(tri) -> bool:
    return tri[0] == tri[1] == tri[2]


def _any_not_one_in_three(tri) -> bool:
    return sum(tri) != 1


def _slice_relation(k: int, clause_ok) -> Relation:
    rows = [t for t in itertools.product((0, 1), repeat=3 * k)
            if any(clause_ok(t[3 * i: 3 * i + 3]) for i in range(k))]
    return Relation.from_tuples(3 * k, 3, rows)


def cmd_ppdef(args) -> int:
    from .relalg import pp_eval

    phi, lang, expected, boolean = _ppdef_target(args.builder, args.k)
    doc = {
        "builder": args.builder,
        "k": args.k,
        "free": len(phi.free_vars),
        "bound": len(phi.bound_vars),
        "atoms": len(phi.atoms),
    }
    ok = True
    if args.verify:
        got = pp_eval(phi, lang)
        if boolean:
            got = Relation.from_tuples(got.arity, 3, ppbuild.boolean_slice(got))
        missing, extra = expected.difference(got), got.difference(expected)
        ok = not len(missing) and not len(extra)
        doc.update({"verified": ok, "expected_tuples": len(expected), "got_tuples": len(got),
                    "missing": len(missing), "extra": len(extra), "boolean_slice": boolean})
    _emit(doc)
    return EXIT_TRUE if ok else EXIT_FALSE


# ---------------------------------------------------------------- reduce


def _load_qnae(path) -> reductions.QNAEInstance:
    doc = io._load(path)
    return reductions.QNAEInstance(doc.get("prefix", []), doc["clauses"])


def cmd_reduce(args) -> int:
    src = _load_qnae(args.source)
    if args.kind == "pspace":
        inst = reductions.reduce_coqnae_pspace(src, args.variant)
        lang = reductions.pspace_language(args.variant)
    elif args.kind == "conservative":
        inst = reductions.reduce_coqnae_conservative(src)
        lang = reductions.conservative_target_language()
    elif args.kind == "xi":
        inst = reductions.reduce_nae_complement_xi(src.clauses)
        lang = catalog.xi_language()
    elif args.kind == "zeta":
        inst = reductions.reduce_1in3_complement_zeta(src.clauses)
        lang = catalog.zeta_language()
    else:
        raise UsageError(f"unknown reduction {args.kind!r}")
    _emit({"language": io.language_to_dict(lang), "instance": io.instance_to_dict(inst)})
    return EXIT_TRUE


# --------------------------------------------------------------- monster


def cmd_monster(args) -> int:
    def need(path, flag):
        if path is None:
            raise UsageError(f"monster {args.kind!r} needs {flag}")
        return io.load_language(path)

    if args.kind == "dp":
        lang = monsters.demo_dp()
    elif args.kind == "theta2":
        lang, _ = monsters.demo_theta2()
    elif args.kind == "conj1":
        lang = monsters.build_conj1(need(args.gamma1, "--gamma1"), args.element)
    elif args.kind == "conj2":
        lang = monsters.build_conj2(need(args.gamma1, "--gamma1"), need(args.gamma2, "--gamma2"))
    elif args.kind == "disj-csp":
        lang = monsters.build_disj_csp(need(args.gamma1, "--gamma1"), need(args.gamma2, "--gamma2"))
    elif args.kind == "disj-qcsp":
        lang = monsters.build_disj_qcsp(need(args.gamma1, "--gamma1"), need(args.gamma2, "--gamma2"))
    else:
        raise UsageError(f"unknown monster {args.kind!r}")
    _emit(io.language_to_dict(lang))
    return EXIT_TRUE


# ----------------------------------------------------------------- bench

CORPORA = {
    "pi2-gamma": lambda: catalog.make_strange_languages()[0],
    "pi2-gammap": lambda: catalog.make_strange_languages()[1],
    "qcsp-gamma": lambda: catalog.make_strange_languages()[0],
}


def cmd_bench(args) -> int:
    if args.corpus not in CORPORA:
        raise UsageError(f"unknown corpus {args.corpus!r}")
    methods = args.methods.split(",")
    for m in methods:
        if m not in ("auto", "brute", "solve1", "solve2", "stable"):
            raise UsageError(f"unknown method {m!r}")
    lang = CORPORA[args.corpus]()
    rng = random.Random(args.seed)
    writer = csv.writer(sys.stdout)
    writer.writerow(["instance", "method", "decision", "seconds"])
    for i in range(args.count):
        if args.corpus.startswith("pi2"):
            inst = random_pi2(lang, rng, max_univ=args.max_univ, max_exist=args.max_exist,
                              max_atoms=args.max_atoms)
        else:
            inst = random_qcsp(lang, rng, max_vars=args.max_univ + args.max_exist,
                               max_atoms=args.max_atoms)
        for m in methods:
            t = time.perf_counter()
            value = solver.solve(inst, lang, m).value
            writer.writerow([i, m, str(value).lower(), f"{time.perf_counter() - t:.6f}"])
    return EXIT_TRUE


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcsp", description="QCSP solvers, classifiers and gadget builders")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="decide an instance")
    s.add_argument("--language", required=True)
    s.add_argument("--instance", required=True)
    s.add_argument("--method", default="auto", choices=["auto", "brute", "solve1", "solve2", "stable"])
    s.add_argument("--witness", action="store_true", help="print a falsifying universal assignment")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("classify", help="complexity verdict for a language")
    s.add_argument("--language", required=True)
    s.add_argument("--arity-bound", type=int, default=3)
    s.add_argument("--conservative", action="store_true")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("relation", help="materialize a catalog relation")
    s.add_argument("kind")
    s.add_argument("--n", type=int)
    s.add_argument("--list", action="store_true", help="include the tuples")
    s.set_defaults(func=cmd_relation)

    s = sub.add_parser("ppdef", help="build (and verify) a pp-definition")
    s.add_argument("--builder", required=True)
    s.add_argument("--k", "--n", dest="k", type=int, required=True)
    s.add_argument("--verify", action="store_true")
    s.set_defaults(func=cmd_ppdef)

    s = sub.add_parser("reduce", help="run a hardness reduction on a QNAE/clause file")
    s.add_argument("kind", help="pspace | conservative | xi | zeta")
    s.add_argument("--source", required=True, help='JSON {"prefix": [...], "clauses": [...]}')
    s.add_argument("--variant", default=reductions.PSPACE_VARIANTS[0], choices=reductions.PSPACE_VARIANTS)
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("monster", help="build a combined language")
    s.add_argument("kind", help="conj1 | conj2 | disj-csp | disj-qcsp | dp | theta2")
    s.add_argument("--gamma1")
    s.add_argument("--gamma2")
    s.add_argument("--element", type=int, default=0)
    s.set_defaults(func=cmd_monster)

    s = sub.add_parser("bench", help="time solver methods on a random corpus (CSV)")
    s.add_argument("--corpus", default="pi2-gamma")
    s.add_argument("--methods", default="solve1,brute")
    s.add_argument("--count", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-univ", type=int, default=3)
    s.add_argument("--max-exist", type=int, default=4)
    s.add_argument("--max-atoms", type=int, default=6)
    s.set_defaults(func=cmd_bench)
    return p


ERRORS = (UsageError, MalformedFormula, MalformedRelation, SizeError, solver.ContractError,
          KeyError, ValueError, OSError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_TRUE
    try:
        return args.func(args)
    except ERRORS as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"qcsp {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
