"""Canonical JSON for languages and instances.

Language: {"domain": d, "with_constants": bool,
           "relations": {name: {"arity": k, "tuples": [[...], ...]}},
           "domain_map": [[tag, ...], ...]}   (domain_map only for built monsters)
Instance: {"prefix": [["forall"|"exists", var], ...],
           "atoms": [{"rel": name | "=", "args": [var | {"const": e}, ...]}, ...]}
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

from .core import (
    EXISTS,
    FORALL,
    Atom,
    Const,
    Language,
    MalformedFormula,
    MalformedRelation,
    QCSPInstance,
    Relation,
)
from .monsters import domain_map_json


def language_to_dict(lang: Language) -> dict:
    out = {
        "domain": lang.domain,
        "with_constants": lang.with_constants,
        "relations": {
            name: {"arity": rel.arity, "tuples": [list(t) for t in sorted(rel.tuples)]}
            for name, rel in sorted(lang.relations.items())
        },
    }
    dm = domain_map_json(lang)
    if dm:
        out["domain_map"] = dm
    return out


def language_from_dict(doc: dict) -> Language:
    try:
        domain = int(doc["domain"])
        rels = {}
        for name, body in doc["relations"].items():
            arity = int(body["arity"])
            tuples = [tuple(t) for t in body["tuples"]]
            for t in tuples:
                if len(t) != arity:
                    raise MalformedRelation(f"relation {name!r}: tuple {list(t)} has wrong length")
                if not all(isinstance(v, int) and 0 <= v < domain for v in t):
                    raise MalformedRelation(f"relation {name!r}: tuple {list(t)} leaves the domain")
            rels[name] = Relation.from_tuples(arity, domain, tuples)
        return Language(domain, rels, bool(doc.get("with_constants", False)))
    except (KeyError, TypeError) as exc:
        raise MalformedRelation(f"bad language document: {exc}") from exc


def _term_to_json(t):
    return {"const": t.value} if isinstance(t, Const) else t


def _term_from_json(t):
    if isinstance(t, str):
        return t
    if isinstance(t, dict) and set(t) == {"const"} and isinstance(t["const"], int):
        return Const(t["const"])
    raise MalformedFormula(f"bad term {t!r}")


def instance_to_dict(inst: QCSPInstance) -> dict:
    return {
        "prefix": [[q, v] for q, v in inst.prefix],
        "atoms": [{"rel": a.rel, "args": [_term_to_json(t) for t in a.args]} for a in inst.atoms],
    }


def instance_from_dict(doc: dict) -> QCSPInstance:
    try:
        prefix = []
        for q, v in doc["prefix"]:
            if q not in (FORALL, EXISTS):
                raise MalformedFormula(f"unknown quantifier {q!r}")
            prefix.append((q, v))
        atoms = [Atom(a["rel"], [_term_from_json(t) for t in a["args"]]) for a in doc["atoms"]]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MalformedFormula):
            raise
        raise MalformedFormula(f"bad instance document: {exc}") from exc
    return QCSPInstance(prefix, atoms)


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1)


def dump_language(lang: Language) -> str:
    return dumps(language_to_dict(lang))


def dump_instance(inst: QCSPInstance) -> str:
    return dumps(instance_to_dict(inst))


PathLike = Union[str, Path]


def _load(path: PathLike) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedFormula(f"{path}: invalid JSON ({exc})") from exc


def load_language(path: PathLike) -> Language:
    return language_from_dict(_load(path))


def load_instance(path: PathLike) -> QCSPInstance:
    return instance_from_dict(_load(path))
