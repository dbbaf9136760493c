"""JSON documents: spaces, partitions, random variables, scenarios and exact scalars.

Scalars are written as ``"p/q"`` strings or ``{"a": "p/q", "b": "r/s", "d": 6}``
for quadratic irrationals, so every document re-parses bit-exactly.  Every
loader error names the offending field (``outcomes[2].mass``) and, for JSON
syntax errors, the line and column.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path

from .errors import DocumentError, SigmaLabError
from .lattice import Partition
from .scalar import DIGITS, CReal, Quad, decimal_str, quad
from .space import Event, FiniteSpace

_RATIONAL = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")


# -- scalars --------------------------------------------------------------------

def scalar_to_json(x):
    if isinstance(x, Quad):
        return {"a": scalar_to_json(x.a), "b": scalar_to_json(x.b), "d": x.d}
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _rational(obj, where):
    if isinstance(obj, bool):
        raise DocumentError("expected a rational, got a boolean", where)
    if isinstance(obj, int):
        return Fraction(obj)
    if isinstance(obj, float):
        raise DocumentError(f"floating-point value {obj!r} is not exact; write it as \"p/q\"", where)
    if isinstance(obj, str) and _RATIONAL.match(obj):
        try:
            return Fraction(obj.replace(" ", ""))
        except ZeroDivisionError:
            raise DocumentError(f"zero denominator in {obj!r}", where) from None
    raise DocumentError(f"expected a rational \"p/q\", got {obj!r}", where)


def scalar_from_json(obj, where="value"):
    if isinstance(obj, dict):
        missing = [k for k in ("a", "b", "d") if k not in obj]
        if missing:
            raise DocumentError(f"quadratic scalar lacks {', '.join(missing)}", where)
        d = obj["d"]
        if not isinstance(d, int) or isinstance(d, bool):
            raise DocumentError("radicand must be an integer", f"{where}.d")
        try:
            return quad(_rational(obj["a"], f"{where}.a"), _rational(obj["b"], f"{where}.b"), d)
        except SigmaLabError as exc:
            raise DocumentError(str(exc), where) from None
        except ValueError as exc:
            raise DocumentError(str(exc), f"{where}.d") from None
    return _rational(obj, where)


def creal_to_json(c):
    c = CReal.of(c)
    doc = {"decimal": c.decimal(DIGITS), "ulp": f"1e-{DIGITS}",
           "lo": scalar_to_json(c.lo), "hi": scalar_to_json(c.hi),
           "exact": scalar_to_json(c.exact) if c.exact is not None else None}
    if c.power is not None and c.exponent != 1:
        doc["power"] = scalar_to_json(c.power)
        doc["exponent"] = scalar_to_json(c.exponent)
    return doc


def creal_from_json(doc, where="value"):
    if not isinstance(doc, dict) or "lo" not in doc or "hi" not in doc:
        raise DocumentError("certified real needs lo and hi", where)
    lo = _rational(doc["lo"], f"{where}.lo")
    hi = _rational(doc["hi"], f"{where}.hi")
    if doc.get("exact") is not None:
        exact = scalar_from_json(doc["exact"], f"{where}.exact")
        if "power" not in doc:
            return CReal.of(exact)
        return CReal(lo, hi, exact=exact, power=scalar_from_json(doc["power"], f"{where}.power"),
                     exponent=_rational(doc["exponent"], f"{where}.exponent"))
    if "power" in doc:
        return CReal(lo, hi, power=scalar_from_json(doc["power"], f"{where}.power"),
                     exponent=_rational(doc["exponent"], f"{where}.exponent"))
    return CReal.interval(lo, hi)


def value_to_json(v):
    """Exact scalars as scalars; certified reals with bounds and a 50-digit decimal."""
    if isinstance(v, CReal):
        if v.exact is not None:
            return scalar_to_json(v.exact)
        return creal_to_json(v)
    return scalar_to_json(v)


def value_from_json(doc, where="value"):
    if isinstance(doc, dict) and "lo" in doc:
        return creal_from_json(doc, where)
    return scalar_from_json(doc, where)


def decimal_of(v, digits=DIGITS):
    if isinstance(v, CReal):
        return v.decimal(digits)
    return decimal_str(v, digits)


# -- files ----------------------------------------------------------------------------

def load_json(path):
    """Parse a JSON file; syntax errors report ``path:line:column``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DocumentError(f"cannot read: {exc.strerror}", str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc.msg}", f"{path}:{exc.lineno}:{exc.colno}") from None


def dumps(doc):
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def dump_json(doc, path):
    Path(path).write_text(dumps(doc))


# -- spaces, partitions, random variables ---------------------------------------------

def space_to_json(space):
    return {"outcomes": [{"id": i, "mass": scalar_to_json(m)} for i, m in zip(space.ids, space.masses)]}


def space_from_json(doc, where="space"):
    if not isinstance(doc, dict):
        raise DocumentError("a space document must be an object", where)
    outs = doc.get("outcomes")
    if not isinstance(outs, list) or not outs:
        raise DocumentError("expected a non-empty list", f"{where}.outcomes")
    ids, masses = [], []
    for k, o in enumerate(outs):
        at = f"{where}.outcomes[{k}]"
        if not isinstance(o, dict) or "id" not in o or "mass" not in o:
            raise DocumentError("each outcome needs \"id\" and \"mass\"", at)
        if not isinstance(o["id"], (str, int)) or isinstance(o["id"], bool):
            raise DocumentError("outcome id must be a string", f"{at}.id")
        ids.append(str(o["id"]))
        masses.append(scalar_from_json(o["mass"], f"{at}.mass"))
    try:
        return FiniteSpace(ids, masses)
    except SigmaLabError as exc:
        raise DocumentError(str(exc), f"{where}.outcomes") from None


def partition_to_json(part, space_ref=""):
    sp = part.space
    atoms = [[sp.ids[i] for i in range(len(sp.ids)) if (a >> i) & 1] for a in part.atoms]
    null = [sp.ids[i] for i, l in enumerate(part.labels) if l < 0]
    doc = {"space": space_ref, "atoms": atoms}
    if null:
        doc["null"] = null
    return doc


def _ids(space, items, where):
    if not isinstance(items, list):
        raise DocumentError("expected a list of outcome ids", where)
    out = []
    for j, ident in enumerate(items):
        if str(ident) not in space.index:
            raise DocumentError(f"unknown outcome {ident!r}", f"{where}[{j}]")
        out.append(str(ident))
    return out


def partition_from_json(doc, space, where="partition"):
    """Atoms must cover every positive-mass outcome; null outcomes may be omitted."""
    if not isinstance(doc, dict) or "atoms" not in doc:
        raise DocumentError("a partition document needs \"atoms\"", where)
    atoms = doc["atoms"]
    if not isinstance(atoms, list):
        raise DocumentError("expected a list of atoms", f"{where}.atoms")
    seen = {}
    for k, atom in enumerate(atoms):
        for ident in _ids(space, atom, f"{where}.atoms[{k}]"):
            if ident in seen:
                raise DocumentError(f"outcome {ident!r} is in atoms {seen[ident]} and {k}", f"{where}.atoms[{k}]")
            seen[ident] = k
    missing = [i for n, i in enumerate(space.ids) if i not in seen and not space.is_null(n)]
    if missing:
        raise DocumentError(f"positive-mass outcomes not covered: {', '.join(missing)}", f"{where}.atoms")
    return Partition(space, [seen.get(i) for i in space.ids])


def event_from_json(doc, space, where="event"):
    items = doc.get("event") if isinstance(doc, dict) else doc
    return space.event(_ids(space, items, where))


def event_to_json(event):
    return {"event": list(event.members())}


def rv_to_json(rv):
    return {"values": {i: scalar_to_json(v) for i, v in zip(rv.space.ids, rv.values)}}


def rv_from_json(doc, space, where="random_variable"):
    from .conditioning import RandomVariable

    if not isinstance(doc, dict) or not isinstance(doc.get("values"), dict):
        raise DocumentError("a random variable needs a \"values\" object", where)
    vals = doc["values"]
    for ident in vals:
        if ident not in space.index:
            raise DocumentError(f"unknown outcome {ident!r}", f"{where}.values")
    out = []
    for n, ident in enumerate(space.ids):
        if ident in vals:
            out.append(scalar_from_json(vals[ident], f"{where}.values.{ident}"))
        elif space.is_null(n):
            out.append(Fraction(0))
        else:
            raise DocumentError(f"no value for outcome {ident!r}", f"{where}.values")
    return RandomVariable(space, out)


# -- scenarios -------------------------------------------------------------------------

def scenario_from_json(doc, where="scenario"):
    """``{"type": "gallery:<name>" | "explicit", "params": {...}, "tail": ...}``.

    Explicit params: ``space`` (space document), ``stages`` (list of atom
    lists), ``limit`` (atom list) and optional ``events`` (name -> ids).
    """
    from .detect import TAILS, ExplicitScenario
    from . import gallery

    if not isinstance(doc, dict) or "type" not in doc:
        raise DocumentError("a scenario document needs \"type\"", where)
    kind = doc["type"]
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise DocumentError("expected an object", f"{where}.params")
    tail = doc.get("tail")
    if tail is not None and tail not in TAILS:
        raise DocumentError(f"unknown tail {tail!r}; expected one of none, constant, inc, dec", f"{where}.tail")
    if isinstance(kind, str) and kind.startswith("gallery:"):
        name = kind.split(":", 1)[1]
        if name not in gallery.ENTRIES:
            raise DocumentError(f"unknown gallery entry {name!r}", f"{where}.type")
        try:
            scen = gallery.get_entry(name).factory(**params)
        except TypeError as exc:
            raise DocumentError(f"bad params: {exc}", f"{where}.params") from None
        except SigmaLabError as exc:
            raise DocumentError(str(exc), f"{where}.params") from None
        if tail is not None:
            scen.tail = TAILS[tail]
        return scen
    if kind != "explicit":
        raise DocumentError(f"unknown scenario type {kind!r}", f"{where}.type")
    for key in ("space", "stages", "limit"):
        if key not in params:
            raise DocumentError(f"explicit scenario needs params.{key}", f"{where}.params")
    space = space_from_json(params["space"], f"{where}.params.space")
    stages = params["stages"]
    if not isinstance(stages, list) or not stages:
        raise DocumentError("expected a non-empty list of stages", f"{where}.params.stages")
    parts = [partition_from_json({"atoms": s}, space, f"{where}.params.stages[{k}]")
             for k, s in enumerate(stages)]
    limit = partition_from_json({"atoms": params["limit"]}, space, f"{where}.params.limit")
    events = {}
    for name, ids in (params.get("events") or {}).items():
        events[name] = event_from_json(ids, space, f"{where}.params.events.{name}").mask
    return ExplicitScenario(space, parts, limit, events, tail or "none", doc.get("name", "explicit"))


def events_to_json(space, events):
    return {k: list(Event(space, m).members()) for k, m in events.items()}
