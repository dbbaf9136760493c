"""Report emission: run reports, convergence reports as JSON, CSV series.

Reports carry no timestamps or host data, so identical inputs give
byte-identical output.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from pathlib import Path

from .io import decimal_of, dumps, partition_to_json, value_to_json
from .scalar import CReal

CSV_DIGITS = 30


def significant(v, digits=CSV_DIGITS):
    """``digits`` significant decimal digits of an exact or certified value."""
    text = decimal_of(v, digits + 40)
    with localcontext() as ctx:
        ctx.prec = digits
        d = +Decimal(text)
    if d == 0:
        return "0"
    return format(d, f".{digits - 1}e") if abs(d) < Decimal("1e-6") else format(d, "f")


def file_digest(path):
    h = hashlib.sha256(Path(path).read_bytes())
    return "sha256:" + h.hexdigest()


@dataclass
class RunReport:
    """Envelope written by every CLI command."""

    command: list
    inputs: dict = field(default_factory=dict)        # path -> digest
    result: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    series: list = field(default_factory=list)         # rows of emit_series
    provenance: list = field(default_factory=list)     # facts exercised by the run
    ok: bool = True

    def to_json(self):
        doc = {"command": list(self.command), "inputs": dict(self.inputs), "ok": self.ok,
               "result": self.result}
        if self.verdicts:
            doc["verdicts"] = self.verdicts
        if self.series:
            doc["series"] = self.series
        if self.provenance:
            doc["provenance"] = sorted(set(self.provenance))
        return doc

    def dumps(self):
        return dumps(self.to_json())

    def write(self, path):
        Path(path).write_text(self.dumps())


def _point_exact(pt):
    return bool(pt.exact) and not (isinstance(pt.value, CReal) and pt.value.exact is None)


def series_rows(report):
    rows = []
    for mode, pts in report.series.items():
        for pt in pts:
            rows.append({"n": pt.n, "mode": mode, "statistic": significant(pt.value),
                         "exact": _point_exact(pt)})
    for pt in report.weak_bp:
        rows.append({"n": pt.n, "mode": pt.mode, "statistic": significant(pt.value), "exact": True})
    rows.sort(key=lambda r: (r["mode"], r["n"]))
    return rows


def emit_series(report, path=None):
    """CSV with columns n, mode, statistic, exact; returns the text and writes it if asked.

    The exact values go to ``<path>.exact.json`` (see :func:`exact_sidecar`).
    """
    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["n", "mode", "statistic", "exact"], lineterminator="\n")
    writer.writeheader()
    for row in series_rows(report):
        writer.writerow({**row, "exact": "true" if row["exact"] else "false"})
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
        sidecar = Path(str(path) + ".exact.json") if not str(path).endswith(".csv") \
            else Path(str(path)[:-4] + ".exact.json")
        sidecar.write_text(dumps(exact_sidecar(report)))
    return text


def exact_sidecar(report):
    out = {}
    for mode, pts in report.series.items():
        out[mode] = [{"n": pt.n, "value": value_to_json(pt.value), "exact": _point_exact(pt)} for pt in pts]
    if report.weak_bp:
        out["WC-BP"] = [{"n": pt.n, "value": value_to_json(pt.value), "exact": True} for pt in report.weak_bp]
    return {"scenario": report.scenario, "series": out}


def convergence_report_to_json(report):
    doc = {
        "scenario": report.scenario,
        "horizon": report.horizon,
        "modes": list(report.modes),
        "p": str(report.p),
        "q": str(report.q),
        "verdicts": dict(report.verdicts),
        "series": exact_sidecar(report)["series"],
    }
    if report.stc:
        doc["stc"] = [{"n": r.n, "liminf": partition_to_json(r.liminf)["atoms"],
                       "limsup": partition_to_json(r.limsup)["atoms"],
                       "liminf_is_limit": r.liminf_is_limit, "limsup_is_limit": r.limsup_is_limit,
                       "stabilized": r.stabilized, "statistic": value_to_json(r.statistic)}
                      for r in report.stc]
    if report.monotone is not None:
        m = report.monotone
        doc["monotone"] = {"increasing": m.increasing, "decreasing": m.decreasing, "declared": m.declared,
                           "matches_limit": m.matches_limit}
    if report.notes:
        doc["notes"] = list(report.notes)
    return doc


def claims_to_json(claims):
    return [{"name": c.name, "source": c.source, "holds": bool(c.holds),
             "tolerance": c.tolerance if isinstance(c.tolerance, (int, float)) else str(c.tolerance),
             "detail": c.detail} for c in claims]
