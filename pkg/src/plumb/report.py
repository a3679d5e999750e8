"""Analysis reports: assembly, JSON rendering and aligned text rendering."""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources

from . import __version__
from .graph import PlumbingGraph, serialize_graph
from .invariants import (
    PreconditionError,
    discharge_path,
    obstruction_report,
    spin_records,
    spinc_table,
)
from .lattice import build_intersection_form, is_negative_definite, lattice_summary
from .rationality import laufer_rationality
from .spin import reduce_mod2

SCHEMA_VERSION = 1
DEFAULT_SPINC_LIMIT = 64


def exact(x) -> str | None:
    """Integers as decimal strings, rationals as ``p/q`` in lowest terms."""
    if x is None:
        return None
    if isinstance(x, Fraction):
        return str(x)
    return str(int(x))


def load_schema() -> dict:
    return json.loads(resources.files("plumb").joinpath("report.schema.json").read_text(encoding="utf-8"))


def analyze(g: PlumbingGraph, trace: bool = False, uncertified: bool = False,
            spinc_limit: int = DEFAULT_SPINC_LIMIT, backend: str | None = None) -> dict:
    """Run the whole pipeline on one graph.

    Raises PreconditionError when the form is singular or not negative definite.
    """
    Q = build_intersection_form(g)
    summary = lattice_summary(Q)
    if not is_negative_definite(Q):
        detail = " (determinant is zero: boundary is not a rational homology sphere)" if summary.det == 0 else ""
        raise PreconditionError("not negative definite" + detail)
    red = reduce_mod2(g)
    laufer = laufer_rationality(g)
    rational = laufer.rational
    records = spin_records(g, Q, uncertified=uncertified, backend=backend)
    verdict = obstruction_report(g, records)

    spin_rows = []
    for r in records:
        row = {
            "wu_set": r.wu_set.sorted_ids(g),
            "independent": r.wu_set.independent,
            "char_vector": list(r.wu_set.char),
            "sigma": exact(r.sigma),
            "wu_square": exact(r.wu_square),
            "mubar": exact(r.mubar),
            "m_counter": exact(r.m_counter),
            "d_oracle": exact(r.d_oracle),
            "d_path": exact(r.d_path),
            "certified": r.certified,
            "mubar_equals_minus_4d": r.identity_holds,
        }
        if trace and r.d_oracle is not None:
            row["discharge"] = _witness_trace(g, Q, r.wu_set.char)
        spin_rows.append(row)

    spinc = {"computed": False, "limit": spinc_limit, "classes": []}
    if abs(summary.det) <= spinc_limit and (rational or uncertified):
        spinc["computed"] = True
        for c in spinc_table(g, Q, uncertified=True):
            spinc["classes"].append({
                "rep": list(c.class_rep),
                "d": exact(c.d),
                "witness": list(c.witness),
                "certified": rational,
            })

    report = {
        "tool": {"name": "plumb", "version": __version__, "schema_version": SCHEMA_VERSION},
        "config": {"trace": trace, "uncertified": uncertified, "spinc_limit": spinc_limit},
        "graph": {
            "vertices": [{"id": v, "weight": w} for v, w in g.vertices],
            "edges": [list(e) for e in sorted(g.edges)],
            "plumb": serialize_graph(g),
        },
        "lattice": {
            "matrix": Q.as_lists(),
            "det": exact(summary.det),
            "signature": list(summary.signature),
            "sigma": exact(summary.sigma),
            "invariant_factors": [exact(f) for f in summary.invariant_factors],
            "h1_order": exact(summary.h1_order),
            "dim_h1_mod2": exact(summary.dim_h1_mod2),
            "euler_characteristic": exact(Q.n),
        },
        "reduction": {"p": exact(red.p), "q": exact(red.q)},
        "rationality": {"verdict": laufer.verdict, "final_cycle": list(laufer.final_cycle)},
        "spin": spin_rows,
        "spinc": spinc,
        "obstruction": {
            "mubar_product": exact(verdict.mubar_product),
            "spin_ball_obstructed": verdict.spin_ball_obstructed,
            "det_parity": verdict.det_parity,
            "any_ball_obstructed": verdict.any_ball_obstructed,
            "certified": verdict.certified,
            "per_spin": [
                {
                    "wu_set": p["wu_set"],
                    "mubar": exact(p["mubar"]),
                    "d": exact(p["d"]),
                    "spin_c_ball_obstructed": p["spin_c_ball_obstructed"],
                }
                for p in verdict.per_spin
            ],
        },
        "conventions": {
            "mubar": "sigma(X) - [Sigma_S]^2",
            "d": "max (K^2 + n)/4 over characteristic K in the class",
        },
    }
    if trace:
        report["reduction"]["steps"] = [
            {"move": s.move, "leaf": s.leaf, "neighbour": s.neighbour} for s in red.steps
        ]
        report["reduction"]["residual"] = [[v, p] for v, p in red.residual]
        report["rationality"]["trace"] = laufer.to_json()
    return report


def _witness_trace(g, Q, K) -> dict | None:
    from .invariants import d_path

    try:
        term = d_path(g, K, uncertified=True, Q=Q)
    except Exception:  # noqa: BLE001 - trace is best effort for uncertified graphs
        return None
    tr = discharge_path(Q, term.witness)
    ids = g.ids
    return {
        "start": list(tr.start),
        "pivots": [ids[i] for i in tr.pivots],
        "outcome": tr.outcome,
        "final": list(tr.final),
    }


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def _fmt_table(headers: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return lines


def _s(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    return str(x)


def to_text(report: dict) -> str:
    lat = report["lattice"]
    out = [f"plumb {report['tool']['version']}", ""]
    out.append("graph: " + report["graph"]["plumb"].strip().replace("\n", " | "))
    out.append(f"det {lat['det']}   signature {tuple(lat['signature'])}   |H1| {lat['h1_order']}"
               f"   invariant factors {' '.join(lat['invariant_factors'])}")
    out.append(f"mod-2 reduction: p={report['reduction']['p']} q={report['reduction']['q']}"
               f"   dim H1(Y;Z2) = {lat['dim_h1_mod2']}")
    out.append(f"Laufer: {report['rationality']['verdict']}   fundamental cycle "
               f"{tuple(report['rationality']['final_cycle'])}")
    out.append("")
    out.append("spin structures")
    rows = [["{" + ",".join(r["wu_set"]) + "}", r["mubar"], _s(r["d_oracle"]), _s(r["d_path"]),
             _s(r["m_counter"]), _s(r["mubar_equals_minus_4d"])] for r in report["spin"]]
    out += _fmt_table(["Wu set", "mubar", "d (oracle)", "d (path)", "m", "mubar=-4d"], rows)
    sp = report["spinc"]
    out.append("")
    if sp["computed"]:
        out.append("spin^c classes")
        rows = [[" ".join(str(k) for k in c["rep"]), c["d"]] for c in sp["classes"]]
        out += _fmt_table(["representative K", "d"], rows)
    else:
        out.append(f"spin^c table skipped (|det| > {sp['limit']} or d not certified)")
    ob = report["obstruction"]
    out.append("")
    out.append(f"mubar product {ob['mubar_product']}   spin rational ball obstructed: {_s(ob['spin_ball_obstructed'])}")
    out.append(f"det parity {ob['det_parity']}   any rational ball obstructed: {_s(ob['any_ball_obstructed'])}")
    return "\n".join(out) + "\n"
