"""Chart documents: canonical JSON, strict parsing, CSV export.

Emission is byte-deterministic: keys are sorted, separators fixed, floats
written with 17 significant digits (full round-trip precision), complex
momenta as [re, im] pairs. The stdlib serializer cannot pin float
formatting, so a small recursive emitter does it here.
"""

from __future__ import annotations

import csv
import io
import json
import math

from .chart import PoleChart, WorkingWindow
from .config import RunConfig
from .errors import DocumentError

SCHEMA_VERSION = "1"


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise DocumentError(f"cannot serialize non-finite value {x!r}")
    if x == int(x) and abs(x) < 1e16:
        return f"{int(x)}.0"
    return format(x, ".17g")


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, complex):
        out.append("[")
        out.append(_fmt_float(obj.real))
        out.append(",")
        out.append(_fmt_float(obj.imag))
        out.append("]")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise DocumentError(f"non-string key {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    else:
        raise DocumentError(f"cannot serialize {type(obj).__name__}")


def canonical_dumps(obj) -> str:
    """Serialize to canonical JSON: sorted keys, fixed float format."""
    out: list[str] = []
    _emit(obj, out)
    out.append("\n")
    return "".join(out)


def _pole_dict(pole) -> dict:
    return {
        "k": complex(pole.k),
        "alpha": float(pole.coupling.alpha),
        "kind": pole.kind.value,
        "multiplicity": pole.multiplicity,
        "residual": float(pole.residual),
    }


def _window_dict(w: WorkingWindow) -> dict:
    return {"re_max": w.re_max, "im_min": w.im_min, "im_max": w.im_max}


def chart_document(chart: PoleChart, config: RunConfig | None = None) -> dict:
    """The full chart as a plain dict ready for canonical serialization."""
    trajectories = []
    for traj in chart.trajectories:
        trajectories.append({
            "closure": traj.closure.kind.value,
            "exit_forward": (
                traj.closure.forward_reason.value
                if traj.closure.forward_reason else None
            ),
            "exit_backward": (
                traj.closure.backward_reason.value
                if traj.closure.backward_reason else None
            ),
            "seed": _pole_dict(traj.seed),
            "merged_seeds": [_pole_dict(p) for p in traj.merged_seeds],
            "alphas": [float(a) for a in traj.alphas],
            "ks": [complex(k) for k in traj.ks],
            "anchors": [{"index": n, "k": complex(k)} for n, k in traj.anchors],
            "axis_crossings": [
                {"alpha": float(a), "k": complex(k)}
                for a, k in traj.axis_crossings
            ],
        })
    completeness = None
    if chart.completeness is not None:
        completeness = {
            "window": _window_dict(chart.completeness["window"]),
            "window_count": chart.completeness["window_count"],
            "trajectory_count": chart.completeness.get("trajectory_count", 0),
            "complete": chart.completeness["complete"],
            "inventory": [
                complex(k) for k in chart.completeness.get("inventory", [])
            ],
        }
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "pole_chart",
        "potential": {"m": chart.spec.m, "a": chart.spec.a, "U": chart.spec.U},
        "channel": chart.channel.value,
        "topology": dict(chart.topology),
        "seeds": [_pole_dict(p) for p in chart.seeds],
        "trajectories": trajectories,
        "collisions": [
            {
                "alpha": float(ev.alpha),
                "k": complex(ev.k),
                "kind": ev.kind,
                "branches": [
                    {"label": lbl, "k": complex(k)} for lbl, k in ev.branches
                ],
            }
            for ev in chart.collisions
        ],
        "warnings": [
            {"code": w.code, "message": w.message} for w in chart.warnings
        ],
        "near_contacts": [
            {
                "alpha_index": c.alpha_index,
                "k_first": complex(c.k_first),
                "k_second": complex(c.k_second),
                "distance": float(c.distance),
            }
            for c in chart.near_contacts
        ],
        "completeness": completeness,
        "provenance": {
            "package": "wellpoles",
            "config": config.to_dict() if config is not None else None,
        },
    }
    return doc


_TOP_KEYS = {
    "schema_version", "kind", "potential", "channel", "topology", "seeds",
    "trajectories", "collisions", "warnings", "near_contacts",
    "completeness", "provenance",
}
_TRAJ_KEYS = {
    "closure", "exit_forward", "exit_backward", "seed", "merged_seeds",
    "alphas", "ks", "anchors", "axis_crossings",
}


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DocumentError(message)


def parse_chart_document(text: str) -> dict:
    """Parse and validate a chart document; unknown fields are an error."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    _require(not unknown, f"unknown fields: {', '.join(sorted(unknown))}")
    missing = _TOP_KEYS - set(doc)
    _require(not missing, f"missing fields: {', '.join(sorted(missing))}")
    _require(doc["schema_version"] == SCHEMA_VERSION,
             f"unsupported schema version {doc['schema_version']!r}")
    _require(doc["kind"] == "pole_chart", f"not a pole chart: {doc['kind']!r}")
    pot = doc["potential"]
    _require(isinstance(pot, dict) and set(pot) == {"m", "a", "U"},
             "potential must hold exactly m, a, U")
    _require(doc["channel"] in ("plus", "minus"),
             f"unknown channel {doc['channel']!r}")
    _require(isinstance(doc["trajectories"], list), "trajectories must be a list")
    for i, traj in enumerate(doc["trajectories"]):
        _require(isinstance(traj, dict), f"trajectory {i} must be an object")
        bad = set(traj) - _TRAJ_KEYS
        _require(not bad, f"trajectory {i} unknown fields: {', '.join(sorted(bad))}")
        miss = _TRAJ_KEYS - set(traj)
        _require(not miss, f"trajectory {i} missing fields: {', '.join(sorted(miss))}")
        _require(len(traj["alphas"]) == len(traj["ks"]),
                 f"trajectory {i} sample arrays disagree")
        for k in traj["ks"]:
            _require(isinstance(k, list) and len(k) == 2,
                     f"trajectory {i} momenta must be [re, im] pairs")
    return doc


def poles_csv(chart: PoleChart) -> str:
    """Seed pole inventory as CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["channel", "alpha", "re_k", "im_k", "kind", "multiplicity"]
    )
    for p in chart.seeds:
        writer.writerow([
            chart.channel.value,
            _fmt_float(p.coupling.alpha),
            _fmt_float(p.k.real),
            _fmt_float(p.k.imag),
            p.kind.value,
            p.multiplicity,
        ])
    return buf.getvalue()


def trajectories_csv(chart: PoleChart) -> str:
    """All trajectory samples as CSV, one row per (trajectory, sample)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trajectory", "closure", "alpha", "re_k", "im_k"])
    for i, traj in enumerate(chart.trajectories):
        kind = traj.closure.kind.value
        for a, k in zip(traj.alphas, traj.ks):
            writer.writerow([
                i, kind, _fmt_float(float(a)),
                _fmt_float(k.real), _fmt_float(k.imag),
            ])
    return buf.getvalue()
