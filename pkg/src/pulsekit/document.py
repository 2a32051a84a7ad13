"""Schedule documents: JSON serialization for inspection and replay.

A document records the flattened segment list (pulses deduplicated into a
table), the native Hamiltonian, and the target unitary, so `simulate` can
replay a compiled schedule standalone and reproduce the in-process result.
"""

from __future__ import annotations

import json

import numpy as np

from .operators import Operator
from .pulses import PulseSpec
from .schedule import Free, Instant, Pulse, PulseSchedule

FORMAT = "pulsekit-schedule/1"


class DocumentError(ValueError):
    pass


def _mat_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _mat_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def _envelope_to_json(env) -> list:
    return [env[0]] + ([list(map(list, env[1]))] if len(env) > 1 else [])


def _envelope_from_json(data) -> tuple:
    if data[0] == "rect":
        return ("rect",)
    return ("sampled", tuple((float(t), float(a)) for t, a in data[1]))


def schedule_to_document(sched: PulseSchedule, h0: Operator,
                         target: Operator | None = None,
                         notes: dict | None = None) -> dict:
    pulses: dict[tuple, int] = {}
    table = []
    segments = []
    oracle_negative = sched.oracle_negative
    for seg in sched.leaves():
        if isinstance(seg, Free):
            if seg.duration < 0:
                oracle_negative = True  # flag may live on a nested block
            segments.append({"kind": "free", "duration": seg.duration, "label": seg.label})
        elif isinstance(seg, Pulse):
            key = seg.spec.cache_key
            if key not in pulses:
                pulses[key] = len(table)
                sp = seg.spec
                table.append({
                    "generator": _mat_to_json(sp.generator.mat),
                    "area": sp.area, "width": sp.width,
                    "envelope": _envelope_to_json(sp.envelope),
                    "reversed": sp.reversed, "stretch": sp.stretch, "label": sp.label,
                })
            segments.append({"kind": "pulse", "ref": pulses[key], "label": seg.label})
        elif isinstance(seg, Instant):
            segments.append({"kind": "instant", "matrix": _mat_to_json(seg.op.mat),
                             "label": seg.label})
        else:
            raise DocumentError(f"cannot serialize segment {seg!r}")
    doc = {
        "format": FORMAT,
        "label": sched.label,
        "oracle_negative": oracle_negative,
        "h0": _mat_to_json(h0.mat),
        "pulses": table,
        "segments": segments,
    }
    if target is not None:
        doc["target"] = _mat_to_json(target.mat)
    if notes:
        doc["notes"] = notes
    return doc


def schedule_from_document(doc: dict) -> tuple[PulseSchedule, Operator, Operator | None]:
    """Returns (schedule, h0, target or None)."""
    if doc.get("format") != FORMAT:
        raise DocumentError(f"unsupported document format {doc.get('format')!r}")
    specs = []
    for rec in doc["pulses"]:
        specs.append(PulseSpec(
            Operator(_mat_from_json(rec["generator"]), "hermitian"),
            rec["area"], rec["width"], _envelope_from_json(rec["envelope"]),
            rec["reversed"], rec["stretch"], rec.get("label", ""),
        ))
    segments = []
    for rec in doc["segments"]:
        if rec["kind"] == "free":
            segments.append(Free(rec["duration"], rec.get("label", "")))
        elif rec["kind"] == "pulse":
            segments.append(Pulse(specs[rec["ref"]], rec.get("label", "")))
        elif rec["kind"] == "instant":
            segments.append(Instant(Operator(_mat_from_json(rec["matrix"])),
                                    rec.get("label", "")))
        else:
            raise DocumentError(f"unknown segment kind {rec['kind']!r}")
    sched = PulseSchedule(tuple(segments), doc.get("oracle_negative", False),
                          doc.get("label", ""))
    h0 = Operator(_mat_from_json(doc["h0"]), "hermitian")
    target = Operator(_mat_from_json(doc["target"])) if "target" in doc else None
    return sched, h0, target


def save_document(path, doc: dict):
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_document(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
