"""Power-system case data: types, JSON ingestion, MATPOWER-subset ingestion.

All electrical quantities are per-unit on the system MVA base; angles are
radians.  Bus/branch/generator records are immutable once parsed.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

BUS_TYPES = ("slack", "PV", "PQ")


class ParseError(ValueError):
    """Malformed case text; message names the offending field/line."""


class ValidationError(ValueError):
    """Structurally valid case that violates a model invariant."""


@dataclass(frozen=True)
class Bus:
    id: int
    type: str
    p_load: float = 0.0
    q_load: float = 0.0
    v_min: float = 0.95
    v_max: float = 1.05


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    r: float
    x_series: float
    b_charging: float = 0.0
    p_min: float = -math.inf
    p_max: float = math.inf


@dataclass(frozen=True)
class Generator:
    bus: int
    p_min: float
    p_max: float
    q_min: float
    q_max: float
    ramp_up: float = math.inf
    ramp_dn: float = math.inf
    p_last: float | None = None


@dataclass(frozen=True)
class NetworkCase:
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    generators: tuple[Generator, ...]
    base_mva: float = 100.0

    def bus_ids(self) -> list[int]:
        return [b.id for b in self.buses]

    def validate(self) -> None:
        """Raise ValidationError on any violated case invariant."""
        ids = self.bus_ids()
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate bus ids")
        slack = [b.id for b in self.buses if b.type == "slack"]
        if len(slack) != 1:
            raise ValidationError(f"exactly one slack bus required, found {len(slack)}")
        for b in self.buses:
            if b.type not in BUS_TYPES:
                raise ValidationError(f"bus {b.id}: unknown type {b.type!r}")
            if b.v_min > b.v_max:
                raise ValidationError(f"bus {b.id}: v_min > v_max")
        known = set(ids)
        for k, br in enumerate(self.branches):
            if br.from_bus not in known or br.to_bus not in known:
                raise ValidationError(f"branches[{k}]: endpoint references unknown bus")
            if br.p_min > br.p_max:
                raise ValidationError(f"branches[{k}]: p_min > p_max")
            if br.r == 0.0 and br.x_series == 0.0:
                raise ValidationError(f"branches[{k}]: zero series impedance")
        for k, g in enumerate(self.generators):
            if g.bus not in known:
                raise ValidationError(f"generators[{k}]: unknown bus {g.bus}")
            if g.p_min > g.p_max or g.q_min > g.q_max:
                raise ValidationError(f"generators[{k}]: inverted limits")


@dataclass(frozen=True)
class RegSpec:
    """Renewable placement: host bus ids and per-node capacity (per-unit)."""

    nodes: tuple[int, ...]
    w_max: tuple[float, ...]

    def __post_init__(self):
        nodes = tuple(int(n) for n in self.nodes)
        wmax = self.w_max
        if isinstance(wmax, (int, float)):
            wmax = (float(wmax),) * len(nodes)
        wmax = tuple(float(v) for v in wmax)
        if len(nodes) != len(set(nodes)):
            raise ValidationError("REG nodes must be distinct")
        if len(wmax) != len(nodes):
            raise ValidationError("w_max length does not match REG nodes")
        if any(v <= 0 or not math.isfinite(v) for v in wmax):
            raise ValidationError("w_max entries must be positive and finite")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "w_max", wmax)

    def validate_against(self, case: NetworkCase) -> None:
        known = set(case.bus_ids())
        missing = [n for n in self.nodes if n not in known]
        if missing:
            raise ValidationError(f"REG nodes not present in case: {missing}")

    def sorted_by_node(self) -> "RegSpec":
        order = sorted(range(len(self.nodes)), key=lambda k: self.nodes[k])
        return RegSpec(tuple(self.nodes[k] for k in order),
                       tuple(self.w_max[k] for k in order))


# ---------------------------------------------------------------------------
# JSON ingestion


def _num(obj, key, path, default=None, allow_none=False):
    if key not in obj:
        if default is not None or allow_none:
            return default
        raise ParseError(f"missing field {path}.{key}")
    v = obj[key]
    if v is None and allow_none:
        return None
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ParseError(f"field {path}.{key} must be a number")
    return float(v)


def parse_case_json(text: str) -> NetworkCase:
    """Parse the canonical JSON case document.

    Branch ``p_min``/``p_max`` accept null for an unconstrained side.
    Generator ramp fields and ``p_last`` are optional.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top-level document must be an object")
    for key in ("base_mva", "buses", "branches", "generators"):
        if key not in doc:
            raise ParseError(f"missing field {key}")

    buses = []
    for i, rec in enumerate(doc["buses"]):
        path = f"buses[{i}]"
        if "id" not in rec:
            raise ParseError(f"missing field {path}.id")
        btype = rec.get("type")
        if btype not in BUS_TYPES:
            raise ParseError(f"field {path}.type must be one of {BUS_TYPES}")
        buses.append(Bus(
            id=int(rec["id"]), type=btype,
            p_load=_num(rec, "p_load", path, 0.0),
            q_load=_num(rec, "q_load", path, 0.0),
            v_min=_num(rec, "v_min", path, 0.95),
            v_max=_num(rec, "v_max", path, 1.05)))

    branches = []
    for i, rec in enumerate(doc["branches"]):
        path = f"branches[{i}]"
        for key in ("from", "to", "r", "x_series"):
            if key not in rec:
                raise ParseError(f"missing field {path}.{key}")
        p_min = _num(rec, "p_min", path, allow_none=True)
        p_max = _num(rec, "p_max", path, allow_none=True)
        branches.append(Branch(
            from_bus=int(rec["from"]), to_bus=int(rec["to"]),
            r=float(rec["r"]), x_series=float(rec["x_series"]),
            b_charging=_num(rec, "b_charging", path, 0.0),
            p_min=-math.inf if p_min is None else p_min,
            p_max=math.inf if p_max is None else p_max))

    gens = []
    for i, rec in enumerate(doc["generators"]):
        path = f"generators[{i}]"
        for key in ("bus", "p_min", "p_max", "q_min", "q_max"):
            if key not in rec:
                raise ParseError(f"missing field {path}.{key}")
        ru = _num(rec, "ramp_up", path, allow_none=True)
        rd = _num(rec, "ramp_dn", path, allow_none=True)
        gens.append(Generator(
            bus=int(rec["bus"]),
            p_min=float(rec["p_min"]), p_max=float(rec["p_max"]),
            q_min=float(rec["q_min"]), q_max=float(rec["q_max"]),
            ramp_up=math.inf if ru is None else ru,
            ramp_dn=math.inf if rd is None else rd,
            p_last=_num(rec, "p_last", path, allow_none=True)))

    case = NetworkCase(tuple(buses), tuple(branches), tuple(gens),
                       base_mva=_num(doc, "base_mva", "$"))
    case.validate()
    return case


def case_to_json(case: NetworkCase) -> str:
    def lim(v):
        return None if not math.isfinite(v) else v

    doc = {
        "base_mva": case.base_mva,
        "buses": [{"id": b.id, "type": b.type, "p_load": b.p_load, "q_load": b.q_load,
                   "v_min": b.v_min, "v_max": b.v_max} for b in case.buses],
        "branches": [{"from": b.from_bus, "to": b.to_bus, "r": b.r, "x_series": b.x_series,
                      "b_charging": b.b_charging, "p_min": lim(b.p_min), "p_max": lim(b.p_max)}
                     for b in case.branches],
        "generators": [{"bus": g.bus, "p_min": g.p_min, "p_max": g.p_max,
                        "q_min": g.q_min, "q_max": g.q_max,
                        "ramp_up": lim(g.ramp_up), "ramp_dn": lim(g.ramp_dn),
                        "p_last": g.p_last} for g in case.generators],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# MATPOWER-subset ingestion

_MATRIX_RE = re.compile(r"mpc\.(bus|gen|branch)\s*=\s*\[")
_BASE_RE = re.compile(r"mpc\.baseMVA\s*=\s*([0-9eE+.\-]+)\s*;")


def _strip_comment(line: str) -> str:
    pos = line.find("%")
    return line if pos < 0 else line[:pos]


def _read_matrix(lines, start, name):
    """Collect numeric rows until the closing ``];``; returns (rows, lineno)."""
    rows = []
    i = start
    while i < len(lines):
        raw = _strip_comment(lines[i])
        done = "]" in raw
        raw = raw.split("]")[0]
        for chunk in raw.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            try:
                rows.append(([float(v) for v in chunk.split()], i + 1))
            except ValueError:
                raise ParseError(f"line {i + 1}: non-numeric entry in mpc.{name}")
        if done:
            return rows, i
        i += 1
    raise ParseError(f"unterminated matrix mpc.{name}")


def parse_matpower_subset(text: str):
    """Parse the bus/gen/branch/baseMVA subset of a MATPOWER case file.

    Returns ``(case, warnings)`` where warnings lists every ignored or
    unsupported field encountered (shunts, taps, phase shifters,
    out-of-service elements).  MW/MVAr columns are converted to per-unit;
    RATE_A = 0 means an unconstrained flow.
    """
    lines = text.splitlines()
    base_mva = None
    matrices: dict[str, list] = {}
    i = 0
    while i < len(lines):
        stripped = _strip_comment(lines[i])
        m = _BASE_RE.search(stripped)
        if m:
            base_mva = float(m.group(1))
        m = _MATRIX_RE.search(stripped)
        if m:
            name = m.group(1)
            after = stripped[m.end():]
            body = [after] + lines[i + 1:]
            rows, consumed = _read_matrix(body, 0, name)
            matrices[name] = [(vals, i + ln) for vals, ln in rows]
            i += consumed
        i += 1

    if base_mva is None:
        raise ParseError("missing mpc.baseMVA")
    for name in ("bus", "gen", "branch"):
        if name not in matrices:
            raise ParseError(f"missing matrix mpc.{name}")

    warnings: list[str] = []
    type_map = {3.0: "slack", 2.0: "PV", 1.0: "PQ"}

    buses = []
    for vals, ln in matrices["bus"]:
        if len(vals) < 13:
            raise ParseError(f"line {ln}: bus row has {len(vals)} columns, expected >= 13")
        if vals[1] not in type_map:
            raise ParseError(f"line {ln}: unsupported bus type code {vals[1]:g}")
        if vals[4] != 0.0 or vals[5] != 0.0:
            warnings.append(f"line {ln}: bus {int(vals[0])} shunt GS/BS ignored")
        buses.append(Bus(id=int(vals[0]), type=type_map[vals[1]],
                         p_load=vals[2] / base_mva, q_load=vals[3] / base_mva,
                         v_min=vals[12], v_max=vals[11]))

    gens = []
    for vals, ln in matrices["gen"]:
        if len(vals) < 10:
            raise ParseError(f"line {ln}: gen row has {len(vals)} columns, expected >= 10")
        if vals[7] <= 0:
            warnings.append(f"line {ln}: out-of-service generator at bus {int(vals[0])} skipped")
            continue
        ramp10 = vals[17] if len(vals) > 17 else 0.0
        rate = ramp10 / base_mva if ramp10 > 0 else math.inf
        gens.append(Generator(
            bus=int(vals[0]),
            p_min=vals[9] / base_mva, p_max=vals[8] / base_mva,
            q_min=vals[4] / base_mva, q_max=vals[3] / base_mva,
            ramp_up=rate, ramp_dn=rate,
            p_last=vals[1] / base_mva))

    branches = []
    for vals, ln in matrices["branch"]:
        if len(vals) < 11:
            raise ParseError(f"line {ln}: branch row has {len(vals)} columns, expected >= 11")
        if vals[10] <= 0:
            warnings.append(f"line {ln}: out-of-service branch "
                            f"{int(vals[0])}-{int(vals[1])} skipped")
            continue
        if vals[8] not in (0.0, 1.0):
            warnings.append(f"line {ln}: transformer tap {vals[8]:g} ignored")
        if vals[9] != 0.0:
            warnings.append(f"line {ln}: phase shift {vals[9]:g} ignored")
        limit = vals[5] / base_mva if vals[5] > 0 else math.inf
        branches.append(Branch(from_bus=int(vals[0]), to_bus=int(vals[1]),
                               r=vals[2], x_series=vals[3], b_charging=vals[4],
                               p_min=-limit, p_max=limit))

    case = NetworkCase(tuple(buses), tuple(branches), tuple(gens), base_mva=base_mva)
    case.validate()
    return case, warnings
