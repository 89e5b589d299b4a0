"""Scenario data model: elements, devices, users, and everything a solve needs."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

Vec4 = tuple[float, float, float, float]

# Component order of every capability 4-vector. Device vectors score how well
# the device renders visual output, accepts text input, touch pointing and
# mouse pointing; element vectors score how much the element needs each.
VECTOR_KEYS = ("visual", "text", "touch", "mouse")

# Raw capability scores on the 0..5 editorial scale divide by this.
RAW_SCALE = 5.0

STATUS_OPTIMAL = "optimal"
STATUS_GAP_REACHED = "gap_reached"
STATUS_TIME_LIMIT = "time_limit"
STATUS_INFEASIBLE = "infeasible"


class ScenarioError(ValueError):
    """Scenario file cannot be parsed into a ProblemInstance."""


def import_raw_scale(raw: Sequence[float]) -> Vec4:
    """Convert a 4-vector on the raw 0..5 scale to the canonical [0,1] scale."""
    if len(raw) != 4:
        raise ValueError(f"capability vector needs 4 components, got {len(raw)}")
    out = []
    for k, value in zip(VECTOR_KEYS, raw):
        if not 0.0 <= float(value) <= RAW_SCALE:
            raise ValueError(f"raw {k} score {value} outside [0, {RAW_SCALE}]")
        out.append(float(value) / RAW_SCALE)
    return tuple(out)  # type: ignore[return-value]


@dataclass(frozen=True)
class ElementSpec:
    """One UI element: capability requirements and its size envelope in px."""

    id: str
    requirements: Vec4
    min_width: int
    min_height: int
    max_width: int
    max_height: int

    @property
    def min_area(self) -> int:
        return self.min_width * self.min_height

    @property
    def max_area(self) -> int:
        return self.max_width * self.max_height


@dataclass(frozen=True)
class DeviceSpec:
    """One output device: capability scores and screen size in px."""

    id: str
    characteristics: Vec4
    width: int
    height: int
    enabled: bool = True

    @property
    def area(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class UserSpec:
    id: str
    present: bool = True


@dataclass(frozen=True)
class Pin:
    """Forces assignment of element to device on (1) or off (0)."""

    element: str
    device: str
    forced: int


@dataclass(frozen=True)
class ProblemInstance:
    """Immutable snapshot of one assignment problem.

    Matrix conventions: ``access`` is user x device, ``permission`` and
    ``importance`` are element x user. Disabled devices and absent users stay
    in the lists so ids keep their rows, but behave as if removed.
    """

    elements: tuple[ElementSpec, ...]
    devices: tuple[DeviceSpec, ...]
    users: tuple[UserSpec, ...]
    access: tuple[tuple[int, ...], ...]
    permission: tuple[tuple[int, ...], ...]
    importance: tuple[tuple[float, ...], ...]
    pins: frozenset[Pin] = frozenset()
    weights: tuple[float, float] = (0.8, 0.2)
    # Set when ingestion rescaled out-of-range importance values; metadata only.
    importance_scale: float = field(default=1.0, compare=False)

    def element_index(self) -> dict[str, int]:
        return {e.id: i for i, e in enumerate(self.elements)}

    def device_index(self) -> dict[str, int]:
        return {d.id: i for i, d in enumerate(self.devices)}

    def user_index(self) -> dict[str, int]:
        return {u.id: i for i, u in enumerate(self.users)}

    def active_users(self) -> tuple[int, ...]:
        return tuple(i for i, u in enumerate(self.users) if u.present)

    def active_devices(self) -> tuple[int, ...]:
        return tuple(i for i, d in enumerate(self.devices) if d.enabled)


@dataclass(frozen=True)
class Solution:
    """Solver output. ``assignment`` and ``sizes`` are element x device,
    ``availability`` is element x user, sizes in px^2."""

    assignment: tuple[tuple[int, ...], ...]
    sizes: tuple[tuple[int, ...], ...]
    availability: tuple[tuple[int, ...], ...]
    per_user_completeness: tuple[float, ...]
    r_min: float
    objective: float
    gap: float
    solve_millis: int
    status: str
    nodes: int = 0


def _vec_ok(v: Sequence[float]) -> bool:
    return len(v) == 4 and all(0.0 <= float(x) <= 1.0 for x in v)


def validate(instance: ProblemInstance) -> list[str]:
    """Return a list of human-readable violations; empty means valid.

    Total: never raises on any well-typed instance.
    """
    bad: list[str] = []
    ne, nd, nu = len(instance.elements), len(instance.devices), len(instance.users)

    seen: set[str] = set()
    for kind, items in (("element", instance.elements), ("device", instance.devices),
                        ("user", instance.users)):
        for it in items:
            if not it.id:
                bad.append(f"{kind} with empty id")
            if it.id in seen:
                bad.append(f"duplicate id {it.id!r}")
            seen.add(it.id)

    for i, e in enumerate(instance.elements):
        if not _vec_ok(e.requirements):
            bad.append(f"elements[{i}].requirements outside [0, 1]^4")
        for name in ("min_width", "min_height", "max_width", "max_height"):
            if getattr(e, name) < 1:
                bad.append(f"elements[{i}].{name} must be a positive integer")
        if e.min_width > e.max_width or e.min_height > e.max_height:
            bad.append(f"elements[{i}] min dimensions exceed max dimensions")

    for i, d in enumerate(instance.devices):
        if not _vec_ok(d.characteristics):
            bad.append(f"devices[{i}].characteristics outside [0, 1]^4")
        if d.width < 1 or d.height < 1:
            bad.append(f"devices[{i}] dimensions must be positive integers")

    def check_matrix(name: str, m: Sequence[Sequence[Any]], rows: int, cols: int,
                     binary: bool) -> None:
        if len(m) != rows:
            bad.append(f"{name} needs {rows} rows, got {len(m)}")
            return
        for r, row in enumerate(m):
            if len(row) != cols:
                bad.append(f"{name}[{r}] needs {cols} entries, got {len(row)}")
                continue
            for c, v in enumerate(row):
                if binary and v not in (0, 1):
                    bad.append(f"{name}[{r}][{c}] = {v!r} is not 0 or 1")
                elif not binary and not 0.0 <= float(v) <= 1.0:
                    bad.append(f"{name}[{r}][{c}] = {v} outside [0, 1]")

    check_matrix("access", instance.access, nu, nd, binary=True)
    check_matrix("permission", instance.permission, ne, nu, binary=True)
    check_matrix("importance", instance.importance, ne, nu, binary=False)

    eidx, didx = instance.element_index(), instance.device_index()
    for pin in sorted(instance.pins, key=lambda p: (p.element, p.device)):
        if pin.element not in eidx:
            bad.append(f"pin references unknown element {pin.element!r}")
        if pin.device not in didx:
            bad.append(f"pin references unknown device {pin.device!r}")
        if pin.forced not in (0, 1):
            bad.append(f"pin ({pin.element}, {pin.device}).forced must be 0 or 1")
    by_pair: dict[tuple[str, str], set[int]] = {}
    for pin in instance.pins:
        by_pair.setdefault((pin.element, pin.device), set()).add(pin.forced)
    for (el, dev), vals in sorted(by_pair.items()):
        if len(vals) > 1:
            bad.append(f"contradictory pins on ({el}, {dev})")

    wq, wc = instance.weights
    if wq < 0 or wc < 0 or abs(wq + wc - 1.0) > 1e-9:
        bad.append(f"weights must sum to 1 (got {wq} + {wc})")

    return bad


# ---------------------------------------------------------------------------
# Scenario JSON

def _vec_to_dict(v: Vec4) -> dict[str, float]:
    return {k: float(x) for k, x in zip(VECTOR_KEYS, v)}

def _vec_from_dict(data: Mapping[str, Any], where: str) -> Vec4:
    try:
        return tuple(float(data[k]) for k in VECTOR_KEYS)  # type: ignore[return-value]
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: capability vector needs keys {VECTOR_KEYS}") from exc


def instance_to_dict(instance: ProblemInstance) -> dict[str, Any]:
    """Canonical dict form; key order is fixed so dumps are reproducible."""
    return {
        "users": [{"id": u.id, "present": bool(u.present)} for u in instance.users],
        "devices": [
            {
                "id": d.id,
                "characteristics": _vec_to_dict(d.characteristics),
                "width": d.width,
                "height": d.height,
                "enabled": bool(d.enabled),
            }
            for d in instance.devices
        ],
        "elements": [
            {
                "id": e.id,
                "requirements": _vec_to_dict(e.requirements),
                "min_width": e.min_width,
                "min_height": e.min_height,
                "max_width": e.max_width,
                "max_height": e.max_height,
            }
            for e in instance.elements
        ],
        "access": [list(row) for row in instance.access],
        "permission": [list(row) for row in instance.permission],
        "importance": [[float(v) for v in row] for row in instance.importance],
        "pins": [
            {"element": p.element, "device": p.device, "forced": p.forced}
            for p in sorted(instance.pins, key=lambda p: (p.element, p.device))
        ],
        "weights": {"quality": float(instance.weights[0]),
                    "completeness": float(instance.weights[1])},
    }


def instance_from_dict(data: Mapping[str, Any]) -> ProblemInstance:
    """Parse the scenario dict form. Importance values above 1 are rescaled by
    their maximum and the factor is recorded on the instance."""
    if not isinstance(data, Mapping):
        raise ScenarioError("scenario must be a JSON object")
    try:
        users = tuple(
            UserSpec(id=str(u["id"]), present=bool(u.get("present", True)))
            for u in data.get("users", [])
        )
        devices = tuple(
            DeviceSpec(
                id=str(d["id"]),
                characteristics=_vec_from_dict(d["characteristics"],
                                               f"devices[{i}].characteristics"),
                width=int(d["width"]),
                height=int(d["height"]),
                enabled=bool(d.get("enabled", True)),
            )
            for i, d in enumerate(data.get("devices", []))
        )
        elements = tuple(
            ElementSpec(
                id=str(e["id"]),
                requirements=_vec_from_dict(e["requirements"],
                                            f"elements[{i}].requirements"),
                min_width=int(e["min_width"]),
                min_height=int(e["min_height"]),
                max_width=int(e["max_width"]),
                max_height=int(e["max_height"]),
            )
            for i, e in enumerate(data.get("elements", []))
        )
        access = tuple(tuple(int(v) for v in row) for row in data.get("access", []))
        permission = tuple(tuple(int(v) for v in row) for row in data.get("permission", []))
        importance = tuple(tuple(float(v) for v in row) for row in data.get("importance", []))
        pins = frozenset(
            Pin(element=str(p["element"]), device=str(p["device"]), forced=int(p["forced"]))
            for p in data.get("pins", [])
        )
        wdata = data.get("weights", {"quality": 0.8, "completeness": 0.2})
        weights = (float(wdata["quality"]), float(wdata["completeness"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc

    scale = 1.0
    peak = max((v for row in importance for v in row), default=0.0)
    if peak > 1.0:
        scale = peak
        importance = tuple(tuple(v / scale for v in row) for row in importance)

    return ProblemInstance(
        elements=elements, devices=devices, users=users,
        access=access, permission=permission, importance=importance,
        pins=pins, weights=weights, importance_scale=scale,
    )


def dumps(instance: ProblemInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def loads(text: str) -> ProblemInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from exc
    return instance_from_dict(data)


def load_scenario(path: str) -> ProblemInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def save_scenario(instance: ProblemInstance, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(instance))


def solution_to_dict(instance: ProblemInstance, solution: Solution) -> dict[str, Any]:
    """Wire/CLI form of a Solution, with ids alongside the matrices."""
    return {
        "status": solution.status,
        "objective": solution.objective,
        # inf gap (no incumbent) is not representable in strict JSON
        "gap": solution.gap if math.isfinite(solution.gap) else None,
        "solve_millis": solution.solve_millis,
        "nodes": solution.nodes,
        "elements": [e.id for e in instance.elements],
        "devices": [d.id for d in instance.devices],
        "users": [u.id for u in instance.users],
        "assignment": [list(row) for row in solution.assignment],
        "sizes": [list(row) for row in solution.sizes],
        "availability": [list(row) for row in solution.availability],
        "per_user_completeness": list(solution.per_user_completeness),
        "r_min": solution.r_min,
    }
