"""Builds the assignment MILP: coefficients, variable fixings, and rows.

Decision variables per live (element, device) pair: a binary x for "element
shown on device" and a continuous size s in px^2. Per permitted
(element, user) pair a continuous availability indicator o, plus one shared
r_min tracking the worst per-user completeness ratio. The objective mixes
normalized display quality and normalized completeness.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import ProblemInstance, Vec4


class InfeasiblePinError(ValueError):
    """A pin forces an assignment that preprocessing proved impossible."""

    def __init__(self, element: str, device: str, reason: str):
        self.element = element
        self.device = device
        super().__init__(f"pin ({element}, {device}) forced on but {reason}")


def compatibility(device_vec: Sequence[float], element_vec: Sequence[float]) -> float:
    """Dot product of a device capability vector and an element requirement
    vector; 0 means the device cannot serve the element at all."""
    return float(sum(d * e for d, e in zip(device_vec, element_vec)))


def mean_importance(element: int, device: int, instance: ProblemInstance) -> float:
    """Mean importance of an element over the present users who can access the
    device; 0 when nobody reaches it."""
    vals = [
        instance.importance[element][u]
        for u in instance.active_users()
        if instance.access[u][device]
    ]
    return float(sum(vals) / len(vals)) if vals else 0.0


@dataclass(frozen=True)
class DerivedCoefficients:
    """Everything preprocessing derives from an instance.

    ``fixed_zero`` holds pairs whose x is forced off (disabled device, no
    accessing user, an accessing user without permission, zero compatibility
    or importance, a pin, or minimum dimensions that do not fit the screen).
    ``forced_one`` holds pins the builder must fix to 1.
    """

    compatibility: np.ndarray     # element x device
    mean_importance: np.ndarray   # element x device
    pair_cap: np.ndarray          # element x device, min(max_area, screen area)
    fixed_zero: frozenset[tuple[int, int]]
    forced_one: frozenset[tuple[int, int]]
    q_upper: float
    c_upper: float

    def live_pairs(self, n_elements: int, n_devices: int) -> list[tuple[int, int]]:
        return [
            (e, d)
            for e in range(n_elements)
            for d in range(n_devices)
            if (e, d) not in self.fixed_zero
        ]


def _quality_weight(coeffs: DerivedCoefficients) -> np.ndarray:
    return coeffs.compatibility * coeffs.mean_importance


def _device_quality_bound(weights: np.ndarray, caps: np.ndarray, area: int,
                          live_elements: Iterable[int]) -> float:
    """Best quality one device could contribute: fill its area with the
    highest-weighted elements, each capped at its per-pair maximum."""
    order = sorted(live_elements, key=lambda e: (-weights[e], e))
    spare = float(area)
    total = 0.0
    for e in order:
        if spare <= 0 or weights[e] <= 0:
            break
        take = min(float(caps[e]), spare)
        total += weights[e] * take
        spare -= take
    return total


def preprocess(instance: ProblemInstance) -> DerivedCoefficients:
    """Derive coefficients and forced fixings; raises InfeasiblePinError when
    a pin demands an assignment the fixings rule out."""
    ne, nd = len(instance.elements), len(instance.devices)
    active_users = instance.active_users()

    comp = np.zeros((ne, nd))
    imp = np.zeros((ne, nd))
    cap = np.zeros((ne, nd), dtype=np.int64)
    for e, el in enumerate(instance.elements):
        for d, dev in enumerate(instance.devices):
            comp[e, d] = compatibility(dev.characteristics, el.requirements)
            imp[e, d] = mean_importance(e, d, instance)
            cap[e, d] = min(el.max_area, dev.area)

    pinned_off: set[tuple[int, int]] = set()
    pinned_on: set[tuple[int, int]] = set()
    eidx, didx = instance.element_index(), instance.device_index()
    for pin in instance.pins:
        pair = (eidx[pin.element], didx[pin.device])
        (pinned_on if pin.forced else pinned_off).add(pair)

    fixed: dict[tuple[int, int], str] = {}
    for e, el in enumerate(instance.elements):
        for d, dev in enumerate(instance.devices):
            accessors = [u for u in active_users if instance.access[u][d]]
            if not dev.enabled:
                reason = "the device is disabled"
            elif not accessors:
                reason = "no present user can access the device"
            elif any(not instance.permission[e][u] for u in accessors):
                reason = "an accessing user lacks permission"
            elif comp[e, d] <= 0.0 or imp[e, d] <= 0.0:
                reason = "compatibility or importance is zero"
            elif el.min_width > dev.width or el.min_height > dev.height:
                reason = "minimum dimensions exceed the screen"
            elif (e, d) in pinned_off:
                reason = "a pin forces it off"
            else:
                continue
            fixed[(e, d)] = reason

    for pair in pinned_on:
        if pair in fixed:
            e, d = pair
            raise InfeasiblePinError(instance.elements[e].id,
                                     instance.devices[d].id, fixed[pair])

    fixed_zero = frozenset(fixed)
    weights = comp * imp
    q_upper = 0.0
    for d in instance.active_devices():
        live = [e for e in range(ne) if (e, d) not in fixed_zero]
        q_upper += _device_quality_bound(weights[:, d], cap[:, d],
                                         instance.devices[d].area, live)

    c_upper = 1.0 + float(sum(
        instance.permission[e][u] for e in range(ne) for u in active_users))

    return DerivedCoefficients(
        compatibility=comp, mean_importance=imp, pair_cap=cap,
        fixed_zero=fixed_zero, forced_one=frozenset(pinned_on),
        q_upper=q_upper, c_upper=c_upper,
    )


@dataclass(frozen=True)
class VarDesc:
    """One MILP variable. ``kind`` is x, s, o or r_min; ``key`` the pair of
    indices it belongs to ((element, device) for x/s, (element, user) for o)."""

    name: str
    kind: str
    key: tuple[int, ...]
    lb: float
    ub: float


@dataclass(frozen=True)
class LinearRow:
    """Sparse constraint row: sum of terms (variable index, coefficient)
    compared against rhs with the given sense."""

    name: str
    terms: tuple[tuple[int, float], ...]
    sense: str  # "<=" or ">="
    rhs: float


@dataclass(frozen=True)
class Milp:
    """Built model. Variable order is binaries first, then continuous; the
    objective vector is aligned with that order (maximization)."""

    binaries: tuple[VarDesc, ...]
    continuous: tuple[VarDesc, ...]
    objective: tuple[float, ...]
    constraints: tuple[LinearRow, ...]
    instance: ProblemInstance
    coeffs: DerivedCoefficients

    @property
    def n_vars(self) -> int:
        return len(self.binaries) + len(self.continuous)

    def pair_of_binary(self, i: int) -> tuple[int, int]:
        return self.binaries[i].key  # type: ignore[return-value]


def build(instance: ProblemInstance, coeffs: DerivedCoefficients) -> Milp:
    """Assemble variables and rows from preprocessed coefficients.

    Empty rows are never emitted, so a disabled device yields the exact same
    model as deleting the device from the instance.
    """
    ne, nd = len(instance.elements), len(instance.devices)
    wq, wc = instance.weights
    active_users = instance.active_users()
    live = coeffs.live_pairs(ne, nd)
    weights = _quality_weight(coeffs)
    q_scale = (wq / coeffs.q_upper) if coeffs.q_upper > 0 else 0.0
    c_scale = wc / coeffs.c_upper

    binaries: list[VarDesc] = []
    continuous: list[VarDesc] = []
    objective: list[float] = []

    x_of: dict[tuple[int, int], int] = {}
    for e, d in live:
        name = f"x[{instance.elements[e].id},{instance.devices[d].id}]"
        forced = (e, d) in coeffs.forced_one
        x_of[(e, d)] = len(binaries)
        binaries.append(VarDesc(name, "x", (e, d),
                                1.0 if forced else 0.0, 1.0))
        objective.append(0.0)

    nb = len(binaries)
    s_of: dict[tuple[int, int], int] = {}
    for e, d in live:
        name = f"s[{instance.elements[e].id},{instance.devices[d].id}]"
        s_of[(e, d)] = nb + len(continuous)
        continuous.append(VarDesc(name, "s", (e, d), 0.0, float(coeffs.pair_cap[e, d])))
        objective.append(q_scale * weights[e, d])

    o_of: dict[tuple[int, int], int] = {}
    for e in range(ne):
        for u in active_users:
            if instance.permission[e][u]:
                name = f"o[{instance.elements[e].id},{instance.users[u].id}]"
                o_of[(e, u)] = nb + len(continuous)
                continuous.append(VarDesc(name, "o", (e, u), 0.0, 1.0))
                objective.append(c_scale)

    perm_count = {u: sum(instance.permission[e][u] for e in range(ne))
                  for u in active_users}
    constrained = [u for u in active_users if perm_count[u] > 0]
    r_min_var = -1
    if constrained:
        r_min_var = nb + len(continuous)
        continuous.append(VarDesc("r_min", "r_min", (), 0.0, 1.0))
        objective.append(c_scale)

    rows: list[LinearRow] = []
    for e, d in live:
        pair = f"{instance.elements[e].id},{instance.devices[d].id}"
        rows.append(LinearRow(
            f"size_cap[{pair}]",
            ((s_of[(e, d)], 1.0), (x_of[(e, d)], -float(coeffs.pair_cap[e, d]))),
            "<=", 0.0))
        rows.append(LinearRow(
            f"size_min[{pair}]",
            ((s_of[(e, d)], 1.0), (x_of[(e, d)], -float(instance.elements[e].min_area))),
            ">=", 0.0))

    for d in range(nd):
        pairs = [(e, dd) for (e, dd) in live if dd == d]
        if not pairs:
            continue
        # the row only binds when the pair caps could jointly overflow the screen
        if int(sum(coeffs.pair_cap[e, d] for e, _ in pairs)) <= instance.devices[d].area:
            continue
        rows.append(LinearRow(
            f"screen[{instance.devices[d].id}]",
            tuple((s_of[p], 1.0) for p in pairs),
            "<=", float(instance.devices[d].area)))

    for (e, u), oi in o_of.items():
        terms = [(oi, 1.0)]
        terms += [(x_of[(e, d)], -1.0) for d in range(nd)
                  if instance.access[u][d] and (e, d) in x_of]
        rows.append(LinearRow(
            f"avail[{instance.elements[e].id},{instance.users[u].id}]",
            tuple(terms), "<=", 0.0))

    for u in constrained:
        terms = [(r_min_var, 1.0)]
        terms += [(o_of[(e, u)], -1.0 / perm_count[u]) for e in range(ne)
                  if instance.permission[e][u]]
        rows.append(LinearRow(
            f"completeness[{instance.users[u].id}]", tuple(terms), "<=", 0.0))

    return Milp(
        binaries=tuple(binaries), continuous=tuple(continuous),
        objective=tuple(objective), constraints=tuple(rows),
        instance=instance, coeffs=coeffs,
    )


@dataclass(frozen=True)
class Completion:
    """Exact evaluation of one integral assignment. ``quality_norm`` and
    ``completeness_norm`` are the two normalized objective terms, each in
    [0, 1] for feasible assignments."""

    sizes: tuple[tuple[int, ...], ...]
    availability: tuple[tuple[int, ...], ...]
    per_user_completeness: tuple[float, ...]
    r_min: float
    objective: float
    quality_norm: float
    completeness_norm: float


def complete_assignment(instance: ProblemInstance, coeffs: DerivedCoefficients,
                        assigned: Iterable[tuple[int, int]]) -> Completion | None:
    """Evaluate an integral assignment exactly, or None when it is infeasible.

    Sizes are the objective-maximal completion: every shown element gets its
    minimum area, then spare screen area goes to elements by descending
    quality weight (ties by element index), each capped at its pair cap.
    """
    ne, nd, nu = len(instance.elements), len(instance.devices), len(instance.users)
    chosen = set(assigned)
    for pair in chosen:
        if pair in coeffs.fixed_zero:
            return None
    for pair in coeffs.forced_one:
        if pair not in chosen:
            return None

    weights = _quality_weight(coeffs)
    sizes = [[0] * nd for _ in range(ne)]
    quality = 0.0
    for d in range(nd):
        members = sorted(e for e, dd in chosen if dd == d)
        if not members:
            continue
        base = sum(instance.elements[e].min_area for e in members)
        if base > instance.devices[d].area:
            return None
        spare = instance.devices[d].area - base
        for e in members:
            sizes[e][d] = instance.elements[e].min_area
        for e in sorted(members, key=lambda e: (-weights[e, d], e)):
            grow = min(int(coeffs.pair_cap[e, d]) - sizes[e][d], spare)
            if grow > 0:
                sizes[e][d] += grow
                spare -= grow
        quality += sum(weights[e, d] * sizes[e][d] for e in members)

    active_users = instance.active_users()
    active_set = set(active_users)
    avail = [[0] * nu for _ in range(ne)]
    for e, d in chosen:
        for u in active_users:
            if instance.access[u][d]:
                avail[e][u] = 1

    r_u: list[float] = []
    total_avail = 0
    constrained_r: list[float] = []
    for u in range(nu):
        if u not in active_set:
            r_u.append(1.0)
            continue
        perms = [e for e in range(ne) if instance.permission[e][u]]
        total_avail += sum(avail[e][u] for e in perms)
        if not perms:
            r_u.append(1.0)
            continue
        ratio = sum(avail[e][u] for e in perms) / len(perms)
        r_u.append(ratio)
        constrained_r.append(ratio)

    r_min = min(constrained_r) if constrained_r else 1.0
    wq, wc = instance.weights
    q_norm = quality / coeffs.q_upper if coeffs.q_upper > 0 else 0.0
    c_norm = (total_avail + (r_min if constrained_r else 0.0)) / coeffs.c_upper
    objective = wq * q_norm + wc * c_norm

    return Completion(
        sizes=tuple(tuple(row) for row in sizes),
        availability=tuple(tuple(row) for row in avail),
        per_user_completeness=tuple(r_u),
        r_min=r_min,
        objective=objective,
        quality_norm=q_norm,
        completeness_norm=c_norm,
    )


def write_lp(milp: Milp) -> str:
    """Render the model in LP text format for external cross-checking."""
    names = [v.name.replace(",", "__").replace("[", "_").replace("]", "")
             for v in milp.binaries + milp.continuous]

    def term(i: int, c: float, lead: bool) -> str:
        sign = "- " if c < 0 else ("" if lead else "+ ")
        return f"{sign}{abs(c):.12g} {names[i]}"

    out = ["Maximize"]
    obj_terms = [term(i, c, i == 0) for i, c in enumerate(milp.objective) if c != 0.0]
    out.append(" obj: " + (" ".join(obj_terms) if obj_terms else "0 " + (names[0] if names else "")))
    out.append("Subject To")
    for row in milp.constraints:
        parts = [term(i, c, k == 0) for k, (i, c) in enumerate(row.terms)]
        out.append(f" {row.name.replace(',', '__').replace('[', '_').replace(']', '')}:"
                   f" {' '.join(parts)} {row.sense} {row.rhs:.12g}")
    out.append("Bounds")
    for i, v in enumerate(milp.binaries + milp.continuous):
        out.append(f" {v.lb:.12g} <= {names[i]} <= {v.ub:.12g}")
    if milp.binaries:
        out.append("Binaries")
        out.append(" " + " ".join(names[: len(milp.binaries)]))
    out.append("End")
    return "\n".join(out) + "\n"
