"""Brute-force reference optimizer and direct constraint checker.

Everything here is derived straight from the instance with plain Python, on
purpose: no code is shared with the formulation or the solver, so agreement
between the two routes is meaningful evidence of correctness.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .model import ProblemInstance

# enumerating beyond this many undecided pairs is refused outright
ENUMERATION_LIMIT = 22


class InstanceTooLarge(ValueError):
    """Instance has too many undecided pairs for exhaustive enumeration."""


@dataclass(frozen=True)
class OracleResult:
    best_objective: float
    # every assignment matrix within tie tolerance of the best, sorted
    best_assignments: tuple[tuple[tuple[int, ...], ...], ...]
    enumerated: int


def _dot(a: Sequence[float], b: Sequence[float]) -> float:
    return sum(x * y for x, y in zip(a, b))


def _derive(instance: ProblemInstance):
    """Per-pair coefficients, fixings and forced pins, straight from rules."""
    ne, nd = len(instance.elements), len(instance.devices)
    present = [u for u, spec in enumerate(instance.users) if spec.present]

    comp = [[0.0] * nd for _ in range(ne)]
    imp = [[0.0] * nd for _ in range(ne)]
    cap = [[0] * nd for _ in range(ne)]
    dead = [[False] * nd for _ in range(ne)]

    pin_state: dict[tuple[int, int], int] = {}
    eidx = instance.element_index()
    didx = instance.device_index()
    for pin in instance.pins:
        pin_state[(eidx[pin.element], didx[pin.device])] = pin.forced

    for e in range(ne):
        el = instance.elements[e]
        for d in range(nd):
            dev = instance.devices[d]
            comp[e][d] = _dot(dev.characteristics, el.requirements)
            watchers = [u for u in present if instance.access[u][d]]
            imp[e][d] = (
                sum(instance.importance[e][u] for u in watchers) / len(watchers)
                if watchers else 0.0
            )
            cap[e][d] = min(el.max_area, dev.area)
            dead[e][d] = (
                not dev.enabled
                or not watchers
                or any(not instance.permission[e][u] for u in watchers)
                or comp[e][d] <= 0.0
                or imp[e][d] <= 0.0
                or el.min_width > dev.width
                or el.min_height > dev.height
                or pin_state.get((e, d)) == 0
            )

    forced = [pair for pair, v in sorted(pin_state.items()) if v == 1]
    for pair in forced:
        if dead[pair[0]][pair[1]]:
            raise ValueError(f"pin {pair} forces an impossible assignment")

    # normalization denominators, rederived here
    weight = [[comp[e][d] * imp[e][d] for d in range(nd)] for e in range(ne)]
    q_upper = 0.0
    for d in range(nd):
        if not instance.devices[d].enabled:
            continue
        order = sorted(
            (e for e in range(ne) if not dead[e][d]),
            key=lambda e: (-weight[e][d], e),
        )
        spare = float(instance.devices[d].area)
        for e in order:
            if spare <= 0 or weight[e][d] <= 0:
                break
            take = min(float(cap[e][d]), spare)
            q_upper += weight[e][d] * take
            spare -= take
    c_upper = 1.0 + sum(
        instance.permission[e][u] for e in range(ne) for u in present
    )
    return present, weight, cap, dead, forced, q_upper, c_upper


def evaluate(instance: ProblemInstance, chosen: set[tuple[int, int]],
             derived=None) -> float | None:
    """Objective of an integral assignment with objective-maximal sizes, or
    None when some device cannot hold its elements at minimum size."""
    if derived is None:
        derived = _derive(instance)
    present, weight, cap, dead, forced, q_upper, c_upper = derived
    ne, nd = len(instance.elements), len(instance.devices)

    quality = 0.0
    for d in range(nd):
        members = sorted(e for e, dd in chosen if dd == d)
        if not members:
            continue
        spare = instance.devices[d].area - sum(
            instance.elements[e].min_area for e in members)
        if spare < 0:
            return None
        sizes = {e: instance.elements[e].min_area for e in members}
        for e in sorted(members, key=lambda e: (-weight[e][d], e)):
            grow = min(cap[e][d] - sizes[e], spare)
            if grow > 0:
                sizes[e] += grow
                spare -= grow
        quality += sum(weight[e][d] * sizes[e] for e in members)

    shown = 0
    ratios = []
    for u in present:
        permitted = [e for e in range(ne) if instance.permission[e][u]]
        if not permitted:
            continue
        # element e reaches u iff some chosen device carrying e is accessible
        have = 0
        for e in permitted:
            if any(instance.access[u][d] for ee, d in chosen if ee == e):
                have += 1
        shown += have
        ratios.append(have / len(permitted))

    r_min = min(ratios) if ratios else 0.0
    wq, wc = instance.weights
    q_norm = quality / q_upper if q_upper > 0 else 0.0
    c_norm = (shown + (r_min if ratios else 0.0)) / c_upper
    return wq * q_norm + wc * c_norm


def enumerate_assignments(instance: ProblemInstance) -> OracleResult:
    """Try every on/off combination of the undecided pairs and keep the best.

    Ties within 1e-9 of the best objective are all reported. Raises
    InstanceTooLarge above ENUMERATION_LIMIT undecided pairs.
    """
    derived = _derive(instance)
    present, weight, cap, dead, forced, q_upper, c_upper = derived
    ne, nd = len(instance.elements), len(instance.devices)

    free = [
        (e, d)
        for e in range(ne)
        for d in range(nd)
        if not dead[e][d] and (e, d) not in forced
    ]
    if len(free) > ENUMERATION_LIMIT:
        raise InstanceTooLarge(
            f"{len(free)} undecided pairs exceed the enumeration limit "
            f"of {ENUMERATION_LIMIT}"
        )

    best = float("-inf")
    near: list[tuple[float, set[tuple[int, int]]]] = []
    for mask in range(1 << len(free)):
        chosen = set(forced)
        for bit, pair in enumerate(free):
            if mask >> bit & 1:
                chosen.add(pair)
        value = evaluate(instance, chosen, derived)
        if value is None:
            continue
        if value > best:
            best = value
        if value >= best - 1e-9:
            near.append((value, chosen))

    matrices = sorted(
        tuple(tuple(1 if (e, d) in chosen else 0 for d in range(nd)) for e in range(ne))
        for value, chosen in near
        if value >= best - 1e-9
    )
    return OracleResult(
        best_objective=best,
        best_assignments=tuple(matrices),
        enumerated=1 << len(free),
    )


def constraint_violations(
    instance: ProblemInstance,
    assignment: Sequence[Sequence[int]],
    sizes: Sequence[Sequence[int]],
) -> list[str]:
    """Check an assignment and its sizes directly against every model rule.

    Returns human-readable violations; empty means the solution is sound.
    """
    out: list[str] = []
    ne, nd = len(instance.elements), len(instance.devices)
    present = [u for u, spec in enumerate(instance.users) if spec.present]

    if len(assignment) != ne or any(len(r) != nd for r in assignment):
        return [f"assignment must be {ne}x{nd}"]
    if len(sizes) != ne or any(len(r) != nd for r in sizes):
        return [f"sizes must be {ne}x{nd}"]

    eidx = instance.element_index()
    didx = instance.device_index()
    for pin in sorted(instance.pins, key=lambda p: (p.element, p.device)):
        got = assignment[eidx[pin.element]][didx[pin.device]]
        if got != pin.forced:
            out.append(f"pin ({pin.element}, {pin.device}) wants {pin.forced}, got {got}")

    for e in range(ne):
        el = instance.elements[e]
        for d in range(nd):
            dev = instance.devices[d]
            x, s = assignment[e][d], sizes[e][d]
            tag = f"({el.id}, {dev.id})"
            if x not in (0, 1):
                out.append(f"{tag} assignment value {x!r} not binary")
                continue
            if x == 0:
                if s != 0:
                    out.append(f"{tag} has size {s} while unassigned")
                continue
            if not dev.enabled:
                out.append(f"{tag} assigned to a disabled device")
            watchers = [u for u in present if instance.access[u][d]]
            if not watchers:
                out.append(f"{tag} assigned but no present user can access the device")
            for u in watchers:
                if not instance.permission[e][u]:
                    out.append(
                        f"{tag} visible to {instance.users[u].id} without permission")
            if _dot(dev.characteristics, el.requirements) <= 0.0:
                out.append(f"{tag} assigned with zero compatibility")
            imp = (
                sum(instance.importance[e][u] for u in watchers) / len(watchers)
                if watchers else 0.0
            )
            if watchers and imp <= 0.0:
                out.append(f"{tag} assigned with zero mean importance")
            if el.min_width > dev.width or el.min_height > dev.height:
                out.append(f"{tag} minimum dimensions exceed the screen")
            if s < el.min_area:
                out.append(f"{tag} size {s} below minimum area {el.min_area}")
            if s > min(el.max_area, dev.area):
                out.append(f"{tag} size {s} above its cap")

    for d in range(nd):
        used = sum(sizes[e][d] for e in range(ne))
        if used > instance.devices[d].area:
            out.append(
                f"device {instance.devices[d].id} overfull: {used} px^2 on "
                f"{instance.devices[d].area}")
    return out
