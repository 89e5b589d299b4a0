"""Seeded random instances and the benchmark sweep harness.

All randomness comes from one numpy PCG64 generator per instance, and the
draw order is fixed (elements, then devices, then the importance matrix), so
a (shape, seed) pair always produces the identical instance.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .formulation import build, preprocess
from .model import DeviceSpec, ElementSpec, ProblemInstance, UserSpec
from .solver import SolveOptions, solve

SWEEP_COLUMNS = (
    "axis_value", "seed", "n_elements", "n_devices", "n_users", "n_binaries",
    "status", "objective", "gap", "wall_ms", "nodes",
)

SWEEP_AXES = ("elements", "devices", "users", "users_and_devices")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _draw_element(rng: np.random.Generator, eid: str) -> ElementSpec:
    req = tuple(float(v) for v in rng.random(4))
    min_w = 100 + 10 * int(rng.integers(0, 151))
    min_h = 100 + 10 * int(rng.integers(0, 151))
    max_w = min_w + 10 * int(rng.integers(0, (1600 - min_w) // 10 + 1))
    max_h = min_h + 10 * int(rng.integers(0, (1600 - min_h) // 10 + 1))
    return ElementSpec(eid, req, min_w, min_h, max_w, max_h)


def _draw_device(rng: np.random.Generator, did: str) -> DeviceSpec:
    chars = tuple(float(v) for v in rng.random(4))
    width = 200 + 10 * int(rng.integers(0, 101))
    height = 200 + 10 * int(rng.integers(0, 101))
    return DeviceSpec(did, chars, width, height)


def random_instance(n_elements: int, n_devices: int, n_users: int,
                    seed: int = 0) -> ProblemInstance:
    """Uniform random instance: everyone present, full access and permission,
    screen sides on the 10 px grid in 200..1200, element sides in 100..1600."""
    rng = _rng(seed)
    elements = tuple(_draw_element(rng, f"e{i}") for i in range(n_elements))
    devices = tuple(_draw_device(rng, f"d{i}") for i in range(n_devices))
    users = tuple(UserSpec(f"u{i}") for i in range(n_users))
    importance = rng.random((n_elements, n_users))
    return ProblemInstance(
        elements=elements,
        devices=devices,
        users=users,
        access=tuple(tuple(1 for _ in range(n_devices)) for _ in range(n_users)),
        permission=tuple(tuple(1 for _ in range(n_users)) for _ in range(n_elements)),
        importance=tuple(tuple(float(v) for v in row) for row in importance),
    )


def realistic_instance(n_users: int, seed: int = 0) -> ProblemInstance:
    """Meeting-style instance: 20 elements, two personal devices per user plus
    one shared screen per started group of five users."""
    rng = _rng(seed)
    n_elements = 20
    elements = tuple(_draw_element(rng, f"e{i}") for i in range(n_elements))

    devices: list[DeviceSpec] = []
    owner: list[int | None] = []
    for u in range(n_users):
        for k in range(2):
            devices.append(_draw_device(rng, f"u{u}-d{k}"))
            owner.append(u)
    for k in range(math.ceil(n_users / 5)):
        devices.append(_draw_device(rng, f"shared-{k}"))
        owner.append(None)

    users = tuple(UserSpec(f"u{i}") for i in range(n_users))
    access = tuple(
        tuple(1 if owner[d] is None or owner[d] == u else 0
              for d in range(len(devices)))
        for u in range(n_users))
    importance = rng.random((n_elements, n_users))
    return ProblemInstance(
        elements=elements,
        devices=tuple(devices),
        users=users,
        access=access,
        permission=tuple(tuple(1 for _ in range(n_users)) for _ in range(n_elements)),
        importance=tuple(tuple(float(v) for v in row) for row in importance),
    )


@dataclass(frozen=True)
class SweepSpec:
    """One benchmark sweep: vary ``axis`` over ``points``, ``seeds`` instances
    per point, remaining counts fixed."""

    axis: str
    points: tuple[int, ...]
    seeds: int = 3
    fixed_elements: int = 20
    fixed_devices: int = 20
    fixed_users: int = 10
    options: SolveOptions = field(
        default_factory=lambda: SolveOptions(gap_tolerance=0.05,
                                             time_limit_millis=60_000))


def _sweep_instance(spec: SweepSpec, point: int, seed: int) -> ProblemInstance:
    if spec.axis == "elements":
        return random_instance(point, spec.fixed_devices, spec.fixed_users, seed)
    if spec.axis == "devices":
        return random_instance(spec.fixed_elements, point, spec.fixed_users, seed)
    if spec.axis == "users":
        return random_instance(spec.fixed_elements, spec.fixed_devices, point, seed)
    if spec.axis == "users_and_devices":
        return realistic_instance(point, seed)
    raise ValueError(f"unknown sweep axis {spec.axis!r}; choose from {SWEEP_AXES}")


def run_sweep(spec: SweepSpec) -> list[dict]:
    """Solve every (point, seed) cell, one row per solve; a row is recorded
    even when the solver stops on its time limit."""
    rows = []
    for point in spec.points:
        for seed in range(spec.seeds):
            instance = _sweep_instance(spec, point, seed)
            started = time.perf_counter()
            milp = build(instance, preprocess(instance))
            solution = solve(milp, spec.options)
            wall_ms = int((time.perf_counter() - started) * 1000)
            rows.append({
                "axis_value": point,
                "seed": seed,
                "n_elements": len(instance.elements),
                "n_devices": len(instance.devices),
                "n_users": len(instance.users),
                "n_binaries": len(milp.binaries),
                "status": solution.status,
                "objective": round(solution.objective, 9),
                "gap": round(solution.gap, 9) if math.isfinite(solution.gap) else "inf",
                "wall_ms": wall_ms,
                "nodes": solution.nodes,
            })
    return rows


def write_csv(rows: Iterable[dict], out: IO[str]) -> None:
    writer = csv.DictWriter(out, fieldnames=SWEEP_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
