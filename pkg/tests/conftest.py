"""Shared fixtures: canned instances and small helpers."""
import pathlib

import pytest

from duiopt.formulation import build, preprocess
from duiopt.model import (
    DeviceSpec, ElementSpec, ProblemInstance, UserSpec,
)
from duiopt.solver import SolveOptions, solve

SCENARIO_DIR = pathlib.Path(__file__).resolve().parent.parent / "scenarios"


def scenario_path(name: str) -> str:
    return str(SCENARIO_DIR / f"{name}.json")


def solve_instance(instance, **kwargs):
    return solve(build(instance, preprocess(instance)), SolveOptions(**kwargs))


def pairs_of(matrix):
    """Assignment matrix -> set of (element, device) index pairs."""
    return {
        (e, d)
        for e, row in enumerate(matrix)
        for d, x in enumerate(row)
        if x
    }


def make_instance(
    n_elements=1,
    n_devices=1,
    n_users=1,
    *,
    requirements=(1.0, 0.0, 0.0, 0.0),
    characteristics=(1.0, 0.0, 0.0, 0.0),
    min_w=100,
    min_h=100,
    max_w=1600,
    max_h=1600,
    dev_w=1000,
    dev_h=1000,
    importance=0.5,
    weights=(0.8, 0.2),
):
    """Uniform instance where everyone accesses and may see everything."""
    return ProblemInstance(
        elements=tuple(
            ElementSpec(f"e{i}", requirements, min_w, min_h, max_w, max_h)
            for i in range(n_elements)
        ),
        devices=tuple(
            DeviceSpec(f"d{i}", characteristics, dev_w, dev_h)
            for i in range(n_devices)
        ),
        users=tuple(UserSpec(f"u{i}") for i in range(n_users)),
        access=tuple(tuple(1 for _ in range(n_devices)) for _ in range(n_users)),
        permission=tuple(tuple(1 for _ in range(n_users)) for _ in range(n_elements)),
        importance=tuple(
            tuple(importance for _ in range(n_users)) for _ in range(n_elements)
        ),
        weights=weights,
    )


@pytest.fixture
def single_pair_instance():
    return make_instance()
