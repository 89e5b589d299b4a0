"""Exhaustive reference optimizer and the direct constraint checker."""
import dataclasses

import pytest

from duiopt.model import Pin
from duiopt.oracle import (
    ENUMERATION_LIMIT, InstanceTooLarge, constraint_violations,
    enumerate_assignments, evaluate,
)
from duiopt import generator

from conftest import make_instance, pairs_of, solve_instance


def test_single_pair_optimum_is_to_assign(single_pair_instance):
    res = enumerate_assignments(single_pair_instance)
    assert res.best_objective == pytest.approx(1.0)
    assert res.best_assignments == (((1,),),)
    assert res.enumerated == 2


def test_two_devices_both_carry_the_element():
    inst = make_instance(n_devices=2)
    res = enumerate_assignments(inst)
    assert ((1, 1),) in res.best_assignments


def test_forced_pins_survive_enumeration(single_pair_instance):
    inst = dataclasses.replace(
        single_pair_instance, pins=frozenset({Pin("e0", "d0", 1)}))
    res = enumerate_assignments(inst)
    assert res.enumerated == 1  # nothing left to branch on
    assert res.best_assignments == (((1,),),)


def test_evaluate_none_when_minimums_do_not_fit():
    inst = make_instance(n_elements=2, min_w=800, min_h=800,
                         dev_w=1000, dev_h=1000)
    assert evaluate(inst, {(0, 0), (1, 0)}) is None
    assert evaluate(inst, {(0, 0)}) is not None


def test_near_ties_are_all_reported():
    # two identical elements on one single-slot device: either one is optimal
    inst = make_instance(n_elements=2, min_w=800, min_h=800,
                         dev_w=1000, dev_h=1000)
    res = enumerate_assignments(inst)
    assert len(res.best_assignments) == 2


def test_oversize_instance_is_refused():
    inst = make_instance(n_elements=6, n_devices=4)
    with pytest.raises(InstanceTooLarge):
        enumerate_assignments(inst)
    assert 6 * 4 > ENUMERATION_LIMIT


def test_agrees_with_solver_on_a_seeded_batch():
    for seed in range(25):
        inst = generator.random_instance(3, 2, 2, seed=seed)
        res = enumerate_assignments(inst)
        sol = solve_instance(inst)
        assert sol.objective == pytest.approx(res.best_objective, abs=1e-6), seed
        assert tuple(tuple(r) for r in sol.assignment) in res.best_assignments, seed


def test_checker_passes_solver_output(single_pair_instance):
    sol = solve_instance(single_pair_instance)
    assert constraint_violations(single_pair_instance, sol.assignment, sol.sizes) == []


def test_checker_flags_size_below_minimum(single_pair_instance):
    out = constraint_violations(single_pair_instance, [[1]], [[10]])
    assert any("below minimum" in v for v in out)


def test_checker_flags_size_above_cap(single_pair_instance):
    out = constraint_violations(single_pair_instance, [[1]], [[10 ** 9]])
    assert any("above its cap" in v for v in out)


def test_checker_flags_phantom_size(single_pair_instance):
    out = constraint_violations(single_pair_instance, [[0]], [[500]])
    assert any("unassigned" in v for v in out)


def test_checker_flags_permission_breach():
    inst = make_instance(n_users=2)
    inst = dataclasses.replace(inst, permission=((1, 0),))
    out = constraint_violations(inst, [[1]], [[1000 * 1000]])
    assert any("without permission" in v for v in out)


def test_checker_flags_disabled_device(single_pair_instance):
    inst = dataclasses.replace(
        single_pair_instance,
        devices=(dataclasses.replace(single_pair_instance.devices[0], enabled=False),),
    )
    out = constraint_violations(inst, [[1]], [[1000 * 1000]])
    assert any("disabled" in v for v in out)


def test_checker_flags_unreachable_device(single_pair_instance):
    inst = dataclasses.replace(single_pair_instance, access=((0,),))
    out = constraint_violations(inst, [[1]], [[1000 * 1000]])
    assert any("no present user" in v for v in out)


def test_checker_flags_overfull_device():
    inst = make_instance(n_elements=2, min_w=800, min_h=800,
                         dev_w=1000, dev_h=1000)
    out = constraint_violations(inst, [[1], [1]], [[640000], [640000]])
    assert any("overfull" in v for v in out)


def test_checker_flags_broken_pin(single_pair_instance):
    inst = dataclasses.replace(
        single_pair_instance, pins=frozenset({Pin("e0", "d0", 1)}))
    out = constraint_violations(inst, [[0]], [[0]])
    assert any("pin" in v for v in out)


def test_checker_flags_zero_compatibility():
    inst = make_instance(requirements=(0.0, 1.0, 0.0, 0.0))
    out = constraint_violations(inst, [[1]], [[1000 * 1000]])
    assert any("compatibility" in v for v in out)


def test_checker_flags_bad_shape(single_pair_instance):
    assert constraint_violations(single_pair_instance, [[1, 0]], [[0]])
