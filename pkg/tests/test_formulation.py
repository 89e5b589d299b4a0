"""Model build: coefficients, preprocessing fixings, rows, size completion."""
import dataclasses

import pytest

from duiopt.formulation import (
    InfeasiblePinError, build, compatibility, complete_assignment,
    mean_importance, preprocess, write_lp,
)
from duiopt.model import Pin, UserSpec

from conftest import make_instance


def test_compatibility_is_a_dot_product():
    assert compatibility((0.2, 0.0, 0.0, 0.4), (0.0, 0.0, 1.0, 0.6)) == pytest.approx(0.24)
    assert compatibility((1.0, 1.0, 1.0, 1.0), (0.25, 0.25, 0.25, 0.25)) == pytest.approx(1.0)
    assert compatibility((1.0, 0.0, 0.0, 0.0), (0.0, 1.0, 0.0, 0.0)) == 0.0


def test_mean_importance_averages_present_accessors_only():
    inst = make_instance(n_devices=1, n_users=3)
    inst = dataclasses.replace(
        inst,
        access=((1,), (1,), (0,)),
        importance=((0.2, 0.6, 1.0),),
        users=(UserSpec("u0"), UserSpec("u1"), UserSpec("u2")),
    )
    assert mean_importance(0, 0, inst) == pytest.approx(0.4)
    # u1 walks away: only u0 still counts
    gone = dataclasses.replace(
        inst, users=(inst.users[0], dataclasses.replace(inst.users[1], present=False),
                     inst.users[2]))
    assert mean_importance(0, 0, gone) == pytest.approx(0.2)


def test_device_without_accessors_has_zero_mean_importance():
    inst = make_instance()
    inst = dataclasses.replace(inst, access=((0,),))
    assert mean_importance(0, 0, inst) == 0.0


@pytest.mark.parametrize(
    "mutate",
    [
        lambda i: dataclasses.replace(
            i, devices=(dataclasses.replace(i.devices[0], enabled=False),)),
        lambda i: dataclasses.replace(i, access=((0,),)),
        lambda i: dataclasses.replace(i, permission=((0,),)),
        lambda i: dataclasses.replace(i, importance=((0.0,),)),
        lambda i: dataclasses.replace(
            i, elements=(dataclasses.replace(
                i.elements[0], requirements=(0.0, 1.0, 0.0, 0.0)),)),
        lambda i: dataclasses.replace(
            i, elements=(dataclasses.replace(
                i.elements[0], min_width=2000, max_width=2400),)),
        lambda i: dataclasses.replace(i, pins=frozenset({Pin("e0", "d0", 0)})),
    ],
    ids=[
        "disabled-device", "no-accessor", "no-permission", "zero-importance",
        "orthogonal-vectors", "too-wide", "pinned-off",
    ],
)
def test_dead_pair_rules(mutate, single_pair_instance):
    inst = mutate(single_pair_instance)
    coeffs = preprocess(inst)
    assert (0, 0) in coeffs.fixed_zero
    assert coeffs.live_pairs(1, 1) == []


def test_forced_pin_bounds_the_binary_at_one(single_pair_instance):
    inst = dataclasses.replace(
        single_pair_instance, pins=frozenset({Pin("e0", "d0", 1)}))
    coeffs = preprocess(inst)
    assert (0, 0) in coeffs.forced_one
    milp = build(inst, coeffs)
    var = next(v for v in milp.binaries if v.key == (0, 0))
    assert (var.lb, var.ub) == (1.0, 1.0)


def test_pin_onto_dead_pair_is_contradictory(single_pair_instance):
    inst = dataclasses.replace(
        single_pair_instance,
        permission=((0,),),
        pins=frozenset({Pin("e0", "d0", 1)}),
    )
    with pytest.raises(InfeasiblePinError) as err:
        preprocess(inst)
    assert "e0" in str(err.value) and "d0" in str(err.value)


def test_minimal_instance_builds_four_named_rows(single_pair_instance):
    milp = build(single_pair_instance, preprocess(single_pair_instance))
    names = sorted(row.name.split("[")[0] for row in milp.constraints)
    assert names == ["avail", "completeness", "size_cap", "size_min"]
    assert len(milp.binaries) == 1
    assert len(milp.continuous) == 3  # s, o, r_min


def test_capacity_row_appears_only_when_caps_oversubscribe_the_screen():
    # two elements able to fill the device each: their caps exceed the area
    crowded = make_instance(n_elements=2)
    milp = build(crowded, preprocess(crowded))
    assert any(r.name.startswith("screen") for r in milp.constraints)

    # tiny maxima: both elements capped well under the device area
    roomy = make_instance(n_elements=2, max_w=200, max_h=200)
    milp = build(roomy, preprocess(roomy))
    assert not any(r.name.startswith("screen") for r in milp.constraints)


def test_pair_cap_is_min_of_element_max_and_device_area():
    inst = make_instance(max_w=400, max_h=300, dev_w=1000, dev_h=1000)
    coeffs = preprocess(inst)
    assert coeffs.pair_cap[0][0] == 400 * 300
    inst = make_instance(max_w=4000, max_h=3000, dev_w=1000, dev_h=1000)
    coeffs = preprocess(inst)
    assert coeffs.pair_cap[0][0] == 1000 * 1000


def test_disabled_device_builds_the_same_model_as_a_deleted_one():
    inst = make_instance(n_elements=2, n_devices=2)
    disabled = dataclasses.replace(
        inst, devices=(inst.devices[0],
                       dataclasses.replace(inst.devices[1], enabled=False)))
    deleted = dataclasses.replace(
        inst,
        devices=(inst.devices[0],),
        access=tuple(row[:1] for row in inst.access),
    )
    # same variables and rows up to the device column that went away
    lp_disabled = write_lp(build(disabled, preprocess(disabled)))
    lp_deleted = write_lp(build(deleted, preprocess(deleted)))
    assert lp_disabled == lp_deleted


def test_complete_assignment_spreads_spare_area_by_weight():
    inst = make_instance(n_elements=2, min_w=100, min_h=100,
                         max_w=1600, max_h=1600, dev_w=500, dev_h=500)
    inst = dataclasses.replace(inst, importance=((0.9,), (0.3,)))
    coeffs = preprocess(inst)
    comp = complete_assignment(inst, coeffs, {(0, 0), (1, 0)})
    # e1 held at its minimum, e0 takes everything else
    assert comp.sizes[1][0] == 100 * 100
    assert comp.sizes[0][0] == 500 * 500 - 100 * 100
    assert comp.r_min == 1.0


def test_complete_assignment_rejects_overfull_devices():
    inst = make_instance(n_elements=2, min_w=800, min_h=800,
                         dev_w=1000, dev_h=1000)
    coeffs = preprocess(inst)
    assert complete_assignment(inst, coeffs, {(0, 0), (1, 0)}) is None


def test_complete_assignment_reports_vacuous_completeness_as_one():
    # u1 can reach no device and may see nothing: completeness is vacuous
    inst = make_instance(n_users=2)
    inst = dataclasses.replace(inst, permission=((1, 0),), access=((1,), (0,)))
    coeffs = preprocess(inst)
    comp = complete_assignment(inst, coeffs, {(0, 0)})
    assert comp.per_user_completeness[1] == 1.0
    assert comp.per_user_completeness[0] == 1.0


def test_quality_upper_bound_caps_every_integral_assignment():
    inst = make_instance(n_elements=3, n_devices=2, importance=1.0)
    coeffs = preprocess(inst)
    everything = {(e, d) for e in range(3) for d in range(2)}
    comp = complete_assignment(inst, coeffs, everything)
    assert comp is not None
    assert 0.0 <= comp.quality_norm <= 1.0 + 1e-12
    assert 0.0 <= comp.completeness_norm <= 1.0 + 1e-12


def test_write_lp_mentions_every_variable(single_pair_instance):
    milp = build(single_pair_instance, preprocess(single_pair_instance))
    text = write_lp(milp)
    for var in list(milp.binaries) + list(milp.continuous):
        flat = var.name.replace("[", "_").replace(",", "__").replace("]", "")
        assert flat in text
    assert "Maximize" in text and "Binaries" in text
