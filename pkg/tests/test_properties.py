"""Randomized invariants: fixings, normalization, diffs, serialization."""
import dataclasses

from hypothesis import given, settings, strategies as st

from duiopt.formulation import complete_assignment, preprocess
from duiopt.model import dumps, loads, validate
from duiopt.oracle import constraint_violations, enumerate_assignments
from duiopt.session import Session, diff_solutions
from duiopt import generator

from conftest import pairs_of, solve_instance

sizes = st.tuples(
    st.integers(min_value=1, max_value=4),   # elements
    st.integers(min_value=1, max_value=3),   # devices
    st.integers(min_value=1, max_value=3),   # users
)
seeds = st.integers(min_value=0, max_value=10_000)


@given(sizes, seeds)
@settings(max_examples=60, deadline=None)
def test_serialization_round_trip(dims, seed):
    inst = generator.random_instance(*dims, seed=seed)
    assert loads(dumps(inst)) == inst


@given(sizes, seeds)
@settings(max_examples=60, deadline=None)
def test_granting_permission_never_kills_a_pair(dims, seed):
    inst = generator.random_instance(*dims, seed=seed)
    granted = dataclasses.replace(
        inst, permission=tuple(tuple(1 for _ in row) for row in inst.permission))
    before = preprocess(inst).fixed_zero
    after = preprocess(granted).fixed_zero
    assert after <= before


@given(sizes, seeds)
@settings(max_examples=40, deadline=None)
def test_enumerated_assignments_have_normalized_terms_in_unit_range(dims, seed):
    inst = generator.random_instance(*dims, seed=seed)
    coeffs = preprocess(inst)
    ne, nd = dims[0], dims[1]
    live = coeffs.live_pairs(ne, nd)
    if len(live) > 10:
        live = live[:10]
    for mask in range(1 << len(live)):
        chosen = set(coeffs.forced_one)
        chosen.update(p for bit, p in enumerate(live) if mask >> bit & 1)
        comp = complete_assignment(inst, coeffs, chosen)
        if comp is None:
            continue
        assert -1e-9 <= comp.quality_norm <= 1 + 1e-9
        assert -1e-9 <= comp.completeness_norm <= 1 + 1e-9


@given(sizes, seeds)
@settings(max_examples=50, deadline=None)
def test_solver_output_is_always_sound(dims, seed):
    inst = generator.random_instance(*dims, seed=seed)
    sol = solve_instance(inst)
    assert constraint_violations(inst, sol.assignment, sol.sizes) == []


@given(sizes, seeds, st.floats(min_value=0.05, max_value=1.0))
@settings(max_examples=30, deadline=None)
def test_scaling_importance_uniformly_keeps_the_argmax(dims, seed, factor):
    inst = generator.random_instance(*dims, seed=seed)
    scaled = dataclasses.replace(
        inst,
        importance=tuple(tuple(v * factor for v in row) for row in inst.importance))
    assert enumerate_assignments(inst).best_assignments == \
        enumerate_assignments(scaled).best_assignments


@given(
    st.dictionaries(
        st.tuples(st.sampled_from("abc"), st.sampled_from("xy")),
        st.integers(min_value=1, max_value=9),
    ),
    st.dictionaries(
        st.tuples(st.sampled_from("abc"), st.sampled_from("xy")),
        st.integers(min_value=1, max_value=9),
    ),
)
@settings(max_examples=80, deadline=None)
def test_diff_replays_old_into_new(prev, new):
    diff = diff_solutions(prev, new, seq=1)
    state = dict(prev)
    for e, d in diff.removed:
        del state[(e, d)]
    for e, d, size in diff.added:
        assert (e, d) not in state
        state[(e, d)] = size
    for e, d, old, fresh in diff.resized:
        assert state[(e, d)] == old
        state[(e, d)] = fresh
    assert state == new


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_session_events_preserve_instance_validity(seed):
    import random as _random
    rng = _random.Random(seed)
    s = Session(generator.random_instance(3, 2, 2, seed=seed))
    eids = [e.id for e in s.instance.elements]
    dids = [d.id for d in s.instance.devices]
    uids = [u.id for u in s.instance.users]
    moves = [
        lambda: s.submit("set_importance", {
            "element": rng.choice(eids), "user": rng.choice(uids),
            "value": rng.random()}),
        lambda: s.submit("set_permission", {
            "element": rng.choice(eids), "user": rng.choice(uids),
            "value": rng.randint(0, 1)}),
        lambda: s.submit("set_access", {
            "user": rng.choice(uids), "device": rng.choice(dids),
            "value": rng.randint(0, 1)}),
        lambda: s.submit("set_weights", {"quality": 0.3, "completeness": 0.7}),
        lambda: s.submit("user_leave", {"id": rng.choice(uids)}),
        lambda: s.submit("user_join", {"id": rng.choice(uids)}),
        lambda: s.submit("device_leave", {"id": rng.choice(dids)}),
        lambda: s.submit("device_join", {"id": rng.choice(dids)}),
    ]
    for _ in range(12):
        rng.choice(moves)()
        assert validate(s.instance) == []


@given(sizes, seeds)
@settings(max_examples=30, deadline=None)
def test_assignment_and_sizes_agree_everywhere(dims, seed):
    inst = generator.random_instance(*dims, seed=seed)
    sol = solve_instance(inst)
    on = pairs_of(sol.assignment)
    for e, row in enumerate(sol.sizes):
        for d, s in enumerate(row):
            if (e, d) in on:
                assert s >= inst.elements[e].min_area
            else:
                assert s == 0
