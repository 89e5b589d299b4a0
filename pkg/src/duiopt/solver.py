"""Exact branch-and-bound solver over LP relaxations of the assignment MILP.

Search is best-first on the LP bound with deterministic tie-breaking: nodes
with equal bounds pop in creation order, the x=1 child of every branch is
created first, and the branching variable is the most fractional binary with
ties broken by (element, device) index. Sizes and completeness of every
incumbent are recomputed exactly from the integral assignment, so reported
objectives carry no LP tolerance noise.
"""
from __future__ import annotations

import heapq
import threading
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .formulation import Completion, Milp, complete_assignment, _quality_weight
from .model import (
    STATUS_GAP_REACHED,
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_TIME_LIMIT,
    Solution,
)

INTEGRALITY_TOL = 1e-6
# pruning slack: a node this close to the incumbent cannot improve it
OPT_EPS_ABS = 1e-9
OPT_EPS_REL = 1e-7


@dataclass(frozen=True)
class SolveOptions:
    """Knobs for one solve.

    gap_tolerance 0 demands an optimality proof; a positive value lets the
    search stop once (best_bound - incumbent) / max(|incumbent|, 1e-9) falls
    under it. ``warm_start`` seeds the incumbent with a previous assignment
    matrix when it is still feasible. ``cancel`` is polled at node boundaries;
    a cancelled solve returns its incumbent with status time_limit.
    ``deterministic_seed`` is reserved: the search itself never randomizes.
    """

    gap_tolerance: float = 0.0
    time_limit_millis: int | None = None
    warm_start: Sequence[Sequence[int]] | None = None
    deterministic_seed: int = 0
    cancel: threading.Event | None = None
    node_log: Callable[[str], None] | None = None


@dataclass
class BnbNode:
    """One open subproblem: binary fixings plus its LP relaxation result."""

    fixings: dict[tuple[int, int], int]
    lp_bound: float
    lp_x: np.ndarray
    depth: int


class _LpBackend:
    """LP relaxation solver. The constraint matrix is assembled once; node
    fixings are applied as variable bound changes only."""

    def __init__(self, milp: Milp):
        self.milp = milp
        n = milp.n_vars
        self.cost = -np.asarray(milp.objective, dtype=float)  # linprog minimizes
        rows: list[int] = []
        cols: list[int] = []
        data: list[float] = []
        rhs: list[float] = []
        for r, row in enumerate(milp.constraints):
            flip = -1.0 if row.sense == ">=" else 1.0
            for i, c in row.terms:
                rows.append(r)
                cols.append(i)
                data.append(flip * c)
            rhs.append(flip * row.rhs)
        self.a_ub = (
            sparse.csr_matrix((data, (rows, cols)), shape=(len(rhs), n))
            if rhs else None
        )
        self.b_ub = np.asarray(rhs, dtype=float)
        variables = milp.binaries + milp.continuous
        self.lb = np.array([v.lb for v in variables], dtype=float)
        self.ub = np.array([v.ub for v in variables], dtype=float)
        self.binary_of_pair = {v.key: i for i, v in enumerate(milp.binaries)}

    def solve(self, fixings: Mapping[tuple[int, int], int]):
        lb, ub = self.lb.copy(), self.ub.copy()
        for pair, value in fixings.items():
            i = self.binary_of_pair[pair]
            lb[i] = ub[i] = float(value)
        res = linprog(
            self.cost,
            A_ub=self.a_ub,
            b_ub=self.b_ub if self.a_ub is not None else None,
            bounds=np.column_stack([lb, ub]),
            method="highs",
        )
        if res.status == 0:
            return "optimal", float(-res.fun), np.asarray(res.x)
        if res.status == 2:
            return "infeasible", float("-inf"), None
        raise RuntimeError(f"LP relaxation failed: {res.message}")


def solve_lp(milp: Milp, fixings: Mapping[tuple[int, int], int] | None = None):
    """Solve the LP relaxation under optional binary fixings keyed by
    (element index, device index). Returns (status, value, primal)."""
    if milp.n_vars == 0:
        return "optimal", 0.0, np.zeros(0)
    return _LpBackend(milp).solve(fixings or {})


def check_feasible(milp: Milp, assignment: Sequence[Sequence[int]]) -> Completion | None:
    """Exact feasibility check of an integral assignment matrix against the
    model. Returns the objective-maximal completion, or None if infeasible."""
    ne = len(milp.instance.elements)
    nd = len(milp.instance.devices)
    if len(assignment) != ne or any(len(row) != nd for row in assignment):
        return None
    assigned = set()
    for e in range(ne):
        for d in range(nd):
            v = assignment[e][d]
            if v not in (0, 1):
                return None
            if v:
                assigned.add((e, d))
    return complete_assignment(milp.instance, milp.coeffs, assigned)


def _empty_solution(milp: Milp, status: str, millis: int, nodes: int) -> Solution:
    ne = len(milp.instance.elements)
    nd = len(milp.instance.devices)
    nu = len(milp.instance.users)
    zeros_d = tuple(tuple(0 for _ in range(nd)) for _ in range(ne))
    zeros_u = tuple(tuple(0 for _ in range(nu)) for _ in range(ne))
    return Solution(
        assignment=zeros_d, sizes=zeros_d, availability=zeros_u,
        per_user_completeness=tuple(0.0 for _ in range(nu)),
        r_min=0.0, objective=0.0, gap=float("inf"),
        solve_millis=millis, status=status, nodes=nodes,
    )


def _greedy_fill(milp: Milp, order: list[tuple[int, int]]) -> set[tuple[int, int]]:
    """Admit pairs in the given order while each element's minimum area still
    fits its device; pins forced on are always admitted first."""
    instance, coeffs = milp.instance, milp.coeffs
    remaining = {d: dev.area for d, dev in enumerate(instance.devices)}
    chosen: set[tuple[int, int]] = set()
    for e, d in sorted(coeffs.forced_one):
        chosen.add((e, d))
        remaining[d] -= instance.elements[e].min_area
    for e, d in order:
        if (e, d) in chosen:
            continue
        if instance.elements[e].min_area <= remaining[d]:
            chosen.add((e, d))
            remaining[d] -= instance.elements[e].min_area
    return chosen


def solve(milp: Milp, options: SolveOptions | None = None) -> Solution:
    """Run branch-and-bound to the requested gap, time limit, or proof."""
    options = options or SolveOptions()
    t0 = time.perf_counter()
    deadline = (
        t0 + options.time_limit_millis / 1000.0
        if options.time_limit_millis is not None else None
    )
    instance, coeffs = milp.instance, milp.coeffs
    pairs = [v.key for v in milp.binaries]
    nb = len(pairs)
    log = options.node_log or (lambda line: None)

    def millis() -> int:
        return int((time.perf_counter() - t0) * 1000)

    incumbent: tuple[float, frozenset[tuple[int, int]], Completion] | None = None

    def offer(assigned: set[tuple[int, int]], label: str) -> None:
        nonlocal incumbent
        comp = complete_assignment(instance, coeffs, assigned)
        if comp is None:
            return
        if incumbent is None or comp.objective > incumbent[0] + 1e-12:
            incumbent = (comp.objective, frozenset(assigned), comp)
            log(f"incumbent {comp.objective:.9f} via {label}")

    if options.warm_start is not None:
        comp = check_feasible(milp, options.warm_start)
        if comp is not None:
            assigned = {
                (e, d)
                for e in range(len(instance.elements))
                for d in range(len(instance.devices))
                if options.warm_start[e][d]
            }
            incumbent = (comp.objective, frozenset(assigned), comp)
            log(f"incumbent {comp.objective:.9f} via warm start")

    if milp.n_vars == 0:
        offer(set(), "empty model")
        comp = incumbent[2] if incumbent else None
        if comp is None:
            return _empty_solution(milp, STATUS_INFEASIBLE, millis(), 0)
        return _assemble(milp, incumbent, 0.0, STATUS_OPTIMAL, millis(), 0)

    backend = _LpBackend(milp)
    nodes = 0
    status_root, root_bound, root_x = backend.solve({})
    nodes += 1
    if status_root == "infeasible":
        return _empty_solution(milp, STATUS_INFEASIBLE, millis(), nodes)

    # root-only heuristic: admit live pairs by descending quality weight
    weight = _quality_weight(coeffs)
    offer(
        _greedy_fill(milp, sorted(pairs, key=lambda p: (-weight[p], p))),
        "weight greedy",
    )

    counter = 0
    heap: list[tuple[float, int, BnbNode]] = []
    heapq.heappush(heap, (-root_bound, counter, BnbNode({}, root_bound, root_x, 0)))
    counter += 1

    status = STATUS_OPTIMAL
    final_gap = 0.0
    best_bound = root_bound

    while True:
        if options.cancel is not None and options.cancel.is_set():
            status = STATUS_TIME_LIMIT
            best_bound = -heap[0][0] if heap else (incumbent[0] if incumbent else 0.0)
            break
        if deadline is not None and time.perf_counter() > deadline:
            status = STATUS_TIME_LIMIT
            best_bound = -heap[0][0] if heap else (incumbent[0] if incumbent else 0.0)
            break
        if not heap:
            status = STATUS_OPTIMAL
            best_bound = incumbent[0] if incumbent else 0.0
            break
        neg_bound, _, node = heapq.heappop(heap)
        best_bound = -neg_bound

        if incumbent is not None:
            inc = incumbent[0]
            if best_bound <= inc + OPT_EPS_ABS + OPT_EPS_REL * abs(inc):
                status = STATUS_OPTIMAL
                break
            gap = (best_bound - inc) / max(abs(inc), 1e-9)
            if options.gap_tolerance > 0 and gap <= options.gap_tolerance:
                status = STATUS_GAP_REACHED
                final_gap = gap
                break

        xb = node.lp_x[:nb]
        frac = np.abs(xb - np.round(xb))
        if bool((frac <= INTEGRALITY_TOL).all()):
            offer({pairs[i] for i in range(nb) if xb[i] > 0.5}, f"node depth {node.depth}")
            continue

        lp_order = sorted(
            (i for i in range(nb) if xb[i] > INTEGRALITY_TOL),
            key=lambda i: (-xb[i], pairs[i]),
        )
        offer(_greedy_fill(milp, [pairs[i] for i in lp_order]), f"rounding depth {node.depth}")

        branch = min(range(nb), key=lambda i: (-frac[i], pairs[i]))
        for value in (1, 0):
            child_fix = dict(node.fixings)
            child_fix[pairs[branch]] = value
            child_status, child_bound, child_x = backend.solve(child_fix)
            nodes += 1
            if child_status == "infeasible":
                continue
            assert child_bound <= node.lp_bound + 1e-6 * max(1.0, abs(node.lp_bound)), (
                "child LP bound exceeds parent bound"
            )
            if incumbent is not None and child_bound <= incumbent[0] + OPT_EPS_ABS:
                continue
            heapq.heappush(
                heap,
                (-child_bound, counter, BnbNode(child_fix, child_bound, child_x, node.depth + 1)),
            )
            counter += 1

    if incumbent is None:
        return _empty_solution(milp, status, millis(), nodes)

    if status == STATUS_OPTIMAL:
        final_gap = 0.0
    elif status == STATUS_TIME_LIMIT:
        final_gap = max(0.0, (best_bound - incumbent[0]) / max(abs(incumbent[0]), 1e-9))
    log(f"done: {status} objective {incumbent[0]:.9f} gap {final_gap:.6f} nodes {nodes}")
    return _assemble(milp, incumbent, final_gap, status, millis(), nodes)


def _assemble(milp: Milp, incumbent: tuple[float, frozenset, Completion],
              gap: float, status: str, millis: int, nodes: int) -> Solution:
    objective, assigned, comp = incumbent
    ne = len(milp.instance.elements)
    nd = len(milp.instance.devices)
    assignment = tuple(
        tuple(1 if (e, d) in assigned else 0 for d in range(nd)) for e in range(ne)
    )
    return Solution(
        assignment=assignment,
        sizes=comp.sizes,
        availability=comp.availability,
        per_user_completeness=comp.per_user_completeness,
        r_min=comp.r_min,
        objective=objective,
        gap=gap,
        solve_millis=millis,
        status=status,
        nodes=nodes,
    )
