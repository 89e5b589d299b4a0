"""Live editing session: apply change events, re-solve, and diff solutions.

Session is the synchronous core used by tests and the CLI; every applied
event gets a monotonically increasing seq and either mutates the instance or
is rejected atomically with a diagnostic. LiveSession wraps a Session in a
worker thread with a debounce window and latest-wins preemption for service
use: callbacks fire on the worker thread and must not block.
"""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass, replace
from typing import Any, Callable, Mapping

from . import model
from .formulation import InfeasiblePinError, build, preprocess
from .model import (
    DeviceSpec, ElementSpec, Pin, ProblemInstance, Solution, UserSpec,
    STATUS_INFEASIBLE, STATUS_TIME_LIMIT,
)
from .solver import SolveOptions, check_feasible, solve

EVENT_KINDS = frozenset({
    "user_join", "user_leave", "device_join", "device_leave",
    "set_importance", "set_permission", "set_access", "set_pin",
    "set_weights", "set_element_params",
})


class EventRejected(Exception):
    """Event could not be applied; the session state is unchanged."""

    def __init__(self, detail: str):
        self.detail = detail
        super().__init__(detail)


class SessionError(Exception):
    """Re-solve failed (contradictory pins); session state is kept."""


@dataclass(frozen=True)
class SessionEvent:
    kind: str
    payload: Mapping[str, Any]
    seq: int


@dataclass(frozen=True)
class AssignmentDiff:
    """Exact delta between consecutive solutions, keyed by ids. Applying it
    to the previous (element, device) -> size map reproduces the new one."""

    added: tuple[tuple[str, str, int], ...]
    removed: tuple[tuple[str, str], ...]
    resized: tuple[tuple[str, str, int, int], ...]
    seq: int
    stale: bool = False


def _solution_size_map(instance: ProblemInstance, solution: Solution) -> dict[tuple[str, str], int]:
    out = {}
    for e, el in enumerate(instance.elements):
        for d, dev in enumerate(instance.devices):
            if solution.assignment[e][d]:
                out[(el.id, dev.id)] = solution.sizes[e][d]
    return out


def diff_solutions(prev: Mapping[tuple[str, str], int],
                   new: Mapping[tuple[str, str], int],
                   seq: int, stale: bool = False) -> AssignmentDiff:
    added = tuple((e, d, new[(e, d)]) for e, d in sorted(new.keys() - prev.keys()))
    removed = tuple(sorted(prev.keys() - new.keys()))
    resized = tuple(
        (e, d, prev[(e, d)], new[(e, d)])
        for e, d in sorted(prev.keys() & new.keys())
        if prev[(e, d)] != new[(e, d)]
    )
    return AssignmentDiff(added=added, removed=removed, resized=resized,
                          seq=seq, stale=stale)


def _vec(payload: Mapping[str, Any], key: str) -> model.Vec4:
    data = payload[key]
    return tuple(float(data[k]) for k in model.VECTOR_KEYS)  # type: ignore


class Session:
    """Synchronous session: submit events, then resolve on demand."""

    def __init__(self, instance: ProblemInstance,
                 options: SolveOptions | None = None):
        bad = model.validate(instance)
        if bad:
            raise ValueError("invalid instance: " + "; ".join(bad))
        self._instance = instance
        self.options = options or SolveOptions()
        self.seq = 0
        self.last_solution: Solution | None = None
        self.last_warnings: tuple[str, ...] = ()
        self._last_sizes: dict[tuple[str, str], int] = {}
        self._warm_hint: frozenset[tuple[str, str]] | None = None

    @property
    def instance(self) -> ProblemInstance:
        return self._instance

    def submit(self, kind: str, payload: Mapping[str, Any] | None = None) -> SessionEvent:
        """Assign the next seq to the event and apply it."""
        event = SessionEvent(kind=kind, payload=dict(payload or {}), seq=self.seq + 1)
        self.apply(event)
        return event

    def apply(self, event: SessionEvent) -> ProblemInstance:
        """Apply one event atomically; raises EventRejected leaving the
        instance, seq, and previous solution untouched."""
        if event.kind not in EVENT_KINDS:
            raise EventRejected(f"unknown event kind {event.kind!r}")
        handler = getattr(self, f"_on_{event.kind}")
        try:
            candidate, warnings = handler(event.payload)
        except EventRejected:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise EventRejected(f"malformed {event.kind} payload: {exc}") from exc
        bad = model.validate(candidate)
        if bad:
            raise EventRejected("; ".join(bad))
        self._instance = candidate
        self.seq = max(self.seq + 1, event.seq)
        self.last_warnings = tuple(warnings)
        return candidate

    # -- event handlers; each returns (new instance, warnings) ---------------

    def _require_user(self, uid: str) -> int:
        idx = self._instance.user_index()
        if uid not in idx:
            raise EventRejected(f"unknown user {uid!r}")
        return idx[uid]

    def _require_device(self, did: str) -> int:
        idx = self._instance.device_index()
        if did not in idx:
            raise EventRejected(f"unknown device {did!r}")
        return idx[did]

    def _require_element(self, eid: str) -> int:
        idx = self._instance.element_index()
        if eid not in idx:
            raise EventRejected(f"unknown element {eid!r}")
        return idx[eid]

    def _on_user_join(self, p: Mapping[str, Any]):
        inst = self._instance
        uid = str(p["id"])
        access_map = {str(k): int(v) for k, v in p.get("access", {}).items()}
        perm_map = {str(k): int(v) for k, v in p.get("permission", {}).items()}
        imp_map = {str(k): float(v) for k, v in p.get("importance", {}).items()}
        didx = inst.device_index()
        for d in access_map:
            if d not in didx:
                raise EventRejected(f"unknown device {d!r}")
        eidx = inst.element_index()
        for e in list(perm_map) + list(imp_map):
            if e not in eidx:
                raise EventRejected(f"unknown element {e!r}")

        uidx = inst.user_index()
        if uid in uidx:
            u = uidx[uid]
            users = _set(inst.users, u, replace(inst.users[u], present=True))
            access = _set(inst.access, u, tuple(
                access_map.get(dev.id, inst.access[u][d])
                for d, dev in enumerate(inst.devices)))
            permission = tuple(
                _set(row, u, perm_map.get(el.id, row[u]))
                for el, row in zip(inst.elements, inst.permission))
            importance = tuple(
                _set(row, u, imp_map.get(el.id, row[u]))
                for el, row in zip(inst.elements, inst.importance))
        else:
            users = inst.users + (UserSpec(uid),)
            access = inst.access + (tuple(
                access_map.get(dev.id, 0) for dev in inst.devices),)
            # unstated defaults: permitted, middling importance
            permission = tuple(
                row + (perm_map.get(el.id, 1),)
                for el, row in zip(inst.elements, inst.permission))
            importance = tuple(
                row + (imp_map.get(el.id, 0.5),)
                for el, row in zip(inst.elements, inst.importance))
        return replace(inst, users=users, access=access,
                       permission=permission, importance=importance), []

    def _on_user_leave(self, p: Mapping[str, Any]):
        u = self._require_user(str(p["id"]))
        inst = self._instance
        users = _set(inst.users, u, replace(inst.users[u], present=False))
        return replace(inst, users=users), []

    def _on_device_join(self, p: Mapping[str, Any]):
        inst = self._instance
        did = str(p["id"])
        access_map = {str(k): int(v) for k, v in p.get("access", {}).items()}
        uidx = inst.user_index()
        for u in access_map:
            if u not in uidx:
                raise EventRejected(f"unknown user {u!r}")
        didx = inst.device_index()
        if did in didx:
            d = didx[did]
            dev = inst.devices[d]
            dev = replace(
                dev, enabled=True,
                characteristics=_vec(p, "characteristics") if "characteristics" in p else dev.characteristics,
                width=int(p.get("width", dev.width)),
                height=int(p.get("height", dev.height)),
            )
            devices = _set(inst.devices, d, dev)
            access = tuple(
                _set(row, d, access_map.get(user.id, row[d]))
                for user, row in zip(inst.users, inst.access))
        else:
            if not {"characteristics", "width", "height"} <= set(p):
                raise EventRejected(
                    f"device {did!r} is new: characteristics, width and height are required")
            devices = inst.devices + (DeviceSpec(
                id=did, characteristics=_vec(p, "characteristics"),
                width=int(p["width"]), height=int(p["height"])),)
            access = tuple(
                row + (access_map.get(user.id, 0),)
                for user, row in zip(inst.users, inst.access))
        return replace(inst, devices=devices, access=access), []

    def _on_device_leave(self, p: Mapping[str, Any]):
        d = self._require_device(str(p["id"]))
        inst = self._instance
        did = inst.devices[d].id
        devices = _set(inst.devices, d, replace(inst.devices[d], enabled=False))
        warnings = []
        pins = set(inst.pins)
        for pin in sorted(inst.pins, key=lambda q: (q.element, q.device)):
            if pin.device == did:
                pins.discard(pin)
                warnings.append(
                    f"dropped pin ({pin.element}, {pin.device}): device left")
        return replace(inst, devices=devices, pins=frozenset(pins)), warnings

    def _on_set_importance(self, p: Mapping[str, Any]):
        e = self._require_element(str(p["element"]))
        u = self._require_user(str(p["user"]))
        inst = self._instance
        importance = tuple(
            _set(row, u, float(p["value"])) if i == e else row
            for i, row in enumerate(inst.importance))
        return replace(inst, importance=importance), []

    def _on_set_permission(self, p: Mapping[str, Any]):
        e = self._require_element(str(p["element"]))
        u = self._require_user(str(p["user"]))
        inst = self._instance
        permission = tuple(
            _set(row, u, int(p["value"])) if i == e else row
            for i, row in enumerate(inst.permission))
        return replace(inst, permission=permission), []

    def _on_set_access(self, p: Mapping[str, Any]):
        u = self._require_user(str(p["user"]))
        d = self._require_device(str(p["device"]))
        inst = self._instance
        access = tuple(
            _set(row, d, int(p["value"])) if i == u else row
            for i, row in enumerate(inst.access))
        return replace(inst, access=access), []

    def _on_set_pin(self, p: Mapping[str, Any]):
        self._require_element(str(p["element"]))
        self._require_device(str(p["device"]))
        inst = self._instance
        eid, did = str(p["element"]), str(p["device"])
        pins = {q for q in inst.pins if not (q.element == eid and q.device == did)}
        forced = p.get("forced")
        if forced is not None:
            pins.add(Pin(eid, did, int(forced)))
        return replace(inst, pins=frozenset(pins)), []

    def _on_set_weights(self, p: Mapping[str, Any]):
        weights = (float(p["quality"]), float(p["completeness"]))
        return replace(self._instance, weights=weights), []

    def _on_set_element_params(self, p: Mapping[str, Any]):
        e = self._require_element(str(p["element"]))
        inst = self._instance
        el = inst.elements[e]
        el = replace(
            el,
            requirements=_vec(p, "requirements") if "requirements" in p else el.requirements,
            min_width=int(p.get("min_width", el.min_width)),
            min_height=int(p.get("min_height", el.min_height)),
            max_width=int(p.get("max_width", el.max_width)),
            max_height=int(p.get("max_height", el.max_height)),
        )
        return replace(inst, elements=_set(inst.elements, e, el)), []

    # -- solving --------------------------------------------------------------

    def _warm_candidates(self, milp) -> list[list[list[int]]]:
        inst = self._instance
        eidx, didx = inst.element_index(), inst.device_index()
        forced = {
            (inst.elements[e].id, inst.devices[d].id)
            for e, d in milp.coeffs.forced_one
        }
        out = []
        for id_pairs in (self._warm_hint, frozenset(self._last_sizes)):
            if id_pairs is None:
                continue
            matrix = [[0] * len(inst.devices) for _ in inst.elements]
            for eid, did in set(id_pairs) | forced:
                if eid in eidx and did in didx:
                    matrix[eidx[eid]][didx[did]] = 1
            out.append(matrix)
        return out

    def resolve(self, cancel: threading.Event | None = None) -> tuple[Solution, AssignmentDiff]:
        """Re-solve the current instance, warm-started from the previous
        solution when it is still feasible. Raises SessionError on
        contradictory pins; prior state is kept either way."""
        inst = self._instance
        solved_seq = self.seq
        try:
            milp = build(inst, preprocess(inst))
        except InfeasiblePinError as exc:
            raise SessionError(str(exc)) from exc

        warm = None
        warm_objective = float("-inf")
        for matrix in self._warm_candidates(milp):
            comp = check_feasible(milp, matrix)
            if comp is not None and comp.objective > warm_objective:
                warm, warm_objective = matrix, comp.objective

        options = replace(self.options, warm_start=warm, cancel=cancel)
        solution = solve(milp, options)
        if solution.status == STATUS_INFEASIBLE:
            raise SessionError("assignment pins cannot all hold at once")
        if cancel is not None and cancel.is_set() and solution.status == STATUS_TIME_LIMIT:
            # preempted: stash the incumbent for the next warm start
            self._warm_hint = frozenset(_solution_size_map(inst, solution))
            raise SolveCancelled()

        new_sizes = _solution_size_map(inst, solution)
        diff = diff_solutions(self._last_sizes, new_sizes, seq=solved_seq)
        self.last_solution = solution
        self._last_sizes = new_sizes
        self._warm_hint = None
        return solution, diff


class SolveCancelled(Exception):
    """A resolve was preempted by newer events; nothing was delivered."""


class LiveSession:
    """Threaded wrapper: debounces events, keeps at most one solve in flight,
    and preempts it when newer events arrive (latest wins)."""

    def __init__(self, session: Session, debounce: float = 0.05,
                 on_state: Callable[[ProblemInstance, int, tuple[str, ...]], None] | None = None,
                 on_solution: Callable[[Solution, AssignmentDiff], None] | None = None,
                 on_error: Callable[[str], None] | None = None):
        self.session = session
        self.debounce = debounce
        self.on_state = on_state or (lambda *a: None)
        self.on_solution = on_solution or (lambda *a: None)
        self.on_error = on_error or (lambda *a: None)
        self._lock = threading.RLock()
        self._wake = threading.Condition(self._lock)
        self._dirty = False
        self._stopping = False
        self._inflight_cancel: threading.Event | None = None
        self._thread = threading.Thread(target=self._run, name="duiopt-session", daemon=True)

    def start(self, initial_solve: bool = True) -> None:
        if initial_solve:
            with self._lock:
                self._dirty = True
        self._thread.start()

    def stop(self) -> None:
        with self._wake:
            self._stopping = True
            if self._inflight_cancel is not None:
                self._inflight_cancel.set()
            self._wake.notify_all()
        self._thread.join(timeout=10)

    def submit(self, kind: str, payload: Mapping[str, Any] | None = None) -> SessionEvent:
        """Apply an event (raises EventRejected) and schedule a re-solve."""
        with self._wake:
            event = self.session.submit(kind, payload)
            warnings = self.session.last_warnings
            instance = self.session.instance
            self._dirty = True
            if self._inflight_cancel is not None:
                self._inflight_cancel.set()
            self._wake.notify_all()
        self.on_state(instance, event.seq, warnings)
        return event

    def snapshot(self) -> tuple[ProblemInstance, int, Solution | None]:
        with self._lock:
            return self.session.instance, self.session.seq, self.session.last_solution

    def _run(self) -> None:
        while True:
            with self._wake:
                while not self._dirty and not self._stopping:
                    self._wake.wait()
                if self._stopping:
                    return
            time.sleep(self.debounce)  # batch events arriving close together
            with self._lock:
                if self._stopping:
                    return
                self._dirty = False
                cancel = threading.Event()
                self._inflight_cancel = cancel
                target_seq = self.session.seq
            try:
                solution, diff = self.session.resolve(cancel=cancel)
            except SolveCancelled:
                continue
            except SessionError as exc:
                with self._lock:
                    self._inflight_cancel = None
                self.on_error(str(exc))
                continue
            with self._lock:
                self._inflight_cancel = None
                newer = self.session.seq > target_seq
                if newer:
                    self._dirty = True
            self.on_solution(solution, replace(diff, stale=newer))


def _set(items: tuple, index: int, value) -> tuple:
    return items[:index] + (value,) + items[index + 1:]
