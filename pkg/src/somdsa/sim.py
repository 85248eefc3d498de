"""Event-driven re-allocation: primary users come and go, demands change,
and the SCs re-solve the allocation on whatever spectrum is left."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from itertools import groupby

import numpy as np

from . import som
from .model import NetworkInstance, build_proximity, cost
from .scenario import Event, check_ordered


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class MetricsRow:
    tick: int
    cost: float
    satisfaction: float
    churn: int
    reallocations: int


@dataclass(frozen=True)
class ActivePU:
    channel: int
    affected: tuple[bool, ...]  # per SC


@dataclass(frozen=True, eq=False)
class SimulationState:
    instance: NetworkInstance
    mask: np.ndarray  # (S, C) bool, True = channel unusable for that SC
    assignment: np.ndarray
    tick: int = 0
    pus: dict = field(default_factory=dict)
    weights: np.ndarray | None = None
    flagged: frozenset = frozenset()
    converged: bool = True
    outer_steps: int = 0
    metrics: tuple[MetricsRow, ...] = ()

    @property
    def available(self) -> np.ndarray:
        return ~self.mask

    def to_dict(self) -> dict:
        A = self.assignment
        return {
            "assignment": A.astype(int).tolist(),
            "cost": float(cost(A, build_proximity(self.instance))),
            "converged": bool(self.converged),
            "outer_steps": int(self.outer_steps),
            "tick": int(self.tick),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"


def initial_state(instance: NetworkInstance) -> SimulationState:
    instance.require_valid()
    S, C = instance.S, instance.C
    return SimulationState(
        instance=instance,
        mask=np.zeros((S, C), dtype=bool),
        assignment=np.zeros((S, C), dtype=np.int64),
    )


def _mask_from(pus: dict, S: int, C: int) -> np.ndarray:
    mask = np.zeros((S, C), dtype=bool)
    for pu in pus.values():
        mask[np.asarray(pu.affected), pu.channel] = True
    return mask


def apply_event(state: SimulationState, event: Event) -> SimulationState:
    """Apply one event to the network without re-solving."""
    if event.t < state.tick:
        raise SimulationError(f"event at t={event.t} precedes current tick {state.tick}")
    inst = state.instance
    S, C = inst.S, inst.C
    if event.kind == "demand_change":
        if not 0 <= event.sc < S:
            raise SimulationError(f"demand change for unknown SC {event.sc}")
        if not 0 <= event.demand <= C:
            raise SimulationError(f"demand {event.demand} outside [0, {C}]")
        R = inst.R.copy()
        R[event.sc] = event.demand
        inst = replace(inst, R=R)
        return replace(state, instance=inst, tick=event.t, flagged=state.flagged | {event.sc})

    pus = dict(state.pus)
    if event.kind == "pu_arrival":
        if event.pu in pus:
            raise SimulationError(f"primary user {event.pu!r} is already active")
        if not 0 <= event.channel < C:
            raise SimulationError(f"PU channel {event.channel} outside [0, {C})")
        if event.position is not None and event.radius is not None and inst.geometry is not None:
            d = np.linalg.norm(inst.geometry.positions - np.asarray(event.position), axis=1)
            affected = d <= event.radius
        else:
            affected = np.ones(S, dtype=bool)
        pus[event.pu] = ActivePU(event.channel, tuple(bool(x) for x in affected))
        hit = np.flatnonzero(affected & (state.assignment[:, event.channel] == 1))
        flagged = state.flagged | {int(n) for n in hit}
    elif event.kind == "pu_departure":
        if event.pu not in pus:
            raise SimulationError(f"departure of unknown primary user {event.pu!r}")
        del pus[event.pu]
        flagged = state.flagged
    else:
        raise SimulationError(f"unknown event kind {event.kind!r}")
    return replace(state, pus=pus, mask=_mask_from(pus, S, C), tick=event.t, flagged=flagged)


def resolve(state: SimulationState, config: som.SolverConfig | None = None) -> SimulationState:
    """Re-run the SOM on the unmasked spectrum and record one metrics row."""
    config = config or som.SolverConfig()
    inst = state.instance
    allowed = state.available
    demand = np.minimum(inst.R, allowed.sum(axis=1))
    if np.any(demand > 0):
        warm = state.weights if config.warm_start else None
        res = som.solve(inst, config, allowed=allowed, initial_weights=warm)
        A, W, converged, steps = res.assignment, res.state.W, res.converged, res.outer_steps
    else:
        A = np.zeros((inst.S, inst.C), dtype=np.int64)
        W, converged, steps = state.weights, True, 0
    prev = state.assignment
    churn = int(np.abs(A - prev).sum())
    requested = int(inst.R.sum())
    row = MetricsRow(
        tick=state.tick,
        cost=float(cost(A, build_proximity(inst))),
        satisfaction=float(A.sum() / requested) if requested else 1.0,
        churn=churn,
        reallocations=int(np.any(A != prev, axis=1).sum()),
    )
    return replace(
        state, assignment=A, weights=W, flagged=frozenset(), converged=converged,
        outer_steps=steps, metrics=state.metrics + (row,),
    )


def run_simulation(instance: NetworkInstance, events, config: som.SolverConfig | None = None,
                   observer=None):
    """Initial solve, then one re-solve per tick that carries events.

    ``observer``, if given, is called with the state after every resolve.
    Returns ``(metrics rows, final state)``.
    """
    events = check_ordered(list(events))
    state = initial_state(instance)
    batches = [(t, list(group)) for t, group in groupby(events, key=lambda e: e.t)]
    if batches and batches[0][0] == 0:
        for e in batches.pop(0)[1]:
            state = apply_event(state, e)
    state = resolve(state, config)
    if observer:
        observer(state)
    for _, batch in batches:
        for e in batch:
            state = apply_event(state, e)
        state = resolve(state, config)
        if observer:
            observer(state)
    return list(state.metrics), state


def metrics_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tick", "cost", "satisfaction", "churn"])
    for r in rows:
        w.writerow([r.tick, repr(r.cost), repr(r.satisfaction), r.churn])
    return buf.getvalue()
