"""Exhaustive, greedy and random solvers used to score the SOM."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import som
from .model import NetworkInstance, build_proximity, cost, is_feasible, pair_costs

SEARCH_GUARD = 10**7


class SearchSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SolveReport:
    assignment: np.ndarray
    cost: float
    method: str
    elapsed_ms: float
    fingerprint: str
    converged: bool = True
    outer_steps: int = 0

    def to_dict(self, timing: bool = True) -> dict:
        return {
            "assignment": self.assignment.astype(int).tolist(),
            "cost": float(self.cost),
            "converged": bool(self.converged),
            "outer_steps": int(self.outer_steps),
            "method": self.method,
            "elapsed_ms": float(self.elapsed_ms) if timing else 0.0,
            "fingerprint": self.fingerprint,
        }

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True) + "\n"


def make_report(instance, A, method, t0, converged=True, outer_steps=0) -> SolveReport:
    A = np.asarray(A, dtype=np.int64)
    if not is_feasible(A, instance.R):
        raise AssertionError(f"{method} produced an infeasible assignment")
    # cost is recomputed here, independent of whatever the solver tracked
    f = cost(A, build_proximity(instance))
    elapsed = (time.perf_counter() - t0) * 1e3
    return SolveReport(A, float(f), method, elapsed, instance.fingerprint(), converged, outer_steps)


def search_space(instance: NetworkInstance) -> int:
    return math.prod(math.comb(instance.C, int(r)) for r in instance.R)


def _subsets(C: int, r: int) -> np.ndarray:
    rows = []
    for combo in combinations(range(C), r):
        row = np.zeros(C, dtype=np.int64)
        row[list(combo)] = 1
        rows.append(row)
    return np.array(rows, dtype=np.int64).reshape(-1, C)


def exact_solve(instance: NetworkInstance, guard: int = SEARCH_GUARD) -> SolveReport:
    """Global optimum by enumerating every feasible assignment.

    Per-SC channel subsets are enumerated in lexicographic order and the
    first optimum in that order is kept.
    """
    t0 = time.perf_counter()
    instance.require_valid()
    size = search_space(instance)
    if size > guard:
        raise SearchSpaceTooLarge(f"search space {size} exceeds the exact-solve guard of {guard}")
    S = instance.S
    Q = pair_costs(build_proximity(instance))
    X = [_subsets(instance.C, int(r)) for r in instance.R]
    # total[i_0, ..., i_{S-1}] = sum over (n, k) of X_n[i_n] Q[n, k] X_k[i_k]
    total = np.zeros(tuple(len(x) for x in X), dtype=np.int64)
    for n in range(S):
        for k in range(S):
            if n == k:
                continue
            table = X[n] @ Q[n, k] @ X[k].T
            shape = [1] * S
            shape[n] = len(X[n])
            shape[k] = len(X[k])
            total += table.reshape(shape) if n < k else table.T.reshape(shape)
    best = np.unravel_index(int(np.argmin(total)), total.shape)
    A = np.stack([X[n][best[n]] for n in range(S)])
    return make_report(instance, A, "exact", t0)


def greedy_solve(instance: NetworkInstance) -> SolveReport:
    """SCs in order of decreasing difficulty each take their cheapest channels."""
    t0 = time.perf_counter()
    instance.require_valid()
    S, C = instance.S, instance.C
    Q = pair_costs(build_proximity(instance))
    rho = som.difficulty_rho(instance)
    order = sorted(range(S), key=lambda n: (-rho[n], n))
    A = np.zeros((S, C), dtype=np.int64)
    for n in order:
        # both ordered directions against already-fixed SCs (unfixed rows are zero)
        marginal = np.einsum("kij,kj->i", Q[n], A) + np.einsum("kji,kj->i", Q[:, n], A)
        A[n, np.argsort(marginal, kind="stable")[: instance.R[n]]] = 1
    return make_report(instance, A, "greedy", t0)


def random_solve(instance: NetworkInstance, seed: int = 0) -> SolveReport:
    t0 = time.perf_counter()
    instance.require_valid()
    rng = np.random.default_rng(seed)
    A = np.zeros((instance.S, instance.C), dtype=np.int64)
    for n, r in enumerate(instance.R):
        A[n, rng.choice(instance.C, size=int(r), replace=False)] = 1
    return make_report(instance, A, "random", t0)


def som_solve(instance: NetworkInstance, config: som.SolverConfig | None = None) -> SolveReport:
    t0 = time.perf_counter()
    res = som.solve(instance, config)
    return make_report(instance, res.assignment, "som", t0, res.converged, res.outer_steps)


def multicolorable(instance: NetworkInstance) -> bool:
    """Whether every SC can get R[n] channels with no co-channel conflict.

    Backtracking over SCs; independent of the cost function, so it serves as
    a cross-check for zero-cost optima under binary interference.
    """
    adj = instance.conflict > 0
    S, C = instance.S, instance.C
    order = sorted(range(S), key=lambda n: -adj[n].sum())
    taken: dict[int, frozenset] = {}

    def place(i: int) -> bool:
        if i == len(order):
            return True
        n = order[i]
        blocked = set()
        for k, chans in taken.items():
            if adj[n, k]:
                blocked |= chans
        free = [m for m in range(C) if m not in blocked]
        for combo in combinations(free, int(instance.R[n])):
            taken[n] = frozenset(combo)
            if place(i + 1):
                return True
            del taken[n]
        return False

    return place(0)
