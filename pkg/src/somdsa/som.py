"""Self-organizing feature map solver for spectrum allocation.

Input neurons are spectrum controllers, output neurons are channels, and
``W[j, k]`` scores how strongly SC ``j`` wants channel ``k``. Each
presentation of SC ``j'`` picks the lowest-interference channels (winner plus
neighbourhood), pulls their weights toward 1, and projects the row back onto
``sum_k W[j', k] = R[j']`` inside the unit box.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .model import InstanceError, NetworkInstance, build_proximity, cost, pair_costs

log = logging.getLogger(__name__)

DECAY = 0.95
SIGMA0 = 9.0


class DegenerateDemandError(InstanceError):
    """Raised when no SC requests any channel."""


@dataclass(frozen=True)
class SolverConfig:
    seed: int = 0
    n_epochs: int = 5
    delta_w_tol: float = 1e-4
    max_outer_steps: int = 200
    presentation_order: str = "shuffled"  # or "fixed"
    warm_start: bool = False

    def __post_init__(self):
        if self.n_epochs < 1:
            raise ValueError("n_epochs must be >= 1")
        if not self.delta_w_tol > 0:
            raise ValueError("delta_w_tol must be > 0")
        if self.max_outer_steps < 1:
            raise ValueError("max_outer_steps must be >= 1")
        if self.presentation_order not in ("shuffled", "fixed"):
            raise ValueError(f"unknown presentation_order {self.presentation_order!r}")


@dataclass(frozen=True, eq=False)
class SomState:
    W: np.ndarray
    t: int
    alpha: float
    sigma: float
    eta: np.ndarray
    rho: np.ndarray


@dataclass(frozen=True)
class TraceRow:
    outer_step: int
    epoch: int
    max_delta_w: float
    decoded_cost: float
    alpha: float
    sigma: float


TRACE_COLUMNS = ("outer_step", "epoch", "max_delta_w", "decoded_cost", "alpha", "sigma")


@dataclass(frozen=True, eq=False)
class SomResult:
    assignment: np.ndarray
    cost: float
    converged: bool
    outer_steps: int
    trace: list[TraceRow] = field(repr=False)
    state: SomState = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "assignment": self.assignment.astype(int).tolist(),
            "cost": float(self.cost),
            "converged": bool(self.converged),
            "outer_steps": int(self.outer_steps),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"

    def trace_csv(self) -> str:
        return trace_to_csv(self.trace)


def trace_to_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for row in trace:
        w.writerow([repr(v) if isinstance(v, float) else v for v in asdict(row).values()])
    return buf.getvalue()


# -- constraint plane --------------------------------------------------------


class ConstraintPlane:
    """The affine set ``A_c w = b`` over the flattened S*C weight vector.

    Built with explicit matrices and a pseudo-inverse; used as the reference
    against which the closed-form row projection is checked.
    """

    def __init__(self, S: int, C: int, b):
        self.S, self.C = S, C
        self.A = np.kron(np.eye(S), np.ones((1, C)))
        self.b = np.asarray(b, dtype=float)
        pinv = np.linalg.pinv(self.A)
        self.projector = np.eye(S * C) - pinv @ self.A
        self.offset = pinv @ self.b

    def project(self, W) -> np.ndarray:
        w = np.asarray(W, dtype=float).reshape(-1)
        return (self.projector @ w + self.offset).reshape(self.S, self.C)

    def energy(self, W) -> float:
        w = np.asarray(W, dtype=float).reshape(-1)
        r = w - (self.projector @ w + self.offset)
        return float(r @ r)

    def residual(self, W) -> float:
        w = np.asarray(W, dtype=float).reshape(-1)
        return float(np.max(np.abs(self.A @ w - self.b), initial=0.0))


def energy(W, R) -> float:
    """Squared distance from ``W`` to the demand plane (closed form)."""
    W = np.asarray(W, dtype=float)
    return float(np.sum((W.sum(axis=1) - np.asarray(R)) ** 2) / W.shape[1])


def project_affine(W, R) -> np.ndarray:
    """Orthogonal projection onto the demand plane, no box constraint."""
    W = np.asarray(W, dtype=float)
    return W + ((np.asarray(R, dtype=float) - W.sum(axis=1)) / W.shape[1])[:, None]


def _project_row(v: np.ndarray, r: float) -> np.ndarray:
    n = len(v)
    if n == 0:
        return v.copy()
    if r <= 0:
        return np.zeros(n)
    if r >= n:
        return np.ones(n)
    w = v + (r - v.sum()) / n
    if w.min() >= 0.0 and w.max() <= 1.0:
        return w
    # Box repair: find the shift tau with sum(clip(v + tau, 0, 1)) == r.
    # The sum is piecewise linear and nondecreasing in tau; its kinks sit at -v and 1 - v.
    kinks = np.unique(np.concatenate([-v, 1.0 - v]))
    g = np.clip(v[None, :] + kinks[:, None], 0.0, 1.0).sum(axis=1)
    i = int(np.searchsorted(g, r))
    lo, hi = kinks[i - 1], kinks[i]
    tau = lo + (r - g[i - 1]) * (hi - lo) / (g[i] - g[i - 1])
    w = np.clip(v + tau, 0.0, 1.0)
    # absorb rounding so the row sum is exact to machine precision
    free = (w > 0.0) & (w < 1.0)
    if free.any():
        w[free] += (r - w.sum()) / free.sum()
    return w


def project_to_constraint_plane(W, R, allowed=None) -> np.ndarray:
    """Project ``W`` so each row sums to its demand with entries in [0, 1].

    Rows already inside the box after the affine step are returned exactly as
    the orthogonal projection; otherwise the row is shifted uniformly and
    clipped (projection onto the box-plane intersection). With ``allowed``,
    masked entries are pinned at 0 and each row targets
    ``min(R, allowed count)``.
    """
    W = np.asarray(W, dtype=float)
    R = np.asarray(R)
    S, C = W.shape
    if allowed is None:
        if np.any(R > C):
            bad = int(np.flatnonzero(R > C)[0])
            raise InstanceError(f"infeasible row {bad}: demand {R[bad]} exceeds {C} channels")
        out = project_affine(W, R)
        ok = (out.min(axis=1) >= 0.0) & (out.max(axis=1) <= 1.0)
        for n in np.flatnonzero(~ok):
            out[n] = _project_row(W[n], float(R[n]))
        return out
    allowed = np.asarray(allowed, dtype=bool)
    out = np.zeros_like(W)
    for n in range(S):
        cols = np.flatnonzero(allowed[n])
        out[n, cols] = _project_row(W[n, cols], float(min(R[n], len(cols))))
    return out


# -- primitives ---------------------------------------------------------------


def difficulty_rho(instance: NetworkInstance, demand=None) -> np.ndarray:
    """Interference pressure on each SC: demand-weighted count of its interferers."""
    R = instance.R if demand is None else np.asarray(demand)
    I2 = instance.conflict
    return (I2 @ R - np.diag(I2)).astype(float)


def _active_min(R) -> float:
    R = np.asarray(R)
    if not np.any(R > 0):
        raise DegenerateDemandError("all demands are zero; nothing to allocate")
    return float(R[R > 0].min())


def init_weights(instance: NetworkInstance, demand=None, allowed=None) -> SomState:
    R = instance.R if demand is None else np.asarray(demand)
    S, C = instance.S, instance.C
    if allowed is None:
        W = np.repeat((R / C)[:, None], C, axis=1).astype(float)
    else:
        allowed = np.asarray(allowed, dtype=bool)
        counts = allowed.sum(axis=1)
        W = np.where(allowed, (R / np.maximum(counts, 1))[:, None], 0.0)
    return SomState(
        W=W,
        t=0,
        alpha=_active_min(R),
        sigma=SIGMA0,
        eta=R.astype(np.int64) + S // 5,
        rho=difficulty_rho(instance, R),
    )


def objective(state: SomState, P: np.ndarray, j_prime: int, i: int) -> float:
    """Interference SC ``j_prime`` would see on channel ``i`` given current weights."""
    C = P.shape[2]
    d = np.abs(i - np.arange(C))
    return float(np.sum(P[j_prime][:, d] * state.W))


def objective_row(Q: np.ndarray, W: np.ndarray, j_prime: int) -> np.ndarray:
    return np.einsum("kij,kj->i", Q[j_prime], W)


def select_winner(Y_row) -> int:
    return int(np.argmin(Y_row))


def neighborhood(Y_row, eta_j: int) -> np.ndarray:
    """The ``eta_j`` lowest-Y channels in increasing Y order; ties go to the lower index."""
    Y_row = np.asarray(Y_row, dtype=float)
    size = min(int(eta_j), int(np.isfinite(Y_row).sum()))
    return np.argsort(Y_row, kind="stable")[:size]


def effective_alpha(alpha, sigma, rho_jp, R_jp, Y_c0, Y_k) -> float:
    raw = alpha * rho_jp / R_jp * np.exp(-abs(Y_c0 - Y_k) / sigma)
    return float(min(1.0, max(0.0, raw)))


def apply_update(state: SomState, j_prime: int, channels, Y_row, R_jp: int) -> np.ndarray:
    """Return row ``j_prime`` of W after reinforcing ``channels`` toward 1."""
    row = state.W[j_prime].copy()
    if R_jp <= 0 or len(channels) == 0:
        return row
    y0 = Y_row[channels[0]]
    for k in channels:
        a = effective_alpha(state.alpha, state.sigma, state.rho[j_prime], R_jp, y0, Y_row[k])
        row[k] += a * (1.0 - row[k])
    return row


def run_epoch(state: SomState, Q: np.ndarray, order, demand, allowed=None):
    """Present every SC once in ``order``; returns (new state, max |dW|)."""
    W = state.W.copy()
    max_dw = 0.0
    for jp in order:
        r = int(demand[jp])
        if r == 0:
            continue
        cur = replace(state, W=W)
        Y = objective_row(Q, W, jp)
        if allowed is not None:
            Y = np.where(allowed[jp], Y, np.inf)
        nb = neighborhood(Y, state.eta[jp])
        row = apply_update(cur, jp, nb, Y, r)
        if allowed is None:
            new = _project_row(row, r)
        else:
            new = np.zeros_like(row)
            cols = np.flatnonzero(allowed[jp])
            new[cols] = _project_row(row[cols], r)
        max_dw = max(max_dw, float(np.max(np.abs(new - W[jp]))))
        W[jp] = new
    return replace(state, W=W), max_dw


def step_schedules(state: SomState, demand) -> SomState:
    return replace(
        state,
        t=state.t + 1,
        alpha=state.alpha * DECAY,
        sigma=state.sigma * DECAY,
        eta=np.maximum(state.eta - 1, np.asarray(demand, dtype=np.int64)),
    )


def decode_assignment(W, R, allowed=None) -> np.ndarray:
    """Binary assignment holding each SC's ``R[j]`` highest-weight channels."""
    W = np.asarray(W, dtype=float)
    S, C = W.shape
    A = np.zeros((S, C), dtype=np.int64)
    key = -W if allowed is None else np.where(allowed, -W, np.inf)
    for j in range(S):
        r = int(R[j]) if allowed is None else int(min(R[j], np.sum(allowed[j])))
        A[j, np.argsort(key[j], kind="stable")[:r]] = 1
    return A


def solve(
    instance: NetworkInstance,
    config: SolverConfig | None = None,
    allowed=None,
    initial_weights=None,
) -> SomResult:
    """Run the full annealed SOM and decode an assignment.

    ``allowed`` (S x C bool) removes channels per SC; demands are clipped to
    what remains. ``initial_weights`` replaces the uniform start (warm start)
    and is projected before use.
    """
    config = config or SolverConfig()
    instance.require_valid()
    S, C = instance.S, instance.C
    if allowed is not None:
        allowed = np.asarray(allowed, dtype=bool)
        demand = np.minimum(instance.R, allowed.sum(axis=1))
    else:
        demand = instance.R.copy()
    P = build_proximity(instance)
    Q = pair_costs(P)
    state = init_weights(instance, demand, allowed)
    if initial_weights is not None:
        state = replace(state, W=project_to_constraint_plane(initial_weights, demand, allowed))

    rng = np.random.default_rng(config.seed)
    trace: list[TraceRow] = []
    converged = False
    outer = 0
    for outer in range(config.max_outer_steps):
        dw = np.inf
        for epoch in range(config.n_epochs):
            order = rng.permutation(S) if config.presentation_order == "shuffled" else np.arange(S)
            state, dw = run_epoch(state, Q, order, demand, allowed)
            A = decode_assignment(state.W, demand, allowed)
            trace.append(TraceRow(state.t, epoch, dw, float(cost(A, P)), state.alpha, state.sigma))
            if dw < config.delta_w_tol:
                break
        if np.array_equal(state.eta, demand) and dw < config.delta_w_tol:
            converged = True
            break
        state = step_schedules(state, demand)
    if not converged:
        log.warning("SOM did not converge within %d outer steps", config.max_outer_steps)
    A = decode_assignment(state.W, demand, allowed)
    return SomResult(A, float(cost(A, P)), converged, outer + 1, trace, state)
