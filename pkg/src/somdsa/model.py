"""Problem instance, proximity-cost tensor and the interference cost function.

Indices are 0-based throughout. The proximity tensor ``P`` has shape
``(S, S, C)`` and ``P[n, k, d]`` is the cost of SC ``n`` and SC ``k`` holding
channels that are ``d`` apart (``d = 0`` is co-channel).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class InstanceError(ValueError):
    """Raised for malformed or invariant-violating instances."""

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = list(violations or [])


class ShapeError(ValueError):
    """Raised when arrays built from different instances are combined."""


@dataclass(frozen=True)
class Geometry:
    positions: np.ndarray  # (S, 2)
    radius: float

    def to_dict(self) -> dict:
        return {"positions": self.positions.tolist(), "radius": float(self.radius)}


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class NetworkInstance:
    """S spectrum controllers competing for C channels.

    ``R[n]`` is the number of channels SC ``n`` requires and ``I[n, k, m]`` the
    interference severity when SCs ``n`` and ``k`` share channel ``m``.
    Construction does not validate; call :func:`validate` or
    :meth:`require_valid`.
    """

    S: int
    C: int
    R: np.ndarray
    I: np.ndarray
    geometry: Geometry | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "R", _frozen(self.R, np.int64))
        object.__setattr__(self, "I", _frozen(self.I, np.int64))
        if self.geometry is not None:
            g = Geometry(_frozen(self.geometry.positions, float), float(self.geometry.radius))
            object.__setattr__(self, "geometry", g)

    def require_valid(self) -> "NetworkInstance":
        problems = validate(self)
        if problems:
            raise InstanceError("invalid instance: " + "; ".join(problems), problems)
        return self

    @property
    def conflict(self) -> np.ndarray:
        """S x S severity matrix collapsed over channels (max over m)."""
        if self.C == 0:
            return np.zeros((self.S, self.S), dtype=np.int64)
        return self.I.max(axis=2)

    def to_dict(self) -> dict:
        return {
            "S": int(self.S),
            "C": int(self.C),
            "R": self.R.tolist(),
            "I": self.I.tolist(),
            "geometry": None if self.geometry is None else self.geometry.to_dict(),
        }

    def fingerprint(self) -> str:
        return fingerprint(self.to_dict())

    def __eq__(self, other):
        if not isinstance(other, NetworkInstance):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def fingerprint(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()[:16]


def validate(instance: NetworkInstance) -> list[str]:
    """Return every invariant violation; an empty list means the instance is ok."""
    out: list[str] = []
    S, C = instance.S, instance.C
    R, I = instance.R, instance.I
    if S < 1:
        out.append(f"S must be >= 1, got {S}")
    if C < 1:
        out.append(f"C must be >= 1, got {C}")
    if R.shape != (S,):
        out.append(f"R has shape {R.shape}, expected ({S},)")
    if I.shape != (S, S, C):
        out.append(f"I has shape {I.shape}, expected ({S}, {S}, {C})")
    if out:
        return out
    for n in np.flatnonzero(R < 0):
        out.append(f"negative demand {R[n]} at SC {n}")
    for n in np.flatnonzero(R > C):
        out.append(f"demand {R[n]} exceeds channels {C} at SC {n}")
    for n, k, m in np.argwhere(I < 0):
        out.append(f"negative interference {I[n, k, m]} at ({n},{k},{m})")
    for n in range(S):
        for m in np.flatnonzero(I[n, n]):
            out.append(f"nonzero diagonal at ({n},{n},{m})")
    for n, k, m in np.argwhere(I != I.transpose(1, 0, 2)):
        if n < k:
            out.append(f"asymmetric interference at ({n},{k},{m}): {I[n, k, m]} != {I[k, n, m]}")
    if instance.geometry is not None and instance.geometry.positions.shape != (S, 2):
        out.append(f"geometry has {len(instance.geometry.positions)} positions for {S} SCs")
    return out


def interference_from_geometry(positions, radius: float, C: int) -> np.ndarray:
    """Binary channel-uniform interference tensor from a disc model."""
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    if len(pos) < 1:
        raise InstanceError("empty instance: at least one position is required")
    if radius < 0:
        raise InstanceError(f"radius must be nonnegative, got {radius}")
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
    adj = dist <= radius
    np.fill_diagonal(adj, False)
    return np.repeat(adj[:, :, None], C, axis=2).astype(np.int64)


def build_proximity(instance: NetworkInstance) -> np.ndarray:
    """Proximity tensor of shape (S, S, C) from the interference severities.

    The co-channel slice is the max severity over channels; each further unit
    of channel separation lowers the cost by one, floored at zero.
    """
    S, C = instance.S, instance.C
    P = np.zeros((S, S, C), dtype=np.int64)
    P[:, :, 0] = instance.conflict
    idx = np.arange(S)
    P[idx, idx, 0] = 0
    for d in range(1, C):
        P[:, :, d] = np.maximum(0, P[:, :, d - 1] - 1)
    return P


def separation(C: int) -> np.ndarray:
    m = np.arange(C)
    return np.abs(m[:, None] - m[None, :])


def pair_costs(P: np.ndarray) -> np.ndarray:
    """Expand P to Q[n, k, m, j] = P[n, k, |m - j|]."""
    return P[:, :, separation(P.shape[2])]


def cost(A, P: np.ndarray):
    """Total interference cost of assignment ``A`` over ordered pairs.

    Each conflicting unordered pair is counted in both directions. Integer
    inputs give an exact Python ``int``.
    """
    A = np.asarray(A)
    P = np.asarray(P)
    if P.ndim != 3 or P.shape[0] != P.shape[1] or A.shape != (P.shape[0], P.shape[2]):
        raise ShapeError(f"assignment shape {A.shape} does not match proximity shape {P.shape}")
    total = np.einsum("nm,nkmj,kj->", A, pair_costs(P), A)
    if np.issubdtype(total.dtype, np.integer) or total.dtype == bool:
        return int(total)
    return float(total)


def is_feasible(A, R) -> bool:
    A = np.asarray(A)
    return bool(np.isin(A, (0, 1)).all() and np.array_equal(A.sum(axis=1), np.asarray(R)))


_FIELDS = {"S", "C", "R", "I", "geometry"}


def instance_from_dict(data: dict) -> NetworkInstance:
    """Parse and validate an instance dict; ``I`` may be omitted when geometry is set."""
    extra = set(data) - _FIELDS
    if extra:
        raise InstanceError(f"unknown instance fields: {sorted(extra)}")
    missing = {"S", "C", "R"} - set(data)
    if missing:
        raise InstanceError(f"missing instance fields: {sorted(missing)}")
    S, C = int(data["S"]), int(data["C"])
    geom = data.get("geometry")
    geometry = None
    if geom is not None:
        gextra = set(geom) - {"positions", "radius"}
        if gextra:
            raise InstanceError(f"unknown geometry fields: {sorted(gextra)}")
        geometry = Geometry(np.asarray(geom["positions"], dtype=float), float(geom["radius"]))
    if data.get("I") is not None:
        I = np.asarray(data["I"], dtype=np.int64)
    elif geometry is not None:
        I = interference_from_geometry(geometry.positions, geometry.radius, C)
    else:
        raise InstanceError("instance needs either I or geometry")
    return NetworkInstance(S, C, np.asarray(data["R"], dtype=np.int64), I, geometry).require_valid()


def load_instance(path) -> NetworkInstance:
    return instance_from_dict(json.loads(Path(path).read_text()))


def save_instance(instance: NetworkInstance, path) -> None:
    Path(path).write_text(canonical_json(instance.to_dict()) + "\n")
