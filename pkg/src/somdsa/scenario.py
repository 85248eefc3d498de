"""Instance generation, spectrum-opportunity geometry and event streams."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.optimize import brentq

from .model import Geometry, NetworkInstance, interference_from_geometry

DIAGONAL = math.sqrt(2.0)


class ConfigError(ValueError):
    pass


class EventStreamError(ValueError):
    pass


@dataclass(frozen=True)
class PrimaryUser:
    id: str
    position: tuple[float, float]
    role: str  # "transmitter" | "receiver"
    active_channel: int | None
    r_tx: float
    r_rx: float

    def __post_init__(self):
        if self.role not in ("transmitter", "receiver"):
            raise ValueError(f"unknown PU role {self.role!r}")
        if not (self.r_tx > 0 and self.r_rx > 0):
            raise ValueError("protection radii must be positive")


@dataclass(frozen=True)
class Event:
    """A timestamped change to the network.

    ``kind`` is one of ``pu_arrival`` (uses ``pu``, ``channel`` and optionally
    ``position``/``radius``), ``pu_departure`` (uses ``pu``) or
    ``demand_change`` (uses ``sc`` and ``demand``).
    """

    t: int
    kind: str
    pu: str | None = None
    channel: int | None = None
    position: tuple[float, float] | None = None
    radius: float | None = None
    sc: int | None = None
    demand: int | None = None

    def to_dict(self) -> dict:
        out: dict = {"t": self.t, "kind": self.kind}
        if self.kind == "pu_arrival":
            out.update(pu=self.pu, channel=self.channel)
            if self.position is not None:
                out.update(position=list(self.position), radius=self.radius)
        elif self.kind == "pu_departure":
            out["pu"] = self.pu
        else:
            out.update(sc=self.sc, R=self.demand)
        return out


def pair_distance_cdf(r: float) -> float:
    """P(|X - Y| <= r) for X, Y independent and uniform on the unit square."""
    if r <= 0:
        return 0.0
    if r <= 1:
        return math.pi * r * r - 8 * r**3 / 3 + r**4 / 2
    if r >= DIAGONAL:
        return 1.0
    s = math.sqrt(r * r - 1)
    return (
        1 / 3
        + 4 / 3 * (2 * r * r + 1) * s
        + (math.pi - 2) * r * r
        - r**4 / 2
        - 4 * r * r * math.acos(1 / r)
    )


def radius_for_density(density: float) -> float:
    """Interference radius whose expected interfering-pair fraction is ``density``."""
    if density <= 0:
        return 0.0
    if density >= 1:
        return DIAGONAL
    return brentq(lambda r: pair_distance_cdf(r) - density, 0.0, DIAGONAL, xtol=1e-14)


def generate_instance(S: int, C: int, density: float, demand_range=(1, 1), seed: int = 0) -> NetworkInstance:
    if S < 1 or C < 1:
        raise ConfigError("S and C must be >= 1")
    if not 0.0 <= density <= 1.0:
        raise ConfigError(f"density must lie in [0, 1], got {density}")
    lo, hi = demand_range
    if lo > hi:
        raise ConfigError(f"empty demand range {demand_range}")
    if lo < 0 or hi > C:
        raise ConfigError(f"demand range {demand_range} outside [0, {C}]")
    rng = np.random.default_rng(seed)
    positions = rng.random((S, 2))
    R = rng.integers(lo, hi + 1, size=S)
    radius = radius_for_density(density)
    I = interference_from_geometry(positions, radius, C)
    return NetworkInstance(S, C, R, I, Geometry(positions, radius))


def identify_opportunities(tx_position, rx_position, primary_users: Iterable[PrimaryUser], C: int) -> set[int]:
    """Channels the tx -> rx link may use without harming an active PU.

    A channel is lost if a PU receiver on it sits within that PU's ``r_tx`` of
    the transmitter, or a PU transmitter on it sits within its ``r_rx`` of the
    receiver.
    """
    tx = np.asarray(tx_position, dtype=float)
    rx = np.asarray(rx_position, dtype=float)
    free = set(range(C))
    for pu in primary_users:
        if pu.active_channel is None:
            continue
        pos = np.asarray(pu.position, dtype=float)
        if pu.role == "receiver" and np.linalg.norm(pos - tx) <= pu.r_tx:
            free.discard(pu.active_channel)
        elif pu.role == "transmitter" and np.linalg.norm(pos - rx) <= pu.r_rx:
            free.discard(pu.active_channel)
    return free


def fuse_sensing(observations, C: int) -> np.ndarray:
    """OR-fusion of busy flags: a channel is available only if nobody saw it busy."""
    busy = np.zeros(C, dtype=bool)
    for obs in observations:
        obs = np.asarray(obs, dtype=bool)
        if obs.shape != (C,):
            raise ValueError(f"observation has shape {obs.shape}, expected ({C},)")
        busy |= obs
    return ~busy


# -- event streams ------------------------------------------------------------

_EVENT_KEYS = {
    "pu_arrival": ({"t", "kind", "pu", "channel"}, {"position", "radius"}),
    "pu_departure": ({"t", "kind", "pu"}, set()),
    "demand_change": ({"t", "kind", "sc", "R"}, set()),
}


def event_from_dict(d: dict) -> Event:
    kind = d.get("kind")
    if kind not in _EVENT_KEYS:
        raise EventStreamError(f"unknown event kind {kind!r}")
    required, optional = _EVENT_KEYS[kind]
    missing = required - set(d)
    extra = set(d) - required - optional
    if missing or extra:
        raise EventStreamError(f"bad {kind} event: missing {sorted(missing)}, unexpected {sorted(extra)}")
    t = int(d["t"])
    if t < 0:
        raise EventStreamError(f"negative event time {t}")
    if kind == "pu_arrival":
        pos = d.get("position")
        return Event(
            t, kind, pu=str(d["pu"]), channel=int(d["channel"]),
            position=None if pos is None else (float(pos[0]), float(pos[1])),
            radius=None if d.get("radius") is None else float(d["radius"]),
        )
    if kind == "pu_departure":
        return Event(t, kind, pu=str(d["pu"]))
    return Event(t, kind, sc=int(d["sc"]), demand=int(d["R"]))


def check_ordered(events: list[Event]) -> list[Event]:
    for a, b in zip(events, events[1:]):
        if b.t < a.t:
            raise EventStreamError(f"event times decrease: {a.t} then {b.t}")
    return events


def parse_events(text: str) -> list[Event]:
    events = [event_from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]
    return check_ordered(events)


def load_events(path) -> list[Event]:
    return parse_events(Path(path).read_text())


def dump_events(events: Iterable[Event]) -> str:
    return "".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in events)


def random_event_stream(instance: NetworkInstance, n_events: int, horizon: int, seed: int = 0,
                        geometric: bool = False) -> list[Event]:
    """Fuzzed but well-formed stream of arrivals, departures and demand changes."""
    rng = np.random.default_rng(seed)
    times = np.sort(rng.integers(1, horizon + 1, size=n_events))
    active: list[str] = []
    events: list[Event] = []
    serial = 0
    for t in times:
        u = rng.random()
        if u < 0.45 or (u < 0.7 and not active):
            pu = f"pu{serial}"
            serial += 1
            ch = int(rng.integers(instance.C))
            if geometric:
                pos = tuple(float(x) for x in rng.random(2))
                events.append(Event(int(t), "pu_arrival", pu=pu, channel=ch, position=pos,
                                    radius=float(rng.uniform(0.1, 0.6))))
            else:
                events.append(Event(int(t), "pu_arrival", pu=pu, channel=ch))
            active.append(pu)
        elif u < 0.7:
            pu = active.pop(int(rng.integers(len(active))))
            events.append(Event(int(t), "pu_departure", pu=pu))
        else:
            sc = int(rng.integers(instance.S))
            events.append(Event(int(t), "demand_change", sc=sc, demand=int(rng.integers(0, instance.C + 1))))
    return events
