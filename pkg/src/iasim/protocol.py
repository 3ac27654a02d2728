"""Discrete-event state machine for over-air synchronization and feedback.

The interfering cell owns a unique ID and transmits first. The serving
cell listens and tries to decode that ID each slot; a beacon decodes when
the ID matches and its SNR clears the threshold (run_sync additionally
drops decodable beacons at a configurable miss probability, which models
decode failures without modeling a waveform). Detection starts the two
training phases, users then feed their precoding candidates back over the
wired side channel, and scheduling fires once every user has reported.

Phases only ever move forward: LISTEN (self-loops until detection) ->
TRAIN_INTERFERER -> TRAIN_MAIN -> FEEDBACK -> SCHEDULE -> DONE. Any event
that a phase does not accept raises ProtocolViolationError.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

from .errors import MissingFeedbackError, ProtocolViolationError, SyncTimeoutError
from .ia_core import Candidate

DEFAULT_SLOT_CAP = 10_000


class Phase(IntEnum):
    LISTEN = 0
    TRAIN_INTERFERER = 1
    TRAIN_MAIN = 2
    FEEDBACK = 3
    SCHEDULE = 4
    DONE = 5


class Role(IntEnum):
    MAIN_BS = 0
    INTERFERING_BS = 1
    UE = 2


@dataclass(frozen=True)
class NodeRole:
    """One node in the scenario: what it is plus its over-air identifier."""

    role: Role
    node_id: int


def validate_scenario(nodes: list[NodeRole]) -> None:
    """Scenario sanity: IDs unique, one BS of each kind, at least one user."""
    ids = [n.node_id for n in nodes]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate node ids {dupes}")
    counts = {role: sum(1 for n in nodes if n.role == role) for role in Role}
    if counts[Role.MAIN_BS] != 1 or counts[Role.INTERFERING_BS] != 1:
        raise ValueError("scenario needs exactly one serving and one interfering BS")
    if counts[Role.UE] < 1:
        raise ValueError("scenario needs at least one user")


@dataclass(frozen=True)
class Beacon:
    node_id: int
    snr: float

    def __str__(self):
        return f"beacon(id={self.node_id}, snr={self.snr:g})"


@dataclass(frozen=True)
class PilotInterfererDone:
    def __str__(self):
        return "pilot_i_done"


@dataclass(frozen=True)
class PilotMainDone:
    def __str__(self):
        return "pilot_m_done"


@dataclass(frozen=True)
class Feedback:
    user: int

    def __str__(self):
        return f"feedback(user={self.user})"


@dataclass(frozen=True)
class Tick:
    def __str__(self):
        return "tick"


Event = Beacon | PilotInterfererDone | PilotMainDone | Feedback | Tick


@dataclass(frozen=True)
class ProtocolConfig:
    """Identity and thresholds the serving cell's decoder works against."""

    interferer_id: int = 1
    decode_threshold: float = 3.0
    n_u: int = 3

    def __post_init__(self):
        if self.n_u < 1:
            raise ValueError(f"n_u must be >= 1, got {self.n_u}")


@dataclass(frozen=True)
class ProtocolState:
    phase: Phase = Phase.LISTEN
    slot: int = 0
    decoded_id: int | None = None
    fed_back: frozenset[int] = field(default_factory=frozenset)


def _violation(state: ProtocolState, event: Event) -> ProtocolViolationError:
    return ProtocolViolationError(f"event {event} not accepted in phase {state.phase.name}")


def step(cfg: ProtocolConfig, state: ProtocolState, event: Event) -> ProtocolState:
    """Advance the machine by one event; the slot counter always increments.

    Accepted events per phase: LISTEN takes beacons (decoding or not) and
    ticks; TRAIN_INTERFERER only pilot_i_done; TRAIN_MAIN only
    pilot_m_done; FEEDBACK one feedback per distinct user; SCHEDULE a tick,
    which finishes the sequence. Everything else is a protocol violation.
    """
    slot = state.slot + 1
    if state.phase == Phase.LISTEN:
        if isinstance(event, Tick):
            return replace(state, slot=slot)
        if isinstance(event, Beacon):
            if event.node_id == cfg.interferer_id and event.snr >= cfg.decode_threshold:
                return replace(
                    state, phase=Phase.TRAIN_INTERFERER, slot=slot, decoded_id=event.node_id
                )
            return replace(state, slot=slot)
        raise _violation(state, event)
    if state.phase == Phase.TRAIN_INTERFERER:
        if isinstance(event, PilotInterfererDone):
            return replace(state, phase=Phase.TRAIN_MAIN, slot=slot)
        raise _violation(state, event)
    if state.phase == Phase.TRAIN_MAIN:
        if isinstance(event, PilotMainDone):
            return replace(state, phase=Phase.FEEDBACK, slot=slot)
        raise _violation(state, event)
    if state.phase == Phase.FEEDBACK:
        if isinstance(event, Feedback):
            if event.user < 0 or event.user >= cfg.n_u or event.user in state.fed_back:
                raise _violation(state, event)
            fed = state.fed_back | {event.user}
            phase = Phase.SCHEDULE if len(fed) == cfg.n_u else Phase.FEEDBACK
            return replace(state, phase=phase, slot=slot, fed_back=fed)
        raise _violation(state, event)
    if state.phase == Phase.SCHEDULE:
        if isinstance(event, Tick):
            return replace(state, phase=Phase.DONE, slot=slot)
        raise _violation(state, event)
    raise _violation(state, event)


@dataclass(frozen=True)
class TraceEntry:
    slot: int
    phase: str
    event: str


@dataclass(frozen=True)
class SyncTrace:
    """Phase trace of one synchronization run."""

    entries: tuple[TraceEntry, ...]
    slots_to_detect: int
    final_slot: int


def run_sync(
    cfg: ProtocolConfig,
    rng: np.random.Generator,
    beacon_snr: float,
    decode_threshold: float | None = None,
    miss_probability: float = 0.0,
    slot_cap: int = DEFAULT_SLOT_CAP,
) -> SyncTrace:
    """Drive the machine from LISTEN to SCHEDULE.

    The interferer beacons every slot at beacon_snr; a decodable beacon is
    independently missed with miss_probability (delivered as a tick), so
    slots-to-detect is Geometric(1 - p). Raises SyncTimeoutError if the
    slot cap is exhausted before detection.
    """
    if not 0.0 <= miss_probability < 1.0:
        raise ValueError(f"miss_probability must be in [0, 1), got {miss_probability}")
    threshold = cfg.decode_threshold if decode_threshold is None else decode_threshold
    cfg = replace(cfg, decode_threshold=threshold)
    state = ProtocolState()
    entries = [TraceEntry(slot=0, phase=state.phase.name, event="init")]

    def fire(event: Event) -> None:
        nonlocal state
        state = step(cfg, state, event)
        entries.append(TraceEntry(slot=state.slot, phase=state.phase.name, event=str(event)))

    while state.phase == Phase.LISTEN:
        if state.slot >= slot_cap:
            raise SyncTimeoutError(f"no detection within {slot_cap} slots")
        missed = miss_probability > 0.0 and rng.uniform() < miss_probability
        fire(Tick() if missed else Beacon(node_id=cfg.interferer_id, snr=beacon_snr))
    slots_to_detect = state.slot
    fire(PilotInterfererDone())
    fire(PilotMainDone())
    for user in range(cfg.n_u):
        fire(Feedback(user=user))
    assert state.phase == Phase.SCHEDULE
    return SyncTrace(entries=tuple(entries), slots_to_detect=slots_to_detect,
                     final_slot=state.slot)


@dataclass(frozen=True)
class FeedbackBundle:
    """Per-user candidate lists gathered over the wired feedback link."""

    n_u: int
    entries: dict[int, list[Candidate]]


def collect_feedback(bundle: FeedbackBundle) -> list[Candidate]:
    """Flatten a complete bundle into a (user, stream)-ordered candidate list."""
    missing = [u for u in range(bundle.n_u) if u not in bundle.entries]
    if missing:
        raise MissingFeedbackError(missing)
    out: list[Candidate] = []
    for user in range(bundle.n_u):
        out.extend(sorted(bundle.entries[user], key=lambda c: c.stream))
    return out


def trace_to_jsonl(trace: SyncTrace, run: int | None = None) -> str:
    """One JSON object per trace entry: {slot, phase, event} (+ run when given)."""
    lines = []
    for entry in trace.entries:
        rec: dict = {} if run is None else {"run": run}
        rec.update(slot=entry.slot, phase=entry.phase, event=entry.event)
        lines.append(json.dumps(rec))
    return "\n".join(lines) + "\n"
