"""Channel-resolved jump network data model.

A network is a finite set of states plus a list of directed transition
channels.  Each channel belongs to an ordered state pair, carries a reservoir
label, an optional filter label, a nonnegative rate, and a map of record
increments (heat, charge, ...) deposited every time the channel fires.
Several channels may share the same ordered state pair; the state generator
only sees their summed rates, which is exactly the ambiguity this library
quantifies.

Canonical orderings are part of the external contract:

* state index = position in the declared state list,
* channel index = position in the declared channel list,
* transition index = first appearance of an ordered state pair in the
  channel list.

Model files are JSON documents with top-level keys ``states``, ``records``
and ``channels``; see ``load_network`` for the schema.  A ``dot`` convenience
key builds an energy-filtered dot network (see :mod:`chanjump.dot`).
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError

__all__ = [
    "TransitionChannel",
    "ChannelNetwork",
    "StateGenerator",
    "ProjectionPair",
    "RecordMap",
    "load_network",
    "serialize_network",
    "build_generator",
    "build_projection",
    "build_record_map",
    "channel_counts",
]


@dataclass(frozen=True)
class TransitionChannel:
    """One reservoir/filter-resolved directed transition.

    ``increments`` maps record names to the value added to that record when
    the channel fires; missing records read as 0.
    """

    from_state: int
    to_state: int
    reservoir: str
    rate: float
    filter: str = ""
    increments: Mapping[str, float] = field(default_factory=dict)

    def increment(self, record: str) -> float:
        return float(self.increments.get(record, 0.0))


@dataclass(frozen=True)
class ChannelNetwork:
    """Validated immutable network: states, channels, declared records."""

    states: tuple[str, ...]
    channels: tuple[TransitionChannel, ...]
    records: tuple[str, ...]

    def __post_init__(self):
        states = tuple(self.states)
        channels = tuple(self.channels)
        records = tuple(str(r) for r in self.records)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "records", records)
        _validate(self)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise ValidationError(f"unknown state name {name!r}") from None

    def transitions(self) -> tuple[tuple[int, int], ...]:
        """Distinct ordered state pairs in first-appearance order."""
        seen: dict[tuple[int, int], None] = {}
        for ch in self.channels:
            seen.setdefault((ch.from_state, ch.to_state), None)
        return tuple(seen)


def _validate(net: ChannelNetwork) -> None:
    if len(net.states) < 2:
        raise ValidationError("a network needs at least 2 states")
    if len(set(net.states)) != len(net.states):
        raise ValidationError("duplicate state name")
    for s in net.states:
        if not isinstance(s, str) or not s:
            raise ValidationError(f"state names must be nonempty strings, got {s!r}")
    if len(net.channels) < 1:
        raise ValidationError("a network needs at least 1 channel")
    if len(set(net.records)) != len(net.records):
        raise ValidationError("duplicate record name")
    for r in net.records:
        if not r:
            raise ValidationError("record names must be nonempty")
    declared = set(net.records)
    n = len(net.states)
    for e, ch in enumerate(net.channels):
        if not (0 <= ch.from_state < n) or not (0 <= ch.to_state < n):
            raise ValidationError(f"channel {e}: state index out of range")
        if ch.from_state == ch.to_state:
            raise ValidationError(f"channel {e}: self-transition not allowed")
        if not math.isfinite(ch.rate) or ch.rate < 0:
            raise ValidationError(f"channel {e}: rate must be finite and >= 0, got {ch.rate!r}")
        for key, val in ch.increments.items():
            if key not in declared:
                raise ValidationError(f"channel {e}: undeclared record {key!r}")
            if not math.isfinite(float(val)):
                raise ValidationError(f"channel {e}: increment {key!r} is not finite")


# ---------------------------------------------------------------------------
# model file I/O

def load_network(document: str | bytes | dict) -> ChannelNetwork:
    """Parse and validate a model file.

    Schema: ``{"states": [str], "records": [str], "channels": [{"from": str,
    "to": str, "reservoir": str, "filter": str?, "rate": num,
    "increments": {record: num}?}]}``.  Alternatively a single ``dot`` key
    with an energy-filtered dot description (levels/reservoirs/couplings)
    which is expanded into channels before validation.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed model document: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ValidationError("model document must be a JSON object")

    if "dot" in doc:
        if any(k in doc for k in ("states", "channels", "records")):
            raise ValidationError("'dot' key is exclusive with explicit states/channels/records")
        from .dot import dot_spec_from_document, build_dot

        return build_dot(dot_spec_from_document(doc["dot"]))

    for key in ("states", "records", "channels"):
        if key not in doc:
            raise ValidationError(f"model document missing key {key!r}")
    states = doc["states"]
    if not isinstance(states, list):
        raise ValidationError("'states' must be an array")
    records = doc["records"]
    if not isinstance(records, list):
        raise ValidationError("'records' must be an array")
    if len(set(states)) != len(states):
        raise ValidationError("duplicate state name")
    if len(states) < 2:
        raise ValidationError("a network needs at least 2 states")
    index = {name: i for i, name in enumerate(states)}

    channels = []
    for e, entry in enumerate(doc["channels"]):
        if not isinstance(entry, dict):
            raise ValidationError(f"channel {e}: must be an object")
        try:
            frm, to = entry["from"], entry["to"]
            rate = entry["rate"]
        except KeyError as exc:
            raise ValidationError(f"channel {e}: missing key {exc.args[0]!r}") from None
        if frm not in index:
            raise ValidationError(f"channel {e}: unknown state {frm!r}")
        if to not in index:
            raise ValidationError(f"channel {e}: unknown state {to!r}")
        if not isinstance(rate, (int, float)) or isinstance(rate, bool):
            raise ValidationError(f"channel {e}: rate must be a number")
        incs = entry.get("increments", {})
        if not isinstance(incs, dict):
            raise ValidationError(f"channel {e}: 'increments' must be an object")
        channels.append(
            TransitionChannel(
                from_state=index[frm],
                to_state=index[to],
                reservoir=str(entry.get("reservoir", "")),
                rate=float(rate),
                filter=str(entry.get("filter", "")),
                increments={str(k): float(v) for k, v in incs.items()},
            )
        )
    return ChannelNetwork(states=tuple(states), channels=tuple(channels), records=tuple(records))


def serialize_network(net: ChannelNetwork) -> str:
    """Emit the model-file JSON form, deterministically.

    Keys are sorted, arrays follow the canonical orderings, and floats use
    the shortest decimal text that round-trips to the exact same bits.
    """
    doc = {
        "states": list(net.states),
        "records": list(net.records),
        "channels": [
            {
                "from": net.states[ch.from_state],
                "to": net.states[ch.to_state],
                "reservoir": ch.reservoir,
                "filter": ch.filter,
                "rate": ch.rate,
                "increments": {k: ch.increments[k] for k in sorted(ch.increments)},
            }
            for ch in net.channels
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# derived linear structure

@dataclass(frozen=True)
class StateGenerator:
    """Generator matrix of the occupation master equation.

    Entry (n, m) for n != m is the total rate from state m to state n;
    diagonal entries make every column sum to zero.
    """

    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ProjectionPair:
    """Channel-to-transition projection P and transition incidence B.

    P is E0 x E with a single 1 per column, summing channel currents into
    ordered-transition totals.  B is N x E0 with +1 at the destination state
    and -1 at the source, so B P j gives state velocities.
    """

    P: np.ndarray
    B: np.ndarray
    transitions: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class RecordMap:
    """Rows of per-channel record increments, one row per selected record."""

    D: np.ndarray
    records: tuple[str, ...]


def build_generator(net: ChannelNetwork) -> StateGenerator:
    """Assemble the state generator from channel rates.

    Per-entry sums use exact accumulation, so the result is bitwise invariant
    under any permutation of the channel list and under channel-rate
    redistributions that preserve the exact per-transition totals.
    """
    n = net.n_states
    cells: dict[tuple[int, int], list[float]] = defaultdict(list)
    for ch in net.channels:
        cells[(ch.to_state, ch.from_state)].append(ch.rate)
    L = np.zeros((n, n))
    for (i, j), rates in cells.items():
        L[i, j] = math.fsum(rates)
    for m in range(n):
        L[m, m] = -math.fsum(L[i, m] for i in range(n) if i != m)
    L.flags.writeable = False
    return StateGenerator(matrix=L)


def build_projection(net: ChannelNetwork) -> ProjectionPair:
    transitions = net.transitions()
    t_index = {t: k for k, t in enumerate(transitions)}
    e0, e = len(transitions), net.n_channels
    P = np.zeros((e0, e))
    for j, ch in enumerate(net.channels):
        P[t_index[(ch.from_state, ch.to_state)], j] = 1.0
    B = np.zeros((net.n_states, e0))
    for k, (m, n) in enumerate(transitions):
        B[n, k] = 1.0
        B[m, k] = -1.0
    P.flags.writeable = False
    B.flags.writeable = False
    return ProjectionPair(P=P, B=B, transitions=transitions)


def build_record_map(net: ChannelNetwork, selected: Sequence[str]) -> RecordMap:
    """Increment matrix for the selected records, one row each.

    Rows follow the given selection order, columns the canonical channel
    index; increments missing from a channel read as 0.
    """
    declared = set(net.records)
    for r in selected:
        if r not in declared:
            raise ValidationError(f"unknown record name {r!r}")
    D = np.zeros((len(selected), net.n_channels))
    for i, rec in enumerate(selected):
        for j, ch in enumerate(net.channels):
            D[i, j] = ch.increment(rec)
    D.flags.writeable = False
    return RecordMap(D=D, records=tuple(selected))


def channel_counts(net: ChannelNetwork) -> tuple[int, int]:
    """(E, E0): number of channels and of distinct ordered transitions."""
    return net.n_channels, len(net.transitions())
