"""Activity logs: parsing, account filtering and trajectory construction."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, TextIO

from trollirl.mdp import Action, State, pair_index

LABELS = ("troll", "user")


class Kind(str, Enum):
    ACTIVE_TWEET = "active_tweet"
    ACTIVE_RETWEET = "active_retweet"
    ACTIVE_REPLY = "active_reply_or_mention"
    PASSIVE_RETWEET = "passive_retweet"
    PASSIVE_REPLY = "passive_reply_or_mention"

    @property
    def is_active(self) -> bool:
        return self.value.startswith("active_")


ACTION_OF_KIND = {
    Kind.ACTIVE_TWEET: Action.tw,
    Kind.ACTIVE_RETWEET: Action.rt,
    Kind.ACTIVE_REPLY: Action.rp,
}
STATE_OF_KIND = {
    Kind.PASSIVE_RETWEET: State.RT,
    Kind.PASSIVE_REPLY: State.RP,
}
KIND_OF_ACTION = {a: k for k, a in ACTION_OF_KIND.items()}
KIND_OF_STATE = {s: k for k, s in STATE_OF_KIND.items()}


class ActivityLogError(ValueError):
    """A record in an activity log violates the schema."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class ActivityEvent:
    account_id: str
    timestamp: int
    kind: Kind
    label: Optional[str] = None

    def to_json(self) -> str:
        record = {"account_id": self.account_id, "ts": self.timestamp, "kind": self.kind.value}
        if self.label is not None:
            record["label"] = self.label
        return json.dumps(record)


@dataclass(frozen=True)
class Trajectory:
    account_id: str
    steps: tuple[tuple[State, Action], ...]

    def __len__(self) -> int:
        return len(self.steps)

    def pair_indices(self) -> list[int]:
        return [pair_index(s, a) for s, a in self.steps]

    def to_json(self) -> str:
        return json.dumps(
            {"account_id": self.account_id, "steps": [[s.name, a.name] for s, a in self.steps]}
        )

    @classmethod
    def from_json(cls, line: str) -> "Trajectory":
        record = json.loads(line)
        steps = tuple((State[s], Action[a]) for s, a in record["steps"])
        return cls(record["account_id"], steps)


def _parse_record(lineno: int, line: str) -> ActivityEvent:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ActivityLogError(lineno, f"invalid JSON ({exc.msg})") from None
    if not isinstance(record, dict):
        raise ActivityLogError(lineno, "record must be a JSON object")
    for key in ("account_id", "ts", "kind"):
        if key not in record:
            raise ActivityLogError(lineno, f"missing field {key!r}")
    account_id, ts, kind = record["account_id"], record["ts"], record["kind"]
    if not isinstance(account_id, str) or not account_id:
        raise ActivityLogError(lineno, "account_id must be a non-empty string")
    if isinstance(ts, bool) or not isinstance(ts, int) or ts < 0:
        raise ActivityLogError(lineno, f"ts must be a non-negative integer, got {ts!r}")
    try:
        kind = Kind(kind)
    except ValueError:
        raise ActivityLogError(lineno, f"unknown kind {kind!r}") from None
    label = record.get("label")
    if label is not None and label not in LABELS:
        raise ActivityLogError(lineno, f"label must be one of {LABELS}, got {label!r}")
    return ActivityEvent(account_id, ts, kind, label)


def parse_activity_log(stream: Iterable[str]) -> list[ActivityEvent]:
    """Parse JSONL activity records in file order.

    Blank lines are ignored; any malformed record raises ``ActivityLogError``
    carrying its 1-based line number.
    """
    events = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        events.append(_parse_record(lineno, line))
    return events


def write_activity_log(events: Iterable[ActivityEvent], fh: TextIO) -> None:
    for event in events:
        fh.write(event.to_json() + "\n")


def collect_labels(events: Iterable[ActivityEvent]) -> dict[str, str]:
    labels: dict[str, str] = {}
    for event in events:
        if event.label is None:
            continue
        seen = labels.setdefault(event.account_id, event.label)
        if seen != event.label:
            raise ValueError(f"conflicting labels for account {event.account_id!r}")
    return labels


def filter_accounts(events: Iterable[ActivityEvent], k: int) -> dict[str, list[ActivityEvent]]:
    """Keep accounts with at least ``k`` active and ``k`` passive events.

    Retained accounts map to their events sorted by timestamp; the sort is
    stable so ties keep input order.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    by_account: dict[str, list[ActivityEvent]] = defaultdict(list)
    for event in events:
        by_account[event.account_id].append(event)
    kept = {}
    for account_id, evs in by_account.items():
        n_active = sum(e.kind.is_active for e in evs)
        if n_active >= k and len(evs) - n_active >= k:
            kept[account_id] = sorted(evs, key=lambda e: e.timestamp)
    return kept


def build_trajectory(events: list[ActivityEvent], account_id: Optional[str] = None) -> Trajectory:
    """Pair chronologically sorted events into (state, action) steps.

    A passive event sets the pending state. An active event emits
    (pending state, action) and resets the pending state to NT. A passive
    event that finds another passive state pending first emits
    (pending, nt); so does a passive state left pending at the end.
    """
    if not events:
        raise ValueError("cannot build a trajectory from no events")
    if account_id is None:
        account_id = events[0].account_id
    steps = []
    pending = State.NT
    for event in events:
        if event.kind.is_active:
            steps.append((pending, ACTION_OF_KIND[event.kind]))
            pending = State.NT
        else:
            if pending is not State.NT:
                steps.append((pending, Action.nt))
            pending = STATE_OF_KIND[event.kind]
    if pending is not State.NT:
        steps.append((pending, Action.nt))
    return Trajectory(account_id, tuple(steps))


def build_trajectories(events: Iterable[ActivityEvent], k: int) -> dict[str, Trajectory]:
    return {aid: build_trajectory(evs, aid) for aid, evs in filter_accounts(events, k).items()}
