from __future__ import annotations

import heapq
import random
from dataclasses import dataclass

from ..timecore import Tag


@dataclass(eq=False)
class Event:
    tag: Tag
    trigger: object
    payload: object = None
    # tag at which the event was moved out of the queue by mode suspension
    suspended_at: Tag | None = None

    @property
    def mode(self):
        return self.trigger.mode

    def __repr__(self) -> str:
        return f"Event({self.tag}, {self.trigger!r})"


class EventQueue:
    """Min-queue of events keyed by (tag, trigger ordinal).

    Holds at most one event per trigger per tag; pushing a duplicate
    replaces the payload of the pending one. ``shuffle`` randomizes the
    order of bulk insertions, which must never be observable.
    """

    def __init__(self, shuffle: random.Random | None = None):
        self._heap: list[tuple[int, int, int]] = []
        self._events: dict[tuple[int, int, int], Event] = {}
        self._shuffle = shuffle

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self):
        return iter(list(self._events.values()))

    @staticmethod
    def _key(e: Event) -> tuple[int, int, int]:
        return (e.tag.time, e.tag.microstep, e.trigger.ordinal)

    def push(self, e: Event) -> Event:
        key = self._key(e)
        old = self._events.get(key)
        if old is not None:
            old.payload = e.payload
            return old
        self._events[key] = e
        heapq.heappush(self._heap, key)
        return e

    def push_many(self, events) -> None:
        events = list(events)
        if self._shuffle is not None:
            self._shuffle.shuffle(events)
        for e in events:
            self.push(e)

    def _clean(self) -> None:
        while self._heap and self._heap[0] not in self._events:
            heapq.heappop(self._heap)

    def peek_tag(self) -> Tag | None:
        self._clean()
        if not self._heap:
            return None
        t, m, _ = self._heap[0]
        return Tag(t, m)

    def pop_tag(self) -> list[Event]:
        """Remove and return every event sharing the earliest tag."""
        self._clean()
        if not self._heap:
            return []
        t, m, _ = self._heap[0]
        out = []
        while self._heap and self._heap[0][:2] == (t, m):
            key = heapq.heappop(self._heap)
            e = self._events.pop(key, None)
            if e is not None:
                out.append(e)
            self._clean()
        return out

    def remove_where(self, pred) -> list[Event]:
        gone = [k for k, e in self._events.items() if pred(e)]
        out = [self._events.pop(k) for k in sorted(gone)]
        if out:
            self._heap = sorted(self._events)
        return out

    def find(self, trigger) -> list[Event]:
        return [e for e in self._events.values() if e.trigger is trigger]
