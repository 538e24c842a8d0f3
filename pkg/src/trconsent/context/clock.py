"""Controllable simulated clock; time only moves forward."""

from __future__ import annotations

from datetime import datetime, timedelta

from ..errors import ClockError


def parse_duration(spec: dict | int) -> timedelta:
    """Duration from a document fragment: ``{"days": 30, "hours": 2, "minutes": 5}``
    (any subset) or a bare integer of minutes."""
    if isinstance(spec, int):
        return timedelta(minutes=spec)
    known = {"days", "hours", "minutes", "seconds"}
    unknown = set(spec) - known
    if unknown:
        raise ClockError(f"unknown duration fields: {sorted(unknown)}")
    return timedelta(**{k: int(v) for k, v in spec.items()})


class SimClock:
    def __init__(self, start: datetime | str):
        if isinstance(start, str):
            start = datetime.fromisoformat(start)
        self._now = start

    def now(self) -> datetime:
        return self._now

    def now_iso(self) -> str:
        return self._now.isoformat()

    def minutes_since_midnight(self) -> int:
        return self._now.hour * 60 + self._now.minute

    def advance(self, delta: timedelta) -> datetime:
        if delta < timedelta(0):
            raise ClockError(f"cannot advance by negative duration {delta}")
        self._now += delta
        return self._now

    def set(self, instant: datetime | str) -> datetime:
        if isinstance(instant, str):
            instant = datetime.fromisoformat(instant)
        if instant < self._now:
            raise ClockError(f"cannot rewind clock from {self._now} to {instant}")
        self._now = instant
        return self._now
