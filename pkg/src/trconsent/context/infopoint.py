"""External information point: duty hours, clinic locations, treatment durations.

The fixture-backed implementation reads a JSON document; a thin HTTP client
can stand in when the records live in a remote service speaking the same
document format. Lookups return ``None`` when a record is absent; the
``require_*`` variants raise, which is what policy instantiation wants.
"""

from __future__ import annotations

import json
from datetime import timedelta
from pathlib import Path
from typing import Any, Protocol

from ..errors import InfoPointLookupError
from .clock import parse_duration


def parse_hhmm(text: str) -> int:
    """Minutes since midnight from ``"H:MM"`` or ``"HH:MM"``."""
    parts = text.split(":")
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise InfoPointLookupError(f"bad time literal {text!r}")
    minutes = int(parts[0]) * 60 + int(parts[1])
    if not 0 <= minutes < 1440:
        raise InfoPointLookupError(f"time out of range: {text!r}")
    return minutes


def format_hhmm(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


class InfoPointLike(Protocol):
    def duty_hours(self, practitioner_id: str) -> tuple[int, int] | None: ...
    def clinic_location(self, practitioner_id: str) -> str | None: ...
    def treatment_duration(self, referral_id: str) -> timedelta | None: ...


class InfoPoint:
    """In-memory info point; the canonical provider for tests and fixtures."""

    def __init__(
        self,
        duty_hours: dict[str, tuple[int, int]] | None = None,
        clinic_locations: dict[str, str] | None = None,
        treatment_durations: dict[str, timedelta] | None = None,
    ):
        self._duty = dict(duty_hours or {})
        self._clinics = dict(clinic_locations or {})
        self._treatments = dict(treatment_durations or {})
        for who, (start, end) in self._duty.items():
            if not (0 <= start < end < 1440):
                raise InfoPointLookupError(
                    f"duty hours for {who!r} must satisfy 0 <= start < end within a day"
                )

    @classmethod
    def from_document(cls, doc: dict[str, Any]) -> "InfoPoint":
        duty = {
            who: (parse_hhmm(start), parse_hhmm(end))
            for who, (start, end) in doc.get("dutyHours", {}).items()
        }
        clinics = dict(doc.get("clinicLocation", {}))
        treatments = {
            ref: parse_duration(spec)
            for ref, spec in doc.get("treatmentDuration", {}).items()
        }
        return cls(duty, clinics, treatments)

    @classmethod
    def from_file(cls, path: str | Path) -> "InfoPoint":
        return cls.from_document(json.loads(Path(path).read_text(encoding="utf-8")))

    def duty_hours(self, practitioner_id: str) -> tuple[int, int] | None:
        return self._duty.get(practitioner_id)

    def clinic_location(self, practitioner_id: str) -> str | None:
        return self._clinics.get(practitioner_id)

    def treatment_duration(self, referral_id: str) -> timedelta | None:
        return self._treatments.get(referral_id)

    def require_duty_hours(self, practitioner_id: str) -> tuple[int, int]:
        record = self.duty_hours(practitioner_id)
        if record is None:
            raise InfoPointLookupError(f"no duty hours for {practitioner_id!r}")
        return record

    def require_clinic_location(self, practitioner_id: str) -> str:
        record = self.clinic_location(practitioner_id)
        if record is None:
            raise InfoPointLookupError(f"no clinic location for {practitioner_id!r}")
        return record


class HttpInfoPoint:
    """Remote info point speaking the fixture document format over HTTP.

    Fetches the whole document from ``base_url`` and answers lookups from it;
    call ``refresh()`` to re-pull.
    """

    def __init__(self, base_url: str, client=None):
        import httpx

        self._url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=5.0)
        self._inner: InfoPoint | None = None

    def refresh(self) -> None:
        response = self._client.get(self._url)
        response.raise_for_status()
        self._inner = InfoPoint.from_document(response.json())

    def _delegate(self) -> InfoPoint:
        if self._inner is None:
            self.refresh()
        assert self._inner is not None
        return self._inner

    def duty_hours(self, practitioner_id: str) -> tuple[int, int] | None:
        return self._delegate().duty_hours(practitioner_id)

    def clinic_location(self, practitioner_id: str) -> str | None:
        return self._delegate().clinic_location(practitioner_id)

    def treatment_duration(self, referral_id: str) -> timedelta | None:
        return self._delegate().treatment_duration(referral_id)
