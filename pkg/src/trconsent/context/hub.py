"""Context hub: clock, principal locations, emergency flag, info point.

Locations and the emergency flag stand in for the sensors a real deployment
would read; tests and scenario fixtures set them explicitly.
"""

from __future__ import annotations

from ..authz.model import ContextSnapshot
from ..errors import ContextError
from .clock import SimClock
from .infopoint import InfoPoint, InfoPointLike


class ContextHub:
    def __init__(
        self,
        clock: SimClock,
        info_point: InfoPointLike | None = None,
        locations: dict[str, str] | None = None,
        emergency: bool = False,
    ):
        self.clock = clock
        self.info_point = info_point or InfoPoint()
        self._locations = dict(locations or {})
        self._emergency = emergency

    @property
    def emergency(self) -> bool:
        return self._emergency

    def set_emergency(self, active: bool) -> None:
        self._emergency = active

    def set_location(self, principal: str, label: str) -> None:
        self._locations[principal] = label

    def location(self, principal: str) -> str | None:
        return self._locations.get(principal)

    def locations(self) -> dict[str, str]:
        return dict(self._locations)

    def snapshot(self, requester_id: str, subject_id: str) -> ContextSnapshot:
        """Freeze the current context for one evaluation.

        Both parties must have a known location; this may come from the
        subject's device or from the info point side (either provider is
        acceptable).
        """
        requester_location = self._locations.get(requester_id)
        if requester_location is None and self.info_point is not None:
            requester_location = self.info_point.clinic_location(requester_id)
        if requester_location is None:
            raise ContextError(f"no known location for requester {requester_id!r}")
        subject_location = self._locations.get(subject_id)
        if subject_location is None:
            raise ContextError(f"no known location for subject {subject_id!r}")
        now = self.clock.now()
        return ContextSnapshot(
            access_time=now.hour * 60 + now.minute,
            access_date=now.date(),
            requester_location=requester_location,
            subject_location=subject_location,
            emergency=self._emergency,
        )
