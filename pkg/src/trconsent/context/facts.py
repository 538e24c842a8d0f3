"""Mutable ordered fact store.

Insertion order is observable: the rule evaluator visits facts in this
order, which makes substitution choice deterministic.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from ..errors import FactStoreError
from ..tr.ast import Fact


class FactStore:
    def __init__(self, facts: Iterable[Fact] = ()):
        self._facts: dict[Fact, None] = {}
        self._revision = 0
        for f in facts:
            self._facts[f] = None

    @property
    def revision(self) -> int:
        return self._revision

    def facts(self) -> tuple[Fact, ...]:
        return tuple(self._facts)

    def __iter__(self) -> Iterator[Fact]:
        return iter(tuple(self._facts))

    def __contains__(self, fact: Fact) -> bool:
        return fact in self._facts

    def __len__(self) -> int:
        return len(self._facts)

    def update(
        self,
        assert_: Iterable[Fact] = (),
        retract: Iterable[Fact] = (),
    ) -> int:
        """Apply one atomic batch of assertions and retractions.

        The revision is bumped once per call that actually changes the store;
        re-asserting a present fact or retracting an absent one is a no-op.
        Returns the (possibly unchanged) revision.
        """
        to_add = list(assert_)
        to_remove = list(retract)
        overlap = {f for f in to_add} & {f for f in to_remove}
        if overlap:
            raise FactStoreError(
                f"assert and retract sets overlap: {sorted(map(str, overlap))}"
            )
        changed = False
        for f in to_remove:
            if f in self._facts:
                del self._facts[f]
                changed = True
        for f in to_add:
            if f not in self._facts:
                self._facts[f] = None
                changed = True
        if changed:
            self._revision += 1
        return self._revision

    def assert_fact(self, fact: Fact) -> int:
        return self.update(assert_=(fact,))

    def retract_fact(self, fact: Fact) -> int:
        return self.update(retract=(fact,))


def update_facts(
    store: FactStore,
    assert_: Iterable[Fact] = (),
    retract: Iterable[Fact] = (),
) -> int:
    return store.update(assert_=assert_, retract=retract)
