"""Finite history spaces and the events built over them.

A history space is the set of fine-grained histories labelled ``1..n``.
An event is any subset of those labels, stored as a bitmask in which bit
``i-1`` stands for label ``i``.  Everything here is immutable and hashable,
and events are canonically ordered by mask value so that enumerations are
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator

from .errors import ResourceLimitError, SpaceMismatchError

MAX_HISTORIES = 24

# closure() can touch every one of the 2^n events, so it declares its own cap
CLOSURE_MAX_N = 20


@dataclass(frozen=True)
class HistorySpace:
    """The set of fine-grained histories {1, ..., n}."""

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or isinstance(self.n, bool):
            raise ValueError(f"history count must be an integer, got {self.n!r}")
        if not 1 <= self.n <= MAX_HISTORIES:
            raise ValueError(
                f"history count must be in 1..{MAX_HISTORIES}, got {self.n}"
            )

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def labels(self) -> range:
        return range(1, self.n + 1)

    def event(self, labels: Iterable[int]) -> Event:
        """Build the event holding exactly the given 1-based labels."""
        mask = 0
        for lab in labels:
            if not isinstance(lab, int) or isinstance(lab, bool):
                raise ValueError(f"label must be an integer, got {lab!r}")
            if not 1 <= lab <= self.n:
                raise ValueError(f"label {lab} outside 1..{self.n}")
            mask |= 1 << (lab - 1)
        return Event(mask, self)

    def event_from_mask(self, mask: int) -> Event:
        return Event(mask, self)

    def omega(self) -> Event:
        """The sure event: every fine-grained history."""
        return Event(self.full_mask, self)

    def empty(self) -> Event:
        return Event(0, self)

    def singletons(self) -> tuple[Event, ...]:
        return tuple(Event(1 << i, self) for i in range(self.n))

    def to_json(self) -> dict:
        return {"n": self.n}

    @classmethod
    def from_json(cls, data: dict) -> HistorySpace:
        return cls(int(data["n"]))


@dataclass(frozen=True)
class Event:
    """A subset of fine-grained histories, held as a bitmask."""

    mask: int
    space: HistorySpace

    def __post_init__(self) -> None:
        if not 0 <= self.mask <= self.space.full_mask:
            raise ValueError(
                f"mask {self.mask:#x} out of range for n={self.space.n}"
            )

    @property
    def cardinality(self) -> int:
        return self.mask.bit_count()

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(
            i + 1 for i in range(self.space.n) if (self.mask >> i) & 1
        )

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    def __contains__(self, label: int) -> bool:
        return 1 <= label <= self.space.n and bool((self.mask >> (label - 1)) & 1)

    def issubset(self, other: Event) -> bool:
        self._check_space(other)
        return self.mask & other.mask == self.mask

    def issuperset(self, other: Event) -> bool:
        self._check_space(other)
        return self.mask & other.mask == other.mask

    def comparable(self, other: Event) -> bool:
        """True when one event contains the other (equality included)."""
        inter = self.mask & other.mask
        self._check_space(other)
        return inter == self.mask or inter == other.mask

    def isdisjoint(self, other: Event) -> bool:
        self._check_space(other)
        return self.mask & other.mask == 0

    def union(self, other: Event) -> Event:
        self._check_space(other)
        return Event(self.mask | other.mask, self.space)

    def intersection(self, other: Event) -> Event:
        self._check_space(other)
        return Event(self.mask & other.mask, self.space)

    def difference(self, other: Event) -> Event:
        self._check_space(other)
        return Event(self.mask & ~other.mask, self.space)

    def complement(self) -> Event:
        return Event(self.space.full_mask & ~self.mask, self.space)

    def _check_space(self, other: Event) -> None:
        if self.space != other.space:
            raise SpaceMismatchError(
                f"events live in different spaces: n={self.space.n} vs n={other.space.n}"
            )

    def to_json(self) -> list[int]:
        """Serialize as the ascending list of 1-based labels."""
        return list(self.labels)

    @classmethod
    def from_json(cls, space: HistorySpace, data: Iterable[int]) -> Event:
        return space.event(data)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        body = ",".join(str(x) for x in self.labels) if self.mask else "/"
        return f"Event{{{body}}}"


def _gosper_masks(n: int, k: int) -> Iterator[int]:
    # all n-bit masks of popcount k in ascending order (Gosper's hack)
    if k == 0:
        yield 0
        return
    limit = 1 << n
    v = (1 << k) - 1
    while v < limit:
        yield v
        low = v & -v
        ripple = v + low
        v = ripple | (((v ^ ripple) >> 2) // low)


def level_elements(space: HistorySpace, k: int) -> list[Event]:
    """All events of cardinality k, ascending by mask.

    Returns C(n, k) events; k may be 0 (the empty event alone) or n (the
    sure event alone).
    """
    if not 0 <= k <= space.n:
        raise ValueError(f"level {k} out of range 0..{space.n}")
    return [Event(m, space) for m in _gosper_masks(space.n, k)]


def shadow(space: HistorySpace, a: Event, k: int) -> list[Event]:
    """The level-k shadow of ``a``: its k-subsets when k is below the
    cardinality of ``a``, its k-supersets when k is above it.

    The shadow is only defined across levels, so ``cardinality(a) == k``
    is rejected.  Output is ascending by mask and has size
    C(card, k) below or C(n - card, k - card) above.
    """
    if a.space != space:
        raise SpaceMismatchError("event does not belong to the given space")
    if not 0 < k < space.n:
        raise ValueError(f"shadow level {k} out of range 1..{space.n - 1}")
    card = a.cardinality
    if card == k:
        raise ValueError("shadow is undefined at the event's own level")
    if card > k:
        masks = (
            sum(1 << (lab - 1) for lab in combo)
            for combo in combinations(a.labels, k)
        )
    else:
        free = [lab for lab in space.labels if lab not in a]
        masks = (
            a.mask | sum(1 << (lab - 1) for lab in combo)
            for combo in combinations(free, k - card)
        )
    return [Event(m, space) for m in sorted(masks)]


def _submasks_nonempty(mask: int) -> Iterator[int]:
    s = mask
    while s:
        yield s
        s = (s - 1) & mask


def closure(
    space: HistorySpace, events: Iterable[Event], direction: str
) -> set[Event]:
    """Upward or downward closure of a family of nonempty events.

    The input events are included in the result; the empty event never is.
    """
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    if space.n > CLOSURE_MAX_N:
        raise ResourceLimitError(
            f"closure enumerates up to 2^n events; n={space.n} exceeds the"
            f" cap of {CLOSURE_MAX_N}"
        )
    seeds = list(events)
    if not seeds:
        raise ValueError("closure needs at least one event")
    out: set[int] = set()
    for e in seeds:
        if e.space != space:
            raise SpaceMismatchError("event does not belong to the given space")
        if e.mask == 0:
            raise ValueError("closure is defined over nonempty events")
        if direction == "down":
            out.update(_submasks_nonempty(e.mask))
        else:
            rest = space.full_mask & ~e.mask
            out.add(e.mask)
            for s in _submasks_nonempty(rest):
                out.add(e.mask | s)
    return {Event(m, space) for m in out}
