"""Antichains of the event lattice.

An antichain is a set of nonempty events no one of which contains another.
An inextendible antichain is one to which no further event can be added,
i.e. a maximal independent set of the comparability graph over the
2^n - 1 nonempty events.  This module recognises antichains, decides and
witnesses inextendibility, enumerates all inextendible antichains of small
spaces in a canonical order, splits an antichain around a pivot level, and
generates several structured families that are inextendible by
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import ConsistencyError, ResourceLimitError, SpaceMismatchError
from .histories import Event, HistorySpace, level_elements

# enumeration works vertex-by-vertex over all 2^n - 1 nonempty events
DEFAULT_ENUM_MAX_N = 5
HARD_ENUM_MAX_N = 6

# structured generators re-verify inextendibility exhaustively before
# returning, which walks all 2^n events
GENERATOR_MAX_N = 16

_CHUNK = 1 << 18


class Antichain:
    """An immutable, canonically sorted antichain of nonempty events."""

    __slots__ = ("space", "elements")

    def __init__(self, events: Iterable[Event]):
        seq = list(events)
        if not seq:
            raise ValueError("an antichain needs at least one event")
        space = seq[0].space
        masks = set()
        for e in seq:
            if e.space != space:
                raise SpaceMismatchError("antichain events span different spaces")
            if e.mask == 0:
                raise ValueError("the empty event cannot belong to an antichain")
            masks.add(e.mask)
        ordered = sorted(masks)
        bad = _comparable_pair(ordered)
        if bad is not None:
            a, b = bad
            raise ValueError(
                f"not an antichain: {sorted(Event(a, space).labels)} is contained"
                f" in {sorted(Event(b, space).labels)}"
            )
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "elements", tuple(Event(m, space) for m in ordered))

    def __setattr__(self, name, value):  # keep instances effectively frozen
        raise AttributeError("Antichain is immutable")

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(e.mask for e in self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.elements)

    def __contains__(self, event: Event) -> bool:
        return isinstance(event, Event) and event in self.elements

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Antichain)
            and self.space == other.space
            and self.elements == other.elements
        )

    def __hash__(self) -> int:
        return hash((self.space, self.elements))

    def __reduce__(self):
        return (Antichain, (self.elements,))

    def levels(self) -> tuple[int, ...]:
        """Distinct element cardinalities, ascending."""
        return tuple(sorted({e.cardinality for e in self.elements}))

    def to_json(self) -> dict:
        return {
            "n": self.space.n,
            "elements": [e.to_json() for e in self.elements],
        }

    @classmethod
    def from_json(cls, data: dict) -> Antichain:
        space = HistorySpace(int(data["n"]))
        return cls(space.event(labels) for labels in data["elements"])

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        body = ", ".join(repr(e) for e in self.elements)
        return f"Antichain[{body}]"


def _comparable_pair(masks: list[int]) -> Optional[tuple[int, int]]:
    # masks must be deduplicated; only cross-level pairs can nest
    by_level: dict[int, list[int]] = {}
    for m in masks:
        by_level.setdefault(m.bit_count(), []).append(m)
    levels = sorted(by_level)
    for i, la in enumerate(levels):
        for lb in levels[i + 1 :]:
            for small in by_level[la]:
                for big in by_level[lb]:
                    if small & big == small:
                        return small, big
    return None


def _antichain_unchecked(space: HistorySpace, masks: Iterable[int]) -> Antichain:
    ac = Antichain.__new__(Antichain)
    object.__setattr__(ac, "space", space)
    object.__setattr__(ac, "elements", tuple(Event(m, space) for m in masks))
    return ac


def is_antichain(space: HistorySpace, events: Iterable[Event]) -> bool:
    """True iff the events form an antichain: all nonempty, pairwise
    incomparable.  Duplicates collapse (set semantics)."""
    masks = set()
    for e in events:
        if e.space != space:
            raise SpaceMismatchError("event does not belong to the given space")
        if e.mask == 0:
            return False
        masks.add(e.mask)
    if not masks:
        return False
    return _comparable_pair(sorted(masks)) is None


def is_inextendible(ac: Antichain) -> tuple[bool, Optional[Event]]:
    """Decide whether ``ac`` is maximal.

    Returns ``(True, None)`` when no nonempty event is incomparable to all
    elements, else ``(False, witness)`` where the witness is the
    smallest-mask event that could still be added.  Cost grows as
    2^n * len(ac).
    """
    space = ac.space
    total = 1 << space.n
    masks = [np.uint32(m) for m in ac.masks]
    for start in range(1, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        v = np.arange(start, stop, dtype=np.uint32)
        comp = np.zeros(v.shape, dtype=bool)
        for m in masks:
            inter = v & m
            comp |= (inter == v) | (inter == m)
        if not comp.all():
            witness = int(v[np.nonzero(~comp)[0][0]])
            return False, Event(witness, space)
    return True, None


def _incomparability_adjacency(n: int) -> list[int]:
    # vertex i stands for mask i+1; adj bitsets over vertex indices
    count = (1 << n) - 1
    adj = [0] * count
    for i in range(count):
        mi = i + 1
        for j in range(i + 1, count):
            mj = j + 1
            inter = mi & mj
            if inter != mi and inter != mj:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return adj


def enumerate_inextendible(
    space: HistorySpace, *, n_limit: int = DEFAULT_ENUM_MAX_N
) -> Iterator[Antichain]:
    """Yield every inextendible antichain of the space exactly once,
    ordered lexicographically by sorted element masks.

    The walk visits all 2^n - 1 nonempty events, so it is capped at
    n <= 5 by default; ``n_limit`` may be raised to the hard limit of 6.
    """
    if n_limit > HARD_ENUM_MAX_N:
        raise ResourceLimitError(
            f"enumeration is hard-capped at n <= {HARD_ENUM_MAX_N}"
        )
    if space.n > n_limit:
        raise ResourceLimitError(
            f"enumeration over n={space.n} exceeds the limit n <= {n_limit}"
        )
    adj = _incomparability_adjacency(space.n)
    count = len(adj)
    found: list[tuple[int, ...]] = []

    # maximal cliques of the incomparability graph, with pivoting
    def expand(r: int, p: int, x: int) -> None:
        if p == 0 and x == 0:
            members = []
            rr = r
            while rr:
                lo = rr & -rr
                members.append(lo.bit_length())  # vertex index + 1 == mask
                rr ^= lo
            found.append(tuple(members))
            return
        px = p | x
        best = -1
        pivot_adj = 0
        u = px
        while u:
            lo = u & -u
            i = lo.bit_length() - 1
            deg = (p & adj[i]).bit_count()
            if deg > best:
                best = deg
                pivot_adj = adj[i]
            u ^= lo
        cand = p & ~pivot_adj
        while cand:
            lo = cand & -cand
            v = lo.bit_length() - 1
            expand(r | lo, p & adj[v], x & adj[v])
            p ^= lo
            x |= lo
            cand ^= lo

    expand(0, (1 << count) - 1, 0)
    found.sort()
    for masks in found:
        yield _antichain_unchecked(space, masks)


@dataclass(frozen=True)
class PivotDecomposition:
    """Split of an antichain around one of its occupied levels.

    ``free_labels`` are the fine-grained histories that appear in no
    off-pivot element; ``base_level`` is the lowest level among the pivot
    and the part below it; ``bound_met`` records whether the number of
    free labels reaches pivot - base_level + 1, the threshold under which
    the whittling argument applies.
    """

    pivot: int
    at_pivot: tuple[Event, ...]
    below: tuple[Event, ...]
    above: tuple[Event, ...]
    free_labels: tuple[int, ...]
    free_count: int
    base_level: int
    bound_met: bool

    def to_json(self) -> dict:
        return {
            "pivot": self.pivot,
            "at_pivot": [e.to_json() for e in self.at_pivot],
            "below": [e.to_json() for e in self.below],
            "above": [e.to_json() for e in self.above],
            "free_labels": list(self.free_labels),
            "free_count": self.free_count,
            "base_level": self.base_level,
            "bound_met": self.bound_met,
        }


def classify(ac: Antichain) -> tuple[PivotDecomposition, ...]:
    """One :class:`PivotDecomposition` per occupied level, ascending.

    The caller is expected to pass an inextendible antichain; the split
    itself is well defined for any antichain and is not re-verified here.
    """
    space = ac.space
    out = []
    for k in ac.levels():
        at_pivot, below, above = [], [], []
        off_union = 0
        for e in ac.elements:
            c = e.cardinality
            if c == k:
                at_pivot.append(e)
            elif c < k:
                below.append(e)
                off_union |= e.mask
            else:
                above.append(e)
                off_union |= e.mask
        free_mask = space.full_mask & ~off_union
        free_labels = tuple(
            i + 1 for i in range(space.n) if (free_mask >> i) & 1
        )
        base_level = min((e.cardinality for e in below), default=k)
        p = len(free_labels)
        out.append(
            PivotDecomposition(
                pivot=k,
                at_pivot=tuple(at_pivot),
                below=tuple(below),
                above=tuple(above),
                free_labels=free_labels,
                free_count=p,
                base_level=base_level,
                bound_met=p >= k - base_level + 1,
            )
        )
    return tuple(out)


GENERATOR_KINDS = ("level", "coatom_pair", "bowtie", "windmill", "straddle")


def generate(space: HistorySpace, kind: str, **params) -> Antichain:
    """Build one of the structured inextendible antichain families.

    kind="level", k=...     every event of cardinality k
    kind="coatom_pair"      the two coatoms missing label 1 resp. 2, plus
                            every (n-2)-set containing both 1 and 2 (n > 3)
    kind="bowtie"           two blocks of size (n+1)/2 sharing label 1,
                            plus the cross pairs between them (odd n >= 5)
    kind="windmill", m=...  m blocks of size (n-1)/m + 1 sharing label 1,
                            plus all pairs straddling two blocks
    kind="straddle", l=...  two (n-2)-sets, a band of l-sets around labels
                            1..3, and the pair {1,3} (n >= 5, 3 <= l <= n-2)

    Every result is re-verified to be an inextendible antichain before it
    is returned; a failure is an internal bug, not a user error.
    """
    n = space.n
    if kind == "level":
        k = _int_param(params, "k")
        _no_extra(params, {"k"})
        if not 1 <= k <= n:
            raise ValueError(f"level k={k} out of range 1..{n}")
        events = level_elements(space, k)
        ac = _antichain_unchecked(space, [e.mask for e in events])
        if len(ac) != math.comb(n, k):
            raise ConsistencyError("level family has the wrong size")
        # a full level is maximal by construction: any event of another
        # cardinality contains, or is contained in, a set of this level
        return ac

    if kind == "coatom_pair":
        _no_extra(params, set())
        if n <= 3:
            raise ValueError("coatom_pair requires n > 3")
        full = space.full_mask
        masks = {full & ~1, full & ~2}
        for i, j in combinations(range(2, n), 2):
            masks.add(full & ~((1 << i) | (1 << j)))
        return _checked_family(space, masks, kind)

    if kind == "bowtie":
        _no_extra(params, set())
        if n < 5 or n % 2 == 0:
            raise ValueError("bowtie requires odd n >= 5")
        return generate(space, "windmill", m=2)

    if kind == "windmill":
        m = _int_param(params, "m")
        _no_extra(params, {"m"})
        if m < 2:
            raise ValueError("windmill requires m >= 2")
        if (n - 1) % m != 0:
            raise ValueError(f"windmill requires m to divide n-1={n - 1}")
        blade = (n - 1) // m
        if blade < 2:
            raise ValueError("windmill requires blocks of at least 2 labels")
        blocks = [
            [j * blade + 2 + t for t in range(blade)] for j in range(m)
        ]
        masks = set()
        for block in blocks:
            masks.add(1 | _mask_of(block))
        for bi, bj in combinations(blocks, 2):
            for x in bi:
                for y in bj:
                    masks.add(_mask_of([x, y]))
        return _checked_family(space, masks, kind)

    if kind == "straddle":
        l = _int_param(params, "l")
        _no_extra(params, {"l"})
        if n < 5:
            raise ValueError("straddle requires n >= 5")
        if not 3 <= l <= n - 2:
            raise ValueError(f"straddle requires 3 <= l <= {n - 2}, got l={l}")
        full = space.full_mask
        tail = list(range(4, n + 1))
        masks = {full & ~_mask_of([1, 2]), full & ~_mask_of([2, 3])}
        for t in combinations(tail, l - 2):
            masks.add(_mask_of([1, 2]) | _mask_of(t))
            masks.add(_mask_of([2, 3]) | _mask_of(t))
        for t in combinations(tail, l - 1):
            masks.add(_mask_of([2]) | _mask_of(t))
        masks.add(_mask_of([1, 3]))
        return _checked_family(space, masks, kind)

    raise ValueError(f"unknown antichain kind {kind!r}; choose from {GENERATOR_KINDS}")


def _mask_of(labels: Iterable[int]) -> int:
    m = 0
    for lab in labels:
        m |= 1 << (lab - 1)
    return m


def _int_param(params: dict, name: str) -> int:
    if name not in params:
        raise ValueError(f"missing required parameter {name!r}")
    val = params[name]
    if not isinstance(val, int) or isinstance(val, bool):
        raise ValueError(f"parameter {name!r} must be an integer, got {val!r}")
    return val


def _no_extra(params: dict, allowed: set) -> None:
    extra = set(params) - allowed
    if extra:
        raise ValueError(f"unexpected parameters: {sorted(extra)}")


def _checked_family(space: HistorySpace, masks: set[int], kind: str) -> Antichain:
    if space.n > GENERATOR_MAX_N:
        raise ResourceLimitError(
            f"family generators re-verify over all 2^n events and are"
            f" capped at n <= {GENERATOR_MAX_N}"
        )
    ac = Antichain(Event(m, space) for m in masks)
    ok, witness = is_inextendible(ac)
    if not ok:
        raise ConsistencyError(
            f"generated {kind} family is extendible by {witness!r}"
        )
    return ac
