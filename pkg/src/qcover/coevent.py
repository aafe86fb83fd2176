"""Preclusion machinery: zero-measure events, minimal coevent supports,
and the derived inextendible antichain.

Under the multiplicative scheme a coevent is determined by its support,
so everything here works with plain events.  An event counts as
precluded when it lies inside some zero-measure event; the minimal
non-precluded events are exactly the supports of primitive preclusive
coevents.  Joining those supports with the maximal events that contain
none of them yields an inextendible antichain whose down-closure soaks
up every zero-measure event.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .antichain import Antichain, _antichain_unchecked, is_inextendible
from .errors import ConsistencyError, NoCoeventError, ResourceLimitError
from .histories import Event, HistorySpace
from .measure import TOL_PSD, TOL_ZERO, DecoherenceFunctional, mu, mu_table

COEVENT_MAX_N = 12


@dataclass(frozen=True)
class PreclusionStructure:
    """Everything the preclusion analysis of one functional produces.

    ``ppc_supports`` are the minimal events outside every zero set,
    ``derived`` extends them to an inextendible antichain by adjoining
    ``m_part``, the maximal events containing no support.  Every member
    of ``m_part`` is itself a zero set, and every zero set lies under
    some element of ``derived``.
    """

    zero_sets: frozenset[Event]
    ppc_supports: Antichain
    derived: Antichain
    m_part: frozenset[Event]

    def to_json(self) -> dict:
        def ordered(evs: frozenset[Event]) -> list:
            ranked = sorted(evs, key=lambda e: (e.cardinality, e.mask))
            return [e.to_json() for e in ranked]

        return {
            "zero_sets": ordered(self.zero_sets),
            "ppc_supports": self.ppc_supports.to_json()["elements"],
            "derived": self.derived.to_json()["elements"],
            "m_part": ordered(self.m_part),
        }


def _float_zero_masks(d: DecoherenceFunctional, tol_zero: float) -> tuple[int, ...]:
    table = mu_table(d)
    hits = np.nonzero(table <= tol_zero)[0]
    return tuple(int(m) for m in hits if m != 0)


def _exact_zero_masks(d: DecoherenceFunctional) -> tuple[int, ...]:
    # Entries are exact dyadic rationals of their floats; the imaginary
    # parts cancel pairwise under Hermiticity, so only the real parts sum.
    n = d.n
    re = [[Fraction(float(x)) for x in row] for row in d.entries.real]
    out = []
    for m in range(1, 1 << n):
        idx = [i for i in range(n) if (m >> i) & 1]
        total = Fraction(0)
        for i in idx:
            row = re[i]
            for j in idx:
                total += row[j]
        if total == 0:
            out.append(m)
    return tuple(out)


def zero_sets(
    d: DecoherenceFunctional, *, tol_zero: float = TOL_ZERO, exact: bool = False
) -> frozenset[Event]:
    """All nonempty events of measure zero.

    With ``exact=True`` the entries are read as exact dyadic rationals
    and an event counts only when its measure vanishes identically;
    otherwise any measure at most ``tol_zero`` counts.
    """
    if d.n > COEVENT_MAX_N:
        raise ResourceLimitError(
            f"zero-set enumeration is limited to n <= {COEVENT_MAX_N}, got {d.n}"
        )
    masks = _exact_zero_masks(d) if exact else _float_zero_masks(d, tol_zero)
    space = d.space
    return frozenset(space.event_from_mask(m) for m in masks)


def _preclusion_masks(
    d: DecoherenceFunctional, tol_zero: float, exact: bool
) -> tuple[tuple[int, ...], tuple[int, ...], np.ndarray, np.ndarray]:
    """Zero masks, minimal unmarked masks, the precluded flag array, and
    the up-closure flag array of the supports."""
    n = d.n
    if n > COEVENT_MAX_N:
        raise ResourceLimitError(
            f"preclusion analysis is limited to n <= {COEVENT_MAX_N}, got {n}"
        )
    zs = _exact_zero_masks(d) if exact else _float_zero_masks(d, tol_zero)
    size = 1 << n
    all_masks = np.arange(size, dtype=np.uint32)
    marked = np.zeros(size, dtype=bool)
    for z in zs:
        marked |= (all_masks & ~np.uint32(z)) == 0
    marked[0] = True
    if marked[size - 1]:
        raise NoCoeventError(
            "the whole space is precluded; no coevent support exists"
        )
    # minimal unmarked events: unmarked with every proper submask marked
    has_unmarked_sub = bytearray(size)
    minimal = []
    for m in range(1, size):
        h = 0
        mm = m
        while mm:
            b = mm & -mm
            sub = m ^ b
            if (not marked[sub]) or has_unmarked_sub[sub]:
                h = 1
                break
            mm ^= b
        has_unmarked_sub[m] = h
        if not marked[m] and not h:
            minimal.append(m)
    in_up = np.zeros(size, dtype=bool)
    for a in minimal:
        in_up |= (all_masks & np.uint32(a)) == a
    if not np.array_equal(~marked[1:], in_up[1:]):
        raise ConsistencyError(
            "non-precluded events do not match the supports' up-closure"
        )
    return zs, tuple(minimal), marked, in_up


def ppc_supports(
    d: DecoherenceFunctional, *, tol_zero: float = TOL_ZERO, exact: bool = False
) -> Antichain:
    """Minimal nonempty events contained in no zero set.

    These are the supports of the primitive preclusive multiplicative
    coevents.  Raises a no-coevent error when the whole space itself has
    measure zero, since then everything is precluded.
    """
    _, minimal, _, _ = _preclusion_masks(d, tol_zero, exact)
    space = d.space
    return _antichain_unchecked(space, tuple(minimal))


def _maximal_selected(size: int, sel: np.ndarray) -> list[int]:
    # ascending masks of the selected events with no selected proper superset
    full = size - 1
    has_sel_super = bytearray(size)
    out = []
    for m in range(full, 0, -1):
        h = 0
        rest = full ^ m
        while rest:
            b = rest & -rest
            sup = m | b
            if sel[sup] or has_sel_super[sup]:
                h = 1
                break
            rest ^= b
        has_sel_super[m] = h
        if sel[m] and not h:
            out.append(m)
    out.reverse()
    return out


def derived_antichain(
    d: DecoherenceFunctional, *, tol_zero: float = TOL_ZERO, exact: bool = False
) -> PreclusionStructure:
    """Extend the coevent supports to an inextendible antichain.

    With A the supports, the derived antichain consists of the maximal
    events that either belong to A or contain no element of A.  The
    adjoined part M is verified to consist of zero sets, the result is
    verified inextendible, and every zero set is verified to lie under
    some derived element.  Any failed check raises a consistency error.
    """
    zs, minimal, marked, in_up = _preclusion_masks(d, tol_zero, exact)
    space = d.space
    n = space.n
    size = 1 << n
    support_set = set(minimal)
    zero_set = set(zs)

    sel = ~in_up
    sel[0] = False
    for a in minimal:
        sel[a] = True
    a_prime = _maximal_selected(size, sel)

    sel_off = ~in_up
    sel_off[0] = False
    m_prime = set(_maximal_selected(size, sel_off))

    a_prime_set = set(a_prime)
    if not support_set <= a_prime_set:
        raise ConsistencyError("a support fell out of the derived antichain")
    m_part = [m for m in a_prime if m not in support_set]
    for m in m_part:
        if m not in zero_set:
            raise ConsistencyError("an adjoined event is not a zero set")
    if not set(m_part) <= m_prime:
        raise ConsistencyError(
            "adjoined events are not maximal among support-free events"
        )
    for m in m_prime - set(m_part):
        if not any(m & ~a == 0 for a in minimal):
            raise ConsistencyError(
                "a maximal support-free event neither joined the antichain"
                " nor sits under a support"
            )
    for z in zs:
        if not any(z & ~a == 0 for a in a_prime):
            raise ConsistencyError("a zero set escapes the derived down-closure")

    derived = _antichain_unchecked(space, tuple(a_prime))
    ok, _ = is_inextendible(derived)
    if not ok:
        raise ConsistencyError("the derived antichain is not inextendible")

    # chain property: every unprecluded event sits above a support, and
    # every other positive-measure event sits under a derived element
    all_masks = np.arange(size, dtype=np.uint32)
    in_down = np.zeros(size, dtype=bool)
    for a in a_prime:
        in_down |= (all_masks & ~np.uint32(a)) == 0
    zero_flag = np.zeros(size, dtype=bool)
    for z in zs:
        zero_flag[z] = True
    covered = in_up | in_down | zero_flag
    if not covered[1:].all():
        raise ConsistencyError("a positive-measure event escapes the chain split")

    return PreclusionStructure(
        zero_sets=frozenset(space.event_from_mask(z) for z in zs),
        ppc_supports=_antichain_unchecked(space, tuple(minimal)),
        derived=derived,
        m_part=frozenset(space.event_from_mask(m) for m in m_part),
    )


def nontriviality(
    d: DecoherenceFunctional,
    *,
    tol_zero: float = TOL_ZERO,
    tol_psd: float = TOL_PSD,
) -> Event:
    """A coatom (cardinality n-1 event) of strictly positive measure.

    Strong positivity plus positive total measure guarantee one exists,
    so a miss is reported as an internal error.  Returns the coatom of
    largest measure, ties broken by smallest mask.  The guarantee is
    numerically meaningful when the total measure clears tol_zero with
    some margin.
    """
    space = d.space
    n = space.n
    if n < 2:
        raise ValueError("nontriviality needs at least two histories")
    w = np.linalg.eigvalsh(d.entries)
    if float(w[0]) < -tol_psd * max(1.0, float(w[-1])):
        raise ValueError("nontriviality requires a strongly positive functional")
    if mu(d, space.omega()) <= tol_zero:
        raise NoCoeventError("total measure is zero; every coatom may vanish")
    best_mask = 0
    best_mu = -np.inf
    full = space.full_mask
    for i in range(n - 1, -1, -1):
        m = full ^ (1 << i)
        val = mu(d, space.event_from_mask(m))
        if val > best_mu:
            best_mu = val
            best_mask = m
    if best_mu <= tol_zero:
        raise ConsistencyError(
            "no coatom carries positive measure despite strong positivity"
        )
    return space.event_from_mask(best_mask)
