"""Quantum covers: exact decision procedure, certificates, and the scan.

A family of events O_1..O_m with union Omega is a quantum cover when no
strongly positive decoherence functional can annihilate every O_i while
giving Omega positive measure.  For positive semidefinite D the null
events are exactly the indicator vectors in the kernel of D, so the
family fails to be a quantum cover precisely when the all-ones indicator
chi_Omega lies outside the rational span of the chi_{O_i}: in that case
the orthogonal projector onto the complement of the span is itself a
strongly positive functional annihilating every O_i with
mu(Omega) = ||P chi_Omega||^2 > 0.  Conversely chi_Omega in the span
forces D chi_Omega = 0, hence mu(Omega) = 0, for every annihilating D.
``decide`` settles span membership in exact rational arithmetic and only
uses floating point to report the witness.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .antichain import (
    GENERATOR_MAX_N,
    Antichain,
    _antichain_unchecked,
    classify,
    enumerate_inextendible,
    generate,
)
from .errors import ConsistencyError, SpaceMismatchError
from .histories import Event, HistorySpace
from .measure import (
    TOL_PSD,
    TOL_ZERO,
    DecoherenceFunctional,
    mu,
    mu_table,
    validate,
)
from .ratspan import span_solve

WITNESS_NULL_TOL = 1e-12


@dataclass(frozen=True)
class CoverVerdict:
    """Outcome of the exact quantum-cover decision for one event family."""

    is_cover: bool
    union_is_omega: bool
    events: tuple[Event, ...]
    coefficients: Optional[tuple[Fraction, ...]]
    witness: Optional[DecoherenceFunctional]
    uncovered_label: Optional[int]

    def to_json(self) -> dict:
        return {
            "is_cover": self.is_cover,
            "union_is_omega": self.union_is_omega,
            "events": [e.to_json() for e in self.events],
            "coefficients": (
                None
                if self.coefficients is None
                else [str(c) for c in self.coefficients]
            ),
            "witness": None if self.witness is None else self.witness.to_json(),
            "uncovered_label": self.uncovered_label,
        }


def _complement_projector(n: int, masks: Sequence[int]) -> np.ndarray:
    cols = np.stack(
        [
            np.array([(m >> i) & 1 for i in range(n)], dtype=np.float64)
            for m in masks
        ],
        axis=1,
    )
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    rank = int((s > 1e-12 * s[0]).sum())
    q = u[:, :rank]
    return np.eye(n) - q @ q.T


def decide(
    space: HistorySpace,
    events: Iterable[Event],
    *,
    tol_zero: float = TOL_ZERO,
    tol_psd: float = TOL_PSD,
) -> CoverVerdict:
    """Decide whether the family is a quantum cover.

    The verdict is exact: membership of chi_Omega in the rational span of
    the event indicators is settled with Fraction arithmetic.  A positive
    verdict carries the rational combination; a negative one carries the
    complement projector as an explicit strongly positive functional that
    annihilates every member yet gives Omega positive measure.
    """
    evs = tuple(events)
    if not evs:
        raise ValueError("a cover candidate needs at least one event")
    masks: list[int] = []
    seen = set()
    for e in evs:
        if e.space != space:
            raise SpaceMismatchError("event does not belong to the given space")
        if e.mask == 0:
            raise ValueError("cover members must be nonempty")
        if e.mask in seen:
            raise ValueError(f"duplicate event {sorted(e.labels)}")
        seen.add(e.mask)
        masks.append(e.mask)
    union = 0
    for m in masks:
        union |= m
    if union != space.full_mask:
        uncovered = next(
            lab for lab in space.labels if not (union >> (lab - 1)) & 1
        )
        return CoverVerdict(
            is_cover=False,
            union_is_omega=False,
            events=evs,
            coefficients=None,
            witness=None,
            uncovered_label=uncovered,
        )
    coeffs = span_solve(space.n, masks, space.full_mask)
    if coeffs is not None:
        return CoverVerdict(
            is_cover=True,
            union_is_omega=True,
            events=evs,
            coefficients=tuple(coeffs),
            witness=None,
            uncovered_label=None,
        )
    proj = _complement_projector(space.n, masks)
    witness = DecoherenceFunctional(proj)
    report = validate(witness, tol_psd=tol_psd, weak_max_n=0)
    if not (report.hermitian and report.strongly_positive):
        raise ConsistencyError("witness projector failed positivity validation")
    for e in evs:
        if mu(witness, e) > WITNESS_NULL_TOL:
            raise ConsistencyError("witness projector does not annihilate a member")
    if mu(witness, space.omega()) <= tol_zero:
        raise ConsistencyError("witness projector gives Omega no measure")
    return CoverVerdict(
        is_cover=False,
        union_is_omega=True,
        events=evs,
        coefficients=None,
        witness=witness,
        uncovered_label=None,
    )


@dataclass(frozen=True)
class Certificate:
    """Analytic reason why an inextendible antichain must be a cover."""

    kind: str
    pivot: int
    base_level: int
    free_count: int
    params: tuple[tuple[str, int], ...]
    narrative: str

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "pivot": self.pivot,
            "base_level": self.base_level,
            "free_count": self.free_count,
            "params": dict(self.params),
            "narrative": self.narrative,
        }


@lru_cache(maxsize=32)
def _family_instances(
    n: int,
) -> tuple[tuple[str, tuple[tuple[str, int], ...], tuple[int, ...], int], ...]:
    # (kind, params, element masks, characteristic pivot) per family at n
    if n > GENERATOR_MAX_N:
        return ()
    space = HistorySpace(n)
    out = []
    if n > 3:
        fam = generate(space, "coatom_pair")
        out.append(("coatom_pair", (), fam.masks, n - 2))
    if n >= 5 and n % 2 == 1:
        fam = generate(space, "bowtie")
        out.append(("bowtie", (), fam.masks, (n + 1) // 2))
    for m in range(2, (n - 1) // 2 + 1):
        if (n - 1) % m == 0:
            fam = generate(space, "windmill", m=m)
            out.append(("windmill", (("m", m),), fam.masks, (n - 1) // m + 1))
    if n >= 5:
        for l in range(3, n - 1):
            fam = generate(space, "straddle", l=l)
            out.append(("straddle", (("l", l),), fam.masks, l))
    return tuple(out)


def certificate_class_C(ac: Antichain) -> Optional[Certificate]:
    """Analytic cover certificate for an inextendible antichain, if known.

    Tried in order: a complete level; a pivot meeting the free-history
    bound; exact structural match with one of the generated families.
    Returns None when no argument applies (which says nothing about the
    verdict itself).
    """
    space = ac.space
    n = space.n
    cards = {e.cardinality for e in ac.elements}
    if len(cards) == 1:
        k = next(iter(cards))
        if len(ac) != math.comb(n, k):
            raise ValueError(
                "pure-level antichain is not the complete level, so it is"
                " not inextendible"
            )
        return Certificate(
            kind="full_level",
            pivot=k,
            base_level=k,
            free_count=n,
            params=(("k", k),),
            narrative=(
                f"all {len(ac)} elements form the complete level {k}; the"
                f" level sum identity pins the total measure to a"
                f" nonnegative multiple of the element measures"
            ),
        )
    decs = classify(ac)
    for dec in decs:
        if dec.bound_met:
            threshold = dec.pivot - dec.base_level + 1
            return Certificate(
                kind="pivot_bound",
                pivot=dec.pivot,
                base_level=dec.base_level,
                free_count=dec.free_count,
                params=(),
                narrative=(
                    f"{dec.free_count} histories avoid every off-pivot"
                    f" element, reaching the threshold {threshold} for pivot"
                    f" {dec.pivot} over base level {dec.base_level};"
                    f" coarse-graining the free histories reduces the"
                    f" family to a complete level"
                ),
            )
    by_pivot = {dec.pivot: dec for dec in decs}
    for kind, params, masks, pivot in _family_instances(n):
        if masks == ac.masks:
            dec = by_pivot[pivot]
            return Certificate(
                kind=f"family_{kind}",
                pivot=pivot,
                base_level=dec.base_level,
                free_count=dec.free_count,
                params=params,
                narrative=(
                    f"exact match with the {kind} family"
                    f"{dict(params) if params else ''}; its dedicated"
                    f" annihilation argument forces total measure zero"
                ),
            )
    return None


@dataclass(frozen=True)
class ScanReport:
    """Aggregate verdict over every inextendible antichain of a space."""

    n: int
    total: int
    covers: int
    counterexamples: tuple[dict, ...]
    uncertified: tuple[dict, ...]
    certificate_counts: tuple[tuple[str, int], ...]
    elapsed_ms: float

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "total": self.total,
            "covers": self.covers,
            "counterexamples": list(self.counterexamples),
            "uncertified": list(self.uncertified),
            "certificate_counts": dict(self.certificate_counts),
            "elapsed_ms": self.elapsed_ms,
        }


def _scan_one(args: tuple[int, tuple[int, ...]]) -> tuple[bool, Optional[str]]:
    n, masks = args
    space = HistorySpace(n)
    ac = _antichain_unchecked(space, masks)
    verdict = decide(space, ac.elements)
    cert = certificate_class_C(ac)
    return verdict.is_cover, None if cert is None else cert.kind


def scan(space: HistorySpace, *, workers: int = 1, n_limit: int = 5) -> ScanReport:
    """Decide every inextendible antichain of the space.

    The enumeration order is canonical and the merge is order-preserving,
    so the report is identical for any worker count.
    """
    if workers < 1:
        raise ValueError("workers must be positive")
    t0 = time.perf_counter()
    antichains = list(enumerate_inextendible(space, n_limit=n_limit))
    payload = [(space.n, ac.masks) for ac in antichains]
    if workers == 1 or len(payload) < 4:
        results = [_scan_one(item) for item in payload]
    else:
        chunk = max(1, len(payload) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_one, payload, chunksize=chunk))
    covers = 0
    counterexamples = []
    uncertified = []
    tallies: dict[str, int] = {}
    for ac, (is_cover, kind) in zip(antichains, results):
        if is_cover:
            covers += 1
        else:
            counterexamples.append(ac.to_json())
        if kind is None:
            if is_cover:
                uncertified.append(ac.to_json())
        else:
            tallies[kind] = tallies.get(kind, 0) + 1
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return ScanReport(
        n=space.n,
        total=len(antichains),
        covers=covers,
        counterexamples=tuple(counterexamples),
        uncertified=tuple(uncertified),
        certificate_counts=tuple(sorted(tallies.items())),
        elapsed_ms=elapsed_ms,
    )


def indicator_level_identity(n: int) -> bool:
    """Exact integer check that the level-k indicators sum to
    C(n-1, k-1) times the all-ones vector, for every 1 <= k <= n.

    Counts are accumulated over all 2^n masks, so a True return is a
    finite verification, not a formula.  This is why every complete
    level is a quantum cover: the all-ones indicator lies in its span
    with equal rational coefficients.
    """
    if not 1 <= n <= 24:
        raise ValueError("n must be between 1 and 24")
    size = 1 << n
    masks = np.arange(size, dtype=np.uint32)
    cards = np.bitwise_count(masks).astype(np.int64)
    level_counts = np.bincount(cards, minlength=n + 1)
    for k in range(n + 1):
        if int(level_counts[k]) != math.comb(n, k):
            return False
    scratch = np.empty(size, dtype=np.uint32)
    weights = np.empty(size, dtype=np.float64)
    for i in range(n):
        np.right_shift(masks, np.uint32(i), out=scratch)
        np.bitwise_and(scratch, np.uint32(1), out=scratch)
        np.copyto(weights, scratch, casting="unsafe")
        per_level = np.bincount(cards, weights=weights, minlength=n + 1)
        for k in range(1, n + 1):
            if int(per_level[k]) != math.comb(n - 1, k - 1):
                return False
    return True


@dataclass(frozen=True)
class LevelSumReport:
    """Level sum of the measure against its closed form, plus the
    classical cover inequality for the complete level."""

    k: int
    level_sum: float
    closed_form: float
    residual: float
    mu_omega: float
    singles_sum: float
    inequality_slack: float
    inequality_ok: bool

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "level_sum": self.level_sum,
            "closed_form": self.closed_form,
            "residual": self.residual,
            "mu_omega": self.mu_omega,
            "singles_sum": self.singles_sum,
            "inequality_slack": self.inequality_slack,
            "inequality_ok": self.inequality_ok,
        }


def level_sum_check(
    d: DecoherenceFunctional, k: int, *, tol_zero: float = TOL_ZERO
) -> LevelSumReport:
    """Compare sum of mu over level k with its closed form
    C(n-2, k-2) * (mu(Omega) + (n-k)/(k-1) * sum_i mu(A_i)) and test the
    classical-cover inequality (level sum >= mu(Omega), needing strong
    positivity)."""
    n = d.n
    if not 2 <= k <= n - 1:
        raise ValueError(f"level k must be in 2..{n - 1}, got {k}")
    table = mu_table(d)
    cards = np.bitwise_count(np.arange(1 << n, dtype=np.uint32))
    level_sum = float(table[cards == k].sum())
    mu_omega = float(table[-1])
    singles_sum = float(np.diag(d.entries).real.sum())
    closed = math.comb(n - 2, k - 2) * (
        mu_omega + (n - k) / (k - 1) * singles_sum
    )
    slack = level_sum - mu_omega
    return LevelSumReport(
        k=k,
        level_sum=level_sum,
        closed_form=closed,
        residual=abs(level_sum - closed),
        mu_omega=mu_omega,
        singles_sum=singles_sum,
        inequality_slack=slack,
        inequality_ok=slack >= -tol_zero * d.scale * math.comb(n, k),
    )
