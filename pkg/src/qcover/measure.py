"""Decoherence functionals and the quantum measure they induce.

A decoherence functional is an n x n Hermitian matrix D indexed by the
fine-grained histories; the measure of an event A is the real number
mu(A) = sum over rows and columns in A of D.  Strong positivity means the
matrix is positive semidefinite.  The module also checks the quadratic
coarse-graining identity that characterises such measures, locates the
interference level, and samples random strongly positive functionals with
prescribed null events.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from .errors import (
    ConsistencyError,
    InfeasibleNormalizationError,
    ResourceLimitError,
    SpaceMismatchError,
)
from .histories import Event, HistorySpace
from .ratspan import span_solve

TOL_HERM = 1e-9
TOL_PSD = 1e-9
TOL_ZERO = 1e-9
TOL_IDENTITY = 1e-10
TOL_DERIVED = 1e-7

# per-event tables enumerate all 2^n events
MU_TABLE_MAX_N = 16

# interference of m disjoint parts sums over 2^m - 1 coarse grainings
INTERFERENCE_MAX_PARTS = 16

SeedLike = Union[int, Sequence[int]]


class DecoherenceFunctional:
    """Immutable Hermitian matrix over the fine-grained histories.

    Construction rejects matrices whose Hermiticity residual exceeds
    ``tol_herm`` relative to the largest entry magnitude, unless
    ``hermitize=True`` asks for symmetrisation ``(D + D^H) / 2``.
    """

    __slots__ = ("_entries", "_space", "_max_abs")

    def __init__(self, entries, *, tol_herm: float = TOL_HERM, hermitize: bool = False):
        arr = np.array(entries, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"entries must be a square matrix, got shape {arr.shape}")
        n = arr.shape[0]
        space = HistorySpace(n)  # also enforces 1 <= n <= 24
        if not np.isfinite(arr.view(np.float64)).all():
            raise ValueError("matrix entries must be finite")
        max_abs = float(np.abs(arr).max()) if n else 0.0
        residual = float(np.abs(arr - arr.conj().T).max())
        if residual > tol_herm * max(1.0, max_abs):
            if hermitize:
                arr = (arr + arr.conj().T) / 2.0
            else:
                raise ValueError(
                    f"matrix is not Hermitian: residual {residual:.3e} exceeds"
                    f" tolerance (pass hermitize=True to symmetrise)"
                )
        else:
            arr = (arr + arr.conj().T) / 2.0  # exact Hermitian storage
        arr.setflags(write=False)
        object.__setattr__(self, "_entries", arr)
        object.__setattr__(self, "_space", space)
        object.__setattr__(self, "_max_abs", float(np.abs(arr).max()))

    def __setattr__(self, name, value):
        raise AttributeError("DecoherenceFunctional is immutable")

    @property
    def n(self) -> int:
        return self._space.n

    @property
    def space(self) -> HistorySpace:
        return self._space

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def max_abs(self) -> float:
        return self._max_abs

    @property
    def scale(self) -> float:
        return max(1.0, self._max_abs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DecoherenceFunctional)
            and self.n == other.n
            and np.array_equal(self._entries, other._entries)
        )

    def __hash__(self) -> int:
        return hash((self.n, self._entries.tobytes()))

    def __reduce__(self):
        return (_rebuild_functional, (np.asarray(self._entries),))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "entries": [
                [[float(z.real), float(z.imag)] for z in row]
                for row in self._entries
            ],
        }

    @classmethod
    def from_json(cls, data: dict, *, hermitize: bool = False,
                  tol_herm: float = TOL_HERM) -> "DecoherenceFunctional":
        n = int(data["n"])
        rows = data["entries"]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ValueError("entries shape does not match n")
        arr = np.array(
            [[complex(cell[0], cell[1]) for cell in row] for row in rows],
            dtype=np.complex128,
        )
        return cls(arr, hermitize=hermitize, tol_herm=tol_herm)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"DecoherenceFunctional(n={self.n})"


def _rebuild_functional(arr):
    return DecoherenceFunctional(arr)


def save_functional(d: DecoherenceFunctional, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(d.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_functional(
    path: str, *, hermitize: bool = False, tol_herm: float = TOL_HERM
) -> DecoherenceFunctional:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return DecoherenceFunctional.from_json(
        data, hermitize=hermitize, tol_herm=tol_herm
    )


def _check_event(d: DecoherenceFunctional, a: Event) -> None:
    if a.space.n != d.n:
        raise SpaceMismatchError(
            f"event over n={a.space.n} does not match functional over n={d.n}"
        )


def _indices(a: Event) -> list[int]:
    return [lab - 1 for lab in a.labels]


def d_of(d: DecoherenceFunctional, a: Event, b: Event) -> complex:
    """The bilinear block sum D(A, B) = sum_{i in A, j in B} D_ij."""
    _check_event(d, a)
    _check_event(d, b)
    ia, ib = _indices(a), _indices(b)
    if not ia or not ib:
        return 0j
    return complex(d.entries[np.ix_(ia, ib)].sum())


def mu(d: DecoherenceFunctional, a: Event, *, tol_herm: float = TOL_HERM) -> float:
    """The quantum measure mu(A) = D(A, A), real for Hermitian D."""
    val = d_of(d, a, a)
    if abs(val.imag) > tol_herm * d.scale * d.n * d.n:
        raise ConsistencyError(
            f"diagonal block sum has imaginary residue {val.imag:.3e}"
        )
    return val.real


@lru_cache(maxsize=32)
def _indicator_matrix(n: int) -> np.ndarray:
    total = 1 << n
    masks = np.arange(total, dtype=np.uint32)
    cols = [((masks >> i) & 1).astype(np.float64) for i in range(n)]
    x = np.stack(cols, axis=1)
    x.setflags(write=False)
    return x


def mu_table(d: DecoherenceFunctional) -> np.ndarray:
    """mu of every event, indexed by bitmask.  Needs n <= 16."""
    if d.n > MU_TABLE_MAX_N:
        raise ResourceLimitError(
            f"per-event tables are capped at n <= {MU_TABLE_MAX_N}"
        )
    x = _indicator_matrix(d.n)
    m = d.entries.real
    return ((x @ m) * x).sum(axis=1)


def interference(
    d: DecoherenceFunctional, parts: Sequence[Event], *, tol_herm: float = TOL_HERM
) -> float:
    """Alternating inclusion-exclusion of mu over the given disjoint parts.

    With m parts this is sum over nonempty subfamilies S of
    (-1)^(m - |S|) mu(union of S); two parts give
    mu(A u B) - mu(A) - mu(B), the pair interference.
    """
    parts = tuple(parts)
    m = len(parts)
    if m < 2:
        raise ValueError("interference needs at least two parts")
    if m > INTERFERENCE_MAX_PARTS:
        raise ResourceLimitError(
            f"interference over {m} parts exceeds the cap of"
            f" {INTERFERENCE_MAX_PARTS}"
        )
    seen = 0
    for p in parts:
        _check_event(d, p)
        if p.mask == 0:
            raise ValueError("interference parts must be nonempty")
        if p.mask & seen:
            raise ValueError("interference parts must be pairwise disjoint")
        seen |= p.mask
    space = parts[0].space
    total = 0.0
    for r in range(1, m + 1):
        sign = -1.0 if (m - r) % 2 else 1.0
        for combo in combinations(range(m), r):
            mask = 0
            for i in combo:
                mask |= parts[i].mask
            total += sign * mu(d, Event(mask, space), tol_herm=tol_herm)
    return total


def _disjoint_families(n: int, m: int) -> Iterator[tuple[int, ...]]:
    # every unordered family of m pairwise disjoint nonempty events, each
    # family exactly once: labels are assigned to block 0..m-1 or skipped,
    # and block b may only open after blocks 0..b-1 (restricted growth)
    masks = [0] * m

    def walk(label: int, opened: int) -> Iterator[tuple[int, ...]]:
        if label == n:
            if opened == m:
                yield tuple(masks)
            return
        bit = 1 << label
        yield from walk(label + 1, opened)
        limit = min(opened + 1, m)
        for b in range(limit):
            masks[b] |= bit
            yield from walk(label + 1, max(opened, b + 1))
            masks[b] &= ~bit

    yield from walk(0, 0)


def measure_level(
    d: DecoherenceFunctional,
    max_k: int,
    *,
    budget: int = 500_000,
    tol_zero: float = TOL_ZERO,
) -> Optional[int]:
    """Smallest k <= max_k with vanishing (k+1)-part interference.

    Checks every unordered family of k+1 pairwise disjoint nonempty events,
    so the cost is combinatorial; ``budget`` caps the number of families
    inspected before a resource error is raised.  Returns None when no
    k <= max_k qualifies.
    """
    if not 1 <= max_k <= d.n:
        raise ValueError(f"max_k must be in 1..{d.n}, got {max_k}")
    table = mu_table(d)
    tol = tol_zero * d.scale
    spent = 0
    for k in range(1, max_k + 1):
        m = k + 1
        clean = True
        for fam in _disjoint_families(d.n, m):
            spent += 1
            if spent > budget:
                raise ResourceLimitError(
                    f"interference scan exceeded its budget of {budget} families"
                )
            val = 0.0
            for r in range(1, m + 1):
                sign = -1.0 if (m - r) % 2 else 1.0
                for combo in combinations(range(m), r):
                    mask = 0
                    for i in combo:
                        mask |= fam[i]
                    val += sign * table[mask]
            if abs(val) > tol:
                clean = False
                break
        if clean:
            return k
    return None


def verify_identity(d: DecoherenceFunctional) -> float:
    """Largest residual of the quadratic coarse-graining identity.

    For every event E of three or more histories, split into singletons
    A_1..A_m, the identity states
    mu(E) = (2 - m) * sum_i mu(A_i) + sum_{i<j} mu(A_i u A_j).
    It is pure algebra for Hermitian matrices, so the residual measures
    floating-point noise only.
    """
    n = d.n
    if n < 3:
        return 0.0
    x = _indicator_matrix(n)
    table = mu_table(d)
    m_real = d.entries.real
    diag = np.diag(m_real).copy()
    pairgrid = diag[:, None] + diag[None, :] + 2.0 * m_real
    card = np.asarray(
        np.bitwise_count(np.arange(1 << n, dtype=np.uint32)), dtype=np.float64
    )
    singles = x @ diag
    gridsum = ((x @ pairgrid) * x).sum(axis=1)
    pairsum = (gridsum - 4.0 * singles) / 2.0
    rhs = (2.0 - card) * singles + pairsum
    resid = np.abs(table - rhs)
    resid[card < 3] = 0.0
    return float(resid.max())


def sample_spd(
    n: int,
    rank: int,
    seed: SeedLike,
    annihilate: Iterable[Event] = (),
    *,
    normalize: bool = False,
    tol_zero: float = TOL_ZERO,
) -> DecoherenceFunctional:
    """Random strongly positive functional with prescribed null events.

    Draws ``rank`` complex Gaussian vectors (numpy ``default_rng(seed)``,
    PCG64) and projects each against the span of the indicator vectors of
    the ``annihilate`` events, so those events get measure zero exactly
    (to rounding); the Gram matrix of the projected vectors is returned.
    With ``normalize=True`` the result is rescaled to total measure one,
    which fails when the all-ones indicator lies in the annihilated span.
    """
    space = HistorySpace(n)
    if not 1 <= rank <= n:
        raise ValueError(f"rank must be in 1..{n}, got {rank}")
    ann_masks: list[int] = []
    seen = set()
    for e in annihilate:
        if e.space != space:
            raise SpaceMismatchError("annihilated event has the wrong space")
        if e.mask == 0:
            raise ValueError("cannot annihilate the empty event")
        if e.mask not in seen:
            seen.add(e.mask)
            ann_masks.append(e.mask)
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    if ann_masks:
        cols = np.stack(
            [
                np.array([(m >> i) & 1 for i in range(n)], dtype=np.float64)
                for m in ann_masks
            ],
            axis=1,
        )
        u, s, _ = np.linalg.svd(cols, full_matrices=False)
        keep = int((s > 1e-12 * s[0]).sum())
        q = u[:, :keep]
        w = w - q @ (q.conj().T @ w)
    d = w @ w.conj().T
    if normalize:
        if ann_masks and span_solve(n, ann_masks, space.full_mask) is not None:
            raise InfeasibleNormalizationError(
                "the annihilated events force total measure zero"
            )
        total = float(d.sum().real)
        if total <= tol_zero:
            raise InfeasibleNormalizationError(
                f"sampled total measure {total:.3e} is below tolerance"
            )
        d = d / total
    return DecoherenceFunctional(d)


# the pairwise block-sum table used by the identity suite is 2^n x 2^n
IDENTITY_SUITE_MAX_N = 10


@lru_cache(maxsize=16)
def _disjoint_pair_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    fams = list(_disjoint_families(n, 2))
    a = np.array([f[0] for f in fams], dtype=np.int64)
    b = np.array([f[1] for f in fams], dtype=np.int64)
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


@lru_cache(maxsize=16)
def _disjoint_triple_arrays(n: int) -> tuple[np.ndarray, ...]:
    fams = list(_disjoint_families(n, 3))
    a = np.array([f[0] for f in fams], dtype=np.int64)
    b = np.array([f[1] for f in fams], dtype=np.int64)
    c = np.array([f[2] for f in fams], dtype=np.int64)
    out = (a, b, c, a | b, a | c, b | c, a | b | c)
    for arr in out:
        arr.setflags(write=False)
    return out


def _random_disjoint_pair(rng: np.random.Generator, n: int) -> tuple[int, int]:
    full = (1 << n) - 1
    while True:
        a = int(rng.integers(1, full))  # nonempty, proper
        comp = full & ~a
        b = comp & int(rng.integers(1, 1 << n))
        if b:
            return a, b


@dataclass(frozen=True)
class IdentitySuiteReport:
    """Aggregated residuals from seeded random-functional checks.

    All maxima are over every sample; slacks are inequality margins and
    must stay above (roughly minus) the working tolerance.
    """

    n: int
    samples: int
    seed: int
    max_identity_residual: float
    max_triple_interference: float
    max_pair_zero_dev: float
    max_single_zero_dev: float
    min_cauchy_schwarz_slack: float
    min_sandwich_lower_slack: float
    min_sandwich_upper_slack: float
    kernel_disagreements: int

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "max_identity_residual": self.max_identity_residual,
            "max_triple_interference": self.max_triple_interference,
            "max_pair_zero_dev": self.max_pair_zero_dev,
            "max_single_zero_dev": self.max_single_zero_dev,
            "min_cauchy_schwarz_slack": self.min_cauchy_schwarz_slack,
            "min_sandwich_lower_slack": self.min_sandwich_lower_slack,
            "min_sandwich_upper_slack": self.min_sandwich_upper_slack,
            "kernel_disagreements": self.kernel_disagreements,
        }


def _kernel_disagreements(
    d: DecoherenceFunctional, table: np.ndarray, tol_zero: float
) -> int:
    # null events of a positive semidefinite functional are exactly the
    # indicator vectors in its kernel; both sides checked with matched
    # tolerances (lambda_max <= trace for PSD matrices)
    x = _indicator_matrix(d.n)
    norms = np.linalg.norm(d.entries @ x.T, axis=0)
    trace = float(d.entries.trace().real)
    tol_norm = math.sqrt(tol_zero * max(1.0, trace))
    null_by_mu = table <= tol_zero * d.scale
    null_by_kernel = norms <= tol_norm
    return int(np.count_nonzero(null_by_mu != null_by_kernel))


def identity_suite(
    n: int,
    samples: int,
    seed: int,
    *,
    rank: Optional[int] = None,
    tol_zero: float = TOL_ZERO,
) -> IdentitySuiteReport:
    """Run the randomized identity and inequality checks.

    Per sample: a normalized strongly positive functional is drawn and the
    quadratic identity, vanishing triple interference, Cauchy-Schwarz and
    sandwich bounds, and kernel/null-event agreement are evaluated; two
    more draws annihilate a random disjoint union (resp. one part of it)
    to exercise the equal-measure and removable-null-part consequences of
    strong positivity.
    """
    if not 2 <= n <= IDENTITY_SUITE_MAX_N:
        raise ResourceLimitError(
            f"identity suite is capped at 2 <= n <= {IDENTITY_SUITE_MAX_N}"
        )
    if samples < 1:
        raise ValueError("samples must be positive")
    r = n if rank is None else rank
    x = _indicator_matrix(n)
    pa, pb = _disjoint_pair_arrays(n)
    punion = pa | pb
    triples = _disjoint_triple_arrays(n) if n >= 3 else None

    max_identity = 0.0
    max_triple = 0.0
    max_pair_zero = 0.0
    max_single_zero = 0.0
    min_cs = math.inf
    min_lower = math.inf
    min_upper = math.inf
    kernel_bad = 0

    for i in range(samples):
        d = sample_spd(n, r, (seed, i, 0), normalize=True)
        t = x @ d.entries @ x.T.astype(np.complex128)
        table = t.diagonal().real.copy()

        max_identity = max(max_identity, verify_identity(d))

        if triples is not None:
            ta, tb, tc, tab, tac, tbc, tabc = triples
            i3 = (
                table[tabc]
                - table[tab]
                - table[tac]
                - table[tbc]
                + table[ta]
                + table[tb]
                + table[tc]
            )
            if i3.size:
                max_triple = max(max_triple, float(np.abs(i3).max()))

        mu_a = np.clip(table[pa], 0.0, None)
        mu_b = np.clip(table[pb], 0.0, None)
        mu_ab = table[punion]
        cross = t[pa, pb]
        cs = mu_a * mu_b - np.abs(cross) ** 2
        min_cs = min(min_cs, float(cs.min()))
        root_a = np.sqrt(mu_a)
        root_b = np.sqrt(mu_b)
        min_lower = min(min_lower, float((mu_ab - (root_a - root_b) ** 2).min()))
        min_upper = min(min_upper, float(((root_a + root_b) ** 2 - mu_ab).min()))

        kernel_bad += _kernel_disagreements(d, table, tol_zero)

        rng = np.random.default_rng((seed, i, 1))
        am, bm = _random_disjoint_pair(rng, n)
        space = d.space
        ev_a = Event(am, space)
        ev_b = Event(bm, space)
        ev_ab = Event(am | bm, space)

        d_pair = sample_spd(n, r, (seed, i, 2), annihilate=[ev_ab])
        max_pair_zero = max(
            max_pair_zero, abs(mu(d_pair, ev_a) - mu(d_pair, ev_b))
        )
        kernel_bad += _kernel_disagreements(d_pair, mu_table(d_pair), tol_zero)

        d_single = sample_spd(n, r, (seed, i, 3), annihilate=[ev_a])
        max_single_zero = max(
            max_single_zero, abs(mu(d_single, ev_ab) - mu(d_single, ev_b))
        )

    return IdentitySuiteReport(
        n=n,
        samples=samples,
        seed=seed,
        max_identity_residual=max_identity,
        max_triple_interference=max_triple,
        max_pair_zero_dev=max_pair_zero,
        max_single_zero_dev=max_single_zero,
        min_cauchy_schwarz_slack=min_cs,
        min_sandwich_lower_slack=min_lower,
        min_sandwich_upper_slack=min_upper,
        kernel_disagreements=kernel_bad,
    )


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validating a decoherence functional."""

    n: int
    hermitian: bool
    herm_residual: float
    strongly_positive: bool
    min_eigenvalue: float
    weakly_positive: Optional[bool]
    min_measure: Optional[float]
    normalized: bool
    total_measure: float
    level: Optional[int]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "hermitian": self.hermitian,
            "herm_residual": self.herm_residual,
            "strongly_positive": self.strongly_positive,
            "min_eigenvalue": self.min_eigenvalue,
            "weakly_positive": self.weakly_positive,
            "min_measure": self.min_measure,
            "normalized": self.normalized,
            "total_measure": self.total_measure,
            "level": self.level,
        }


def validate(
    d: DecoherenceFunctional,
    *,
    tol_herm: float = TOL_HERM,
    tol_psd: float = TOL_PSD,
    tol_zero: float = TOL_ZERO,
    weak_max_n: int = 12,
    max_level: Optional[int] = None,
    level_budget: int = 500_000,
) -> ValidationReport:
    """Check Hermiticity, strong and weak positivity, and normalization.

    Weak positivity (every event measure nonnegative) enumerates all 2^n
    events and is only attempted for n <= ``weak_max_n``; pass
    ``max_level`` to also locate the interference level.
    """
    arr = d.entries
    herm_residual = float(np.abs(arr - arr.conj().T).max())
    hermitian = herm_residual <= tol_herm * d.scale
    eigs = np.linalg.eigvalsh(arr)
    spectral = max(1.0, float(np.abs(eigs).max()))
    strongly = bool(eigs[0] >= -tol_psd * spectral)
    weakly: Optional[bool] = None
    min_measure: Optional[float] = None
    if d.n <= weak_max_n:
        table = mu_table(d)
        min_measure = float(table.min())
        weakly = bool(min_measure >= -tol_psd * spectral * d.n)
    total = float(arr.sum().real)
    normalized = abs(total - 1.0) <= tol_zero * d.scale
    level = None
    if max_level is not None:
        level = measure_level(d, max_level, budget=level_budget, tol_zero=tol_zero)
    return ValidationReport(
        n=d.n,
        hermitian=hermitian,
        herm_residual=herm_residual,
        strongly_positive=strongly,
        min_eigenvalue=float(eigs[0]),
        weakly_positive=weakly,
        min_measure=min_measure,
        normalized=normalized,
        total_measure=total,
        level=level,
    )
