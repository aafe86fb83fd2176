"""Exact rational linear algebra for indicator-vector systems.

Events are 0/1 vectors over the fine-grained histories, so questions like
"is the all-ones vector a linear combination of these indicators?" have
exact answers.  Everything here runs over ``fractions.Fraction`` and never
touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence


def span_solve(
    n: int, member_masks: Sequence[int], target_mask: int
) -> Optional[list[Fraction]]:
    """Solve ``sum_i c_i * chi(member_i) = chi(target)`` over the rationals.

    Returns the coefficient list (free variables pinned to zero) or None
    when the target is outside the span.  Masks use bit ``i`` for history
    ``i + 1``.
    """
    m = len(member_masks)
    rows = [
        [Fraction((mask >> bit) & 1) for mask in member_masks]
        + [Fraction((target_mask >> bit) & 1)]
        for bit in range(n)
    ]
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(m):
        pivot_row = next((i for i in range(r, n) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        pv = rows[r][c]
        if pv != 1:
            rows[r] = [x / pv for x in rows[r]]
        for i in range(n):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append((r, c))
        r += 1
        if r == n:
            break
    for i in range(r, n):
        if rows[i][m] != 0:
            return None
    coeffs = [Fraction(0)] * m
    for pr, pc in pivots:
        coeffs[pc] = rows[pr][m]
    return coeffs


def in_span(n: int, member_masks: Sequence[int], target_mask: int) -> bool:
    return span_solve(n, member_masks, target_mask) is not None
