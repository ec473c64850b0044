"""Multisets of complex points with positive integer multiplicities.

Used for zero sets, preimage fibers and critical sets.  Two points closer
than the clustering tolerance ``TAU_CLUSTER`` are treated as the same point;
matching between multisets is done by optimal assignment on the expanded
point lists.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DomainError

# Points closer than this merge into one entry (multiplicities add).
TAU_CLUSTER = 1e-7


class PointMultiset:
    """An immutable multiset of complex points.

    Entries are ``(point, multiplicity)`` pairs with ``multiplicity >= 1``;
    points are pairwise distinct at tolerance ``TAU_CLUSTER`` after
    construction (nearby inputs are merged, positions multiplicity-averaged).
    """

    __slots__ = ("entries",)

    def __init__(self, points, multiplicities=None, cluster_tol=TAU_CLUSTER):
        if multiplicities is None:
            pairs = [(complex(p), 1) for p in points]
        else:
            pairs = [(complex(p), int(m)) for p, m in zip(points, multiplicities, strict=True)]
        for _, m in pairs:
            if m < 1:
                raise DomainError(f"multiplicity must be >= 1, got {m}")
        self.entries = tuple(_cluster(pairs, cluster_tol))

    @classmethod
    def from_pairs(cls, pairs, cluster_tol=TAU_CLUSTER):
        pairs = list(pairs)
        return cls([p for p, _ in pairs], [m for _, m in pairs], cluster_tol=cluster_tol)

    @classmethod
    def empty(cls):
        return cls([])

    @property
    def cardinality(self) -> int:
        """Total multiplicity."""
        return sum(m for _, m in self.entries)

    def points(self) -> list[complex]:
        """Expanded point list, each point repeated by its multiplicity."""
        return [p for p, m in self.entries for _ in range(m)]

    def multiplicity_at(self, z: complex, tol: float = TAU_CLUSTER) -> int:
        return sum(m for p, m in self.entries if abs(p - z) <= tol)

    def union(self, other: "PointMultiset") -> "PointMultiset":
        return PointMultiset.from_pairs(list(self.entries) + list(other.entries))

    def scaled(self, factor: complex) -> "PointMultiset":
        return PointMultiset.from_pairs((factor * p, m) for p, m in self.entries)

    def contains(self, other: "PointMultiset", tol: float = TAU_CLUSTER) -> bool:
        """Multiset inclusion: every point of ``other`` appears here with at
        least the same multiplicity (matched at ``tol``)."""
        budget = list(self.entries)
        for p, m in other.entries:
            need = m
            for i, (q, avail) in enumerate(budget):
                if abs(p - q) <= tol and avail > 0:
                    take = min(need, avail)
                    budget[i] = (q, avail - take)
                    need -= take
                    if need == 0:
                        break
            if need > 0:
                return False
        return True

    def assignment_cost(self, other: "PointMultiset") -> float:
        """Largest matched distance under the optimal (min total distance)
        pairing of the expanded point lists.

        Ties in the assignment are broken deterministically by sorting both
        expansions lexicographically by (re, im).  Returns ``inf`` when the
        cardinalities differ.
        """
        mine = sorted(self.points(), key=lambda z: (z.real, z.imag))
        theirs = sorted(other.points(), key=lambda z: (z.real, z.imag))
        if len(mine) != len(theirs):
            return float("inf")
        if not mine:
            return 0.0
        a = np.array(mine)[:, None]
        b = np.array(theirs)[None, :]
        cost = np.abs(a - b)
        rows, cols = linear_sum_assignment(cost)
        return float(cost[rows, cols].max())

    def matches(self, other: "PointMultiset", tol: float = TAU_CLUSTER) -> bool:
        return self.assignment_cost(other) <= tol

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __repr__(self):
        inner = ", ".join(f"({p:.6g}, x{m})" for p, m in self.entries)
        return f"PointMultiset[{inner}]"


def _cluster(pairs, tol):
    """Greedy union of points within ``tol``; positions are merged by
    multiplicity-weighted average, multiplicities add.  Output sorted by
    (re, im) so multiset identity is representation-independent."""
    merged: list[list] = []
    for p, m in sorted(pairs, key=lambda pm: (pm[0].real, pm[0].imag)):
        for slot in merged:
            if abs(slot[0] - p) <= tol:
                total = slot[1] + m
                slot[0] = (slot[0] * slot[1] + p * m) / total
                slot[1] = total
                break
        else:
            merged.append([p, m])
    return [(p, m) for p, m in sorted(merged, key=lambda pm: (pm[0].real, pm[0].imag))]
