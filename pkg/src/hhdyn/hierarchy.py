"""Multi-index bookkeeping for the auxiliary-density-operator hierarchy.

A hierarchy slot is one (bath, exponential-term) pair; with n_baths baths
and K Matsubara terms there are M = n_baths * (K + 1) slots.  Every
multi-index n = (n_1, ..., n_M) with tier = sum(n) <= L gets one ADO.
Indices are enumerated in graded lexicographic order (by tier, then
lexicographically), and raise/lower neighbor tables are precomputed.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

DEFAULT_MEMORY_CAP_BYTES = 8 << 30


class HierarchyTooLargeError(MemoryError):
    """ADO storage would exceed the configured memory cap."""


@dataclass(frozen=True)
class Hierarchy:
    """Enumerated hierarchy with neighbor lookup tables."""

    n_baths: int
    matsubara_count: int
    depth: int
    indices: np.ndarray  # (n_ados, n_slots) int32, graded lex order
    tiers: np.ndarray  # (n_ados,) int32
    plus_table: np.ndarray  # (n_ados, n_slots) int64, -1 = outside hierarchy
    minus_table: np.ndarray  # (n_ados, n_slots) int64, -1 = n_slot == 0

    @property
    def n_slots(self) -> int:
        return self.n_baths * (self.matsubara_count + 1)

    @property
    def n_ados(self) -> int:
        return self.indices.shape[0]

    def slot_bath(self) -> np.ndarray:
        """Bath index of each slot; slots are grouped per bath."""
        return np.repeat(np.arange(self.n_baths), self.matsubara_count + 1)

    def slot_term(self) -> np.ndarray:
        """Expansion-term index (0..K) of each slot."""
        return np.tile(np.arange(self.matsubara_count + 1), self.n_baths)


def _enumerate_tier(n_slots: int, tier: int):
    """All compositions of `tier` into n_slots parts, lexicographic."""
    if n_slots == 1:
        yield (tier,)
        return
    for first in range(tier + 1):
        for rest in _enumerate_tier(n_slots - 1, tier - first):
            yield (first,) + rest


def build_hierarchy(
    n_baths: int,
    K: int,
    L: int,
    system_dim: int = 4,
    memory_cap_bytes: int = DEFAULT_MEMORY_CAP_BYTES,
) -> Hierarchy:
    """Enumerate all ADO multi-indices with tier <= L.

    The ADO count is C(M + L, L) with M = n_baths * (K + 1); storage of
    one d x d complex matrix per ADO is checked against the memory cap
    before enumeration.
    """
    if n_baths < 0 or K < 0:
        raise ValueError("n_baths and K must be nonnegative")
    if L < 1:
        raise ValueError("hierarchy depth L must be at least 1")
    n_slots = n_baths * (K + 1)
    n_ados = comb(n_slots + L, L)
    if n_ados * system_dim * system_dim * 16 > memory_cap_bytes:
        raise HierarchyTooLargeError(
            f"{n_ados} ADOs of dim {system_dim} exceed the "
            f"{memory_cap_bytes / 2**20:.0f} MiB cap"
        )

    rows = []
    for tier in range(L + 1):
        rows.extend(_enumerate_tier(n_slots, tier))
    indices = np.array(rows, dtype=np.int32).reshape(n_ados, n_slots)
    tiers = indices.sum(axis=1).astype(np.int32)

    lookup = {tuple(row): i for i, row in enumerate(indices.tolist())}
    plus_table = np.full((n_ados, n_slots), -1, dtype=np.int64)
    minus_table = np.full((n_ados, n_slots), -1, dtype=np.int64)
    for i, row in enumerate(indices.tolist()):
        for s in range(n_slots):
            up = list(row)
            up[s] += 1
            plus_table[i, s] = lookup.get(tuple(up), -1)
            if row[s] > 0:
                dn = list(row)
                dn[s] -= 1
                minus_table[i, s] = lookup[tuple(dn)]

    return Hierarchy(
        n_baths=n_baths,
        matsubara_count=K,
        depth=L,
        indices=indices,
        tiers=tiers,
        plus_table=plus_table,
        minus_table=minus_table,
    )
