"""n-out-of-N fusion of per-UAV occupancy reports at the UTM server.

A sub-channel is declared vacant iff at least n of the N received reports
call it vacant; n=1 is the OR rule, n=N the AND rule.
"""

import warnings
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class FusionRule:
    """Vote threshold n, 1 <= n <= num_uavs."""

    n: int
    num_uavs: int

    def __post_init__(self):
        if not 1 <= self.n <= self.num_uavs:
            raise ValueError(f"n must lie in [1, {self.num_uavs}]")


def _vacant_votes(reports: Sequence[Sequence[int] | None], num_uavs: int) -> tuple[list[int], int]:
    """Per-channel count of vacant votes over the reports that arrived."""
    if len(reports) != num_uavs:
        raise ValueError(f"expected {num_uavs} reports, got {len(reports)}")
    present = [r for r in reports if r is not None]
    if len(present) < len(reports):
        warnings.warn(
            f"{len(reports) - len(present)} report(s) missing; fusing over {len(present)}",
            stacklevel=3,
        )
    if not present:
        raise ValueError("no reports to fuse")
    m = len(present[0])
    if any(len(r) != m for r in present):
        raise ValueError("reports have mismatched lengths")
    votes = [sum(1 for r in present if r[ch] == 0) for ch in range(m)]
    return votes, len(present)


def fuse(reports: Sequence[Sequence[int] | None], rule: FusionRule) -> tuple[int, ...]:
    """Fused occupancy vector: channel vacant (0) iff vacant votes >= n.

    A None entry marks a UAV that did not broadcast; it is excluded and n
    is clamped to the surviving report count for that slot.
    """
    votes, n_present = _vacant_votes(reports, rule.num_uavs)
    n = min(rule.n, n_present)
    return tuple(0 if v >= n else 1 for v in votes)


def fusion_table(reports: Sequence[Sequence[int] | None], num_uavs: int) -> list[tuple[int, ...]]:
    """Fused vectors for every n in 1..num_uavs, from one vote-count pass."""
    votes, n_present = _vacant_votes(reports, num_uavs)
    table = []
    for n in range(1, num_uavs + 1):
        eff = min(n, n_present)
        table.append(tuple(0 if v >= eff else 1 for v in votes))
    return table
