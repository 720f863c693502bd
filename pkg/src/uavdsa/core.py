"""Closed-form slot quantities: costs, throughput, collision indicator,
utility, energy efficiency, and assignment-constraint validation.

All functions are pure; every occupancy vector uses the convention
0 = vacant, 1 = busy (a "spectrum hole" is a 0 bit).
"""

from dataclasses import dataclass, field
import math
from typing import Iterable, Sequence


class UndefinedEnergyEfficiencyError(ValueError):
    """Raised when the slot energy denominator is zero."""


@dataclass(frozen=True)
class SlotTiming:
    """Durations (seconds) of the four sub-slots: request, sensing,
    broadcast, access."""

    t_req: float
    t_s: float
    t_b: float
    t_a: float

    def __post_init__(self):
        for name in ("t_req", "t_s", "t_b", "t_a"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.total <= 0:
            raise ValueError("total slot length must be positive")

    @property
    def total(self) -> float:
        return self.t_req + self.t_s + self.t_b + self.t_a


@dataclass(frozen=True)
class RadioParams:
    """Radio constants shared by all UAVs.

    v_cc: receiver supply voltage (V); p_tx: transmit power (W);
    subchannel_bandwidth: per-sub-channel bandwidth (Hz);
    num_subchannels / num_uavs: the M and K of the deployment.
    """

    v_cc: float
    p_tx: float
    subchannel_bandwidth: float
    num_subchannels: int
    num_uavs: int
    system_bandwidth: float | None = None

    def __post_init__(self):
        if self.v_cc <= 0 or self.p_tx <= 0 or self.subchannel_bandwidth <= 0:
            raise ValueError("v_cc, p_tx and subchannel_bandwidth must be positive")
        if self.num_subchannels < 1 or self.num_uavs < 1:
            raise ValueError("num_subchannels and num_uavs must be >= 1")
        if self.system_bandwidth is not None:
            if self.num_subchannels * self.subchannel_bandwidth > self.system_bandwidth:
                raise ValueError("sub-channels exceed the declared system bandwidth")


def occupancy_vector(bits: Iterable[int], num_subchannels: int | None = None) -> tuple[int, ...]:
    """Validate and freeze an occupancy vector (0 = vacant, 1 = busy)."""
    vec = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in vec):
        raise ValueError("occupancy entries must be 0 or 1")
    if num_subchannels is not None and len(vec) != num_subchannels:
        raise ValueError(f"expected length {num_subchannels}, got {len(vec)}")
    return vec


@dataclass(frozen=True)
class Assignment:
    """Set of (uav, subchannel) pairs, y_km = 1 iff the pair is present.

    Sub-channels are numbered 1..M (matching the action convention where 0
    means idle); sub-channel m corresponds to entry m-1 of an occupancy
    vector. Uniqueness of UAVs and channels is *not* enforced here so that
    validate_assignment can report violations; the scheduler only ever
    constructs valid assignments.
    """

    pairs: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    @classmethod
    def of(cls, *pairs: tuple[int, int]) -> "Assignment":
        return cls(frozenset((int(k), int(m)) for k, m in pairs))

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class SlotLedger:
    """Per-slot record of what was transmitted and what it cost.

    collision/throughput/access_cost are keyed by assignment pair;
    sensing_costs is keyed by UAV (all sensing UAVs pay, assigned or not).
    """

    slot: int
    assignment: Assignment
    collision: dict[tuple[int, int], int]
    throughput: dict[tuple[int, int], float]
    access_cost: dict[tuple[int, int], float]
    sensing_costs: dict[int, float]
    utility: float
    energy_efficiency: float
    holes_detected: int = 0
    holes_true: int = 0

    def __post_init__(self):
        for r in self.collision.values():
            if r not in (-1, 0, 1):
                raise ValueError("collision indicator must be in {-1, 0, 1}")
        for name, table in (("throughput", self.throughput),
                            ("access_cost", self.access_cost),
                            ("sensing_costs", self.sensing_costs)):
            if any(v < 0 for v in table.values()):
                raise ValueError(f"{name} entries must be non-negative")


def sensing_cost(timing: SlotTiming, radio: RadioParams) -> float:
    """Energy (J) one UAV spends sensing one sub-channel for one slot:
    t_s * v_cc^2 * B_m."""
    return timing.t_s * radio.v_cc ** 2 * radio.subchannel_bandwidth


def access_cost(timing: SlotTiming, radio: RadioParams) -> float:
    """Energy (J) one UAV spends transmitting for one slot: t_a * p_tx."""
    return timing.t_a * radio.p_tx


def throughput(timing: SlotTiming, radio: RadioParams, sinr_linear: float) -> float:
    """Bits deliverable in the access sub-slot: t_a * B_m * log2(1 + sinr)."""
    if sinr_linear < 0:
        raise ValueError("sinr_linear must be non-negative")
    return timing.t_a * radio.subchannel_bandwidth * math.log2(1.0 + sinr_linear)


def collision_indicator(true_state_now: int, fused_prev: int) -> int:
    """Access outcome for one sub-channel: +1 successful secondary use,
    -1 collision with a returned primary, 0 no transmission opportunity.

    true_state_now is the channel's actual occupancy this slot; fused_prev
    is the fused prediction from the slot the allocation was based on.
    """
    if true_state_now not in (0, 1) or fused_prev not in (0, 1):
        raise ValueError("arguments must be bits")
    if fused_prev != 0:
        return 0
    return 1 if true_state_now == 0 else -1


def slot_utility(pairs: Iterable[tuple[int, float]]) -> float:
    """Total slot utility: sum of r * R over assigned pairs.

    pairs yields (collision indicator r, throughput R) per assigned pair.
    Collisions subtract the full hypothetical throughput.
    """
    return float(sum(r * big_r for r, big_r in pairs))


def energy_efficiency(
    transmissions: Iterable[tuple[int, float, float]],
    sensing_costs: Iterable[float],
) -> float:
    """Slot EE: sum(r * R) / (sum(AC over assigned pairs) + sum(SC)).

    transmissions yields (r, R, AC) per assigned pair; sensing_costs yields
    one SC per sensing UAV. Raises UndefinedEnergyEfficiencyError when the
    energy denominator is zero.
    """
    num = 0.0
    den = 0.0
    for r, big_r, ac in transmissions:
        num += r * big_r
        den += ac
    den += sum(sensing_costs)
    if den <= 0:
        raise UndefinedEnergyEfficiencyError("slot consumed no energy; EE undefined")
    return num / den


def validate_assignment(assignment: Assignment, fused: Sequence[int]) -> list[str]:
    """Check the scheduling constraints against a fused occupancy vector.

    Returns an empty list when the assignment is feasible, otherwise one
    message per violated constraint: per-UAV uniqueness, per-channel
    uniqueness, hole budget |pairs| <= M - (# busy), and vacancy of every
    assigned sub-channel.
    """
    fused = occupancy_vector(fused)
    m_total = len(fused)
    violations: list[str] = []

    seen_uavs: dict[int, list[int]] = {}
    seen_channels: dict[int, list[int]] = {}
    for k, m in sorted(assignment.pairs):
        seen_uavs.setdefault(k, []).append(m)
        seen_channels.setdefault(m, []).append(k)
    for k, channels in sorted(seen_uavs.items()):
        if len(channels) > 1:
            violations.append(f"uav {k} assigned {len(channels)} sub-channels {channels}")
    for m, uavs in sorted(seen_channels.items()):
        if len(uavs) > 1:
            violations.append(f"sub-channel {m} assigned to {len(uavs)} uavs {uavs}")

    holes = m_total - sum(fused)
    if len(assignment) > holes:
        violations.append(f"{len(assignment)} pairs exceed hole count {holes}")
    for k, m in sorted(assignment.pairs):
        if not 1 <= m <= m_total:
            violations.append(f"sub-channel {m} out of range 1..{m_total}")
        elif fused[m - 1] != 0:
            violations.append(f"sub-channel {m} assigned to uav {k} but predicted busy")
    return violations
