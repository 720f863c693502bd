"""Primary-user environment: per-sub-channel two-state Markov occupancy
chains plus a static per-link SINR table standing in for ray-traced
geometry.

State convention everywhere: 0 = vacant, 1 = busy.
"""

from dataclasses import dataclass

import numpy as np

from .seeds import derive_rng


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic 2x2 chain: p01 = P(vacant -> busy), p10 = P(busy -> vacant)."""

    p01: float
    p10: float

    def __post_init__(self):
        if not (0.0 <= self.p01 <= 1.0 and 0.0 <= self.p10 <= 1.0):
            raise ValueError("transition probabilities must lie in [0, 1]")

    @property
    def rows(self) -> np.ndarray:
        return np.array([[1.0 - self.p01, self.p01], [self.p10, 1.0 - self.p10]])


@dataclass
class EnvState:
    """True occupancy plus the slot counter and the generator that drives
    the chains. Owned by a single simulation loop."""

    true_occupancy: tuple[int, ...]
    slot: int
    rng: np.random.Generator


@dataclass(frozen=True)
class LinkModel:
    """Static SINR tables replacing the ray-traced geometry.

    sensing_sinr_db[k] applies to UAV k's sensing captures; in swept
    evaluations the differences between entries act as per-UAV offsets.
    access_sinr_db[k][m] is the transmit-link SINR of UAV k on sub-channel m.
    """

    sensing_sinr_db: tuple[float, ...]
    access_sinr_db: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        vals = list(self.sensing_sinr_db) + [v for row in self.access_sinr_db for v in row]
        if not all(np.isfinite(vals)):
            raise ValueError("SINR tables must be finite")
        widths = {len(row) for row in self.access_sinr_db}
        if len(self.access_sinr_db) != len(self.sensing_sinr_db) or len(widths) > 1:
            raise ValueError("access table must be K x M with K matching sensing table")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(linear: float) -> float:
    return 10.0 * np.log10(linear)


def sinr_for(link: LinkModel, uav: int, subchannel: int) -> float:
    """Access SINR (dB) of UAV `uav` on 1-based sub-channel `subchannel`."""
    if not 0 <= uav < len(link.access_sinr_db):
        raise IndexError(f"uav {uav} out of range")
    row = link.access_sinr_db[uav]
    if not 1 <= subchannel <= len(row):
        raise IndexError(f"sub-channel {subchannel} out of range")
    return row[subchannel - 1]


def stationary_distribution(matrix: TransitionMatrix) -> tuple[float, float]:
    """(P(vacant), P(busy)) of the chain's unique stationary distribution."""
    s = matrix.p01 + matrix.p10
    if s == 0:
        raise ValueError("p01 = p10 = 0 has no unique stationary distribution")
    return matrix.p10 / s, matrix.p01 / s


def step(state: EnvState, matrices: list[TransitionMatrix]) -> EnvState:
    """Advance every chain one slot using the state's generator.

    Channels transition independently; the generator is shared with the
    returned state, so repeated stepping is deterministic for a fixed
    starting generator.
    """
    if len(matrices) != len(state.true_occupancy):
        raise ValueError(
            f"expected {len(state.true_occupancy)} matrices, got {len(matrices)}")
    bits = np.asarray(state.true_occupancy)
    flip_prob = np.where(
        bits == 0,
        [m.p01 for m in matrices],
        [m.p10 for m in matrices],
    )
    flips = state.rng.random(len(bits)) < flip_prob
    nxt = tuple(int(b) for b in np.where(flips, 1 - bits, bits))
    return EnvState(true_occupancy=nxt, slot=state.slot + 1, rng=state.rng)


def initial_state(matrices: list[TransitionMatrix], rng: np.random.Generator) -> EnvState:
    """Slot-0 state with each channel drawn from its stationary distribution."""
    bits = []
    for m in matrices:
        p_vacant, _ = stationary_distribution(m)
        bits.append(0 if rng.random() < p_vacant else 1)
    return EnvState(true_occupancy=tuple(bits), slot=0, rng=rng)


def sample_occupancy(
    matrices: list[TransitionMatrix], horizon: int, seed: int
) -> list[tuple[int, ...]]:
    """Length-`horizon` trajectory of true occupancy vectors, started from
    the stationary distribution; reproducible per seed."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    rng = derive_rng(seed, 0xC4A1)
    state = initial_state(matrices, rng)
    out = [state.true_occupancy]
    for _ in range(horizon - 1):
        state = step(state, matrices)
        out.append(state.true_occupancy)
    return out


def stationary_sampler(matrices: list[TransitionMatrix]):
    """Callable(rng) drawing an occupancy vector with channels independent
    at their stationary busy rates; used as a dataset label source."""
    p_vacant = np.array([stationary_distribution(m)[0] for m in matrices])

    def draw(rng: np.random.Generator) -> tuple[int, ...]:
        return tuple(int(b) for b in (rng.random(len(p_vacant)) >= p_vacant))

    return draw


def default_link_model(num_uavs: int, num_subchannels: int,
                       strong_db: float = 10.0,
                       access_db: float | None = None) -> LinkModel:
    """Bundled preset emulating the three hovering UAV locations: all UAVs
    sense at `strong_db` except the last, which is 10 dB weaker."""
    sensing = [strong_db] * num_uavs
    if num_uavs >= 3:
        sensing[-1] = strong_db - 10.0
    access_row = tuple([access_db if access_db is not None else strong_db] * num_subchannels)
    return LinkModel(
        sensing_sinr_db=tuple(sensing),
        access_sinr_db=tuple(access_row for _ in range(num_uavs)),
    )
