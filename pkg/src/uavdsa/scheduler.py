"""Spectrum-allocation agents over the fused-occupancy MDP.

State: the fused occupancy vector of the previous slot, or INITIAL (None)
before the first fused report of an episode. Actions: 0 = idle, m in 1..M
= transmit on sub-channel m next slot. The table/network index convention
puts sub-channel 1 in the least significant bit, so the state space has
2^M + 1 entries (the extra one is INITIAL) and the action space M + 1.

Agents only ever execute actions that map to feasible assignments for the
state they observed (idle is always feasible; a sub-channel action
requires its predicted bit to be vacant), which keeps the scheduling
constraints satisfied by construction.
"""

import csv
import struct
import time
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import nnet
from .channel import TransitionMatrix, initial_state, step, stationary_distribution
from .core import Assignment, collision_indicator, slot_utility, validate_assignment
from .seeds import derive_rng

AgentState = tuple[int, ...] | None  # None is the INITIAL marker

TABULAR_MAX_SUBCHANNELS = 12
VALUE_ITERATION_MAX_SUBCHANNELS = 10
Q_DIVERGENCE_LIMIT = 1e6


class TabularComplexityError(ValueError):
    """Raised when a dense Q-table would be infeasibly large."""


class InsufficientSamplesError(RuntimeError):
    """Raised when a replay buffer cannot fill a batch yet."""


def table_shape(num_subchannels: int) -> tuple[int, int]:
    """(states, actions) sizing of the tabular formulation."""
    return 2 ** num_subchannels + 1, num_subchannels + 1


def state_index(state: AgentState, num_subchannels: int) -> int:
    """Dense table index: sub-channel m contributes bit 2^(m-1); INITIAL
    maps to the extra index 2^M."""
    if state is None:
        return 2 ** num_subchannels
    if len(state) != num_subchannels:
        raise ValueError("state length does not match M")
    return sum(bit << i for i, bit in enumerate(state))


def index_state(index: int, num_subchannels: int) -> AgentState:
    if index == 2 ** num_subchannels:
        return None
    return tuple((index >> i) & 1 for i in range(num_subchannels))


def state_features(state: AgentState, num_subchannels: int) -> np.ndarray:
    """Network input: the M bits as reals; INITIAL becomes an all-0.5 vector."""
    if state is None:
        return np.full(num_subchannels, 0.5)
    return np.asarray(state, dtype=float)


def valid_actions(state: AgentState, num_subchannels: int) -> tuple[int, ...]:
    """Idle plus every sub-channel predicted vacant; INITIAL allows idle only
    (no holes have been detected yet)."""
    if state is None:
        return (0,)
    return (0,) + tuple(m + 1 for m in range(num_subchannels) if state[m] == 0)


def epsilon_greedy(q_values: Sequence[float], epsilon: float,
                   rng: np.random.Generator) -> int:
    """With probability epsilon a uniform action, else the argmax
    (lowest index wins ties)."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if rng.random() < epsilon:
        return int(rng.integers(len(q_values)))
    return int(np.argmax(q_values))


def top_k_actions(q_values: Sequence[float], k: int) -> tuple[int, ...]:
    """k distinct actions in descending Q, lowest index breaking ties."""
    if not 1 <= k <= len(q_values):
        raise ValueError(f"k must lie in [1, {len(q_values)}]")
    order = sorted(range(len(q_values)), key=lambda i: (-q_values[i], i))
    return tuple(order[:k])


def masked_actions(q_values: Sequence[float], valid: Sequence[int], k: int,
                   epsilon: float, rng: np.random.Generator) -> tuple[int, ...]:
    """k actions restricted to the valid set: uniform (without replacement)
    with probability epsilon, else the top-k by Q. Idle pads when fewer
    than k valid actions exist; several agents may idle at once."""
    if rng.random() < epsilon:
        take = min(k, len(valid))
        picks = [int(valid[i]) for i in rng.choice(len(valid), size=take, replace=False)]
    else:
        order = sorted(valid, key=lambda a: (-q_values[a], a))
        picks = [int(a) for a in order[:k]]
    while len(picks) < k:
        picks.append(0)
    return tuple(picks)


@dataclass
class Experience:
    s: AgentState
    a: int
    r: float
    s_next: AgentState

    def __post_init__(self):
        if not np.isfinite(self.r):
            raise ValueError("reward must be finite")


@dataclass
class ReplayBuffer:
    capacity: int
    items: deque = None
    insertions: int = 0

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.items = deque(maxlen=self.capacity)

    def __len__(self) -> int:
        return len(self.items)


def replay_push(buffer: ReplayBuffer, experience: Experience) -> None:
    buffer.items.append(experience)  # deque evicts FIFO at capacity
    buffer.insertions += 1


def replay_sample(buffer: ReplayBuffer, batch_size: int,
                  rng: np.random.Generator) -> list[Experience]:
    """Uniform sample without replacement within one batch."""
    if len(buffer) < batch_size:
        raise InsufficientSamplesError(
            f"buffer holds {len(buffer)} < batch size {batch_size}")
    idx = rng.choice(len(buffer), size=batch_size, replace=False)
    return [buffer.items[i] for i in idx]


# ---------------------------------------------------------------------------
# Tabular agent


@dataclass
class QTable:
    """Dense (2^M + 1) x (M + 1) Q-table.

    alpha=None decays the step size per (state, action) as
    visits^(-alpha_power). The default power 0.7 keeps the bootstrap bias
    negligible at desk-scale slot counts; the harmonic schedule
    (alpha_power=1.0) needs astronomically many visits at gamma=0.9.
    """

    num_subchannels: int
    gamma: float = 0.9
    alpha: float | None = None
    alpha_power: float = 0.7
    epsilon0: float = 1.0
    epsilon_min: float = 0.05
    epsilon_decay: float | None = None
    table: np.ndarray = None
    visits: np.ndarray = None

    def __post_init__(self):
        if self.num_subchannels > TABULAR_MAX_SUBCHANNELS:
            states, actions = table_shape(self.num_subchannels)
            raise TabularComplexityError(
                f"a dense Q-table for M={self.num_subchannels} would need "
                f"{states} x {actions} entries; tabular mode is limited to "
                f"M <= {TABULAR_MAX_SUBCHANNELS}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        shape = table_shape(self.num_subchannels)
        if self.table is None:
            self.table = np.zeros(shape)
        if self.visits is None:
            self.visits = np.zeros(shape, dtype=int)
        if self.table.shape != shape or self.visits.shape != shape:
            raise ValueError(f"table must have shape {shape}")

    def q_row(self, state: AgentState) -> np.ndarray:
        return self.table[state_index(state, self.num_subchannels)]

    def select(self, state: AgentState, valid, epsilon, rng, k=1):
        row = self.q_row(state)
        return masked_actions(row, valid, k, epsilon, rng), row

    def observe(self, experience: Experience, rng=None) -> None:
        q_update(self, experience.s, experience.a, experience.r, experience.s_next)

    def epsilon_at(self, episode: int, episodes: int) -> float:
        return _epsilon_schedule(self.epsilon0, self.epsilon_min,
                                 self.epsilon_decay, episode, episodes)


def q_update(table: QTable, s: AgentState, a: int, r: float,
             s_next: AgentState) -> QTable:
    """One Q-learning backup: Q(s,a) += alpha * (r + gamma max_a' Q(s',a') - Q(s,a))."""
    si = state_index(s, table.num_subchannels)
    sj = state_index(s_next, table.num_subchannels)
    table.visits[si, a] += 1
    if table.alpha is not None:
        alpha = table.alpha
    else:
        alpha = float(table.visits[si, a]) ** -table.alpha_power
    target = r + table.gamma * table.table[sj].max()
    table.table[si, a] += alpha * (target - table.table[si, a])
    return table


# ---------------------------------------------------------------------------
# DQN family


@dataclass
class DqnAgent:
    """Primary/target networks over the M-bit state, with experience replay.

    variant selects the bootstrap and target-update style: "dqn" is the
    vanilla max-over-target bootstrap with hard copies, "ddqn" decouples
    selection from evaluation, "ddqn-soft" additionally replaces the hard
    copy with polyak averaging.
    """

    num_subchannels: int
    variant: str = "ddqn-soft"
    gamma: float = 0.9
    hidden: tuple[int, ...] = (64, 64)
    replay_capacity: int = 10_000
    batch_size: int = 32
    target_update_period: int = 100
    tau: float = 0.01
    learning_rate: float = 1e-3
    epsilon0: float = 1.0
    epsilon_min: float = 0.05
    epsilon_decay: float | None = None
    seed: int = 0
    primary: nnet.Network = None
    target: nnet.Network = None
    replay: ReplayBuffer = None
    optimizer: nnet.OptimizerState = None
    train_steps: int = 0

    def __post_init__(self):
        if self.variant not in ("dqn", "ddqn", "ddqn-soft"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        dims = [self.num_subchannels, *self.hidden, self.num_subchannels + 1]
        acts = ["relu"] * len(self.hidden) + ["identity"]
        if self.primary is None:
            self.primary = nnet.build_network(dims, acts, seed=self.seed)
        if self.target is None:
            self.target = nnet.clone_weights(self.primary)
        if [l.w.shape for l in self.primary.layers] != [l.w.shape for l in self.target.layers]:
            raise ValueError("primary and target networks must share dimensions")
        if self.primary.output_dim != self.num_subchannels + 1:
            raise ValueError("output width must be M + 1")
        if self.replay is None:
            self.replay = ReplayBuffer(self.replay_capacity)
        if self.optimizer is None:
            self.optimizer = nnet.OptimizerState(kind="adam",
                                                 learning_rate=self.learning_rate)

    def q_row(self, state: AgentState) -> np.ndarray:
        return nnet.forward(self.primary, state_features(state, self.num_subchannels))

    def select(self, state: AgentState, valid, epsilon, rng, k=1):
        row = self.q_row(state)
        return masked_actions(row, valid, k, epsilon, rng), row

    def observe(self, experience: Experience, rng: np.random.Generator) -> None:
        """Store the transition and, once the buffer can fill a batch,
        run one regression step plus the target update."""
        replay_push(self.replay, experience)
        if len(self.replay) < self.batch_size:
            return
        batch = replay_sample(self.replay, self.batch_size, rng)
        targets_y = ddqn_targets(self, batch)
        feats = np.array([state_features(e.s, self.num_subchannels) for e in batch])
        target_mat = nnet.forward(self.primary, feats)
        target_mat[np.arange(len(batch)), [e.a for e in batch]] = targets_y
        _, grads = nnet.backward(self.primary, feats, target_mat, nnet.MSE)
        nnet.optimizer_step(self.primary, grads, self.optimizer)
        self.train_steps += 1
        if self.variant == "ddqn-soft":
            soft_update(self.target, self.primary, self.tau)
        elif self.train_steps % self.target_update_period == 0:
            self.target = nnet.clone_weights(self.primary)

    def epsilon_at(self, episode: int, episodes: int) -> float:
        return _epsilon_schedule(self.epsilon0, self.epsilon_min,
                                 self.epsilon_decay, episode, episodes)


def ddqn_targets(agent: DqnAgent, batch: list[Experience]) -> np.ndarray:
    """Per-example regression targets y_i.

    Double mode evaluates the primary network's argmax action under the
    target network; vanilla mode takes the target network's max. The task
    is continuing, so there is no terminal masking.
    """
    if not batch:
        raise ValueError("batch must be non-empty")
    feats = np.array([state_features(e.s_next, agent.num_subchannels) for e in batch])
    rewards = np.array([e.r for e in batch])
    q_target = nnet.forward(agent.target, feats)
    if agent.variant == "dqn":
        boot = q_target.max(axis=1)
    else:
        q_primary = nnet.forward(agent.primary, feats)
        best = q_primary.argmax(axis=1)
        boot = q_target[np.arange(len(batch)), best]
    return rewards + agent.gamma * boot


def soft_update(target: nnet.Network, primary: nnet.Network, tau: float) -> nnet.Network:
    """Polyak averaging in place: theta' <- tau * theta + (1 - tau) * theta'."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    if [l.w.shape for l in target.layers] != [l.w.shape for l in primary.layers]:
        raise ValueError("networks differ in dimensions")
    for t, p in zip(target.layers, primary.layers):
        t.w *= 1.0 - tau
        t.w += tau * p.w
        t.b *= 1.0 - tau
        t.b += tau * p.b
    return target


@dataclass
class RandomAgent:
    """Uniform over valid actions; no learning. Baseline policy."""

    num_subchannels: int

    def q_row(self, state: AgentState) -> np.ndarray:
        return np.zeros(self.num_subchannels + 1)

    def select(self, state, valid, epsilon, rng, k=1):
        row = self.q_row(state)
        return masked_actions(row, valid, k, 1.0, rng), row

    def observe(self, experience, rng=None) -> None:
        pass

    def epsilon_at(self, episode: int, episodes: int) -> float:
        return 1.0


def _epsilon_schedule(eps0: float, eps_min: float, decay: float | None,
                      episode: int, episodes: int) -> float:
    """Exponential decay reaching eps_min over the first 60% of episodes
    unless an explicit decay factor is given; non-increasing, floored."""
    if decay is None:
        horizon = max(1.0, 0.6 * episodes)
        decay = (eps_min / eps0) ** (1.0 / horizon) if eps0 > 0 else 1.0
    return max(eps_min, eps0 * decay ** episode)


# ---------------------------------------------------------------------------
# Training environment (perfectly observed occupancy)


def normalized_reward_table(access_sinr_db) -> np.ndarray:
    """Per-(uav, sub-channel) throughput scaled by the best link in the
    table, so a successful transmission earns at most 1."""
    lin = 10.0 ** (np.asarray(access_sinr_db, dtype=float) / 10.0)
    rates = np.log2(1.0 + lin)
    peak = rates.max()
    if peak <= 0:
        raise ValueError("at least one link must have positive capacity")
    return rates / peak


class SchedulingEnv:
    """Slot-level allocation environment with perfect sensing.

    Each step advances the occupancy chains once, scores the actions chosen
    from the previous fused vector, and reveals the new occupancy as the
    next agent state. Rewards are normalized slot utilities.
    """

    def __init__(self, matrices: list[TransitionMatrix], reward_table):
        self.matrices = list(matrices)
        self.reward_table = np.asarray(reward_table, dtype=float)
        if self.reward_table.ndim != 2 or self.reward_table.shape[1] != len(self.matrices):
            raise ValueError("reward table must be K x M")
        self._state = None

    @property
    def num_subchannels(self) -> int:
        return len(self.matrices)

    @property
    def num_uavs(self) -> int:
        return self.reward_table.shape[0]

    def reset(self, rng: np.random.Generator) -> AgentState:
        self._state = initial_state(self.matrices, rng)
        return None

    def step(self, actions: Sequence[int]):
        """Returns (utility, per-action rewards, collision count, next state)."""
        self._state = step(self._state, self.matrices)
        bits = self._state.true_occupancy
        pairs, rewards = [], []
        for uav, action in enumerate(actions):
            if action == 0:
                rewards.append(0.0)
                continue
            r = collision_indicator(bits[action - 1], 0)
            gain = self.reward_table[uav, action - 1]
            pairs.append((r, gain))
            rewards.append(r * gain)
        utility = slot_utility(pairs)
        collisions = sum(1 for r, _ in pairs if r == -1)
        return utility, tuple(rewards), collisions, bits


def preset_scheduling_env(num_subchannels: int, num_uavs: int = 1) -> SchedulingEnv:
    """Bundled small MDPs: p01=0.2 / p10=0.3 per channel, with distinct
    per-channel link qualities so the greedy choice matters."""
    sinr_by_m = {2: [15.0, 5.0], 4: [20.0, 12.0, 6.0, 0.0]}
    if num_subchannels not in sinr_by_m:
        raise ValueError("presets exist for M=2 and M=4")
    matrices = [TransitionMatrix(0.2, 0.3) for _ in range(num_subchannels)]
    row = sinr_by_m[num_subchannels]
    table = normalized_reward_table([row] * num_uavs)
    return SchedulingEnv(matrices, table)


# ---------------------------------------------------------------------------
# Training loop


TRAINING_COLUMNS = ("episode", "cumulative_utility", "collisions", "epsilon",
                    "mean_q", "wall_ms")


def train_agent(agent, env: SchedulingEnv, episodes: int, slots_per_episode: int,
                seed: int) -> list[tuple]:
    """Run the slot loop of the allocation MDP and return per-episode rows
    matching TRAINING_COLUMNS. Reproducible per seed."""
    if episodes < 0 or slots_per_episode < 1:
        raise ValueError("need a positive horizon")
    rng_env = derive_rng(seed, 0xE17)
    rng_agent = derive_rng(seed, 0xA9E)
    log = []
    for episode in range(episodes):
        epsilon = agent.epsilon_at(episode, episodes)
        state = env.reset(rng_env)
        t0 = time.perf_counter()
        cum_utility = 0.0
        collisions = 0
        q_sum = 0.0
        for _ in range(slots_per_episode):
            valid = valid_actions(state, env.num_subchannels)
            actions, q_row = agent.select(state, valid, epsilon, rng_agent,
                                          k=env.num_uavs)
            if np.abs(q_row).max() > Q_DIVERGENCE_LIMIT:
                raise RuntimeError(f"Q-values diverged beyond {Q_DIVERGENCE_LIMIT:g}")
            _assert_feasible(actions, state)
            utility, rewards, ncoll, next_state = env.step(actions)
            for action, reward in zip(actions, rewards):
                agent.observe(Experience(state, action, reward, next_state), rng_agent)
            cum_utility += utility
            collisions += ncoll
            q_sum += max(q_row[a] for a in valid)
            state = next_state
        wall_ms = (time.perf_counter() - t0) * 1e3
        log.append((episode, cum_utility, collisions, epsilon,
                    q_sum / slots_per_episode, wall_ms))
    return log


def _assert_feasible(actions: Sequence[int], state: AgentState) -> None:
    """Any constraint violation coming out of an agent is a bug."""
    pairs = [(uav, a) for uav, a in enumerate(actions) if a != 0]
    if not pairs:
        return
    if state is None:
        raise AssertionError("non-idle action taken from the INITIAL state")
    violations = validate_assignment(Assignment.of(*pairs), state)
    if violations:
        raise AssertionError(f"agent produced an infeasible assignment: {violations}")


def write_training_csv(path: str, rows) -> None:
    """Persist a training log.

    The wall_ms column is zeroed on disk so that identical (config, seed)
    runs produce byte-identical files; measured timings stay in the
    in-memory rows and are reported on stderr by the CLI.
    """
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRAINING_COLUMNS)
        for row in rows:
            writer.writerow([row[0], repr(float(row[1])), row[2],
                             repr(float(row[3])), repr(float(row[4])), 0])


# ---------------------------------------------------------------------------
# Exact oracle


def _joint_transition(matrices: list[TransitionMatrix]) -> np.ndarray:
    """Kronecker product of the per-channel chains under the bit-index
    convention (channel 1 in the least significant bit)."""
    joint = np.array([[1.0]])
    for m in matrices:
        joint = np.kron(m.rows, joint)
    return joint


def _joint_stationary(matrices: list[TransitionMatrix]) -> np.ndarray:
    joint = np.array([1.0])
    for m in matrices:
        joint = np.kron(np.asarray(stationary_distribution(m)), joint)
    return joint


def _expected_rewards(matrices, channel_rewards) -> np.ndarray:
    """E[r * R] per (state, action); -inf marks infeasible actions."""
    n_states = 2 ** len(matrices)
    n_actions = len(matrices) + 1
    out = np.full((n_states, n_actions), -np.inf)
    out[:, 0] = 0.0
    for s in range(n_states):
        for m, matrix in enumerate(matrices):
            if (s >> m) & 1 == 0:
                out[s, m + 1] = channel_rewards[m] * (1.0 - 2.0 * matrix.p01)
    return out


def value_iteration(matrices: list[TransitionMatrix], channel_rewards,
                    gamma: float, tol: float = 1e-9):
    """Exact Bellman solution of the allocation MDP over the 2^M recurrent
    states; returns (values, greedy policy). Infeasible actions are
    excluded from the max; ties break toward the lowest action index."""
    if len(matrices) > VALUE_ITERATION_MAX_SUBCHANNELS:
        raise ValueError(
            f"value iteration enumerates 2^M states; M <= "
            f"{VALUE_ITERATION_MAX_SUBCHANNELS} required, got {len(matrices)}")
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    if len(channel_rewards) != len(matrices):
        raise ValueError("one reward per sub-channel required")
    p = _joint_transition(matrices)
    r_exp = _expected_rewards(matrices, channel_rewards)
    v = np.zeros(2 ** len(matrices))
    while True:
        q = r_exp + gamma * (p @ v)[:, None]
        v_new = q.max(axis=1)
        if np.max(np.abs(v_new - v)) < tol:
            break
        v = v_new
    policy = q.argmax(axis=1)
    return v_new, policy


def policy_expected_utility(matrices: list[TransitionMatrix], channel_rewards,
                            policy) -> float:
    """Exact long-run per-slot expected utility of a stationary policy,
    weighting states by the joint stationary distribution."""
    r_exp = _expected_rewards(matrices, channel_rewards)
    pi = _joint_stationary(matrices)
    per_state = r_exp[np.arange(len(policy)), policy]
    if not np.all(np.isfinite(per_state)):
        raise ValueError("policy takes an infeasible action")
    return float(pi @ per_state)


# ---------------------------------------------------------------------------
# Agent checkpoints


AGENT_MAGIC = b"UAGC"
AGENT_VERSION = 1
_VARIANT_CODE = {"dqn": 0, "ddqn": 1, "ddqn-soft": 2}
_CODE_VARIANT = {v: k for k, v in _VARIANT_CODE.items()}


def save_agent(agent: DqnAgent, path: str) -> None:
    """Agent hyperparameter header followed by the primary network block.

    The target network is rebuilt as a copy on load; the replay buffer is
    not persisted.
    """
    header = struct.pack(
        "<4sIIIdddddIId",
        AGENT_MAGIC, AGENT_VERSION, agent.num_subchannels,
        _VARIANT_CODE[agent.variant], agent.gamma, agent.epsilon0,
        agent.epsilon_min,
        -1.0 if agent.epsilon_decay is None else agent.epsilon_decay,
        agent.tau, agent.batch_size, agent.target_update_period,
        agent.learning_rate)
    with open(path, "wb") as f:
        f.write(header)
        f.write(nnet.network_to_bytes(agent.primary))


def load_agent(path: str) -> DqnAgent:
    with open(path, "rb") as f:
        data = f.read()
    fmt = "<4sIIIdddddIId"
    (magic, version, m, variant_code, gamma, eps0, eps_min, decay, tau,
     batch, period, lr) = struct.unpack_from(fmt, data)
    if magic != AGENT_MAGIC:
        raise ValueError(f"{path}: not an agent checkpoint")
    if version != AGENT_VERSION:
        raise ValueError(f"{path}: unsupported agent version {version}")
    primary, _ = nnet.network_from_bytes(data, offset=struct.calcsize(fmt))
    return DqnAgent(
        num_subchannels=m, variant=_CODE_VARIANT[variant_code], gamma=gamma,
        hidden=tuple(l.w.shape[0] for l in primary.layers[1:]),
        epsilon0=eps0, epsilon_min=eps_min,
        epsilon_decay=None if decay < 0 else decay, tau=tau,
        batch_size=batch, target_update_period=period, learning_rate=lr,
        primary=primary, target=nnet.clone_weights(primary))


QTABLE_MAGIC = b"UQTB"
QTABLE_VERSION = 1


def save_qtable(table: QTable, path: str) -> None:
    header = struct.pack(
        "<4sIIddd", QTABLE_MAGIC, QTABLE_VERSION, table.num_subchannels,
        table.gamma, float("nan") if table.alpha is None else table.alpha,
        table.alpha_power)
    with open(path, "wb") as f:
        f.write(header)
        f.write(table.table.astype("<f8").tobytes(order="C"))
        f.write(table.visits.astype("<i8").tobytes(order="C"))


def load_qtable(path: str) -> QTable:
    with open(path, "rb") as f:
        data = f.read()
    fmt = "<4sIIddd"
    magic, version, m, gamma, alpha, alpha_power = struct.unpack_from(fmt, data)
    if magic != QTABLE_MAGIC:
        raise ValueError(f"{path}: not a q-table checkpoint")
    if version != QTABLE_VERSION:
        raise ValueError(f"{path}: unsupported q-table version {version}")
    shape = table_shape(m)
    offset = struct.calcsize(fmt)
    n = shape[0] * shape[1]
    values = np.frombuffer(data, dtype="<f8", count=n, offset=offset)
    visits = np.frombuffer(data, dtype="<i8", count=n, offset=offset + 8 * n)
    return QTable(num_subchannels=m, gamma=gamma,
                  alpha=None if np.isnan(alpha) else alpha,
                  alpha_power=alpha_power,
                  table=values.reshape(shape).copy(),
                  visits=visits.reshape(shape).astype(int).copy())
