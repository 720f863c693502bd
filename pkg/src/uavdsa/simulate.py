"""End-to-end slot loop: request, sense, broadcast, fuse, allocate, access.

Each slot (1) samples which UAVs request resources, (2) has every UAV
sense the current occupancy and report its prediction, (3) fuses the
reports, (4) lets the agent allocate sub-channels to the requesting UAVs
for the next slot, (5) executes the allocation made in the previous slot
against the occupancy that actually materialized, and (6) advances the
occupancy chains. Transmissions therefore always run one slot behind the
prediction they were based on, which is what the collision indicator
scores.

Every persisted aggregate is recomputed from the slot ledgers before
saving (self-audit), and all randomness flows from the config seed.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from . import nnet
from .channel import db_to_linear, initial_state, step
from .config import SensingSpec, SimConfig
from .core import (Assignment, SlotLedger, UndefinedEnergyEfficiencyError,
                   access_cost, collision_indicator, energy_efficiency,
                   sensing_cost, slot_utility, throughput, validate_assignment)
from .fusion import fuse
from .iqsynth import synthesize_observation
from .scheduler import (DqnAgent, QTable, RandomAgent, load_agent,
                        valid_actions)
from .seeds import derive_rng
from .sensing import SensingModel, predict_occupancy, write_metrics_csv

LEDGER_COLUMNS = ("slot", "utility", "ee", "collisions", "holes_detected",
                  "holes_true")


@dataclass
class RunReport:
    ledgers: list[SlotLedger]
    slots: int
    mean_utility: float
    mean_ee: float
    collision_rate: float
    transmissions: int
    collisions: int
    sensing_counts: dict[str, tuple[int, int, int, int]]
    seed: int


def build_agent(config: SimConfig):
    spec = config.agent
    m = config.radio.num_subchannels
    if spec.variant == "random":
        return RandomAgent(num_subchannels=m)
    if spec.variant == "qtable":
        return QTable(num_subchannels=m, gamma=spec.gamma, alpha=spec.alpha,
                      alpha_power=spec.alpha_power, epsilon0=spec.epsilon0,
                      epsilon_min=spec.epsilon_min,
                      epsilon_decay=spec.epsilon_decay)
    if spec.checkpoint is not None:
        agent = load_agent(spec.checkpoint)
        if agent.num_subchannels != m:
            raise ValueError(
                f"{spec.checkpoint}: trained for M={agent.num_subchannels}, "
                f"config has M={m}")
        return agent
    return DqnAgent(num_subchannels=m, variant=spec.variant, gamma=spec.gamma,
                    hidden=spec.hidden, replay_capacity=spec.replay_capacity,
                    batch_size=spec.batch_size,
                    target_update_period=spec.target_update_period,
                    tau=spec.tau, learning_rate=spec.learning_rate,
                    epsilon0=spec.epsilon0, epsilon_min=spec.epsilon_min,
                    epsilon_decay=spec.epsilon_decay, seed=config.seed)


def build_sensing_model(spec: SensingSpec, config: SimConfig) -> SensingModel | None:
    """None stands for the perfect (oracle) sensor."""
    m = config.radio.num_subchannels
    if spec.kind == "perfect":
        return None
    if spec.kind == "energy-threshold":
        return SensingModel(kind="energy-threshold", num_subchannels=m,
                            thresholds=np.asarray(spec.thresholds, dtype=float),
                            decision_threshold=spec.decision_threshold,
                            input_mode=spec.input_mode)
    network = nnet.load_checkpoint(spec.model_path)
    if network.output_dim != m:
        raise ValueError(f"{spec.model_path}: classifier has "
                         f"{network.output_dim} outputs, config has M={m}")
    return SensingModel(kind="dense-classifier", num_subchannels=m,
                        network=network, decision_threshold=spec.decision_threshold,
                        input_mode=spec.input_mode)


class Simulation:
    def __init__(self, config: SimConfig):
        self.cfg = config
        self.rng = derive_rng(config.seed, 0x51B)
        self.models = [build_sensing_model(s, config) for s in config.sensing]
        self.agent = build_agent(config)
        m = config.radio.num_subchannels
        self.sc_per_uav = sensing_cost(config.timing, config.radio)
        self.ac_per_pair = access_cost(config.timing, config.radio)
        self.bits_table = [
            [throughput(config.timing, config.radio,
                        db_to_linear(config.link.access_sinr_db[k][ch]))
             for ch in range(m)]
            for k in range(config.radio.num_uavs)
        ]
        self.slot = 0
        self.counts = {f"uav_{k}": [0, 0, 0, 0]
                       for k in range(config.radio.num_uavs)}
        self.counts["fused"] = [0, 0, 0, 0]
        self.reset_episode()

    def reset_episode(self) -> None:
        self.env_state = initial_state(list(self.cfg.matrices), self.rng)
        self.prev_fused = None
        self.pending: list[tuple[int, int]] = []

    def _sense(self, uav: int, truth) -> tuple[int, ...]:
        model = self.models[uav]
        if model is None:
            return truth
        obs = synthesize_observation(
            truth, self.cfg.link.sensing_sinr_db[uav], self.cfg.synth, self.rng,
            uav_index=uav)
        return predict_occupancy(model, obs)

    def _tally(self, key: str, prediction, truth) -> None:
        c = self.counts[key]
        for p, t in zip(prediction, truth):
            p_pos, t_pos = p == 0, t == 0
            if p_pos and t_pos:
                c[0] += 1
            elif p_pos:
                c[1] += 1
            elif t_pos:
                c[2] += 1
            else:
                c[3] += 1

    def run_slot(self) -> SlotLedger:
        cfg = self.cfg
        k_uavs = cfg.radio.num_uavs
        m = cfg.radio.num_subchannels
        truth = self.env_state.true_occupancy

        requesting = [k for k in range(k_uavs)
                      if self.rng.random() < cfg.request_probability]

        reports = []
        for k in range(k_uavs):
            h = self._sense(k, truth)
            self._tally(f"uav_{k}", h, truth)
            reports.append(h)
        fused = fuse(reports, cfg.fusion)
        self._tally("fused", fused, truth)

        pending_next: list[tuple[int, int]] = []
        if requesting:
            actions, _ = self.agent.select(fused, valid_actions(fused, m), 0.0,
                                           self.rng, k=len(requesting))
            pending_next = [(uav, a) for uav, a in zip(requesting, actions) if a != 0]
            violations = validate_assignment(Assignment.of(*pending_next), fused)
            if violations:
                raise RuntimeError(f"agent produced an infeasible assignment: {violations}")

        collision, bits, acc = {}, {}, {}
        for uav, ch in sorted(self.pending):
            collision[(uav, ch)] = collision_indicator(truth[ch - 1],
                                                       self.prev_fused[ch - 1])
            bits[(uav, ch)] = self.bits_table[uav][ch - 1]
            acc[(uav, ch)] = self.ac_per_pair
        sensing_costs = {k: self.sc_per_uav for k in range(k_uavs)}

        pairs = [(collision[key], bits[key]) for key in sorted(collision)]
        utility = slot_utility(pairs)
        try:
            ee = energy_efficiency(
                [(collision[key], bits[key], acc[key]) for key in sorted(collision)],
                [sensing_costs[k] for k in sorted(sensing_costs)])
        except UndefinedEnergyEfficiencyError:
            ee = float("nan")

        ledger = SlotLedger(
            slot=self.slot, assignment=Assignment.of(*self.pending),
            collision=collision, throughput=bits, access_cost=acc,
            sensing_costs=sensing_costs, utility=utility, energy_efficiency=ee,
            holes_detected=m - sum(fused), holes_true=m - sum(truth))

        self.env_state = step(self.env_state, list(cfg.matrices))
        self.prev_fused = fused
        self.pending = pending_next
        self.slot += 1
        return ledger


def recompute_aggregates(ledgers: list[SlotLedger]):
    """Aggregates derived purely from ledger fields (the self-audit path)."""
    if not ledgers:
        return 0.0, float("nan"), 0.0, 0, 0
    utilities = []
    ees = []
    transmissions = 0
    collisions = 0
    for led in ledgers:
        pairs = [(led.collision[key], led.throughput[key])
                 for key in sorted(led.collision)]
        utilities.append(slot_utility(pairs))
        if not np.isnan(led.energy_efficiency):
            ees.append(energy_efficiency(
                [(led.collision[key], led.throughput[key], led.access_cost[key])
                 for key in sorted(led.collision)],
                [led.sensing_costs[k] for k in sorted(led.sensing_costs)]))
        transmissions += len(led.collision)
        collisions += sum(1 for r in led.collision.values() if r == -1)
    mean_utility = float(np.mean(utilities))
    mean_ee = float(np.mean(ees)) if ees else float("nan")
    rate = collisions / transmissions if transmissions else 0.0
    return mean_utility, mean_ee, rate, transmissions, collisions


def run_simulation(config: SimConfig) -> RunReport:
    sim = Simulation(config)
    ledgers = []
    for episode in range(config.episodes):
        if episode > 0:
            sim.reset_episode()
        for _ in range(config.slots_per_episode):
            ledgers.append(sim.run_slot())
    mean_utility, mean_ee, rate, transmissions, collisions = recompute_aggregates(ledgers)
    return RunReport(
        ledgers=ledgers, slots=len(ledgers), mean_utility=mean_utility,
        mean_ee=mean_ee, collision_rate=rate, transmissions=transmissions,
        collisions=collisions,
        sensing_counts={key: tuple(c) for key, c in sim.counts.items()},
        seed=config.seed)


def _audit(report: RunReport) -> None:
    mean_utility, mean_ee, rate, transmissions, collisions = recompute_aggregates(
        report.ledgers)
    same_ee = (np.isnan(mean_ee) and np.isnan(report.mean_ee)) or mean_ee == report.mean_ee
    if (mean_utility != report.mean_utility or not same_ee
            or rate != report.collision_rate
            or transmissions != report.transmissions
            or collisions != report.collisions):
        raise RuntimeError("report aggregates do not match their ledgers")


def _metric_row(counts):
    tp, fp, fn, _tn = counts
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else None
    return precision, recall, f1


def save_report(report: RunReport, config: SimConfig, out_dir: str) -> None:
    """Persist ledgers.csv, report.json and sensing_metrics.csv; audited."""
    _audit(report)
    os.makedirs(out_dir, exist_ok=True)

    with open(os.path.join(out_dir, "ledgers.csv"), "w", newline="") as f:
        f.write(",".join(LEDGER_COLUMNS) + "\n")
        for led in report.ledgers:
            n_coll = sum(1 for r in led.collision.values() if r == -1)
            f.write(f"{led.slot},{led.utility!r},{led.energy_efficiency!r},"
                    f"{n_coll},{led.holes_detected},{led.holes_true}\n")

    sensing = {}
    for key, counts in report.sensing_counts.items():
        precision, recall, f1 = _metric_row(counts)
        sensing[key] = {"tp": counts[0], "fp": counts[1], "fn": counts[2],
                        "tn": counts[3], "precision": precision,
                        "recall": recall, "f1": f1}
    payload = {
        "seed": report.seed,
        "slots": report.slots,
        "mean_utility": report.mean_utility,
        "mean_ee": None if np.isnan(report.mean_ee) else report.mean_ee,
        "collision_rate": report.collision_rate,
        "transmissions": report.transmissions,
        "collisions": report.collisions,
        "sensing": sensing,
    }
    with open(os.path.join(out_dir, "report.json"), "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")

    rows = []
    for k in range(config.radio.num_uavs):
        precision, recall, f1 = _metric_row(report.sensing_counts[f"uav_{k}"])
        rows.append((k, config.link.sensing_sinr_db[k], precision, recall, f1,
                     config.sensing[k].kind, 0))
    precision, recall, f1 = _metric_row(report.sensing_counts["fused"])
    rows.append(("fused", "", precision, recall, f1,
                 f"n={config.fusion.n}", 1))
    write_metrics_csv(os.path.join(out_dir, "sensing_metrics.csv"), rows)
