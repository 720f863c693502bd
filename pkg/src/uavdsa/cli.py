"""Command-line front end.

Subcommands: gen-dataset, train-sensor, eval-sensing, train-agent,
simulate, report. Every subcommand accepts --config PATH, --seed U64 (seed
override) and --out DIR (output directory override). Exit codes: 0
success, 1 usage or configuration error, 2 runtime failure.

All output files are byte-reproducible for a fixed (config, seed);
wall-clock timings go to stderr only.
"""

import argparse
import csv
import dataclasses
import os
import sys
import time

import numpy as np

from . import nnet
from .channel import stationary_sampler
from .config import ConfigError, SimConfig, load_config
from .fusion import fuse
from .iqsynth import generate_dataset, load_dataset, save_dataset, synthesize_observation
from .scheduler import (DqnAgent, QTable, SchedulingEnv, TRAINING_COLUMNS,
                        normalized_reward_table, save_agent, save_qtable,
                        train_agent, write_training_csv)
from .seeds import derive_rng
from .sensing import (TrainParams, evaluate_model, micro_metrics,
                      predict_occupancy, train_classifier, write_metrics_csv)
from .simulate import build_sensing_model, run_simulation, save_report

AGENT_TRAIN_VARIANTS = ("qtable", "dqn", "ddqn", "ddqn-soft")


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_gen_dataset(config: SimConfig, args) -> int:
    t0 = time.perf_counter()
    source = stationary_sampler(list(config.matrices))
    dataset = generate_dataset(config.synth, source, config.count_per_sinr)
    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, "dataset.iq")
    save_dataset(dataset, path, num_uavs=config.radio.num_uavs)
    _say(f"gen-dataset: {len(dataset.observations)} observations in "
         f"{time.perf_counter() - t0:.1f}s")
    print(path)
    return 0


def cmd_train_sensor(config: SimConfig, args) -> int:
    t0 = time.perf_counter()
    data_path = args.data or os.path.join(config.out_dir, "dataset.iq")
    dataset = load_dataset(data_path)
    if dataset.config.num_subchannels != config.radio.num_subchannels:
        raise ValueError(f"{data_path}: dataset has M={dataset.config.num_subchannels}, "
                         f"config has M={config.radio.num_subchannels}")
    spec = config.sensing[0]
    params = TrainParams(seed=config.seed, hidden=spec.hidden, epochs=spec.epochs,
                         batch_size=spec.batch_size,
                         learning_rate=spec.learning_rate,
                         input_mode=spec.input_mode,
                         decision_threshold=spec.decision_threshold)
    model = train_classifier(dataset, params)
    os.makedirs(config.out_dir, exist_ok=True)
    ckpt = os.path.join(config.out_dir, "sensor.ckpt")
    nnet.save_checkpoint(model.network, ckpt)
    with open(os.path.join(config.out_dir, "sensor_curve.csv"), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("epoch", "bce"))
        for epoch, loss in enumerate(model.training_curve):
            writer.writerow((epoch, repr(loss)))
    for g in dataset.config.sinr_grid_db:
        metrics = evaluate_model(model, dataset, split="val", sinr_db=g)
        _say(f"train-sensor: val {g:+.0f} dB F1={metrics.micro_f1:.3f}")
    _say(f"train-sensor: {params.epochs} epochs in {time.perf_counter() - t0:.1f}s")
    print(ckpt)
    return 0


def cmd_eval_sensing(config: SimConfig, args) -> int:
    """Per-UAV and fused micro metrics swept over the SINR grid.

    UAV k senses each grid point offset by (sensing_sinr_db[k] -
    sensing_sinr_db[0]), so the configured table acts as relative
    degradation between UAV locations.
    """
    t0 = time.perf_counter()
    specs = list(config.sensing)
    if args.model:
        specs = [dataclasses.replace(spec, kind="dense-classifier",
                                     model_path=args.model) for spec in specs]
    models = [build_sensing_model(spec, config) for spec in specs]
    source = stationary_sampler(list(config.matrices))
    rng = derive_rng(config.seed, 0xE7A1)
    offsets = [s - config.link.sensing_sinr_db[0] for s in config.link.sensing_sinr_db]

    rows = []
    for g in config.synth.sinr_grid_db:
        per_uav = [[] for _ in models]
        fused_preds, truths = [], []
        for _ in range(config.eval_count):
            label = source(rng)
            truths.append(label)
            reports = []
            for k, model in enumerate(models):
                if model is None:
                    reports.append(label)
                    continue
                obs = synthesize_observation(label, g + offsets[k], config.synth,
                                             rng, uav_index=k)
                reports.append(predict_occupancy(model, obs))
            for k, rep in enumerate(reports):
                per_uav[k].append(rep)
            fused_preds.append(fuse(reports, config.fusion))
        for k, preds in enumerate(per_uav):
            met = micro_metrics(preds, truths)
            rows.append((k, g + offsets[k], met.micro_precision, met.micro_recall,
                         met.micro_f1, specs[k].kind, 0))
        met = micro_metrics(fused_preds, truths)
        rows.append(("fused", g, met.micro_precision, met.micro_recall,
                     met.micro_f1, f"n={config.fusion.n}", 1))

    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, "sensing_metrics.csv")
    write_metrics_csv(path, rows)
    _say(f"eval-sensing: {len(rows)} rows in {time.perf_counter() - t0:.1f}s")
    print(path)
    return 0


def cmd_train_agent(config: SimConfig, args) -> int:
    t0 = time.perf_counter()
    variant = args.variant or config.agent.variant
    if variant not in AGENT_TRAIN_VARIANTS:
        raise ValueError(f"train-agent cannot train variant {variant!r}")
    uavs = args.uavs or config.agent.uavs
    spec = config.agent
    table = normalized_reward_table(
        [config.link.access_sinr_db[k] for k in range(uavs)])
    env = SchedulingEnv(list(config.matrices), table)
    if variant == "qtable":
        agent = QTable(num_subchannels=config.radio.num_subchannels,
                       gamma=spec.gamma, alpha=spec.alpha,
                       alpha_power=spec.alpha_power, epsilon0=spec.epsilon0,
                       epsilon_min=spec.epsilon_min,
                       epsilon_decay=spec.epsilon_decay)
    else:
        agent = DqnAgent(num_subchannels=config.radio.num_subchannels,
                         variant=variant, gamma=spec.gamma, hidden=spec.hidden,
                         replay_capacity=spec.replay_capacity,
                         batch_size=spec.batch_size,
                         target_update_period=spec.target_update_period,
                         tau=spec.tau, learning_rate=spec.learning_rate,
                         epsilon0=spec.epsilon0, epsilon_min=spec.epsilon_min,
                         epsilon_decay=spec.epsilon_decay, seed=config.seed)
    log = train_agent(agent, env, config.episodes, config.slots_per_episode,
                      config.seed)
    os.makedirs(config.out_dir, exist_ok=True)
    stem = f"{variant}_{uavs}uav"
    log_path = os.path.join(config.out_dir, f"training_{stem}.csv")
    write_training_csv(log_path, log)
    ckpt = os.path.join(config.out_dir, f"agent_{stem}.ckpt")
    if variant == "qtable":
        save_qtable(agent, ckpt)
    else:
        save_agent(agent, ckpt)
    if log:
        tail = [row[1] for row in log[-min(100, len(log)):]]
        _say(f"train-agent: final-{len(tail)} mean episode utility "
             f"{np.mean(tail):.3f}")
    _say(f"train-agent: {config.episodes} episodes in {time.perf_counter() - t0:.1f}s")
    print(log_path)
    print(ckpt)
    return 0


def cmd_simulate(config: SimConfig, args) -> int:
    t0 = time.perf_counter()
    report = run_simulation(config)
    save_report(report, config, config.out_dir)
    _say(f"simulate: {report.slots} slots in {time.perf_counter() - t0:.1f}s; "
         f"mean utility {report.mean_utility:.3f}, "
         f"collision rate {report.collision_rate:.4f}")
    print(os.path.join(config.out_dir, "report.json"))
    return 0


def cmd_report(args) -> int:
    out_dir = args.out or "out"
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "comparison.csv")
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("source",) + TRAINING_COLUMNS)
        for src in args.files:
            stem = os.path.splitext(os.path.basename(src))[0]
            with open(src, newline="") as fin:
                reader = csv.reader(fin)
                header = next(reader, None)
                if header is None or tuple(header) != TRAINING_COLUMNS:
                    raise ValueError(f"{src}: not a training log "
                                     f"(expected columns {','.join(TRAINING_COLUMNS)})")
                for row in reader:
                    writer.writerow([stem] + row)
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to the JSON run configuration")
    common.add_argument("--seed", type=int, help="seed override")
    common.add_argument("--out", help="output directory override")

    parser = argparse.ArgumentParser(
        prog="uavdsa",
        description="Collaborative spectrum sensing and scheduling simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gen-dataset", parents=[common],
                   help="synthesize the labeled I/Q dataset").set_defaults(
        handler=cmd_gen_dataset, needs_config=True)

    p = sub.add_parser("train-sensor", parents=[common],
                       help="train the dense sensing classifier")
    p.add_argument("--data", help="dataset file (default: OUT/dataset.iq)")
    p.set_defaults(handler=cmd_train_sensor, needs_config=True)

    p = sub.add_parser("eval-sensing", parents=[common],
                       help="per-UAV and fused metrics across the SINR grid")
    p.add_argument("--model", help="use this classifier checkpoint for every UAV")
    p.set_defaults(handler=cmd_eval_sensing, needs_config=True)

    p = sub.add_parser("train-agent", parents=[common],
                       help="train a spectrum allocation agent")
    p.add_argument("--variant", choices=AGENT_TRAIN_VARIANTS)
    p.add_argument("--uavs", type=int, choices=(1, 2))
    p.set_defaults(handler=cmd_train_agent, needs_config=True)

    sub.add_parser("simulate", parents=[common],
                   help="run the full sensing/fusion/access loop").set_defaults(
        handler=cmd_simulate, needs_config=True)

    p = sub.add_parser("report", parents=[common],
                       help="merge training logs into a comparison table")
    p.add_argument("files", nargs="+", help="training log CSVs")
    p.set_defaults(handler=cmd_report, needs_config=False)

    return parser


def cli_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    try:
        if not args.needs_config:
            return args.handler(args)
        if not args.config:
            _say(f"{args.command}: --config is required")
            return 1
        config = load_config(args.config, args.seed, args.out)
        return args.handler(config, args)
    except ConfigError as exc:
        for problem in exc.problems:
            _say(problem)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _say(f"{args.command}: {exc}")
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
