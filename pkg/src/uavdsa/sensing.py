"""Per-UAV wideband spectrum-hole detection.

Two detector kinds produce the per-UAV occupancy report: a per-band
energy threshold baseline and a dense multi-label classifier (one sigmoid
output per sub-channel, 1 = busy). Evaluation uses micro-averaged
precision/recall pooled over all (observation, sub-channel) cells; the
positive class defaults to vacant (0) since holes are the detection
target.
"""

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import nnet
from .iqsynth import Dataset, IQObservation, band_edges
from .seeds import derive_rng

INPUT_MODES = ("iq", "band-energy")


def band_energies(observation, num_subchannels: int) -> np.ndarray:
    """Energy per sub-channel band of one capture: squared DFT magnitudes
    summed over each band of the equal M-way bin partition."""
    samples = observation.samples if isinstance(observation, IQObservation) else np.asarray(observation)
    if len(samples) < num_subchannels:
        raise ValueError("observation shorter than the number of sub-channels")
    spectrum = np.fft.fft(samples, norm="ortho")
    power = np.abs(spectrum) ** 2
    return np.array([power[a:b].sum() for a, b in band_edges(len(samples), num_subchannels)])


def energy_detect(energies: np.ndarray, thresholds: np.ndarray) -> tuple[int, ...]:
    """Busy (1) wherever the band energy reaches its threshold."""
    energies = np.asarray(energies, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    if energies.shape != thresholds.shape:
        raise ValueError("one threshold per sub-channel required")
    return tuple(int(e >= t) for e, t in zip(energies, thresholds))


@dataclass
class SensingModel:
    kind: str  # "energy-threshold" | "dense-classifier"
    num_subchannels: int
    thresholds: np.ndarray | None = None
    network: nnet.Network | None = None
    decision_threshold: float = 0.5
    input_mode: str = "iq"
    training_curve: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ("energy-threshold", "dense-classifier"):
            raise ValueError(f"unknown sensing model kind {self.kind!r}")
        if not 0.0 < self.decision_threshold < 1.0:
            raise ValueError("decision_threshold must lie in (0, 1)")
        if self.input_mode not in INPUT_MODES:
            raise ValueError(f"unknown input mode {self.input_mode!r}")
        if self.kind == "dense-classifier" and self.network is not None:
            if self.network.output_dim != self.num_subchannels:
                raise ValueError("classifier output width must equal M")


def feature_vector(observation: IQObservation, num_subchannels: int,
                   input_mode: str) -> np.ndarray:
    """Standardized classifier input: raw I/Q flattened to 2N reals, or the
    log band-energy profile."""
    if input_mode == "iq":
        x = np.concatenate([observation.samples.real, observation.samples.imag])
    elif input_mode == "band-energy":
        x = np.log10(band_energies(observation, num_subchannels) + 1e-12)
    else:
        raise ValueError(f"unknown input mode {input_mode!r}")
    return (x - x.mean()) / (x.std() + 1e-12)


def feature_dim(num_subchannels: int, samples_per_observation: int, input_mode: str) -> int:
    return 2 * samples_per_observation if input_mode == "iq" else num_subchannels


def predict_occupancy(model: SensingModel, observation: IQObservation) -> tuple[int, ...]:
    """Deterministic per-UAV occupancy report h_k for one capture."""
    if model.kind == "energy-threshold":
        if model.thresholds is None:
            raise ValueError("energy-threshold model has no thresholds")
        return energy_detect(band_energies(observation, model.num_subchannels),
                             model.thresholds)
    if model.network is None:
        raise ValueError("classifier model has no network")
    x = feature_vector(observation, model.num_subchannels, model.input_mode)
    y = nnet.forward(model.network, x)
    return tuple(int(v >= model.decision_threshold) for v in y)


@dataclass
class SensingMetrics:
    """Micro-averaged counts and scores over (observation, sub-channel)
    cells. Undefined ratios are NaN with the matching flag cleared, never
    silently zero."""

    tp: int
    fp: int
    fn: int
    tn: int
    micro_precision: float = float("nan")
    micro_recall: float = float("nan")
    micro_f1: float = float("nan")
    precision_defined: bool = False
    recall_defined: bool = False
    f1_defined: bool = False


def metrics_from_counts(tp: int, fp: int, fn: int, tn: int) -> SensingMetrics:
    m = SensingMetrics(tp=tp, fp=fp, fn=fn, tn=tn)
    if tp + fp > 0:
        m.micro_precision = tp / (tp + fp)
        m.precision_defined = True
    if tp + fn > 0:
        m.micro_recall = tp / (tp + fn)
        m.recall_defined = True
    if 2 * tp + fp + fn > 0:
        m.micro_f1 = 2 * tp / (2 * tp + fp + fn)
        m.f1_defined = True
    return m


def micro_metrics(predictions, truths, positive_class: int = 0) -> SensingMetrics:
    """Pool TP/FP/FN/TN over every (observation, sub-channel) cell."""
    if len(predictions) != len(truths):
        raise ValueError("predictions and truths differ in length")
    tp = fp = fn = tn = 0
    for pred, truth in zip(predictions, truths):
        if len(pred) != len(truth):
            raise ValueError("prediction/truth vectors differ in length")
        for p, t in zip(pred, truth):
            p_pos = p == positive_class
            t_pos = t == positive_class
            if p_pos and t_pos:
                tp += 1
            elif p_pos:
                fp += 1
            elif t_pos:
                fn += 1
            else:
                tn += 1
    return metrics_from_counts(tp, fp, fn, tn)


def _threshold_counts(energies: np.ndarray, truth: np.ndarray, thr: float,
                      positive_class: int):
    """(tp, fp, fn, tn) of one channel under an energy threshold."""
    pred_busy = energies >= thr
    pred_pos = pred_busy == (positive_class == 1)
    truth_pos = truth == positive_class
    tp = int(np.sum(pred_pos & truth_pos))
    fp = int(np.sum(pred_pos & ~truth_pos))
    fn = int(np.sum(~pred_pos & truth_pos))
    tn = int(np.sum(~pred_pos & ~truth_pos))
    return tp, fp, fn, tn


def calibrate_thresholds(dataset: Dataset, positive_class: int = 0,
                         split: str = "val") -> np.ndarray:
    """Per-channel thresholds maximizing validation micro-F1.

    Starts from the per-channel median energy and sweeps each channel over
    midpoints of its observed energies (current value included), so the
    result is never worse than the median default. A channel whose
    validation labels contain a single class gets threshold +inf (never
    busy) with a warning.
    """
    idx = dataset.split[split]
    if not idx:
        raise ValueError(f"dataset has an empty {split!r} split")
    m_chan = dataset.config.num_subchannels
    energies = np.array([band_energies(dataset.observations[i], m_chan) for i in idx])
    truths = np.array([dataset.observations[i].label for i in idx])

    thresholds = np.median(energies, axis=0).astype(float)
    counts = [
        _threshold_counts(energies[:, m], truths[:, m], thresholds[m], positive_class)
        for m in range(m_chan)
    ]

    def micro_f1(all_counts) -> float:
        tp = sum(c[0] for c in all_counts)
        fp = sum(c[1] for c in all_counts)
        fn = sum(c[2] for c in all_counts)
        return 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 0.0

    for m in range(m_chan):
        classes = set(truths[:, m].tolist())
        if len(classes) < 2:
            warnings.warn(f"sub-channel {m + 1} has a single class in the {split} split; "
                          "threshold set to +inf")
            thresholds[m] = float("inf")
            counts[m] = _threshold_counts(energies[:, m], truths[:, m],
                                          thresholds[m], positive_class)
            continue
        uniq = np.unique(energies[:, m])
        candidates = np.concatenate([
            [thresholds[m], 0.0, uniq[-1] * 1.01 + 1.0],
            (uniq[:-1] + uniq[1:]) / 2.0,
        ])
        best_thr, best_score = thresholds[m], -1.0
        for thr in candidates:
            trial = _threshold_counts(energies[:, m], truths[:, m], thr, positive_class)
            score = micro_f1(counts[:m] + [trial] + counts[m + 1:])
            if score > best_score:
                best_score, best_thr = score, float(thr)
        thresholds[m] = best_thr
        counts[m] = _threshold_counts(energies[:, m], truths[:, m], best_thr,
                                      positive_class)
    return thresholds


@dataclass(frozen=True)
class TrainParams:
    seed: int
    hidden: tuple[int, ...] = (128, 128)
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 1e-3
    input_mode: str = "iq"
    decision_threshold: float = 0.5


def train_classifier(dataset: Dataset, params: TrainParams) -> SensingModel:
    """Fit the dense multi-label classifier on the training split.

    Minimizes mean per-channel binary cross-entropy with Adam; the
    per-epoch mean training loss is recorded on the returned model.
    Reproducible per params.seed.
    """
    train_idx = dataset.split["train"]
    if not train_idx:
        raise ValueError("dataset has an empty train split")
    m_chan = dataset.config.num_subchannels
    feats = np.array([
        feature_vector(dataset.observations[i], m_chan, params.input_mode)
        for i in train_idx
    ])
    labels = np.array([dataset.observations[i].label for i in train_idx], dtype=float)

    dims = [feats.shape[1], *params.hidden, m_chan]
    acts = ["relu"] * len(params.hidden) + ["sigmoid"]
    net = nnet.build_network(dims, acts, seed=params.seed)
    opt = nnet.OptimizerState(kind="adam", learning_rate=params.learning_rate)
    rng = derive_rng(params.seed, 0x5E25)

    curve = []
    order = np.arange(len(train_idx))
    for epoch in range(params.epochs):
        rng.shuffle(order)
        losses = []
        for start in range(0, len(order), params.batch_size):
            batch = order[start:start + params.batch_size]
            loss, grads = nnet.backward(net, feats[batch], labels[batch], nnet.BCE)
            if not np.isfinite(loss):
                raise nnet.NonFiniteLossError(
                    f"non-finite loss at epoch {epoch}, batch {start // params.batch_size}")
            nnet.optimizer_step(net, grads, opt)
            losses.append(loss)
        curve.append(float(np.mean(losses)))

    return SensingModel(kind="dense-classifier", num_subchannels=m_chan,
                        network=net, decision_threshold=params.decision_threshold,
                        input_mode=params.input_mode, training_curve=curve)


def evaluate_model(model: SensingModel, dataset: Dataset, split: str = "test",
                   positive_class: int = 0, sinr_db: float | None = None) -> SensingMetrics:
    """Micro metrics of a model on one split, optionally one SINR slice."""
    idx = [i for i in dataset.split[split]
           if sinr_db is None
           or np.float32(dataset.observations[i].sinr_db) == np.float32(sinr_db)]
    preds = [predict_occupancy(model, dataset.observations[i]) for i in idx]
    truths = [dataset.observations[i].label for i in idx]
    return micro_metrics(preds, truths, positive_class)


METRICS_COLUMNS = ("uav", "sinr_db", "precision", "recall", "f1", "detector", "fused")


def write_metrics_csv(path: str, rows) -> None:
    """rows: iterables matching METRICS_COLUMNS."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(METRICS_COLUMNS)
        for row in rows:
            writer.writerow(row)
