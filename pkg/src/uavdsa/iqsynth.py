"""Labeled synthetic I/Q observation generator.

Busy sub-channels carry unit-power QPSK symbols on a contiguous block of
DFT bins; the composite waveform is inverse-transformed (orthonormal FFT,
so time- and frequency-domain energies match) and complex Gaussian noise
is added at a floor chosen so that per-subcarrier signal power over
per-subcarrier noise power equals the target SINR. Because the floor is
defined per subcarrier, the realized SINR does not depend on how many
sub-channels happen to be busy.

Dataset file format (little-endian, documented for bit-exact replay):

    header:  magic b"IQDS" | version u32 | M u32 | N u32 | K u32
             | grid_len u32 | grid f32 * grid_len | seed u64
    records: label mask u32 (bit m-1 = sub-channel m busy) | sinr_db f32
             | N interleaved (real, imag) f32 pairs

Records appear in generation order, grouped by SINR grid value; splits are
positional per SINR stratum (first 70% train, next 15% validation, rest
test) and are therefore recomputable on load.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .core import occupancy_vector
from .seeds import derive_rng

_OBS_KEY = 0x0B5
TRAIN_FRACTION = 0.70
VAL_FRACTION = 0.15


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    num_subchannels: int = 16
    samples_per_observation: int = 1024
    subcarriers_per_subchannel: int = 64
    sinr_grid_db: tuple[float, ...] = (-10.0, 0.0, 10.0, 20.0)
    interference_gains_db: tuple[float, ...] = ()

    def __post_init__(self):
        n = self.samples_per_observation
        if n <= 0 or n & (n - 1):
            raise ValueError("samples_per_observation must be a positive power of two")
        if self.subcarriers_per_subchannel < 1:
            raise ValueError("subcarriers_per_subchannel must be >= 1")
        if self.num_subchannels * self.subcarriers_per_subchannel > n:
            raise ValueError("sub-channel blocks exceed the transform length")


@dataclass
class IQObservation:
    samples: np.ndarray  # complex, length N
    label: tuple[int, ...]
    sinr_db: float
    uav_index: int = 0


@dataclass
class Dataset:
    observations: list[IQObservation]
    split: dict[str, tuple[int, ...]]
    config: SynthConfig


def band_edges(fft_size: int, num_subchannels: int) -> list[tuple[int, int]]:
    """Equal partition of the DFT bins into M contiguous bands."""
    return [
        (m * fft_size // num_subchannels, (m + 1) * fft_size // num_subchannels)
        for m in range(num_subchannels)
    ]


def active_bins(fft_size: int, num_subchannels: int, subcarriers: int) -> list[np.ndarray]:
    """Per-sub-channel occupied bins: `subcarriers` consecutive bins centered
    inside that sub-channel's band, leaving the remainder as guards."""
    bins = []
    for start, stop in band_edges(fft_size, num_subchannels):
        width = stop - start
        if subcarriers > width:
            raise ValueError("subcarrier block wider than its band")
        lead = (width - subcarriers) // 2
        bins.append(np.arange(start + lead, start + lead + subcarriers))
    return bins


def clean_spectrum(label, config: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """Frequency-domain construction: unit-power QPSK on the active bins of
    busy sub-channels, exact zeros everywhere else."""
    label = occupancy_vector(label, config.num_subchannels)
    spectrum = np.zeros(config.samples_per_observation, dtype=complex)
    bins = active_bins(config.samples_per_observation, config.num_subchannels,
                       config.subcarriers_per_subchannel)
    for m, busy in enumerate(label):
        if busy:
            quadrant = rng.integers(0, 4, size=config.subcarriers_per_subchannel)
            spectrum[bins[m]] = np.exp(1j * (np.pi / 4 + quadrant * np.pi / 2))
    return spectrum


def clean_waveform(label, config: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """Noise-free time-domain waveform for one occupancy label."""
    return np.fft.ifft(clean_spectrum(label, config, rng), norm="ortho")


def noise_power(sinr_db: float) -> float:
    """Per-sample complex noise variance for a target SINR (unit-power
    subcarriers)."""
    return 10.0 ** (-sinr_db / 10.0)


def synthesize_observation(label, sinr_db: float, config: SynthConfig,
                           rng: np.random.Generator, uav_index: int = 0) -> IQObservation:
    """One labeled capture: clean waveform plus complex Gaussian noise.

    An all-vacant label yields a noise-only capture at the same reference
    noise floor.
    """
    signal = clean_waveform(label, config, rng)
    sigma2 = noise_power(sinr_db)
    n = config.samples_per_observation
    noise = rng.normal(0.0, np.sqrt(sigma2 / 2.0), size=(n, 2))
    samples = signal + noise[:, 0] + 1j * noise[:, 1]
    return IQObservation(samples=samples, label=occupancy_vector(label),
                         sinr_db=float(sinr_db), uav_index=uav_index)


def add_interference(observation: IQObservation, neighbor_labels, gains_db,
                     config: SynthConfig, rng: np.random.Generator) -> IQObservation:
    """Add neighbor-cell waveforms scaled by 10^(gain/20) in amplitude.

    The label is unchanged (ground truth refers to the serving cell). A
    gain of -inf skips that neighbor.
    """
    if len(neighbor_labels) != len(gains_db):
        raise ValueError("one gain per neighbor label required")
    samples = observation.samples.copy()
    for label, gain in zip(neighbor_labels, gains_db):
        if gain == float("-inf"):
            continue
        samples += 10.0 ** (gain / 20.0) * clean_waveform(label, config, rng)
    return IQObservation(samples=samples, label=observation.label,
                         sinr_db=observation.sinr_db, uav_index=observation.uav_index)


def split_indices(strata_sizes: list[int]) -> dict[str, tuple[int, ...]]:
    """Positional 70/15/15 split within each stratum (disjoint, exhaustive)."""
    train, val, test = [], [], []
    base = 0
    for size in strata_sizes:
        n_train = int(TRAIN_FRACTION * size)
        n_val = int(VAL_FRACTION * size)
        idx = list(range(base, base + size))
        train += idx[:n_train]
        val += idx[n_train:n_train + n_val]
        test += idx[n_train + n_val:]
        base += size
    return {"train": tuple(train), "val": tuple(val), "test": tuple(test)}


def generate_dataset(config: SynthConfig, occupancy_source, count_per_sinr: int) -> Dataset:
    """Synthesize count_per_sinr labeled observations per grid SINR.

    occupancy_source is a callable(rng) -> label. Each observation draws
    from a substream keyed by (seed, observation index), so the dataset is
    reproducible independent of generation order. Neighbor-cell
    interference is applied when the config lists gains.
    """
    if count_per_sinr < 1:
        raise ValueError("count_per_sinr must be >= 1")
    observations = []
    idx = 0
    for sinr_db in config.sinr_grid_db:
        for _ in range(count_per_sinr):
            rng = derive_rng(config.seed, _OBS_KEY, idx)
            label = occupancy_source(rng)
            obs = synthesize_observation(label, sinr_db, config, rng)
            if config.interference_gains_db:
                neighbors = [occupancy_source(rng) for _ in config.interference_gains_db]
                obs = add_interference(obs, neighbors, config.interference_gains_db,
                                       config, rng)
            observations.append(obs)
            idx += 1
    split = split_indices([count_per_sinr] * len(config.sinr_grid_db))
    return Dataset(observations=observations, split=split, config=config)


DATASET_MAGIC = b"IQDS"
DATASET_VERSION = 1


def label_mask(label) -> int:
    return sum(bit << i for i, bit in enumerate(label))


def mask_label(mask: int, num_subchannels: int) -> tuple[int, ...]:
    return tuple((mask >> i) & 1 for i in range(num_subchannels))


def save_dataset(dataset: Dataset, path: str, num_uavs: int = 1) -> None:
    cfg = dataset.config
    with open(path, "wb") as f:
        f.write(DATASET_MAGIC)
        f.write(struct.pack("<IIIII", DATASET_VERSION, cfg.num_subchannels,
                            cfg.samples_per_observation, num_uavs,
                            len(cfg.sinr_grid_db)))
        f.write(np.asarray(cfg.sinr_grid_db, dtype="<f4").tobytes())
        f.write(struct.pack("<Q", cfg.seed))
        for obs in dataset.observations:
            f.write(struct.pack("<If", label_mask(obs.label), obs.sinr_db))
            iq = np.empty(2 * len(obs.samples), dtype="<f4")
            iq[0::2] = obs.samples.real
            iq[1::2] = obs.samples.imag
            f.write(iq.tobytes())


def load_dataset(path: str) -> Dataset:
    """Read a dataset file back; splits are recomputed from record order.

    The subcarrier block width is not stored and reloads at its default
    (fft size // M); it only matters for further synthesis, not for the
    stored samples.
    """
    with open(path, "rb") as f:
        if f.read(4) != DATASET_MAGIC:
            raise ValueError(f"{path}: not a dataset file")
        version, m, n, _k, grid_len = struct.unpack("<IIIII", f.read(20))
        if version != DATASET_VERSION:
            raise ValueError(f"{path}: unsupported dataset version {version}")
        grid = tuple(float(v) for v in np.frombuffer(f.read(4 * grid_len), dtype="<f4"))
        (seed,) = struct.unpack("<Q", f.read(8))
        config = SynthConfig(seed=seed, num_subchannels=m, samples_per_observation=n,
                             subcarriers_per_subchannel=n // m, sinr_grid_db=grid)
        record = struct.Struct("<If")
        observations = []
        while True:
            head = f.read(record.size)
            if not head:
                break
            mask, sinr_db = record.unpack(head)
            iq = np.frombuffer(f.read(8 * n), dtype="<f4").astype(float)
            observations.append(IQObservation(
                samples=iq[0::2] + 1j * iq[1::2],
                label=mask_label(mask, m),
                sinr_db=sinr_db,
            ))
    sizes, pos = [], 0
    for g in grid:
        start = pos
        while pos < len(observations) and observations[pos].sinr_db == g:
            pos += 1
        sizes.append(pos - start)
    split = split_indices(sizes)
    return Dataset(observations=observations, split=split, config=config)
