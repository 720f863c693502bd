"""Dense feedforward network kernel with manual backpropagation.

Shared by the sensing classifier and the Q-network family. Arithmetic is
64-bit throughout; checkpoints are stored as 32-bit floats. Inputs may be
single vectors or (batch, dim) matrices; batch losses and gradients are
means over the batch.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("identity", "relu", "sigmoid")
_ACT_CODE = {name: i for i, name in enumerate(ACTIVATIONS)}


class NonFiniteLossError(RuntimeError):
    """Raised when training numerics break down."""


@dataclass
class Layer:
    w: np.ndarray  # (in_dim, out_dim)
    b: np.ndarray  # (out_dim,)
    activation: str

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.w.ndim != 2 or self.b.shape != (self.w.shape[1],):
            raise ValueError("inconsistent layer shapes")


@dataclass
class Network:
    layers: list[Layer]

    def __post_init__(self):
        for prev, cur in zip(self.layers, self.layers[1:]):
            if prev.w.shape[1] != cur.w.shape[0]:
                raise ValueError("chained layer dimensions do not match")
        if not all(np.isfinite(l.w).all() and np.isfinite(l.b).all() for l in self.layers):
            raise ValueError("weights must be finite")

    @property
    def input_dim(self) -> int:
        return self.layers[0].w.shape[0]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].w.shape[1]


@dataclass(frozen=True)
class LossSpec:
    """kind in {"mse", "bce", "huber"}; delta only meaningful for huber."""

    kind: str
    delta: float = 1.0

    def __post_init__(self):
        if self.kind not in ("mse", "bce", "huber"):
            raise ValueError(f"unknown loss {self.kind!r}")
        if self.kind == "huber" and self.delta <= 0:
            raise ValueError("huber delta must be positive")


MSE = LossSpec("mse")
BCE = LossSpec("bce")


def build_network(dims: list[int], activations: list[str], seed: int) -> Network:
    """Seeded initialization: He-scaled normals for ReLU layers, Xavier-style
    for sigmoid/identity; zero biases."""
    if len(activations) != len(dims) - 1:
        raise ValueError("need one activation per layer")
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x2E7)))
    layers = []
    for fan_in, fan_out, act in zip(dims, dims[1:], activations):
        scale = np.sqrt(2.0 / fan_in) if act == "relu" else np.sqrt(1.0 / fan_in)
        w = rng.normal(0.0, scale, size=(fan_in, fan_out))
        layers.append(Layer(w=w, b=np.zeros(fan_out), activation=act))
    return Network(layers)


def _apply_activation(z: np.ndarray, act: str) -> np.ndarray:
    if act == "relu":
        return np.maximum(z, 0.0)
    if act == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    return z


def _activation_grad(z: np.ndarray, a: np.ndarray, act: str) -> np.ndarray:
    if act == "relu":
        return (z > 0.0).astype(float)
    if act == "sigmoid":
        return a * (1.0 - a)
    return np.ones_like(z)


def _forward_trace(net: Network, x: np.ndarray):
    """All pre-activations and activations, batch-first."""
    a = np.atleast_2d(np.asarray(x, dtype=float))
    if a.shape[1] != net.input_dim:
        raise ValueError(f"input dim {a.shape[1]} != network input {net.input_dim}")
    pre, post = [], [a]
    for layer in net.layers:
        z = post[-1] @ layer.w + layer.b
        pre.append(z)
        post.append(_apply_activation(z, layer.activation))
    return pre, post


def forward(net: Network, x: np.ndarray) -> np.ndarray:
    """Network output; a 1-D input yields a 1-D output."""
    single = np.asarray(x).ndim == 1
    _, post = _forward_trace(net, x)
    out = post[-1]
    return out[0] if single else out


def loss_value(net: Network, x: np.ndarray, target: np.ndarray, loss: LossSpec) -> float:
    y = np.atleast_2d(forward(net, x))
    t = np.atleast_2d(np.asarray(target, dtype=float))
    e = y - t
    if loss.kind == "mse":
        return float(np.mean(e ** 2))
    if loss.kind == "huber":
        abs_e = np.abs(e)
        quad = 0.5 * e ** 2
        lin = loss.delta * (abs_e - 0.5 * loss.delta)
        return float(np.mean(np.where(abs_e <= loss.delta, quad, lin)))
    y_c = np.clip(y, 1e-12, 1.0 - 1e-12)
    return float(np.mean(-t * np.log(y_c) - (1.0 - t) * np.log1p(-y_c)))


def backward(net: Network, x: np.ndarray, target: np.ndarray, loss: LossSpec):
    """Scalar loss plus exact gradients (dW, db) for every layer.

    Gradients are means over the batch, matching loss_value.
    """
    pre, post = _forward_trace(net, x)
    t = np.atleast_2d(np.asarray(target, dtype=float))
    y = post[-1]
    if y.shape != t.shape:
        raise ValueError(f"target shape {t.shape} != output shape {y.shape}")
    n_total = y.size

    last = net.layers[-1]
    if loss.kind == "bce":
        if last.activation != "sigmoid":
            raise ValueError("bce expects a sigmoid output layer")
        delta = (y - t) / n_total  # sigmoid+bce cancellation, exact
        total = loss_value(net, x, target, loss)
    else:
        if loss.kind == "mse":
            dl_dy = 2.0 * (y - t) / n_total
            total = float(np.mean((y - t) ** 2))
        else:
            e = y - t
            dl_dy = np.clip(e, -loss.delta, loss.delta) / n_total
            abs_e = np.abs(e)
            total = float(np.mean(np.where(
                abs_e <= loss.delta, 0.5 * e ** 2, loss.delta * (abs_e - 0.5 * loss.delta))))
        delta = dl_dy * _activation_grad(pre[-1], y, last.activation)

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        if not np.isfinite(delta).all():
            raise NonFiniteLossError(f"non-finite gradient signal at layer {i}")
        grads[i] = (post[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ net.layers[i].w.T) * _activation_grad(
                pre[i - 1], post[i], net.layers[i - 1].activation)
    return total, grads


@dataclass
class OptimizerState:
    """kind in {"sgd-momentum", "adam"}; accumulators mirror parameter shapes."""

    kind: str
    learning_rate: float
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    slots: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ("sgd-momentum", "adam"):
            raise ValueError(f"unknown optimizer {self.kind!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")


def _ensure_slots(state: OptimizerState, net: Network):
    if state.slots:
        return
    per = 2 if state.kind == "adam" else 1
    for layer in net.layers:
        state.slots.append(tuple(
            (np.zeros_like(layer.w), np.zeros_like(layer.b)) for _ in range(per)))


def optimizer_step(net: Network, grads, state: OptimizerState):
    """In-place parameter update; returns (net, state) for chaining."""
    _ensure_slots(state, net)
    state.step_count += 1
    lr = state.learning_rate
    for layer, (gw, gb), slot in zip(net.layers, grads, state.slots):
        if state.kind == "sgd-momentum":
            (vw, vb), = slot
            vw *= state.momentum
            vw += gw
            vb *= state.momentum
            vb += gb
            layer.w -= lr * vw
            layer.b -= lr * vb
        else:
            (mw, mb), (vw, vb) = slot
            t = state.step_count
            for p, g, m, v in ((layer.w, gw, mw, vw), (layer.b, gb, mb, vb)):
                m *= state.beta1
                m += (1.0 - state.beta1) * g
                v *= state.beta2
                v += (1.0 - state.beta2) * g ** 2
                m_hat = m / (1.0 - state.beta1 ** t)
                v_hat = v / (1.0 - state.beta2 ** t)
                p -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return net, state


def gradient_check(net: Network, x: np.ndarray, target: np.ndarray,
                   loss: LossSpec, eps: float = 1e-3) -> float:
    """Worst relative discrepancy between backward() and central differences.

    Gradient pairs that are both below 1e-7 in magnitude count as matching
    (dead ReLU paths are exactly zero on both sides).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    _, grads = backward(net, x, target, loss)
    worst = 0.0
    for layer, (gw, gb) in zip(net.layers, grads):
        for param, grad in ((layer.w, gw), (layer.b, gb)):
            flat = param.reshape(-1)
            gflat = grad.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + eps
                up = loss_value(net, x, target, loss)
                flat[i] = orig - eps
                down = loss_value(net, x, target, loss)
                flat[i] = orig
                fd = (up - down) / (2.0 * eps)
                denom = max(abs(gflat[i]), abs(fd))
                if denom < 1e-7:
                    continue
                worst = max(worst, abs(gflat[i] - fd) / denom)
    return worst


def clone_weights(src: Network) -> Network:
    """Deep, independent copy."""
    return Network([Layer(l.w.copy(), l.b.copy(), l.activation) for l in src.layers])


CHECKPOINT_MAGIC = b"UNNC"
CHECKPOINT_VERSION = 1


def network_to_bytes(net: Network) -> bytes:
    """Versioned binary block: dims header then row-major f32 weights."""
    parts = [CHECKPOINT_MAGIC, struct.pack("<II", CHECKPOINT_VERSION, len(net.layers))]
    for layer in net.layers:
        parts.append(struct.pack("<III", layer.w.shape[0], layer.w.shape[1],
                                 _ACT_CODE[layer.activation]))
    for layer in net.layers:
        parts.append(layer.w.astype("<f4").tobytes(order="C"))
        parts.append(layer.b.astype("<f4").tobytes(order="C"))
    return b"".join(parts)


def network_from_bytes(data: bytes, offset: int = 0) -> tuple[Network, int]:
    """Parse a network block; returns (network, bytes consumed)."""
    if data[offset:offset + 4] != CHECKPOINT_MAGIC:
        raise ValueError("not a network checkpoint block")
    version, n_layers = struct.unpack_from("<II", data, offset + 4)
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    pos = offset + 12
    shapes = []
    for _ in range(n_layers):
        shapes.append(struct.unpack_from("<III", data, pos))
        pos += 12
    layers = []
    for fan_in, fan_out, code in shapes:
        w = np.frombuffer(data, dtype="<f4", count=fan_in * fan_out, offset=pos)
        pos += 4 * fan_in * fan_out
        b = np.frombuffer(data, dtype="<f4", count=fan_out, offset=pos)
        pos += 4 * fan_out
        layers.append(Layer(
            w=w.astype(float).reshape(fan_in, fan_out),
            b=b.astype(float),
            activation=ACTIVATIONS[code],
        ))
    return Network(layers), pos - offset


def save_checkpoint(net: Network, path: str) -> None:
    with open(path, "wb") as f:
        f.write(network_to_bytes(net))


def load_checkpoint(path: str) -> Network:
    with open(path, "rb") as f:
        net, _ = network_from_bytes(f.read())
    return net
