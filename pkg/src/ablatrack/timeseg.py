"""Time segmentation of a test video: find the [first, last] frames of
interest from the per-frame brightness trace.

The classifier is a small 1D encoder/decoder CNN (1->32->16 channels down,
16->8->3 back up, kernel 7) trained on synthetic square signals with an
ignition spike. Everything - forward, backward, the adaptive-moment
optimizer - is implemented here on numpy in double precision so gradients
can be checked against finite differences.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .colorseg import luminance
from .errors import (
    ConfigInvalid,
    DivergedLoss,
    EmptySource,
    IoFailure,
    NonFiniteInput,
    NoOnRegion,
    SchemaMismatch,
    WrongLength,
)

NET_INPUT_LEN = 256
MODEL_SCHEMA = "conv1dnet/1"


class TimeSegClass(enum.IntEnum):
    OFF = 0
    TRANSITION = 1
    ON = 2


class Mode(str, enum.Enum):
    TRAIN = "train"
    EVAL = "eval"


@dataclass
class BrightnessTrace:
    """Min-max normalized mean-luminance series; all zeros if constant."""

    values: np.ndarray
    frame_indices: np.ndarray

    def __len__(self):
        return len(self.values)


def compute_brightness_trace(source, stride: int = 10) -> BrightnessTrace:
    """Mean luminance of every `stride`-th frame, normalized to [0, 1]."""
    if stride < 1:
        raise ConfigInvalid(f"stride must be >= 1, got {stride}")
    if source.frame_count < 1:
        raise EmptySource("source has no frames")
    indices = np.arange(0, source.frame_count, stride)
    values = np.empty(len(indices))
    for i, idx in enumerate(indices):
        values[i] = luminance(source.get_frame(int(idx)).pixels).mean()
    lo, hi = values.min(), values.max()
    if hi > lo:
        values = (values - lo) / (hi - lo)
    else:
        values = np.zeros_like(values)
    return BrightnessTrace(values, indices)


# ---------------------------------------------------------------------------
# Synthetic training signals
# ---------------------------------------------------------------------------


@dataclass
class SyntheticSignalConfig:
    length: int = 256
    off_level: tuple[float, float] = (0.0, 0.15)
    on_level: tuple[float, float] = (0.3, 0.9)
    spike_amplitude: tuple[float, float] = (0.5, 1.0)
    spike_width: tuple[int, int] = (1, 5)
    t_on_frac: tuple[float, float] = (0.1, 0.4)
    on_min_frac: float = 0.2          # t_off >= t_on + on_min_frac * L
    t_off_max_frac: float = 0.9
    noise_sigma: tuple[float, float] = (0.005, 0.05)
    smoothing_windows: tuple[int, ...] = (3, 5, 7)
    transition_margin: int = 3
    seed: int = 0

    def validate(self):
        L = self.length
        if L < 16:
            raise ConfigInvalid("signal length must be >= 16")
        if not 0 < self.t_on_frac[0] <= self.t_on_frac[1] < 1:
            raise ConfigInvalid("t_on fractions outside (0, 1)")
        if self.t_on_frac[1] + self.on_min_frac >= self.t_off_max_frac:
            raise ConfigInvalid("t_off range is empty")
        if any(w % 2 == 0 or w < 1 for w in self.smoothing_windows):
            raise ConfigInvalid("smoothing windows must be odd and positive")
        for name in ("off_level", "on_level", "spike_amplitude"):
            lo, hi = getattr(self, name)
            if not 0.0 <= lo <= hi <= 1.0:
                raise ConfigInvalid(f"{name} range {lo}..{hi} outside [0, 1]")
        if self.transition_margin < 0:
            raise ConfigInvalid("transition_margin must be >= 0")
        return self


def generate_synthetic_signal(cfg: SyntheticSignalConfig, rng=None):
    """One labeled training signal.

    Returns (signal, labels): OFF plateau, an ignition spike at t_on, an ON
    plateau until t_off, OFF after; Gaussian noise, moving-average
    smoothing, clipped to [0, 1]. Labels put TRANSITION within the margin
    of either switch point and across the spike.
    """
    cfg.validate()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    L, m = cfg.length, cfg.transition_margin

    off = rng.uniform(*cfg.off_level)
    on = rng.uniform(*cfg.on_level)
    spike = rng.uniform(*cfg.spike_amplitude)
    width = int(rng.integers(cfg.spike_width[0], cfg.spike_width[1] + 1))
    t_on = int(rng.uniform(cfg.t_on_frac[0] * L, cfg.t_on_frac[1] * L))
    t_off = int(rng.uniform(t_on + cfg.on_min_frac * L, cfg.t_off_max_frac * L))
    sigma = rng.uniform(*cfg.noise_sigma)
    window = int(rng.choice(np.asarray(cfg.smoothing_windows)))

    signal = np.full(L, off)
    signal[t_on:t_off] = on
    signal[t_on : min(t_on + width, t_off)] = spike
    signal += rng.normal(0.0, sigma, L)
    padded = np.pad(signal, window // 2, mode="edge")
    signal = np.convolve(padded, np.full(window, 1.0 / window), mode="valid")
    signal = np.clip(signal, 0.0, 1.0)

    t = np.arange(L)
    labels = np.full(L, int(TimeSegClass.OFF), dtype=np.int64)
    labels[(t > t_on + m) & (t < t_off - m)] = int(TimeSegClass.ON)
    transition = (np.abs(t - t_on) <= m) | (np.abs(t - t_off) <= m) | ((t >= t_on) & (t < t_on + width))
    labels[transition] = int(TimeSegClass.TRANSITION)
    return signal, labels


def make_dataset(cfg: SyntheticSignalConfig, n: int, base_seed: int):
    """n labeled signals with counter-derived per-sample RNG streams."""
    X = np.empty((n, 1, cfg.length))
    Y = np.empty((n, cfg.length), dtype=np.int64)
    for i in range(n):
        rng = np.random.default_rng(np.random.SeedSequence((base_seed, i)))
        X[i, 0], Y[i] = generate_synthetic_signal(cfg, rng)
    return X, Y


# ---------------------------------------------------------------------------
# Layers
# ---------------------------------------------------------------------------


def conv_out_len(L: int, k: int, stride: int, pad: int) -> int:
    return (L + 2 * pad - k) // stride + 1


def tconv_out_len(L: int, k: int, stride: int, pad: int, out_pad: int) -> int:
    return (L - 1) * stride - 2 * pad + k + out_pad


def _gather(xp: np.ndarray, L_out: int, k: int, stride: int) -> np.ndarray:
    """(N, C, Lp) -> (N, C, L_out, k) sliding windows of a padded input."""
    N, C, _ = xp.shape
    cols = np.empty((N, C, L_out, k), dtype=xp.dtype)
    for j in range(k):
        cols[:, :, :, j] = xp[:, :, j : j + L_out * stride : stride]
    return cols


def _scatter(dcols: np.ndarray, Lp: int, stride: int) -> np.ndarray:
    """Adjoint of _gather: accumulate window gradients back to (N, C, Lp)."""
    N, C, L_out, k = dcols.shape
    dxp = np.zeros((N, C, Lp), dtype=dcols.dtype)
    for j in range(k):
        dxp[:, :, j : j + L_out * stride : stride] += dcols[:, :, :, j]
    return dxp


def _conv_core(x, W, b, stride, pad):
    N, C, L = x.shape
    O, _, k = W.shape
    L_out = conv_out_len(L, k, stride, pad)
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
    cols = _gather(xp, L_out, k, stride)
    flat = cols.transpose(0, 2, 1, 3).reshape(N * L_out, C * k)
    y = flat @ W.reshape(O, C * k).T + b
    return y.reshape(N, L_out, O).transpose(0, 2, 1), (flat, x.shape, L_out)


def _conv_core_backward(dy, W, cache, stride, pad):
    flat, x_shape, L_out = cache
    N, C, L = x_shape
    O, _, k = W.shape
    dyf = dy.transpose(0, 2, 1).reshape(N * L_out, O)
    dW = (dyf.T @ flat).reshape(O, C, k)
    db = dyf.sum(axis=0)
    dcols = (dyf @ W.reshape(O, C * k)).reshape(N, L_out, C, k).transpose(0, 2, 1, 3)
    dxp = _scatter(dcols, L + 2 * pad, stride)
    dx = dxp[:, :, pad : pad + L] if pad else dxp
    return dx, dW, db


class Conv1D:
    """1D convolution, weights (out_ch, in_ch, k), PyTorch-style shapes."""

    kind = "conv"

    def __init__(self, name, in_ch, out_ch, kernel, stride, padding, rng=None):
        self.name, self.in_ch, self.out_ch = name, in_ch, out_ch
        self.kernel, self.stride, self.padding = kernel, stride, padding
        self.output_padding = 0
        bound = 1.0 / math.sqrt(in_ch * kernel)
        rng = rng or np.random.default_rng(0)
        self.W = rng.uniform(-bound, bound, (out_ch, in_ch, kernel))
        self.b = rng.uniform(-bound, bound, out_ch)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)
        self._cache = None

    def forward(self, x):
        y, self._cache = _conv_core(x, self.W, self.b, self.stride, self.padding)
        return y

    def backward(self, dy):
        dx, self.dW, self.db = _conv_core_backward(dy, self.W, self._cache, self.stride, self.padding)
        return dx

    def params(self):
        return [("W", self), ("b", self)]


class ConvTranspose1D:
    """Transposed 1D convolution, weights (in_ch, out_ch, k).

    Forward is computed as a stride-1 convolution of the zero-stuffed input
    with the flipped, channel-transposed kernel; the backward pass is the
    matching strided convolution.
    """

    kind = "tconv"

    def __init__(self, name, in_ch, out_ch, kernel, stride, padding, output_padding, rng=None):
        self.name, self.in_ch, self.out_ch = name, in_ch, out_ch
        self.kernel, self.stride, self.padding = kernel, stride, padding
        self.output_padding = output_padding
        if kernel - 1 - padding < 0:
            raise ConfigInvalid("transposed conv needs kernel - 1 >= padding")
        if output_padding >= stride:
            raise ConfigInvalid("output_padding must be < stride")
        bound = 1.0 / math.sqrt(in_ch * kernel)
        rng = rng or np.random.default_rng(0)
        self.W = rng.uniform(-bound, bound, (in_ch, out_ch, kernel))
        self.b = rng.uniform(-bound, bound, out_ch)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)
        self._cache = None

    def forward(self, x):
        N, C, L = x.shape
        k, s, p, op = self.kernel, self.stride, self.padding, self.output_padding
        stuffed = np.zeros((N, C, (L - 1) * s + 1), dtype=x.dtype)
        stuffed[:, :, ::s] = x
        lpad, rpad = k - 1 - p, k - 1 - p + op
        xp = np.pad(stuffed, ((0, 0), (0, 0), (lpad, rpad)))
        W2 = self.W[:, :, ::-1].transpose(1, 0, 2)  # (out_ch, in_ch, k)
        y, _ = _conv_core(xp, W2, self.b, 1, 0)
        self._cache = (x, xp.shape)
        return y

    def backward(self, dy):
        x, _ = self._cache
        N, C, L = x.shape
        k, s, p = self.kernel, self.stride, self.padding
        self.db = dy.sum(axis=(0, 2))
        dyp = np.pad(dy, ((0, 0), (0, 0), (p, p)))
        cols = _gather(dyp, L, k, s)  # (N, out_ch, L, k)
        # dx[n,c,i] = sum_{o,j} W[c,o,j] dy_pad[n,o,i*s+j]
        dx = np.einsum("coj,noij->nci", self.W, cols, optimize=True)
        # dW[c,o,j] = sum_{n,i} x[n,c,i] dy_pad[n,o,i*s+j]
        self.dW = np.einsum("nci,noij->coj", x, cols, optimize=True)
        return dx

    def params(self):
        return [("W", self), ("b", self)]


class ReLU:
    def __init__(self):
        self._mask = None

    def forward(self, x):
        self._mask = x > 0
        return x * self._mask

    def backward(self, dy):
        return dy * self._mask


class Dropout:
    """Inverted dropout; active only when a TRAIN-mode rng is supplied."""

    def __init__(self, p):
        self.p = p
        self._mask = None

    def forward(self, x, rng=None):
        if rng is None or self.p == 0.0:
            self._mask = None
            return x
        self._mask = (rng.random(x.shape) >= self.p) / (1.0 - self.p)
        return x * self._mask

    def backward(self, dy):
        return dy if self._mask is None else dy * self._mask


def softmax_channels(logits: np.ndarray) -> np.ndarray:
    """Softmax over axis 1 of (N, C, L) logits."""
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(probs: np.ndarray, targets: np.ndarray) -> float:
    """Mean per-timestep cross-entropy; targets are (N, L) class indices."""
    N, _, L = probs.shape
    p = probs[np.arange(N)[:, None], targets, np.arange(L)[None, :]]
    return float(-np.log(np.maximum(p, 1e-300)).mean())


def softmax_ce_backward(probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Gradient of mean cross-entropy w.r.t. the logits."""
    N, _, L = probs.shape
    d = probs.copy()
    onehot_idx = (np.arange(N)[:, None], targets, np.arange(L)[None, :])
    d[onehot_idx] -= 1.0
    return d / (N * L)


# ---------------------------------------------------------------------------
# Network
# ---------------------------------------------------------------------------


class Conv1DNet:
    """Encoder/decoder over brightness traces: channels 1->32->16->16->8->3."""

    def __init__(self, seed: int | None = 0):
        rng = np.random.default_rng(seed)
        self.conv1 = Conv1D("conv1", 1, 32, 7, 2, 3, rng)
        self.conv2 = Conv1D("conv2", 32, 16, 7, 2, 3, rng)
        self.tconv1 = ConvTranspose1D("tconv1", 16, 16, 7, 2, 3, 1, rng)
        self.tconv2 = ConvTranspose1D("tconv2", 16, 8, 7, 2, 3, 1, rng)
        self.tconv3 = ConvTranspose1D("tconv3", 8, 3, 7, 1, 3, 0, rng)
        self.dropout_p = 0.25
        self._drop1 = Dropout(self.dropout_p)
        self._drop2 = Dropout(self.dropout_p)
        self._relu = [ReLU() for _ in range(4)]

    @property
    def conv_layers(self):
        return [self.conv1, self.conv2, self.tconv1, self.tconv2, self.tconv3]

    def forward_logits(self, x: np.ndarray, train: bool = False, rng=None) -> np.ndarray:
        drop_rng = rng if train else None
        h = self._relu[0].forward(self.conv1.forward(x))
        h = self._drop1.forward(h, drop_rng)
        h = self._relu[1].forward(self.conv2.forward(h))
        h = self._drop2.forward(h, drop_rng)
        h = self._relu[2].forward(self.tconv1.forward(h))
        h = self._relu[3].forward(self.tconv2.forward(h))
        return self.tconv3.forward(h)

    def forward(self, x: np.ndarray, train: bool = False, rng=None) -> np.ndarray:
        return softmax_channels(self.forward_logits(x, train, rng))

    def backward(self, dlogits: np.ndarray) -> np.ndarray:
        d = self.tconv3.backward(dlogits)
        d = self.tconv2.backward(self._relu[3].backward(d))
        d = self.tconv1.backward(self._relu[2].backward(d))
        d = self.conv2.backward(self._drop2.backward(self._relu[1].backward(d)))
        d = self.conv1.backward(self._drop1.backward(self._relu[0].backward(d)))
        return d

    def parameters(self):
        """Flat list of (layer, attr) pairs for the optimizer."""
        return [(layer, attr) for layer in self.conv_layers for attr in ("W", "b")]

    def weights_equal(self, other: "Conv1DNet") -> bool:
        return all(
            np.array_equal(getattr(a, attr), getattr(b, attr))
            for a, b in zip(self.conv_layers, other.conv_layers)
            for attr in ("W", "b")
        )


def net_forward(net: Conv1DNet, signal: np.ndarray, mode: Mode = Mode.EVAL, rng=None) -> np.ndarray:
    """Class probabilities (3, 256) for one length-256 signal."""
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim != 1 or len(signal) != NET_INPUT_LEN:
        raise WrongLength(f"expected a length-{NET_INPUT_LEN} signal, got shape {signal.shape}")
    if not np.all(np.isfinite(signal)):
        raise NonFiniteInput("signal contains non-finite values")
    if mode == Mode.TRAIN and rng is None:
        rng = np.random.default_rng(0)
    probs = net.forward(signal[None, None, :], train=(mode == Mode.TRAIN), rng=rng)
    return probs[0]


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


@dataclass
class TrainConfig:
    epochs: int = 40
    dataset_size: int = 1000
    batch_size: int = 16
    learning_rate: float = 1e-3
    validation_fraction: float = 0.2
    seed: int = 42

    def validate(self):
        if self.epochs < 1:
            raise ConfigInvalid("epochs must be >= 1")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigInvalid("validation_fraction must be in (0, 1)")
        if self.dataset_size < 2 or self.batch_size < 1:
            raise ConfigInvalid("dataset_size must be >= 2 and batch_size >= 1")
        if self.learning_rate <= 0:
            raise ConfigInvalid("learning_rate must be > 0")
        return self


@dataclass
class TrainReport:
    loss_curve: list[float] = field(default_factory=list)
    val_accuracy_curve: list[float] = field(default_factory=list)
    final_net: Conv1DNet | None = None

    @property
    def final_val_accuracy(self) -> float:
        return self.val_accuracy_curve[-1] if self.val_accuracy_curve else float("nan")


class Adam:
    """Adaptive moment estimation with the usual defaults."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = [np.zeros_like(getattr(layer, attr)) for layer, attr in params]
        self.v = [np.zeros_like(getattr(layer, attr)) for layer, attr in params]

    def step(self):
        self.t += 1
        for i, (layer, attr) in enumerate(self.params):
            g = getattr(layer, "d" + attr)
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            mhat = self.m[i] / (1 - self.beta1**self.t)
            vhat = self.v[i] / (1 - self.beta2**self.t)
            getattr(layer, attr)[...] -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def _accuracy(net: Conv1DNet, X: np.ndarray, Y: np.ndarray, chunk: int = 128) -> float:
    hits = total = 0
    for i in range(0, len(X), chunk):
        probs = net.forward(X[i : i + chunk])
        hits += int((probs.argmax(axis=1) == Y[i : i + chunk]).sum())
        total += Y[i : i + chunk].size
    return hits / total


def train(net: Conv1DNet, train_cfg: TrainConfig, signal_cfg: SyntheticSignalConfig | None = None) -> TrainReport:
    """Minimize mean per-timestep cross-entropy on synthetic signals.

    Deterministic for a fixed seed: dataset, split, shuffles and dropout all
    derive from train_cfg.seed.
    """
    train_cfg.validate()
    signal_cfg = (signal_cfg or SyntheticSignalConfig()).validate()
    X, Y = make_dataset(signal_cfg, train_cfg.dataset_size, train_cfg.seed)

    rng = np.random.default_rng(train_cfg.seed)
    perm = rng.permutation(len(X))
    n_val = max(1, int(round(train_cfg.validation_fraction * len(X))))
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    if len(train_idx) == 0:
        raise ConfigInvalid("validation split leaves no training data")

    opt = Adam(net.parameters(), train_cfg.learning_rate)
    report = TrainReport(final_net=net)
    for _ in range(train_cfg.epochs):
        order = train_idx[rng.permutation(len(train_idx))]
        losses = []
        for start in range(0, len(order), train_cfg.batch_size):
            batch = order[start : start + train_cfg.batch_size]
            probs = net.forward(X[batch], train=True, rng=rng)
            loss = cross_entropy(probs, Y[batch])
            if not math.isfinite(loss):
                raise DivergedLoss(f"loss became {loss}", report)
            losses.append(loss)
            net.backward(softmax_ce_backward(probs, Y[batch]))
            opt.step()
        report.loss_curve.append(float(np.mean(losses)))
        report.val_accuracy_curve.append(_accuracy(net, X[val_idx], Y[val_idx]))
    return report


# ---------------------------------------------------------------------------
# Inference
# ---------------------------------------------------------------------------


def infer_interest_window(net: Conv1DNet, trace: BrightnessTrace):
    """(first_frame, last_frame, labels per sampled frame).

    The trace is linearly resampled to the network length, labeled by
    per-step argmax, and the longest contiguous ON run mapped back to frame
    indices by nearest neighbor.
    """
    T = len(trace)
    if T < 8:
        raise WrongLength(f"trace length {T} < 8")
    resampled = np.interp(np.linspace(0.0, T - 1.0, NET_INPUT_LEN), np.arange(T), trace.values)
    probs = net_forward(net, resampled, Mode.EVAL)
    labels256 = probs.argmax(axis=0)

    on = labels256 == int(TimeSegClass.ON)
    if not on.any():
        raise NoOnRegion("no ON labels in the trace")
    # longest contiguous run of ON
    padded = np.diff(np.concatenate(([0], on.astype(np.int8), [0])))
    starts, ends = np.flatnonzero(padded == 1), np.flatnonzero(padded == -1) - 1
    best = int(np.argmax(ends - starts))
    a, b = starts[best], ends[best]

    to_src = lambda pos: int(round(pos * (T - 1) / (NET_INPUT_LEN - 1)))
    first_frame = int(trace.frame_indices[to_src(a)])
    last_frame = int(trace.frame_indices[to_src(b)])
    sample_pos = np.rint(np.arange(T) * (NET_INPUT_LEN - 1) / (T - 1)).astype(int)
    labels = labels256[sample_pos]
    return first_frame, last_frame, labels


# ---------------------------------------------------------------------------
# Model persistence
# ---------------------------------------------------------------------------


def save_model(net: Conv1DNet, path) -> None:
    layers = []
    for layer in net.conv_layers:
        layers.append(
            {
                "name": layer.name,
                "kind": layer.kind,
                "in": layer.in_ch,
                "out": layer.out_ch,
                "kernel": layer.kernel,
                "stride": layer.stride,
                "padding": layer.padding,
                "output_padding": layer.output_padding,
                "weights": layer.W.ravel().tolist(),
                "bias": layer.b.tolist(),
            }
        )
    try:
        Path(path).write_text(json.dumps({"schema": MODEL_SCHEMA, "layers": layers}))
    except OSError as exc:
        raise IoFailure(f"cannot write model to {path}: {exc}") from None


def load_model(path) -> Conv1DNet:
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise IoFailure(f"no model file at {path}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaMismatch(f"unreadable model file {path}: {exc}") from None
    if not isinstance(obj, dict) or obj.get("schema") != MODEL_SCHEMA:
        raise SchemaMismatch(f"{path}: expected schema {MODEL_SCHEMA!r}")
    net = Conv1DNet(seed=None)
    stored = obj.get("layers", [])
    if len(stored) != len(net.conv_layers):
        raise SchemaMismatch(f"{path}: expected {len(net.conv_layers)} layers, found {len(stored)}")
    for layer, entry in zip(net.conv_layers, stored):
        for key, want in (
            ("kind", layer.kind),
            ("in", layer.in_ch),
            ("out", layer.out_ch),
            ("kernel", layer.kernel),
            ("stride", layer.stride),
            ("padding", layer.padding),
            ("output_padding", layer.output_padding),
        ):
            if entry.get(key) != want:
                raise SchemaMismatch(f"{path}: layer {entry.get('name')}: {key} {entry.get(key)!r} != {want!r}")
        weights = np.asarray(entry.get("weights", []), dtype=np.float64)
        bias = np.asarray(entry.get("bias", []), dtype=np.float64)
        if weights.size != layer.W.size or bias.size != layer.b.size:
            raise SchemaMismatch(f"{path}: layer {entry.get('name')}: wrong tensor sizes")
        layer.W = weights.reshape(layer.W.shape)
        layer.b = bias
    return net
