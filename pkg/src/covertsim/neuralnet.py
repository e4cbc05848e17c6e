"""Minimal dense network stack with hand-written reverse-mode gradients.

Everything is float64 and batched over the leading axis. The backward
pass is exact for the dropout masks sampled in the matching forward call,
which is what the finite-difference gate checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .numerics import DomainError, RngStream

_EPS_CLAMP = 1e-7


class ShapeError(ValueError):
    """Raised on mismatched tensor shapes."""


class StateError(RuntimeError):
    """Raised when a backward pass has no matching forward cache."""


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: str = "linear"
    dropout: float = 0.0

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise DomainError(f"layer dims must be positive, got {self.in_dim}x{self.out_dim}")
        if self.activation not in _ACTIVATIONS:
            raise DomainError(f"unknown activation {self.activation!r}")
        if not (0.0 <= self.dropout < 1.0):
            raise DomainError(f"dropout must be in [0,1), got {self.dropout}")


def _relu(a):
    return np.maximum(a, 0.0)


def _relu_grad(a, out):
    return (a > 0).astype(float)


def _leaky(a, slope=0.01):
    return np.where(a > 0, a, slope * a)


def _leaky_grad(a, out, slope=0.01):
    return np.where(a > 0, 1.0, slope)


def _sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def _sigmoid_grad(a, out):
    return out * (1.0 - out)


def _tanh(a):
    return np.tanh(a)


def _tanh_grad(a, out):
    return 1.0 - out ** 2


def _linear(a):
    return a


def _linear_grad(a, out):
    return np.ones_like(a)


_ACTIVATIONS = {
    "relu": (_relu, _relu_grad),
    "leaky-relu": (_leaky, _leaky_grad),
    "sigmoid": (_sigmoid, _sigmoid_grad),
    "tanh": (_tanh, _tanh_grad),
    "linear": (_linear, _linear_grad),
}


class DenseNet:
    """A stack of fully connected layers with per-layer activation/dropout."""

    def __init__(self, specs: list[LayerSpec], rng: RngStream | np.random.Generator):
        for a, b in zip(specs, specs[1:]):
            if a.out_dim != b.in_dim:
                raise DomainError(f"layer dims do not chain: {a.out_dim} -> {b.in_dim}")
        self.specs = list(specs)
        gen = rng.generator() if isinstance(rng, RngStream) else rng
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for spec in specs:
            bound = np.sqrt(6.0 / (spec.in_dim + spec.out_dim))
            self.weights.append(gen.uniform(-bound, bound, size=(spec.out_dim, spec.in_dim)))
            self.biases.append(np.zeros(spec.out_dim))

    @property
    def in_dim(self) -> int:
        return self.specs[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.specs[-1].out_dim

    def forward(self, x: np.ndarray, train: bool = False,
                rng: np.random.Generator | None = None):
        """Run the net; returns (output, cache). cache is None in eval mode.

        train mode samples fresh dropout masks from rng and records the
        per-layer tensors needed by :meth:`backward`.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.in_dim:
            raise ShapeError(f"input dim {x.shape[1]} != expected {self.in_dim}")
        if train and rng is None and any(s.dropout > 0 for s in self.specs):
            raise StateError("train-mode forward with dropout needs an rng")
        cache = [] if train else None
        h = x
        for spec, w, b in zip(self.specs, self.weights, self.biases):
            pre = h @ w.T + b
            act, _ = _ACTIVATIONS[spec.activation]
            out = act(pre)
            mask = None
            if train and spec.dropout > 0:
                mask = (rng.random(out.shape) >= spec.dropout) / (1.0 - spec.dropout)
            if train:
                # out is cached pre-dropout; the mask is applied on the way out
                cache.append((h, pre, out, mask))
            h = out if mask is None else out * mask
        return h, cache

    def backward(self, cache, grad_out: np.ndarray):
        """Reverse-mode gradients for the cached forward pass.

        Returns (grads, grad_input) where grads is a per-layer list of
        (dW, db) summed over the batch and grad_input has the input shape.
        """
        if cache is None or len(cache) != len(self.specs):
            raise StateError("backward requires the cache of a matching train-mode forward")
        g = np.atleast_2d(np.asarray(grad_out, dtype=float))
        grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(self.specs)
        for idx in range(len(self.specs) - 1, -1, -1):
            spec = self.specs[idx]
            h_in, pre, out, mask = cache[idx]
            if mask is not None:
                g = g * mask
            _, act_grad = _ACTIVATIONS[spec.activation]
            g_pre = g * act_grad(pre, out)
            grads[idx] = (g_pre.T @ h_in, g_pre.sum(axis=0))
            g = g_pre @ self.weights[idx]
        return grads, g

    # -- flat parameter views -------------------------------------------------

    def param_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def get_flat(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b.ravel())
        return np.concatenate(parts)

    def set_flat(self, flat: np.ndarray) -> None:
        if flat.size != self.param_count():
            raise ShapeError(f"flat size {flat.size} != param count {self.param_count()}")
        pos = 0
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[i] = flat[pos:pos + w.size].reshape(w.shape).copy()
            pos += w.size
            self.biases[i] = flat[pos:pos + b.size].copy()
            pos += b.size

    @staticmethod
    def grads_flat(grads) -> np.ndarray:
        parts = []
        for gw, gb in grads:
            parts.append(gw.ravel())
            parts.append(gb.ravel())
        return np.concatenate(parts)

    def clip_weights(self, bound: float) -> None:
        """Project every parameter into [-bound, bound] (critic clipping)."""
        for i in range(len(self.weights)):
            np.clip(self.weights[i], -bound, bound, out=self.weights[i])
            np.clip(self.biases[i], -bound, bound, out=self.biases[i])


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    """Bias-corrected Adam over a flat parameter vector."""

    dim: int
    lr: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    m: np.ndarray = field(default=None)
    v: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.m is None:
            self.m = np.zeros(self.dim)
        if self.v is None:
            self.v = np.zeros(self.dim)

    def step(self, params: np.ndarray, grads: np.ndarray) -> np.ndarray:
        if params.shape != grads.shape or params.size != self.dim:
            raise ShapeError("params/grads shape mismatch with Adam state")
        self.step_count += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grads
        self.v = self.beta2 * self.v + (1 - self.beta2) * grads ** 2
        m_hat = self.m / (1 - self.beta1 ** self.step_count)
        v_hat = self.v / (1 - self.beta2 ** self.step_count)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.epsilon)


def adam_step(state: AdamState, net: DenseNet, grads) -> None:
    """Apply one Adam update to a net from a backward() gradient list."""
    net.set_flat(state.step(net.get_flat(), DenseNet.grads_flat(grads)))


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------

def bce_loss(pred: np.ndarray, label: np.ndarray):
    """Mean binary cross entropy with clamped predictions; returns (loss, dL/dpred)."""
    pred = np.asarray(pred, dtype=float)
    label = np.asarray(label, dtype=float)
    if pred.shape != label.shape:
        raise ShapeError(f"shape mismatch: pred {pred.shape} vs label {label.shape}")
    p = np.clip(pred, _EPS_CLAMP, 1.0 - _EPS_CLAMP)
    loss = float(np.mean(-(label * np.log(p) + (1 - label) * np.log(1 - p))))
    grad = (-(label / p) + (1 - label) / (1 - p)) / p.size
    grad = np.where((pred > _EPS_CLAMP) & (pred < 1 - _EPS_CLAMP), grad, 0.0)
    return loss, grad


def mse_loss(pred: np.ndarray, target: np.ndarray):
    """Mean squared error over all elements; returns (loss, dL/dpred)."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ShapeError(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    diff = pred - target
    return float(np.mean(diff ** 2)), 2.0 * diff / diff.size


def log_clamped(pred: np.ndarray) -> np.ndarray:
    """log(pred) with the same clamp the losses use, safe at 0 and 1."""
    return np.log(np.clip(pred, _EPS_CLAMP, 1.0 - _EPS_CLAMP))


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

CHECKPOINT_VERSION = 1


def save_checkpoint(path, nets: dict[str, DenseNet], seed: int, extra: dict | None = None):
    """Persist named nets as flat float64 arrays with a spec header."""
    header = {
        "version": CHECKPOINT_VERSION,
        "seed": int(seed),
        "extra": extra or {},
        "nets": {
            name: [[s.in_dim, s.out_dim, s.activation, s.dropout] for s in net.specs]
            for name, net in nets.items()
        },
    }
    arrays = {name: net.get_flat() for name, net in nets.items()}
    np.savez(path, __header__=np.frombuffer(json.dumps(header).encode(), dtype=np.uint8),
             **arrays)


def load_checkpoint(path):
    """Load a checkpoint; returns (nets, header)."""
    with np.load(path) as data:
        header = json.loads(bytes(data["__header__"]).decode())
        if header.get("version") != CHECKPOINT_VERSION:
            raise StateError(f"unsupported checkpoint version {header.get('version')}")
        nets = {}
        for name, spec_rows in header["nets"].items():
            specs = [LayerSpec(int(r[0]), int(r[1]), r[2], float(r[3])) for r in spec_rows]
            net = DenseNet(specs, RngStream(0))
            net.set_flat(np.asarray(data[name], dtype=float))
            nets[name] = net
    return nets, header
