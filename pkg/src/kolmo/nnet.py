"""Minimal dense feedforward networks with manual backprop and Adam.

Kept deliberately small: sigmoid/linear layers, mean of per-sample squared
l2 error as the loss, seeded init and shuffling so that identical seeds give
bit-identical training runs. The per-layer forward/backward primitives are
exposed so composite objectives (e.g. the autoencoder loss with its
consistency penalty) can assemble exact gradients from them.
"""

import os
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import NonFiniteError, ShapeMismatchError

ACTIVATIONS = ("sigmoid", "linear")


@dataclass
class DenseNet:
    weights: list  # per layer, shape (fan_in, fan_out)
    biases: list  # per layer, shape (fan_out,)
    activations: list  # per layer, "sigmoid" or "linear"

    def __post_init__(self):
        if not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise ShapeMismatchError("weights/biases/activations length mismatch")
        for i in range(len(self.weights) - 1):
            if self.weights[i].shape[1] != self.weights[i + 1].shape[0]:
                raise ShapeMismatchError(
                    f"layer {i} out dim {self.weights[i].shape[1]} != "
                    f"layer {i+1} in dim {self.weights[i+1].shape[0]}"
                )
        for a in self.activations:
            if a not in ACTIVATIONS:
                raise ValueError(f"unknown activation {a!r}")

    @property
    def layer_dims(self) -> list:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def copy(self) -> "DenseNet":
        return DenseNet(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            list(self.activations),
        )


@dataclass
class TrainConfig:
    epochs: int
    batch_size: int = 64
    lr: float = 1e-3
    lr_drop_epoch: int = None
    lr_drop_factor: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.epochs <= 0:
            raise ValueError("epochs must be positive")
        if not (0 < self.lr_drop_factor <= 1):
            raise ValueError("lr_drop_factor must be in (0, 1]")


def init_net(dims: list, activations: list, seed: int = 0) -> DenseNet:
    """Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)], seeded."""
    if len(activations) != len(dims) - 1:
        raise ShapeMismatchError("need one activation per weight layer")
    rng = np.random.default_rng(seed)
    ws, bs = [], []
    for din, dout in zip(dims[:-1], dims[1:]):
        lim = 1.0 / np.sqrt(din)
        ws.append(rng.uniform(-lim, lim, size=(din, dout)))
        bs.append(rng.uniform(-lim, lim, size=dout))
    return DenseNet(ws, bs, list(activations))


def _as_batch(x: np.ndarray, dim: int):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != dim:
        raise ShapeMismatchError(f"input dim {x.shape[1]} != net input {dim}")
    return x, single


def forward(net: DenseNet, x: np.ndarray) -> np.ndarray:
    """Affine + activation composition; accepts a vector or a batch."""
    xb, single = _as_batch(x, net.layer_dims[0])
    a = xb
    for w, b, act in zip(net.weights, net.biases, net.activations):
        z = a @ w + b
        a = expit(z) if act == "sigmoid" else z
    return a[0] if single else a


def forward_all(net: DenseNet, x: np.ndarray) -> list:
    """Per-layer post-activation values [x, a1, ..., aL] for a batch."""
    xb, _ = _as_batch(x, net.layer_dims[0])
    acts = [xb]
    for w, b, act in zip(net.weights, net.biases, net.activations):
        z = acts[-1] @ w + b
        acts.append(expit(z) if act == "sigmoid" else z)
    return acts


def backward(net: DenseNet, acts: list, d_out: np.ndarray):
    """Backpropagate d(loss)/d(output) through the net.

    Returns (grad_weights, grad_biases, d_input); gradients match the layout
    of net.weights/net.biases.
    """
    gw = [None] * len(net.weights)
    gb = [None] * len(net.biases)
    delta = d_out
    for l in range(len(net.weights) - 1, -1, -1):
        a_out = acts[l + 1]
        if net.activations[l] == "sigmoid":
            delta = delta * (a_out * (1.0 - a_out))
        gw[l] = acts[l].T @ delta
        gb[l] = delta.sum(axis=0)
        delta = delta @ net.weights[l].T
    return gw, gb, delta


def mse_loss(net: DenseNet, x: np.ndarray, y: np.ndarray) -> float:
    """Mean over samples of the squared l2 error."""
    pred = forward(net, x)
    return float(np.mean(np.sum((pred - np.atleast_2d(y)) ** 2, axis=-1)))


def grad(net: DenseNet, x: np.ndarray, y: np.ndarray):
    """(loss, grad_weights, grad_biases) for the squared-error loss."""
    xb, _ = _as_batch(x, net.layer_dims[0])
    yb = np.atleast_2d(np.asarray(y, dtype=float))
    acts = forward_all(net, xb)
    err = acts[-1] - yb
    loss = float(np.mean(np.sum(err**2, axis=1)))
    gw, gb, _ = backward(net, acts, (2.0 / xb.shape[0]) * err)
    return loss, gw, gb


class Adam:
    """Adam over a flat list of parameter arrays, updated in place."""

    def __init__(self, params: list, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, grads: list):
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def _epoch_lr(cfg: TrainConfig, epoch: int) -> float:
    if cfg.lr_drop_epoch is not None and epoch >= cfg.lr_drop_epoch:
        return cfg.lr * cfg.lr_drop_factor
    return cfg.lr


def train(net: DenseNet, data, cfg: TrainConfig, test_data=None):
    """Minibatch Adam on squared error; returns (trained net, history).

    ``data`` is (X, Y); ``test_data`` an optional (X, Y) evaluated once per
    epoch. History rows are (epoch, train_loss, test_loss) with train_loss
    averaged over the epoch's minibatches. Deterministic for a fixed seed.
    """
    x, y = (np.asarray(a, dtype=float) for a in data)
    if x.shape[0] == 0:
        raise ValueError("empty training set")
    net = net.copy()
    params = net.weights + net.biases
    opt = Adam(params, lr=cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    nb = max(1, x.shape[0] // cfg.batch_size)
    history = []
    for epoch in range(cfg.epochs):
        opt.lr = _epoch_lr(cfg, epoch)
        order = rng.permutation(x.shape[0])
        losses = []
        for chunk in np.array_split(order, nb):
            loss, gw, gb = grad(net, x[chunk], y[chunk])
            opt.step(gw + gb)
            losses.append(loss)
        train_loss = float(np.mean(losses))
        if not np.isfinite(train_loss):
            raise NonFiniteError(f"training loss diverged at epoch {epoch}")
        test_loss = mse_loss(net, *test_data) if test_data is not None else float("nan")
        history.append((epoch, train_loss, test_loss))
    return net, history


def best_index(test_losses: list) -> int:
    """Index of the smallest test loss (ensemble selection)."""
    return int(np.argmin(np.asarray(test_losses)))


def n_workers() -> int:
    """Ensemble parallelism cap from KOLMO_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("KOLMO_THREADS", "1")))
    except ValueError:
        return 1
