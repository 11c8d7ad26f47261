"""Discrete-time evolution of the latent state and of the spatial phase.

Two maps are learned from consecutive latent snapshots separated by tau
time units: a pattern map advancing h(t) -> h(t+tau), and a phase map
predicting the wrapped phase increment phi_x(t+tau) - phi_x(t) from h(t).
Rollouts apply the pattern map recurrently (Markovian: the prediction
depends only on the current latent state) and accumulate unwrapped phase.

Net inputs and outputs are standardized per component with training-set
statistics; the standardizers are part of the saved model.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from . import nnet, storage, symmetry
from .errors import NonFiniteError, ShapeMismatchError
from .nnet import DenseNet, TrainConfig
from .spectral import SnapshotSeries

DEFAULT_TAU = 5.0
MAP_HIDDEN = (500, 500)
PHASE_HIDDEN = (500, 500, 500)


@dataclass
class LatentSeries:
    """Latent trajectory h(t) plus the spatial phase trace, sampled every tau."""

    h: np.ndarray  # (count, d_h)
    phi_x: np.ndarray  # (count,)
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        self.h = np.atleast_2d(np.asarray(self.h, dtype=float))
        self.phi_x = np.asarray(self.phi_x, dtype=float)
        if self.h.shape[0] != self.phi_x.shape[0]:
            raise ShapeMismatchError("h and phi_x lengths differ")
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    @property
    def count(self) -> int:
        return self.h.shape[0]

    @property
    def d_h(self) -> int:
        return self.h.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.count) * self.tau


@dataclass
class Standardizer:
    """Per-component affine normalization.

    Zero-variance components divide by 1 on the way in but multiply by the
    true (zero) std on the way out, so constant training targets produce
    exactly constant predictions.
    """

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        x = np.atleast_2d(x)
        return cls(x.mean(axis=0), x.std(axis=0))

    def apply(self, x):
        return (x - self.mean) / np.where(self.std < 1e-12, 1.0, self.std)

    def invert(self, z):
        return z * self.std + self.mean


@dataclass
class TimeMap:
    """h(t) -> h(t+tau), a dense net between standardized latent states."""

    f: DenseNet
    norm_in: Standardizer
    norm_out: Standardizer

    def predict(self, h: np.ndarray) -> np.ndarray:
        return self.norm_out.invert(nnet.forward(self.f, self.norm_in.apply(h)))


@dataclass
class PhaseMap:
    """h(t) -> wrapped phase increment over one tau."""

    g: DenseNet
    norm_in: Standardizer
    norm_out: Standardizer

    def predict(self, h: np.ndarray) -> np.ndarray:
        z = nnet.forward(self.g, self.norm_in.apply(h))
        return np.squeeze(self.norm_out.invert(z), axis=-1)


def map_dataset(latent: LatentSeries):
    """Consecutive pairs (h(t), h(t+tau)) from one contiguous series."""
    if latent.count < 2:
        raise ShapeMismatchError("need at least two snapshots for map pairs")
    return latent.h[:-1], latent.h[1:]


def phase_dataset(latent: LatentSeries):
    """(h(t), wrapped delta phi_x(t+tau)) pairs from one contiguous series."""
    if latent.count < 2:
        raise ShapeMismatchError("need at least two snapshots for phase pairs")
    dphi = symmetry.wrap_angle(np.diff(latent.phi_x))
    return latent.h[:-1], dphi[:, None]


def _train_regression(
    x_tr, y_tr, x_te, y_te, dims, acts, cfg: TrainConfig, n_models: int
):
    """Ensemble of standardized regressions; best by test MSE in data units."""
    nin = Standardizer.fit(x_tr)
    nout = Standardizer.fit(y_tr)
    xz_tr, yz_tr = nin.apply(x_tr), nout.apply(y_tr)
    xz_te, yz_te = nin.apply(x_te), nout.apply(y_te)

    def _fit_member(k):
        net = nnet.init_net(dims, acts, seed=cfg.seed + k)
        cfg_k = TrainConfig(
            epochs=cfg.epochs,
            batch_size=cfg.batch_size,
            lr=cfg.lr,
            lr_drop_epoch=cfg.lr_drop_epoch,
            lr_drop_factor=cfg.lr_drop_factor,
            seed=cfg.seed + k,
        )
        net, history = nnet.train(net, (xz_tr, yz_tr), cfg_k, test_data=(xz_te, yz_te))
        pred = nout.invert(nnet.forward(net, xz_te))
        test_mse = float(np.mean(np.sum((pred - y_te) ** 2, axis=1)))
        return net, {"seed": cfg.seed + k, "history": history, "test_mse": test_mse}

    workers = min(nnet.n_workers(), n_models)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_fit_member, range(n_models)))
    else:
        results = [_fit_member(k) for k in range(n_models)]
    nets = [r[0] for r in results]
    infos = [r[1] for r in results]
    best = nnet.best_index([i["test_mse"] for i in infos])
    return nets[best], nin, nout, {
        "best_seed": infos[best]["seed"],
        "models": infos,
        "test_mse": infos[best]["test_mse"],
    }


def train_map(
    train: LatentSeries,
    test: LatentSeries,
    cfg: TrainConfig,
    n_models: int = 5,
    hidden=MAP_HIDDEN,
):
    """Best-of-ensemble pattern map from one-step latent pairs."""
    x_tr, y_tr = map_dataset(train)
    x_te, y_te = map_dataset(test)
    dims = [train.d_h, *hidden, train.d_h]
    acts = ["sigmoid"] * len(hidden) + ["linear"]
    net, nin, nout, info = _train_regression(
        x_tr, y_tr, x_te, y_te, dims, acts, cfg, n_models
    )
    return TimeMap(net, nin, nout), info


def train_phase_map(
    train: LatentSeries,
    test: LatentSeries,
    cfg: TrainConfig,
    n_models: int = 5,
    hidden=PHASE_HIDDEN,
):
    """Best-of-ensemble phase-increment map."""
    x_tr, y_tr = phase_dataset(train)
    x_te, y_te = phase_dataset(test)
    dims = [train.d_h, *hidden, 1]
    acts = ["sigmoid"] * len(hidden) + ["linear"]
    net, nin, nout, info = _train_regression(
        x_tr, y_tr, x_te, y_te, dims, acts, cfg, n_models
    )
    return PhaseMap(net, nin, nout), info


def rollout(
    tmap: TimeMap,
    gmap: PhaseMap,
    h0: np.ndarray,
    phi0: float,
    steps: int,
    tau: float = DEFAULT_TAU,
) -> LatentSeries:
    """Recurrent application of the maps from one initial condition.

    The phase accumulates raw increments (not wrapped) so displacement
    statistics remain meaningful. ``gmap`` may be None to track the pattern
    only. The output includes the initial state, so it has steps+1 entries.
    """
    h0 = np.asarray(h0, dtype=float).ravel()
    hs = np.empty((steps + 1, h0.shape[0]))
    phis = np.empty(steps + 1)
    hs[0] = h0
    phis[0] = phi0
    h = h0
    phi = phi0
    for k in range(1, steps + 1):
        if gmap is not None:
            phi = phi + float(gmap.predict(h))
        h = tmap.predict(h)
        if not np.all(np.isfinite(h)):
            raise NonFiniteError(f"latent state diverged at rollout step {k}")
        hs[k] = h
        phis[k] = phi
    return LatentSeries(hs, phis, tau=tau)


def decode_rollout(ae, series: LatentSeries, grid, params, apply_phase: bool = False):
    """Decode a latent trajectory back to real-space vorticity snapshots.

    By default snapshots stay in the phase-aligned frame (phi_x = 0); with
    ``apply_phase`` each frame is translated back by its accumulated phase.
    """
    from . import reduction

    flat = reduction.decode(ae, series.h)
    snaps = flat.reshape(series.count, grid.nx, grid.ny)
    if apply_phase:
        out = np.empty_like(snaps)
        for i in range(series.count):
            out[i] = symmetry.apply_op(
                symmetry.translate(-series.phi_x[i] / grid.alpha), snaps[i], grid
            )
        snaps = out
    return SnapshotSeries(snaps, grid, params, save_every=series.tau)


def save_map(path: str, m, name: str):
    """Write <name>.knet1 plus <name>.json (standardizers) into a directory."""
    os.makedirs(path, exist_ok=True)
    storage.write_net(os.path.join(path, f"{name}.knet1"), m.f if isinstance(m, TimeMap) else m.g)
    doc = {
        "in_mean": m.norm_in.mean.tolist(),
        "in_std": m.norm_in.std.tolist(),
        "out_mean": np.asarray(m.norm_out.mean).tolist(),
        "out_std": np.asarray(m.norm_out.std).tolist(),
    }
    storage.atomic_write_text(
        os.path.join(path, f"{name}.json"), json.dumps(doc, indent=2)
    )


def load_map(path: str, name: str, kind: str):
    """Load a TimeMap ('pattern') or PhaseMap ('phase') saved by save_map."""
    net = storage.read_net(os.path.join(path, f"{name}.knet1"))
    with open(os.path.join(path, f"{name}.json")) as f:
        doc = json.load(f)
    nin = Standardizer(np.array(doc["in_mean"]), np.array(doc["in_std"]))
    nout = Standardizer(np.array(doc["out_mean"]), np.array(doc["out_std"]))
    if kind == "pattern":
        return TimeMap(net, nin, nout)
    if kind == "phase":
        return PhaseMap(net, nin, nout)
    raise ValueError(f"unknown map kind {kind!r}")
