"""PCA basis and the hybrid PCA-residual autoencoder.

The autoencoder does not learn a latent space from scratch; it learns
corrections to the linear PCA picture. With U the (full) PCA basis and
c = U^T w the coefficient vector of a flattened snapshot,

    encode:  h = c[:d_h] + E(c)
    decode:  r = [h; 0] + D(h),   reconstruction = U r

and the training loss adds a consistency penalty to the reconstruction
error:

    L = ||w - w_rec||^2 + alpha_l * ||E(c) + D(h)[:d_h]||^2

so that at the exact solution the leading d_h PCA coefficients pass
through unchanged. Snapshots are optionally mean-centered (PCA practice)
and divided by a single global scale before entering the nets (sigmoid
saturation control); the loss above is evaluated in unscaled units.
Both choices are recorded in the model bundle and switchable.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from . import nnet, storage
from .errors import DegenerateDataError, ShapeMismatchError
from .nnet import DenseNet, TrainConfig

ENC_HIDDEN = (5000, 1000)  # publication-scale widths; desk runs pass smaller
DEC_HIDDEN = (1000, 5000)


@dataclass
class PcaBasis:
    u: np.ndarray  # (N, N) orthogonal, columns ordered by singular value
    singular_values: np.ndarray  # (N,)
    mean: np.ndarray = None  # (N,) training mean, or None if not centered

    @property
    def n(self) -> int:
        return self.u.shape[0]

    def coefficients(self, w: np.ndarray) -> np.ndarray:
        """Full PCA coefficient vector(s) U^T (w - mean)."""
        w = np.asarray(w, dtype=float)
        if self.mean is not None:
            w = w - self.mean
        return w @ self.u

    def reconstruct(self, coeffs: np.ndarray) -> np.ndarray:
        w = np.asarray(coeffs) @ self.u.T
        if self.mean is not None:
            w = w + self.mean
        return w


def _flat_data(data) -> np.ndarray:
    if hasattr(data, "flattened"):
        return data.flattened()
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 3:
        arr = arr.reshape(arr.shape[0], -1)
    return arr


def fit_pca(train, center: bool = True) -> PcaBasis:
    """Full SVD basis of the (optionally mean-centered) snapshot matrix."""
    x = _flat_data(train)
    ns, n = x.shape
    if ns < n:
        import warnings

        warnings.warn(
            f"only {ns} snapshots for a {n}-dimensional basis; trailing "
            "directions are arbitrary orthogonal completions"
        )
    mean = x.mean(axis=0) if center else None
    xc = x - mean if center else x
    if not np.any(np.abs(xc) > 0):
        raise DegenerateDataError("data matrix has rank zero")
    # svd of the (ns, n) matrix: rows are snapshots, so V^T holds the basis
    _, s, vt = np.linalg.svd(xc, full_matrices=True)
    sv = np.zeros(n)
    sv[: s.shape[0]] = s
    return PcaBasis(vt.T.copy(), sv, mean)


def pca_truncated_reconstruction(basis: PcaBasis, w, d_h: int) -> np.ndarray:
    c = basis.coefficients(w)
    c[..., d_h:] = 0.0
    return basis.reconstruct(c)


def pca_mse(basis: PcaBasis, data, d_h: int) -> float:
    """Per-element MSE of the rank-d_h PCA reconstruction."""
    x = _flat_data(data)
    rec = pca_truncated_reconstruction(basis, x, d_h)
    return float(np.mean((x - rec) ** 2))


@dataclass
class Autoencoder:
    d_h: int
    pca: PcaBasis
    enc: DenseNet  # N -> ... -> d_h, sigmoid output
    dec: DenseNet  # d_h -> ... -> N, linear output
    alpha_l: float = 1.0
    input_scale: float = 1.0
    use_enc_net: bool = True  # False: pure PCA projection (E = 0 ablation)
    use_dec_net: bool = True  # False: pure PCA reconstruction (D = 0 ablation)

    def __post_init__(self):
        if self.enc is not None and self.enc.layer_dims[-1] != self.d_h:
            raise ShapeMismatchError("encoder output dim != d_h")
        if self.dec is not None and self.dec.layer_dims[0] != self.d_h:
            raise ShapeMismatchError("decoder input dim != d_h")


def encode(ae: Autoencoder, w: np.ndarray) -> np.ndarray:
    """Latent coordinates h for flattened snapshot(s) w."""
    w = np.asarray(w, dtype=float)
    single = w.ndim == 1
    c = ae.pca.coefficients(np.atleast_2d(w)) / ae.input_scale
    h = c[:, : ae.d_h].copy()
    if ae.use_enc_net:
        h += nnet.forward(ae.enc, c)
    return h[0] if single else h


def decode(ae: Autoencoder, h: np.ndarray) -> np.ndarray:
    """Flattened snapshot reconstruction(s) from latent coordinates."""
    h = np.asarray(h, dtype=float)
    single = h.ndim == 1
    hb = np.atleast_2d(h)
    if hb.shape[1] != ae.d_h:
        raise ShapeMismatchError(f"latent dim {hb.shape[1]} != d_h {ae.d_h}")
    r = np.zeros((hb.shape[0], ae.pca.n))
    r[:, : ae.d_h] = hb
    if ae.use_dec_net:
        r += nnet.forward(ae.dec, hb)
    w = ae.pca.reconstruct(r * ae.input_scale)
    return w[0] if single else w


def reconstruction_mse(ae: Autoencoder, data) -> float:
    """Per-element MSE of decode(encode(.)) in unscaled units."""
    x = _flat_data(data)
    return float(np.mean((x - decode(ae, encode(ae, x))) ** 2))


def ae_loss(ae: Autoencoder, w) -> float:
    """Reconstruction + consistency-penalty loss, mean over samples."""
    return _loss_and_grads(ae, np.atleast_2d(_flat_data(w)), want_grads=False)[0]


def ae_grad(ae: Autoencoder, w):
    """(loss, enc weight grads, enc bias grads, dec weight grads, dec bias grads)."""
    return _loss_and_grads(ae, np.atleast_2d(_flat_data(w)), want_grads=True)


def _loss_and_grads(ae: Autoencoder, wb: np.ndarray, want_grads: bool):
    s = ae.input_scale
    b = wb.shape[0]
    c = ae.pca.coefficients(wb) / s
    if ae.use_enc_net:
        acts_e = nnet.forward_all(ae.enc, c)
        e = acts_e[-1]
    else:
        acts_e, e = None, np.zeros((b, ae.d_h))
    h = c[:, : ae.d_h] + e
    if ae.use_dec_net:
        acts_d = nnet.forward_all(ae.dec, h)
        d = acts_d[-1]
    else:
        acts_d, d = None, np.zeros((b, ae.pca.n))
    r = d.copy()
    r[:, : ae.d_h] += h
    err = r - c
    pen = e + d[:, : ae.d_h]
    s2 = s * s
    loss = float(
        s2 * np.mean(np.sum(err**2, axis=1) + ae.alpha_l * np.sum(pen**2, axis=1))
    )
    if not want_grads:
        return (loss,)
    g_r = (2.0 * s2 / b) * err
    g_pen = (2.0 * s2 * ae.alpha_l / b) * pen
    g_h = g_r[:, : ae.d_h].copy()
    if ae.use_dec_net:
        g_d = g_r.copy()
        g_d[:, : ae.d_h] += g_pen
        gw_d, gb_d, g_h_via_d = nnet.backward(ae.dec, acts_d, g_d)
        g_h += g_h_via_d
    else:
        gw_d, gb_d = [], []
    if ae.use_enc_net:
        g_e = g_h + g_pen
        gw_e, gb_e, _ = nnet.backward(ae.enc, acts_e, g_e)
    else:
        gw_e, gb_e = [], []
    return loss, gw_e, gb_e, gw_d, gb_d


def make_autoencoder(
    n: int,
    d_h: int,
    seed: int = 0,
    enc_hidden=ENC_HIDDEN,
    dec_hidden=DEC_HIDDEN,
    alpha_l: float = 1.0,
) -> Autoencoder:
    """Fresh nets with the standard layer shapes; PCA filled in by training."""
    enc = nnet.init_net(
        [n, *enc_hidden, d_h], ["sigmoid"] * (len(enc_hidden) + 1), seed=seed
    )
    dec = nnet.init_net(
        [d_h, *dec_hidden, n],
        ["sigmoid"] * len(dec_hidden) + ["linear"],
        seed=seed + 1000003,
    )
    return Autoencoder(d_h, PcaBasis(np.eye(n), np.zeros(n)), enc, dec, alpha_l)


def train_autoencoder(
    train,
    test,
    d_h: int,
    cfg: TrainConfig,
    n_models: int = 4,
    enc_hidden=ENC_HIDDEN,
    dec_hidden=DEC_HIDDEN,
    alpha_l: float = 1.0,
    center: bool = True,
    scale: bool = True,
):
    """Train an ensemble of autoencoders, return the best by test MSE.

    PCA basis, mean, and the input scale come from the training split only.
    Model seeds are cfg.seed, cfg.seed+1, ...; the returned info carries the
    per-model loss histories and test reconstruction MSEs.
    """
    x_train = _flat_data(train)
    x_test = _flat_data(test)
    n = x_train.shape[1]
    basis = fit_pca(x_train, center=center)
    s = float(np.max(np.abs(x_train))) if scale else 1.0
    if s == 0:
        s = 1.0

    def _fit_member(k):
        ae = make_autoencoder(
            n, d_h, seed=cfg.seed + k, enc_hidden=enc_hidden,
            dec_hidden=dec_hidden, alpha_l=alpha_l,
        )
        ae.pca = basis
        ae.input_scale = s
        history = _train_one_ae(ae, x_train, x_test, cfg, seed=cfg.seed + k)
        return ae, {"seed": cfg.seed + k, "history": history,
                    "test_mse": reconstruction_mse(ae, x_test)}

    workers = min(nnet.n_workers(), n_models)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_fit_member, range(n_models)))
    else:
        results = [_fit_member(k) for k in range(n_models)]
    models = [r[0] for r in results]
    infos = [r[1] for r in results]
    best = nnet.best_index([i["test_mse"] for i in infos])
    return models[best], {"best_seed": infos[best]["seed"], "models": infos,
                          "test_mse": infos[best]["test_mse"],
                          "pca_test_mse": pca_mse(basis, x_test, d_h)}


def _train_one_ae(ae: Autoencoder, x_train, x_test, cfg: TrainConfig, seed: int):
    params = ae.enc.weights + ae.enc.biases + ae.dec.weights + ae.dec.biases
    opt = nnet.Adam(params, lr=cfg.lr)
    rng = np.random.default_rng(seed)
    nb = max(1, x_train.shape[0] // cfg.batch_size)
    history = []
    for epoch in range(cfg.epochs):
        opt.lr = nnet._epoch_lr(cfg, epoch)
        order = rng.permutation(x_train.shape[0])
        losses = []
        for chunk in np.array_split(order, nb):
            loss, gw_e, gb_e, gw_d, gb_d = ae_grad(ae, x_train[chunk])
            opt.step(gw_e + gb_e + gw_d + gb_d)
            losses.append(loss)
        history.append((epoch, float(np.mean(losses)), ae_loss(ae, x_test)))
    return history


def save_bundle(path: str, ae: Autoencoder, meta: dict = None):
    """Write pca.bin, enc.knet1, dec.knet1, meta.json into a directory."""
    os.makedirs(path, exist_ok=True)
    storage.write_pca(os.path.join(path, "pca.bin"), ae.pca, scale=ae.input_scale)
    if ae.enc is not None:
        storage.write_net(os.path.join(path, "enc.knet1"), ae.enc)
    if ae.dec is not None:
        storage.write_net(os.path.join(path, "dec.knet1"), ae.dec)
    doc = {
        "d_h": ae.d_h,
        "alpha_l": ae.alpha_l,
        "use_enc_net": ae.use_enc_net,
        "use_dec_net": ae.use_dec_net,
        "centered": ae.pca.mean is not None,
    }
    if meta:
        doc.update(meta)
    storage.atomic_write_text(
        os.path.join(path, "meta.json"), json.dumps(doc, indent=2, sort_keys=True)
    )


def load_bundle(path: str) -> Autoencoder:
    with open(os.path.join(path, "meta.json")) as f:
        meta = json.load(f)
    basis, scale = storage.read_pca(os.path.join(path, "pca.bin"))
    enc_path = os.path.join(path, "enc.knet1")
    dec_path = os.path.join(path, "dec.knet1")
    enc = storage.read_net(enc_path) if os.path.exists(enc_path) else None
    dec = storage.read_net(dec_path) if os.path.exists(dec_path) else None
    return Autoencoder(
        meta["d_h"],
        basis,
        enc,
        dec,
        alpha_l=meta.get("alpha_l", 1.0),
        input_scale=scale,
        use_enc_net=meta.get("use_enc_net", True),
        use_dec_net=meta.get("use_dec_net", True),
    )
