"""Long-time statistical validation of latent models against truth.

Joint PDFs are plain 2D histograms normalized to unit probability mass;
the KL divergence between two histograms on identical edges is accumulated
over cells where both have support (the discrete integral ignores cells
where either PDF vanishes). Phase dispersion uses the mean squared
displacement over sliding origins, never mixing origins across independent
runs. Ensemble tracking errors compare decoded rollouts against true
snapshots, separately for quiescent and bursting initial conditions.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BinMismatchError,
    EmptyDataError,
    ShapeMismatchError,
    TooShortError,
)

LYAPUNOV_TIME = 20.0  # time units, chaotic regime at Re = 14.4


@dataclass
class Histogram2D:
    x_edges: np.ndarray
    y_edges: np.ndarray
    counts: np.ndarray  # (nx_bins, ny_bins) integers
    density: np.ndarray  # counts / (total * cell_area); integrates to 1

    @property
    def mass(self) -> np.ndarray:
        """Per-cell probability mass (sums to 1)."""
        return self.counts / self.counts.sum()

    @property
    def cell_area(self) -> float:
        return float(
            (self.x_edges[1] - self.x_edges[0]) * (self.y_edges[1] - self.y_edges[0])
        )


def joint_pdf(a, b, bins=100, ranges=None) -> Histogram2D:
    """Normalized 2D histogram of two equal-length series.

    ``ranges`` fixes ((xmin, xmax), (ymin, ymax)); pass the pooled range when
    comparing two data sets so their histograms share edges.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size:
        raise ShapeMismatchError("series lengths differ")
    if a.size == 0:
        raise EmptyDataError("no samples")
    counts, xe, ye = np.histogram2d(a, b, bins=bins, range=ranges)
    total = counts.sum()
    if total == 0:
        raise EmptyDataError("no samples fall inside the requested range")
    area = (xe[1] - xe[0]) * (ye[1] - ye[0])
    return Histogram2D(xe, ye, counts.astype(np.int64), counts / (total * area))


def pooled_range(*series):
    """((min, max) padded slightly) over all inputs, for shared histogram edges."""
    lo = min(float(np.min(s)) for s in series)
    hi = max(float(np.max(s)) for s in series)
    pad = 1e-9 * max(1.0, abs(lo), abs(hi))
    return (lo - pad, hi + pad)


def kl_divergence(pred: Histogram2D, truth: Histogram2D) -> float:
    """Restricted-support KL divergence D(pred || truth) between histograms."""
    if pred.counts.shape != truth.counts.shape or not (
        np.allclose(pred.x_edges, truth.x_edges)
        and np.allclose(pred.y_edges, truth.y_edges)
    ):
        raise BinMismatchError("histograms must share bin edges")
    pm = pred.mass
    tm = truth.mass
    m = (pm > 0) & (tm > 0)
    if not np.any(m):
        return 0.0  # disjoint supports: no common cells to integrate over
    return float(np.sum(pm[m] * np.log(pm[m] / tm[m])))


def split_half_kl(a, b, bins=100, ranges=None) -> float:
    """KL between the joint PDFs of the two chronological halves of one run.

    Serves as the sampling-noise baseline against which model-vs-truth KL
    values are judged.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    half = a.size // 2
    if ranges is None:
        ranges = (pooled_range(a), pooled_range(b))
    h1 = joint_pdf(a[:half], b[:half], bins=bins, ranges=ranges)
    h2 = joint_pdf(a[half:], b[half:], bins=bins, ranges=ranges)
    return kl_divergence(h1, h2)


@dataclass
class MsdCurve:
    lags: np.ndarray  # time units
    msd: np.ndarray


def msd(phi, tau: float, max_lag_steps: int) -> MsdCurve:
    """Mean squared displacement of (unwrapped) phase over sliding origins.

    ``phi`` is one array or a list of arrays from independent runs; origins
    never straddle run boundaries. Lag 0 is included and identically zero.
    """
    runs = [np.asarray(p, dtype=float) for p in (phi if isinstance(phi, (list, tuple)) else [phi])]
    if max_lag_steps < 1:
        raise ValueError("max_lag_steps must be >= 1")
    if max(len(r) for r in runs) <= max_lag_steps:
        raise TooShortError(
            f"longest run has {max(len(r) for r in runs)} samples; "
            f"need > {max_lag_steps}"
        )
    out = np.zeros(max_lag_steps + 1)
    for k in range(1, max_lag_steps + 1):
        acc = 0.0
        cnt = 0
        for r in runs:
            if len(r) > k:
                d = r[k:] - r[:-k]
                acc += float(np.dot(d, d))
                cnt += d.size
        out[k] = acc / cnt
    return MsdCurve(np.arange(max_lag_steps + 1) * tau, out)


def loglog_slope(curve: MsdCurve, t_lo: float, t_hi: float) -> float:
    """Least-squares slope of log MSD vs log lag over [t_lo, t_hi]."""
    m = (curve.lags >= t_lo) & (curve.lags <= t_hi) & (curve.msd > 0) & (curve.lags > 0)
    if np.sum(m) < 2:
        raise TooShortError("fewer than two usable points in the fit window")
    return float(np.polyfit(np.log(curve.lags[m]), np.log(curve.msd[m]), 1)[0])


@dataclass
class EnsembleError:
    """Relative decoded-state error vs lead time, by initial-condition class."""

    lead_times: np.ndarray
    pooled: np.ndarray
    quiescent: np.ndarray
    bursting: np.ndarray
    n_quiescent: int
    n_bursting: int


def sample_ics(labels, horizon_steps: int, count: int, seed: int = 0) -> np.ndarray:
    """Uniform labeled snapshot indices with a full horizon of truth ahead."""
    valid_stop = labels.last_labeled - horizon_steps
    idx = np.arange(labels.first_labeled, valid_stop)
    if idx.size == 0:
        raise TooShortError("no initial conditions fit the requested horizon")
    rng = np.random.default_rng(seed)
    if count >= idx.size:
        return idx
    return np.sort(rng.choice(idx, size=count, replace=False))


def ensemble_error(
    truth_flat: np.ndarray,
    latent_h: np.ndarray,
    ae,
    tmap,
    labels,
    ics: np.ndarray,
    horizon_steps: int,
    tau: float = 5.0,
) -> EnsembleError:
    """Tracking error of decoded rollouts against true snapshots.

    Error at lead time t is ||w_true - w_model|| / <||w_true||>, averaged
    over initial conditions; the normalization is the mean snapshot norm of
    the whole true series. With ``tmap=None`` the true latent sequence is
    replayed through the decoder, isolating the reconstruction floor.
    """
    from . import reduction

    truth_flat = np.asarray(truth_flat, dtype=float)
    ics = np.asarray(ics, dtype=int)
    if np.any(ics + horizon_steps >= truth_flat.shape[0]):
        raise ShapeMismatchError("an initial condition lacks truth over the horizon")
    norm_scale = float(np.mean(np.linalg.norm(truth_flat, axis=1)))
    cls = np.array([labels.label_of(i) for i in ics])
    errs = np.empty((len(ics), horizon_steps + 1))
    h_cur = latent_h[ics].copy()
    for t in range(horizon_steps + 1):
        dec = reduction.decode(ae, h_cur)
        diff = truth_flat[ics + t] - dec
        errs[:, t] = np.linalg.norm(diff, axis=1) / norm_scale
        if t < horizon_steps:
            h_cur = tmap.predict(h_cur) if tmap is not None else latent_h[ics + t + 1].copy()
    lead = np.arange(horizon_steps + 1) * tau

    def _mean(mask):
        return errs[mask].mean(axis=0) if np.any(mask) else np.full(horizon_steps + 1, np.nan)

    return EnsembleError(
        lead,
        errs.mean(axis=0),
        _mean(cls == 0),
        _mean(cls == 1),
        int(np.sum(cls == 0)),
        int(np.sum(cls == 1)),
    )
