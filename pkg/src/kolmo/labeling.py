"""Quiescent/bursting labeling of aligned vorticity snapshots.

A snapshot is bursting (label 1) outright when the Euclidean norm of its
flattened vorticity reaches ``norm_threshold``. Below that, windows of b
past and f future snapshot norms are compared against the current one: if
either window shows no absolute difference above ``diff_threshold``, the
snapshot sits in a flat stretch and is quiescent (label 0); otherwise it is
part of a burst. The first b and last f snapshots have incomplete windows
and stay unlabeled.

The norm convention is the plain l2 norm of the flattened snapshot vector
(no grid-area weighting); the default thresholds 60 and 5 are calibrated to
that convention on a 32x32 grid and remain overridable.
"""

from dataclasses import dataclass

import numpy as np

from .errors import TooShortError


@dataclass
class LabelSeries:
    """0/1 labels for snapshots [first_labeled, last_labeled)."""

    labels: np.ndarray  # (N_s - b - f,) values in {0, 1}
    first_labeled: int  # = b
    last_labeled: int  # = N_s - f (exclusive)
    norms: np.ndarray  # (N_s,) per-snapshot l2 norm

    def label_of(self, snapshot_index: int) -> int:
        """Label of an absolute snapshot index."""
        j = snapshot_index - self.first_labeled
        if j < 0 or j >= len(self.labels):
            raise IndexError(f"snapshot {snapshot_index} is unlabeled")
        return int(self.labels[j])

    @property
    def snapshot_indices(self) -> np.ndarray:
        return np.arange(self.first_labeled, self.last_labeled)


def snapshot_norms(series) -> np.ndarray:
    """l2 norm of each flattened snapshot."""
    if hasattr(series, "flattened"):
        flat = series.flattened()
    else:
        arr = np.asarray(series, dtype=float)
        flat = arr.reshape(arr.shape[0], -1)
    return np.linalg.norm(flat, axis=1)


def label_norms(
    norms: np.ndarray,
    norm_threshold: float = 60.0,
    diff_threshold: float = 5.0,
    b: int = 10,
    f: int = 10,
) -> LabelSeries:
    """Label a norm sequence; see module docstring for the rule."""
    norms = np.asarray(norms, dtype=float)
    ns = norms.shape[0]
    if ns <= b + f:
        raise TooShortError(f"{ns} snapshots cannot support windows b={b}, f={f}")
    labels = np.empty(ns - b - f, dtype=np.int8)
    for i in range(b, ns - f):
        if norms[i] < norm_threshold:
            d_p = np.abs(norms[i - b : i] - norms[i])
            b_p = int(np.sum(d_p > diff_threshold))
            d_f = np.abs(norms[i : i + f] - norms[i])
            b_f = int(np.sum(d_f > diff_threshold))
            labels[i - b] = 0 if (b_p == 0 or b_f == 0) else 1
        else:
            labels[i - b] = 1
    return LabelSeries(labels, b, ns - f, norms)


def label(
    series,
    norm_threshold: float = 60.0,
    diff_threshold: float = 5.0,
    b: int = 10,
    f: int = 10,
) -> LabelSeries:
    """Label snapshots (a series object or an (N_s, ...) array)."""
    return label_norms(snapshot_norms(series), norm_threshold, diff_threshold, b, f)


def durations(labels: LabelSeries, tau: float):
    """Quiescent and bursting interval durations from run-length encoding.

    Runs touching either end of the labeled range are censored (their true
    length is unknown) and dropped. Returns (t_q, t_b) arrays in time units.
    """
    lab = np.asarray(labels.labels)
    if lab.size == 0:
        return np.array([]), np.array([])
    change = np.flatnonzero(np.diff(lab)) + 1
    bounds = np.concatenate([[0], change, [lab.size]])
    t_q, t_b = [], []
    for k in range(len(bounds) - 1):
        start, stop = bounds[k], bounds[k + 1]
        if start == 0 or stop == lab.size:
            continue  # censored boundary run
        length = (stop - start) * tau
        (t_b if lab[start] else t_q).append(length)
    return np.array(t_q, dtype=float), np.array(t_b, dtype=float)
