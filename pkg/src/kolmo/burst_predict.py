"""SVM prediction of future bursting from low-dimensional indicators.

Feature vectors observed at time t are paired with the quiescent/bursting
label at t + tau_b and fed to a soft-margin SVM with an RBF kernel, trained
by sequential minimal optimization on the dual problem. Candidate
indicators range from the latent state and the leading PCA coefficients to
single-mode amplitudes and the phase increment.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    HorizonOutOfRangeError,
    ShapeMismatchError,
    SingleClassError,
)

INDICATOR_KINDS = ("latent", "pca", "mode10", "mode02", "dphi")


@dataclass(frozen=True)
class IndicatorSet:
    """Which observable feeds the classifier; d_h applies to latent/pca."""

    kind: str
    d_h: int = 0

    def __post_init__(self):
        if self.kind not in INDICATOR_KINDS:
            raise ValueError(f"unknown indicator {self.kind!r}")


def indicator_features(
    ind: IndicatorSet,
    latent_h: np.ndarray = None,
    pca_coeffs: np.ndarray = None,
    mode10_amp: np.ndarray = None,
    mode02_amp: np.ndarray = None,
    dphi: np.ndarray = None,
) -> np.ndarray:
    """Assemble the (N_s, dim) feature matrix for one indicator choice."""
    if ind.kind == "latent":
        x = np.asarray(latent_h)[:, : ind.d_h]
    elif ind.kind == "pca":
        x = np.asarray(pca_coeffs)[:, : ind.d_h]
    elif ind.kind == "mode10":
        x = np.asarray(mode10_amp)[:, None]
    elif ind.kind == "mode02":
        x = np.asarray(mode02_amp)[:, None]
    else:
        x = np.asarray(dphi)[:, None]
    return np.asarray(x, dtype=float)


def build_dataset(features: np.ndarray, labels, tau_b_steps: int):
    """Pair features at snapshot t with the label at t + tau_b_steps.

    ``features`` is indexed by absolute snapshot index (same indexing as the
    label series' source snapshots). Returns (X, y) with y in {0, 1}.
    """
    features = np.atleast_2d(np.asarray(features, dtype=float))
    if features.ndim != 2:
        raise ShapeMismatchError("features must be (N_s, dim)")
    if tau_b_steps < 0:
        raise HorizonOutOfRangeError("tau_b must be non-negative")
    lo = labels.first_labeled
    hi = labels.last_labeled  # exclusive
    start = lo  # feature time t must itself be a valid snapshot index
    stop = hi - tau_b_steps
    if stop <= start:
        raise HorizonOutOfRangeError(
            f"horizon of {tau_b_steps} steps leaves no labeled targets"
        )
    t = np.arange(start, stop)
    x = features[t]
    y = np.array([labels.label_of(i + tau_b_steps) for i in t], dtype=int)
    return x, y


def chronological_split(x: np.ndarray, y: np.ndarray, train_fraction: float = 0.5):
    cut = int(len(x) * train_fraction)
    return (x[:cut], y[:cut]), (x[cut:], y[cut:])


@dataclass
class SvmModel:
    support_vectors: np.ndarray  # (n_sv, dim)
    dual_coeffs: np.ndarray  # alpha_i >= 0 for the support vectors
    support_labels: np.ndarray  # y_i in {-1, +1}
    bias: float
    gamma: float
    c: float
    kkt_gap: float = float("nan")  # converged violating-pair gap on train data
    n_iter: int = 0

    def decision(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        k = _rbf(x, self.support_vectors, self.gamma)
        return k @ (self.dual_coeffs * self.support_labels) + self.bias

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Class labels in {0, 1}."""
        return (self.decision(x) >= 0).astype(int)


def _rbf(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    d2 = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-gamma * d2)


def default_gamma(x: np.ndarray) -> float:
    """1 / (dim * feature variance), the usual scale heuristic."""
    x = np.atleast_2d(x)
    v = float(x.var())
    return 1.0 / (x.shape[1] * v) if v > 0 else 1.0


def stratified_subsample(x, y, max_train: int, seed: int = 0):
    """At most max_train points, class proportions preserved, seeded."""
    if len(x) <= max_train:
        return x, y
    rng = np.random.default_rng(seed)
    idx_parts = []
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        take = max(1, int(round(max_train * members.size / len(y))))
        idx_parts.append(rng.choice(members, size=min(take, members.size), replace=False))
    idx = np.sort(np.concatenate(idx_parts))[:max_train]
    return x[idx], y[idx]


def train_svm(
    features: np.ndarray,
    targets: np.ndarray,
    c: float = 1.0,
    gamma: float = None,
    max_train: int = 5000,
    tol: float = 1e-3,
    max_passes: int = 200,
    seed: int = 0,
) -> SvmModel:
    """Soft-margin RBF SVM trained with SMO (maximal-violating-pair updates).

    Training data larger than ``max_train`` is stratified-subsampled first.
    The stopping rule is the standard dual KKT gap <= tol.
    """
    x = np.atleast_2d(np.asarray(features, dtype=float))
    yz = np.asarray(targets).ravel()
    classes = np.unique(yz)
    if classes.size < 2:
        raise SingleClassError("training data contains a single class")
    if classes.size > 2:
        raise ValueError("binary classification only")
    x, yz = stratified_subsample(x, yz, max_train, seed=seed)
    y = np.where(yz == classes.max(), 1.0, -1.0)
    n = len(y)
    if gamma is None:
        gamma = default_gamma(x)
    k = _rbf(x, x, gamma)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the dual objective 0.5 a'Qa - e'a
    max_iter = max_passes * n
    gap = np.inf
    it = 0
    for it in range(max_iter):
        yg = -y * grad
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
        i = np.argmax(np.where(up, yg, -np.inf))
        j = np.argmin(np.where(low, yg, np.inf))
        gap = yg[i] - yg[j]
        if gap <= tol:
            break
        # second-order working pair update (standard SMO pair step)
        q = k[i, i] + k[j, j] - 2.0 * k[i, j]
        q = max(q, 1e-12)
        delta = gap / q
        # clip to the box for both coordinates along the feasible direction
        if y[i] > 0:
            delta = min(delta, c - alpha[i])
        else:
            delta = min(delta, alpha[i])
        if y[j] > 0:
            delta = min(delta, alpha[j])
        else:
            delta = min(delta, c - alpha[j])
        alpha[i] += y[i] * delta
        alpha[j] -= y[j] * delta
        grad += delta * y * (k[:, i] - k[:, j])
    sv = alpha > 1e-10
    # bias from free support vectors, else midpoint of the KKT bounds
    yg = -y * grad
    free = sv & (alpha < c - 1e-10)
    if np.any(free):
        bias = float(np.mean(yg[free]))
    else:
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
        bias = float((np.max(np.where(up, yg, -np.inf)) + np.min(np.where(low, yg, np.inf))) / 2.0)
    return SvmModel(
        support_vectors=x[sv].copy(),
        dual_coeffs=alpha[sv].copy(),
        support_labels=y[sv].copy(),
        bias=bias,
        gamma=gamma,
        c=c,
        kkt_gap=float(gap),
        n_iter=it,
    )


def accuracy(model: SvmModel, x: np.ndarray, y01: np.ndarray):
    """(overall accuracy, bursting recall, majority baseline) in percent."""
    y01 = np.asarray(y01).ravel()
    pred = model.predict(x)
    acc = 100.0 * float(np.mean(pred == y01))
    pos = y01 == 1
    recall = 100.0 * float(np.mean(pred[pos] == 1)) if np.any(pos) else float("nan")
    majority = 100.0 * float(max(np.mean(y01 == 1), np.mean(y01 == 0)))
    return acc, recall, majority


def evaluate_horizon_sweep(
    features_by_indicator: dict,
    labels,
    tau_b_steps_list,
    c: float = 1.0,
    gamma: float = None,
    max_train: int = 5000,
    seed: int = 0,
):
    """Accuracy table over indicators and horizons, mirroring the burst study.

    Returns a list of row dicts: indicator, tau_b_steps, accuracy_pct,
    recall_pct, majority_pct. The majority-class baseline is always
    reported so indicator skill can be judged against it.
    """
    rows = []
    for name, features in features_by_indicator.items():
        for k in tau_b_steps_list:
            x, y = build_dataset(features, labels, k)
            (x_tr, y_tr), (x_te, y_te) = chronological_split(x, y)
            model = train_svm(
                x_tr, y_tr, c=c, gamma=gamma, max_train=max_train, seed=seed
            )
            acc, recall, majority = accuracy(model, x_te, y_te)
            rows.append(
                {
                    "indicator": name,
                    "tau_b_steps": k,
                    "accuracy_pct": acc,
                    "recall_pct": recall,
                    "majority_pct": majority,
                }
            )
    return rows
