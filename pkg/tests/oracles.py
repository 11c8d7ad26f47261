"""Independent reference implementations used to cross-check the library.

These are deliberately written as naive, literal transcriptions (loops, no
shared code with the package) so that agreement is meaningful.
"""

import numpy as np


def label_sequence_reference(norms, norm_threshold=60.0, diff_threshold=5.0, b=10, f=10):
    """Line-by-line reference of the quiescent/bursting labeling rule."""
    norms = list(norms)
    ns = len(norms)
    out = []
    for i in range(b, ns - f):
        if norms[i] < norm_threshold:
            d_p = [abs(norms[j] - norms[i]) for j in range(i - b, i)]
            b_p = sum(1 for d in d_p if d > diff_threshold)
            d_f = [abs(norms[j] - norms[i]) for j in range(i, i + f)]
            b_f = sum(1 for d in d_f if d > diff_threshold)
            out.append(0 if (b_p == 0 or b_f == 0) else 1)
        else:
            out.append(1)
    return np.array(out, dtype=np.int8)


def kl_reference(mass_pred, mass_truth):
    """Double-loop restricted-support KL over per-cell probability masses."""
    total = 0.0
    for i in range(mass_pred.shape[0]):
        for j in range(mass_pred.shape[1]):
            p = mass_pred[i, j]
            q = mass_truth[i, j]
            if p > 0 and q > 0:
                total += p * np.log(p / q)
    return total


def fd_gradient(loss_fn, arrays, eps=1e-6):
    """Central finite differences of loss_fn() w.r.t. a list of arrays."""
    grads = []
    for a in arrays:
        g = np.zeros_like(a)
        it = np.nditer(a, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            old = a[idx]
            a[idx] = old + eps
            lp = loss_fn()
            a[idx] = old - eps
            lm = loss_fn()
            a[idx] = old
            g[idx] = (lp - lm) / (2.0 * eps)
        grads.append(g)
    return grads


def max_rel_grad_error(analytic, fd):
    """Worst relative deviation with the usual small-gradient floor.

    Near-zero entries are compared against a floor of 1e-3 times the largest
    gradient magnitude: below that, central differences are dominated by
    round-off of the loss itself and a pure relative comparison is
    meaningless.
    """
    gmax = max(float(np.max(np.abs(g))) for g in analytic)
    floor = max(1e-3 * gmax, 1e-12)
    worst = 0.0
    for ga, gf in zip(analytic, fd):
        denom = np.maximum(np.maximum(np.abs(ga), np.abs(gf)), floor)
        worst = max(worst, float(np.max(np.abs(ga - gf) / denom)))
    return worst


def fd_curl(u, v, lx, ly):
    """Centered-difference curl dv/dx - du/dy on the periodic grid."""
    nx, ny = u.shape
    hx, hy = lx / nx, ly / ny
    dvdx = (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / (2 * hx)
    dudy = (np.roll(u, -1, axis=1) - np.roll(u, 1, axis=1)) / (2 * hy)
    return dvdx - dudy


def fd_div(u, v, lx, ly):
    """Centered-difference divergence du/dx + dv/dy on the periodic grid."""
    nx, ny = u.shape
    hx, hy = lx / nx, ly / ny
    dudx = (np.roll(u, -1, axis=0) - np.roll(u, 1, axis=0)) / (2 * hx)
    dvdy = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2 * hy)
    return dudx + dvdy
