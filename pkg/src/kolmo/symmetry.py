"""Symmetry reduction of vorticity snapshots.

Kolmogorov flow is equivariant under a continuous translation in x, a
shift-reflect operation S (reflect x, shift y by pi/n, flip vorticity sign),
and a rotation through pi. This module factors these out of snapshot data:

- ``phase_align`` removes the x-translation with the method of slices,
  rotating every snapshot's spectrum so the (1,0) Fourier mode is a pure
  cosine (zero spatial phase).
- ``collapse_shift_reflect`` maps each aligned snapshot into the canonical
  shift-reflect cell, selected by the sign indicators of the (0,1) phase
  and of Re[a_{2,0}].
- ``collapse_rotation`` additionally quotients the rotation by picking the
  candidate closest to a template snapshot.

Phases are reported in (-pi, pi]. All operations are exact grid
permutations or spectral phase multiplications, so KE, dissipation, and
power input are preserved to round-off.
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import (
    DegeneratePhaseError,
    GridIncompatibleError,
    IndicatorDegenerateError,
    ShapeMismatchError,
)
from .spectral import Grid, SnapshotSeries

PHASE_EPS = 1e-12  # below this normalized mode amplitude, a phase is undefined


@dataclass(frozen=True)
class SymmetryOp:
    """One group element: translate(l), shift_reflect(power), or rotate."""

    kind: str
    l: float = 0.0
    power: int = 1

    def __post_init__(self):
        if self.kind not in ("translate", "shift_reflect", "rotate"):
            raise ValueError(f"unknown symmetry op kind {self.kind!r}")


def translate(l: float) -> SymmetryOp:
    return SymmetryOp("translate", l=float(l))


def shift_reflect(power: int = 1) -> SymmetryOp:
    return SymmetryOp("shift_reflect", power=int(power))


def rotate() -> SymmetryOp:
    return SymmetryOp("rotate")


@dataclass
class PhaseTrace:
    """Per-snapshot spatial phases, radians in (-pi, pi]."""

    phi_x: np.ndarray
    phi_y: np.ndarray


@dataclass
class AlignedSeries:
    """Phase-aligned (and optionally symmetry-collapsed) snapshot series."""

    snapshots: np.ndarray  # (count, nx, ny)
    grid: Grid
    phase: PhaseTrace
    ops_applied: list  # per-snapshot list[SymmetryOp]
    params: object = None  # FlowParams of the source run, if known
    save_every: float = 5.0
    t0: float = 0.0

    @property
    def count(self) -> int:
        return self.snapshots.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.count) * self.save_every

    def flattened(self) -> np.ndarray:
        return self.snapshots.reshape(self.count, -1)


def wrap_angle(x):
    """Wrap angle(s) into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x), 2.0 * np.pi)


def unwrap_increments(phi: np.ndarray) -> np.ndarray:
    """Cumulative phase with each consecutive increment wrapped to (-pi, pi]."""
    phi = np.asarray(phi, dtype=float)
    if phi.size == 0:
        return phi.copy()
    steps = wrap_angle(np.diff(phi))
    return np.concatenate([[phi[0]], phi[0] + np.cumsum(steps)])


def mode_amplitude(w: np.ndarray, mx: int, my: int) -> complex:
    """Normalized Fourier coefficient a_{mx,my} of a real-space snapshot."""
    a = np.fft.fft2(w)
    return complex(a[mx % w.shape[0], my % w.shape[1]]) / w.size


def phases(w: np.ndarray):
    """(phi_x, phi_y) from the (1,0) and (0,1) Fourier modes.

    Raises DegeneratePhaseError when the (1,0) amplitude is too small for
    phi_x to be meaningful; phi_y is returned as-is (its degeneracy matters
    only to the shift-reflect indicators, checked there).
    """
    a = np.fft.fft2(w)
    a10 = a[1, 0] / w.size
    a01 = a[0, 1] / w.size
    if abs(a10) < PHASE_EPS:
        raise DegeneratePhaseError(
            f"|a_(1,0)| = {abs(a10):.3e} too small; spatial phase undefined"
        )
    return float(np.arctan2(a10.imag, a10.real)), float(np.arctan2(a01.imag, a01.real))


def apply_op(op: SymmetryOp, w: np.ndarray, grid: Grid, n: int = 2) -> np.ndarray:
    """Apply one symmetry operation to a real-space vorticity snapshot."""
    if w.shape != grid.shape:
        raise ShapeMismatchError(f"snapshot shape {w.shape} != grid {grid.shape}")
    nx, ny = grid.nx, grid.ny
    if op.kind == "translate":
        ah = sfft.rfft2(w)
        kx = grid.alpha * np.fft.fftfreq(nx, d=1.0 / nx)[:, None]
        ah *= np.exp(-1j * kx * op.l)
        return sfft.irfft2(ah, s=(nx, ny))
    if op.kind == "rotate":
        return w[np.ix_((-np.arange(nx)) % nx, (-np.arange(ny)) % ny)]
    # shift-reflect, possibly repeated
    if ny % (2 * n) != 0:
        raise GridIncompatibleError(
            f"pi/n shift needs ny divisible by 2n, got ny={ny}, n={n}"
        )
    s = ny // (2 * n)
    ix = (-np.arange(nx)) % nx
    out = w
    for _ in range(op.power % (2 * n)):  # S has order 2n
        out = -out[np.ix_(ix, (np.arange(ny) + s) % ny)]
    return out


def align_snapshot(w: np.ndarray, grid: Grid):
    """Phase-align one snapshot; returns (aligned, phi_x, phi_y)."""
    phi_x, phi_y = phases(w)
    aligned = apply_op(translate(phi_x / grid.alpha), w, grid)
    return aligned, phi_x, phi_y


def phase_align(series: SnapshotSeries) -> AlignedSeries:
    """Method of slices: zero the (1,0)-mode phase of every snapshot."""
    count = series.count
    out = np.empty_like(series.snapshots)
    phi_x = np.empty(count)
    phi_y = np.empty(count)
    ops = []
    for i in range(count):
        out[i], phi_x[i], phi_y[i] = align_snapshot(series.snapshots[i], series.grid)
        ops.append([translate(phi_x[i] / series.grid.alpha)])
    return AlignedSeries(
        out,
        series.grid,
        PhaseTrace(phi_x, phi_y),
        ops,
        params=series.params,
        save_every=series.save_every,
        t0=series.t0,
    )


def _indicators(w: np.ndarray):
    """(phi_y, Re[a_{2,0}]) of a snapshot, normalized amplitudes."""
    a = np.fft.fft2(w)
    a01 = a[0, 1] / w.size
    a20 = a[2, 0] / w.size
    return float(np.arctan2(a01.imag, a01.real)), float(a20.real), abs(a01)


def collapse_sr_snapshot(w: np.ndarray, grid: Grid, n: int):
    """Canonical shift-reflect representative of one aligned snapshot.

    Enumerates all 2n shift-reflect powers, re-aligns the phase after each,
    and returns the unique candidate with phi_y > 0 and Re[a_{2,0}] > 0.
    """
    hits = []
    for p in range(2 * n):
        cand = apply_op(shift_reflect(p), w, grid, n) if p else w
        cand, phi, _ = align_snapshot(cand, grid)
        phi_y, re_a20, amp01 = _indicators(cand)
        if amp01 < PHASE_EPS or abs(re_a20) < PHASE_EPS:
            raise IndicatorDegenerateError(
                f"indicator within {PHASE_EPS} of zero at SR power {p}"
            )
        if phi_y > 0 and re_a20 > 0:
            hits.append((p, cand, phi))
    if len(hits) != 1:
        raise IndicatorDegenerateError(
            f"{len(hits)} shift-reflect powers satisfy the indicators (want 1)"
        )
    return hits[0]


def collapse_shift_reflect(aligned: AlignedSeries, n: int = None) -> AlignedSeries:
    """Map every aligned snapshot into the canonical shift-reflect cell."""
    n = n if n is not None else aligned.params.n
    out = np.empty_like(aligned.snapshots)
    ops = []
    for i in range(aligned.count):
        p, cand, _ = collapse_sr_snapshot(aligned.snapshots[i], aligned.grid, n)
        out[i] = cand
        ops.append(aligned.ops_applied[i] + [shift_reflect(p)])
    # phase trace keeps the phases measured on the source data
    return AlignedSeries(
        out,
        aligned.grid,
        PhaseTrace(aligned.phase.phi_x.copy(), aligned.phase.phi_y.copy()),
        ops,
        params=aligned.params,
        save_every=aligned.save_every,
        t0=aligned.t0,
    )


def collapse_rotation(
    aligned: AlignedSeries, template: np.ndarray, n: int = None
) -> AlignedSeries:
    """Quotient the rotation symmetry against a template snapshot.

    Candidates are the snapshot itself and its rotation re-collapsed into
    the shift-reflect cell; the l2-closest to the template wins, with ties
    going to the identity.
    """
    n = n if n is not None else aligned.params.n
    out = np.empty_like(aligned.snapshots)
    ops = []
    tfl = template.ravel()
    for i in range(aligned.count):
        w = aligned.snapshots[i]
        rot = apply_op(rotate(), w, aligned.grid)
        rot, _, _ = align_snapshot(rot, aligned.grid)
        p, rot_c, _ = collapse_sr_snapshot(rot, aligned.grid, n)
        d_id = np.linalg.norm(w.ravel() - tfl)
        d_rot = np.linalg.norm(rot_c.ravel() - tfl)
        if d_rot < d_id:
            out[i] = rot_c
            ops.append(aligned.ops_applied[i] + [rotate(), shift_reflect(p)])
        else:
            out[i] = w
            ops.append(list(aligned.ops_applied[i]))
    return AlignedSeries(
        out,
        aligned.grid,
        PhaseTrace(aligned.phase.phi_x.copy(), aligned.phase.phi_y.copy()),
        ops,
        params=aligned.params,
        save_every=aligned.save_every,
        t0=aligned.t0,
    )


def sr_power_of(ops: list) -> int:
    """Total shift-reflect power recorded for one snapshot."""
    return sum(op.power for op in ops if op.kind == "shift_reflect")


def was_rotated(ops: list) -> bool:
    return any(op.kind == "rotate" for op in ops)
