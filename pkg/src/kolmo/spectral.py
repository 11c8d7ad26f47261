"""Pseudo-spectral DNS of 2D Kolmogorov flow in vorticity form.

The governing equation on a doubly periodic domain [0, 2*pi/alpha] x [0, 2*pi] is

    dw/dt = -u . grad(w) + (1/Re) lap(w) - n cos(n y),

the curl of the velocity-form momentum equation with body force sin(n y) x_hat.
The state is carried as the full complex DFT of vorticity (numpy ``fft2``
layout, unnormalized); time stepping runs internally on the real-to-complex
half spectrum for speed.

Scheme: Crank-Nicolson for the viscous term, second-order Heun
predictor-corrector for advection and forcing, 2/3-rule dealiasing of the
advective product. The laminar profile is an exact fixed point of the
discrete scheme, and the discrete energy budget dKE/dt = I - D holds to
second order in dt.

Conventions: real-space fields are arrays ``w[ix, iy]`` with
``x = ix*Lx/nx``, ``y = iy*Ly/ny``; spectral coefficients ``a[mx, my]``
follow numpy fftfreq ordering with physical wavenumbers
``kx = alpha*mx``, ``ky = my``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
import scipy.fft as sfft

from .errors import NonFiniteError, ShapeMismatchError


@dataclass(frozen=True)
class Grid:
    """Doubly periodic grid; ``Lx = 2*pi/alpha``, ``Ly = 2*pi``."""

    nx: int = 32
    ny: int = 32
    alpha: float = 1.0

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8 or self.nx % 2 or self.ny % 2:
            raise ValueError("grid size must be even and >= 8 in each direction")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    @property
    def lx(self) -> float:
        return 2.0 * math.pi / self.alpha

    @property
    def ly(self) -> float:
        return 2.0 * math.pi

    @property
    def shape(self) -> tuple:
        return (self.nx, self.ny)

    @property
    def npoints(self) -> int:
        return self.nx * self.ny

    def mesh(self):
        """Real-space coordinate arrays X, Y of shape (nx, ny)."""
        x = np.arange(self.nx) * (self.lx / self.nx)
        y = np.arange(self.ny) * (self.ly / self.ny)
        return np.meshgrid(x, y, indexing="ij")

    def wavenumbers(self):
        """Physical wavenumber arrays KX, KY of shape (nx, ny), fft2 layout."""
        kx = self.alpha * np.fft.fftfreq(self.nx, d=1.0 / self.nx)
        ky = np.fft.fftfreq(self.ny, d=1.0 / self.ny)
        return np.meshgrid(kx, ky, indexing="ij")


@dataclass(frozen=True)
class FlowParams:
    """Reynolds number, forcing wavenumber, and integrator time step."""

    re: float
    n: int = 2
    dt: float = 0.01

    def __post_init__(self):
        if self.re <= 0 or self.n < 1 or self.dt <= 0:
            raise ValueError("require re > 0, n >= 1, dt > 0")


@dataclass(frozen=True)
class Diagnostics:
    """Volume-averaged kinetic energy, dissipation rate, power input."""

    ke: float
    d: float
    i: float
    t: float = 0.0


@dataclass
class SpectralField:
    """Vorticity in spectral space: full complex fft2 coefficients."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.shape:
            raise ShapeMismatchError(
                f"coeffs shape {self.coeffs.shape} != grid {self.grid.shape}"
            )

    @classmethod
    def from_physical(cls, grid: Grid, w: np.ndarray) -> "SpectralField":
        if w.shape != grid.shape:
            raise ShapeMismatchError(f"field shape {w.shape} != grid {grid.shape}")
        return cls(grid, np.fft.fft2(np.asarray(w, dtype=float)))

    def to_physical(self) -> np.ndarray:
        return np.fft.ifft2(self.coeffs).real

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def hermitian_residual(self) -> float:
        """Max deviation from a_{-kx,-ky} = conj(a_{kx,ky}), per grid point."""
        a = self.coeffs
        ix = (-np.arange(self.grid.nx)) % self.grid.nx
        iy = (-np.arange(self.grid.ny)) % self.grid.ny
        mirror = np.conj(a[np.ix_(ix, iy)])
        return float(np.max(np.abs(a - mirror))) / self.grid.npoints

    def mode(self, mx: int, my: int) -> complex:
        """Physical Fourier amplitude of mode (mx, my): DFT value / (nx*ny)."""
        return complex(self.coeffs[mx % self.grid.nx, my % self.grid.ny]) / self.grid.npoints


def _half_from_full(a: np.ndarray, ny: int) -> np.ndarray:
    return a[:, : ny // 2 + 1].copy()


def _full_from_half(ah: np.ndarray, nx: int, ny: int) -> np.ndarray:
    """Rebuild the full Hermitian spectrum from the rfft2 half spectrum."""
    full = np.empty((nx, ny), dtype=complex)
    nyh = ny // 2 + 1
    full[:, :nyh] = ah
    ix = (-np.arange(nx)) % nx
    # columns ny-1 .. nyh map to conj of columns 1 .. ny//2-1 (reversed)
    full[:, nyh:] = np.conj(ah[np.ix_(ix, np.arange(ny // 2 - 1, 0, -1))])
    return full


class Stepper:
    """Precomputed operators for one (grid, params) pair; rfft2 workspace."""

    def __init__(self, grid: Grid, params: FlowParams):
        self.grid = grid
        self.params = params
        nx, ny = grid.nx, grid.ny
        nyh = ny // 2 + 1
        kx = grid.alpha * np.fft.fftfreq(nx, d=1.0 / nx)
        ky = np.fft.rfftfreq(ny, d=1.0 / ny)
        self.kx = kx[:, None]
        self.ky = ky[None, :]
        self.k2 = self.kx**2 + self.ky**2
        with np.errstate(divide="ignore"):
            inv = np.where(self.k2 > 0, 1.0 / np.where(self.k2 > 0, self.k2, 1.0), 0.0)
        self.inv_k2 = inv
        # 2/3 rule in mode-number units: keep |mx| <= nx/3, |my| <= ny/3
        mx = np.fft.fftfreq(nx, d=1.0 / nx)[:, None]
        my = np.fft.rfftfreq(ny, d=1.0 / ny)[None, :]
        self.dealias = (np.abs(mx) <= nx / 3) & (np.abs(my) <= ny / 3)
        dt = params.dt
        lam = -self.k2 / params.re
        self.cn_num = 1.0 + 0.5 * dt * lam
        self.cn_den_inv = 1.0 / (1.0 - 0.5 * dt * lam)
        _, yy = grid.mesh()
        self.forcing = sfft.rfft2(-params.n * np.cos(params.n * yy))
        # Parseval weights for half-spectrum sums: interior ky columns count twice
        w = np.full(nyh, 2.0)
        w[0] = 1.0
        if ny % 2 == 0:
            w[-1] = 1.0
        self.parseval_w = w[None, :]
        self._ikx = 1j * self.kx
        self._iky = 1j * self.ky
        self._stack = np.empty((4, nx, nyh), dtype=complex)

    def nonlinear(self, ah: np.ndarray) -> np.ndarray:
        """-dealias(F{u.grad w}) + F{forcing}, from half-spectrum vorticity."""
        nx, ny = self.grid.nx, self.grid.ny
        psi = ah * self.inv_k2
        s = self._stack
        np.multiply(self._iky, psi, out=s[0])       # u_hat
        np.multiply(self._ikx, psi, out=s[1])
        np.negative(s[1], out=s[1])                 # v_hat
        np.multiply(self._ikx, ah, out=s[2])        # w_x hat
        np.multiply(self._iky, ah, out=s[3])        # w_y hat
        g = sfft.irfft2(s, s=(nx, ny), axes=(-2, -1))
        adv = g[0] * g[2]
        adv += g[1] * g[3]
        out = sfft.rfft2(adv)
        out *= self.dealias
        np.negative(out, out=out)
        out += self.forcing
        return out

    def step_half(self, ah: np.ndarray) -> np.ndarray:
        """One CN-Heun step on the half spectrum."""
        n1 = self.nonlinear(ah)
        base = self.cn_num * ah
        astar = (base + self.params.dt * n1) * self.cn_den_inv
        n2 = self.nonlinear(astar)
        n1 += n2
        anew = (base + (0.5 * self.params.dt) * n1) * self.cn_den_inv
        anew[0, 0] = 0.0
        return anew

    def advance(self, ah: np.ndarray, nsteps: int) -> np.ndarray:
        for _ in range(nsteps):
            ah = self.step_half(ah)
        if not np.isfinite(ah).all():
            raise NonFiniteError(
                "vorticity coefficients became non-finite; reduce dt"
            )
        return ah

    def diagnostics_half(self, ah: np.ndarray):
        """(ke, d, i) from half-spectrum vorticity via Parseval sums."""
        nt2 = float(self.grid.npoints) ** 2
        p = self.parseval_w * np.abs(ah) ** 2
        ke = 0.5 * float(np.sum(p * self.inv_k2)) / nt2
        d = float(np.sum(p)) / nt2 / self.params.re
        n = self.params.n
        i = -float(ah[0, n].real) / (n * self.grid.npoints)
        return ke, d, i


@lru_cache(maxsize=16)
def _stepper(grid: Grid, params: FlowParams) -> Stepper:
    return Stepper(grid, params)


def laminar_state(grid: Grid, params: FlowParams) -> SpectralField:
    """Steady laminar vorticity -(Re/n) cos(n y)."""
    _, yy = grid.mesh()
    w = -(params.re / params.n) * np.cos(params.n * yy)
    return SpectralField.from_physical(grid, w)


def critical_reynolds(n: int) -> float:
    """Linear stability threshold of the laminar state for forcing wavenumber n."""
    return n**1.5 * 2.0**0.25


def random_initial_condition(grid: Grid, seed: int = 0, ke: float = 1.0) -> SpectralField:
    """Random vorticity with spectral envelope exp(-k^2/4), rescaled to the target KE.

    Mean mode and Nyquist rows are zeroed; the associated velocity field is
    divergence-free by construction of the streamfunction inversion.
    """
    rng = np.random.default_rng(seed)
    nx, ny = grid.nx, grid.ny
    kxg, kyg = grid.wavenumbers()
    k2 = kxg**2 + kyg**2
    env = np.exp(-k2 / 4.0)
    ah = rng.standard_normal((nx, ny)) + 1j * rng.standard_normal((nx, ny))
    ah *= env * grid.npoints
    # hermitian projection onto a real field
    ix = (-np.arange(nx)) % nx
    iy = (-np.arange(ny)) % ny
    ah = 0.5 * (ah + np.conj(ah[np.ix_(ix, iy)]))
    ah[0, 0] = 0.0
    ah[nx // 2, :] = 0.0
    ah[:, ny // 2] = 0.0
    f = SpectralField(grid, ah)
    p = FlowParams(re=1.0, n=1)  # placeholder; KE does not depend on re/n
    cur = diagnostics(f, p).ke
    if cur > 0:
        f.coeffs *= math.sqrt(ke / cur)
    return f


def velocity_from_vorticity(w: SpectralField):
    """Velocity components (u, v) from vorticity via streamfunction inversion.

    lap(psi) = -w, u = dpsi/dy, v = -dpsi/dx; divergence-free by construction.
    The zero mode of psi is set to zero.
    """
    grid = w.grid
    kx, ky = grid.wavenumbers()
    k2 = kx**2 + ky**2
    psi = np.where(k2 > 0, w.coeffs / np.where(k2 > 0, k2, 1.0), 0.0)
    u = SpectralField(grid, 1j * ky * psi)
    v = SpectralField(grid, -1j * kx * psi)
    return u, v


def diagnostics(w: SpectralField, params: FlowParams, t: float = 0.0) -> Diagnostics:
    """KE, D, I via Parseval sums over the vorticity spectrum."""
    grid = w.grid
    kx, ky = grid.wavenumbers()
    k2 = kx**2 + ky**2
    inv = np.where(k2 > 0, 1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
    nt2 = float(grid.npoints) ** 2
    p = np.abs(w.coeffs) ** 2
    ke = 0.5 * float(np.sum(p * inv)) / nt2
    d = float(np.sum(p)) / nt2 / params.re
    i = -float(w.coeffs[0, params.n % grid.ny].real) / (params.n * grid.npoints)
    return Diagnostics(ke=ke, d=d, i=i, t=t)


def step(w: SpectralField, params: FlowParams) -> SpectralField:
    """Advance vorticity by one time step dt."""
    st = _stepper(w.grid, params)
    ah = st.step_half(_half_from_full(w.coeffs, w.grid.ny))
    if not np.isfinite(ah).all():
        raise NonFiniteError("vorticity coefficients became non-finite; reduce dt")
    return SpectralField(w.grid, _full_from_half(ah, w.grid.nx, w.grid.ny))


def advance(w: SpectralField, params: FlowParams, t: float) -> SpectralField:
    """Integrate for a time interval t (a near-integer multiple of dt)."""
    nsteps = _steps_for(t, params.dt)
    st = _stepper(w.grid, params)
    ah = st.advance(_half_from_full(w.coeffs, w.grid.ny), nsteps)
    return SpectralField(w.grid, _full_from_half(ah, w.grid.nx, w.grid.ny))


def _steps_for(t: float, dt: float) -> int:
    nsteps = int(round(t / dt))
    if abs(nsteps * dt - t) > 1e-9 * max(1.0, abs(t)):
        raise ValueError(f"t={t} is not an integer multiple of dt={dt}")
    return nsteps


@dataclass
class SnapshotSeries:
    """Time-ordered real-space vorticity snapshots plus run metadata."""

    snapshots: np.ndarray  # (count, nx, ny)
    grid: Grid
    params: FlowParams
    save_every: float
    t0: float = 0.0

    @property
    def count(self) -> int:
        return self.snapshots.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.count) * self.save_every

    def flattened(self) -> np.ndarray:
        """(count, nx*ny) row-major view of the snapshots."""
        return self.snapshots.reshape(self.count, -1)


def series_observables(snapshots: np.ndarray, grid: Grid, params: FlowParams) -> dict:
    """Per-snapshot KE, D, I, Re/Im of a_{0,1}, and flattened l2 norm.

    ``snapshots`` is (count, nx, ny) real-space vorticity; everything is
    computed from batched half-spectrum Parseval sums.
    """
    snaps = np.asarray(snapshots, dtype=float)
    if snaps.ndim == 2:
        snaps = snaps[None]
    nx, ny = grid.nx, grid.ny
    nyh = ny // 2 + 1
    ah = sfft.rfft2(snaps, axes=(-2, -1))
    kx = grid.alpha * np.fft.fftfreq(nx, d=1.0 / nx)[:, None]
    ky = np.fft.rfftfreq(ny, d=1.0 / ny)[None, :]
    k2 = kx**2 + ky**2
    inv = np.where(k2 > 0, 1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
    w = np.full(nyh, 2.0)
    w[0] = 1.0
    if ny % 2 == 0:
        w[-1] = 1.0
    p = w[None, None, :] * np.abs(ah) ** 2
    nt2 = float(grid.npoints) ** 2
    ke = 0.5 * np.sum(p * inv, axis=(1, 2)) / nt2
    d = np.sum(p, axis=(1, 2)) / nt2 / params.re
    i = -ah[:, 0, params.n].real / (params.n * grid.npoints)
    a01 = ah[:, 0, 1] / grid.npoints
    norm = np.linalg.norm(snaps.reshape(snaps.shape[0], -1), axis=1)
    return {
        "ke": ke,
        "d": d,
        "i": i,
        "re_a01": a01.real,
        "im_a01": a01.imag,
        "norm": norm,
    }


def simulate(
    ic: SpectralField,
    params: FlowParams,
    t_total: float,
    save_every: float,
    record_diagnostics: bool = False,
):
    """Integrate from ``ic`` and save real-space vorticity every ``save_every``.

    The initial condition is included, so the series holds
    ``floor(t_total/save_every) + 1`` snapshots. Transient removal is the
    caller's responsibility (see ``advance``). With ``record_diagnostics``
    a per-step Diagnostics list is returned alongside the series.
    """
    grid = ic.grid
    steps_per_save = _steps_for(save_every, params.dt)
    if steps_per_save < 1:
        raise ValueError("save_every must be >= dt")
    n_saves = int(math.floor(t_total / save_every + 1e-9))
    st = _stepper(grid, params)
    ah = _half_from_full(ic.coeffs, grid.ny)
    out = np.empty((n_saves + 1, grid.nx, grid.ny))
    out[0] = sfft.irfft2(ah, s=grid.shape)
    diags = []
    if record_diagnostics:
        diags.append(Diagnostics(*st.diagnostics_half(ah), t=0.0))
    for isave in range(1, n_saves + 1):
        if record_diagnostics:
            for k in range(steps_per_save):
                ah = st.step_half(ah)
                t = ((isave - 1) * steps_per_save + k + 1) * params.dt
                diags.append(Diagnostics(*st.diagnostics_half(ah), t=t))
            if not np.isfinite(ah).all():
                raise NonFiniteError("vorticity became non-finite; reduce dt")
        else:
            ah = st.advance(ah, steps_per_save)
        out[isave] = sfft.irfft2(ah, s=grid.shape)
    series = SnapshotSeries(out, grid, params, save_every)
    if record_diagnostics:
        return series, diags
    return series
