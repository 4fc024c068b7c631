"""Vortex scattering kernels, the gauge action on them, and the
gauge-equivalence solver.

A plane kernel is stored structurally: flux parameters (alpha, step index),
integer prefactor winding, smooth in/out phase profiles, and a smooth
remainder grid with a declared diagonal bound C |theta - theta'|^{-delta}.
The delta distribution on the diagonal is never discretized; channel
arithmetic and off-diagonal closed forms carry the singular part exactly.

Channel constants. Writing u = theta - theta' and [a] for the integer step
of the flux, the convolution part is

    S_a(u) = cos(a pi) delta(u) + (i sin(a pi) / pi) p.v. e^{i[a]u}/(1 - e^{iu}).

Its Fourier eigenvalues 2 pi c_k equal e^{+i a pi} for k >= [a] and
e^{-i a pi} for k < [a]; the jump channel k = [a] sits on the + side. The
closed form was fixed against the principal-value quadrature oracle
(ab_channel_pv_quadrature), not assumed.

The gauge e^{i(m theta + phi)} multiplies kernels by e^{i(m theta + phi(theta))}
on the left and e^{-i(m(theta' + pi) + phi(theta' + pi))} on the right; the
sign conventions are pinned by requiring the action to compose as a group and
the channel spectrum to obey the Fourier shift law
spectrum(gauged kernel) = spectrum of flux alpha + m.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .angular import AngularFunction, SphereFunction, SphereGrid
from .errors import (
    DimensionMismatch,
    GridMismatch,
    RemainderBoundViolated,
    SingularPartMissing,
)
from .fields import GaugeElement

DIAG_MARGIN_CELLS = 5
INTEGER_FLUX_TOL = 1e-9


def flux_step(alpha: float) -> int:
    """Integer step [a] entering the singular kernel phase."""
    return int(np.floor(alpha + 1e-12))


def is_integer_flux(alpha: float, tol: float = INTEGER_FLUX_TOL) -> bool:
    return abs(alpha - np.round(alpha)) < tol


# ===================================================================
# channels
# ===================================================================

@dataclass(frozen=True)
class ChannelSpectrum:
    """Unimodular eigenvalues 2 pi c_k of a convolution kernel, k in [-N, N]."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        vals = np.asarray(self.values, dtype=complex)
        if idx.shape != vals.shape or idx.ndim != 1:
            raise ValueError("indices and values must be aligned vectors")
        if np.any(np.diff(idx) != 1):
            raise ValueError("channel indices must be consecutive")
        if np.max(np.abs(np.abs(vals) - 1.0)) > 1e-6:
            raise ValueError("channel eigenvalues must be unimodular within 1e-6")
        idx.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    def value(self, k: int) -> complex:
        pos = int(k) - int(self.indices[0])
        if pos < 0 or pos >= self.indices.size:
            raise KeyError(f"channel {k} outside stored window")
        return complex(self.values[pos])

    def shifted(self, by: int) -> "ChannelSpectrum":
        return ChannelSpectrum(indices=self.indices + int(by), values=self.values)

    def distance(self, other: "ChannelSpectrum") -> float:
        lo = max(self.indices[0], other.indices[0])
        hi = min(self.indices[-1], other.indices[-1])
        if hi < lo:
            raise GridMismatch("channel windows do not overlap")
        a = self.values[lo - self.indices[0]: hi + 1 - self.indices[0]]
        b = other.values[lo - other.indices[0]: hi + 1 - other.indices[0]]
        return float(np.max(np.abs(a - b)))


def ab_kernel_channels(alpha: float, N: int) -> ChannelSpectrum:
    """Channel eigenvalues of the flux-alpha convolution kernel.

    Closed form validated against ab_channel_pv_quadrature: e^{+i alpha pi}
    at and above the step [alpha], e^{-i alpha pi} below. Integer flux gives
    the exact constant (-1)^alpha in every channel.
    """
    if N < 1:
        raise ValueError("channel cutoff must be at least 1")
    ks = np.arange(-N, N + 1)
    if is_integer_flux(alpha):
        a = int(np.round(alpha))
        vals = np.full(ks.size, complex((-1.0) ** a))
        return ChannelSpectrum(indices=ks, values=vals)
    step = flux_step(alpha)
    vals = np.where(ks >= step, np.exp(1j * np.pi * alpha), np.exp(-1j * np.pi * alpha))
    return ChannelSpectrum(indices=ks, values=vals.astype(complex))


def ab_channel_pv_quadrature(alpha: float, k: int,
                             exclusion_radii=(1e-2, 1e-3, 1e-4)) -> complex:
    """Oracle for one channel: symmetric-exclusion quadrature of the
    principal-value integral with Richardson extrapolation in the radius.

    2 pi c_k = cos(a pi) + (i sin(a pi)/pi) p.v. int_0^{2pi}
               e^{i([a]-k)t} / (1 - e^{it}) dt.
    """
    step = flux_step(alpha)
    n = step - k

    def pv_at(eps):
        re, _ = quad(lambda t: np.real(np.exp(1j * n * t) / (1 - np.exp(1j * t))),
                     eps, 2 * np.pi - eps, limit=400, epsabs=1e-13, epsrel=1e-12)
        im, _ = quad(lambda t: np.imag(np.exp(1j * n * t) / (1 - np.exp(1j * t))),
                     eps, 2 * np.pi - eps, limit=400, epsabs=1e-13, epsrel=1e-12)
        return re + 1j * im

    vals = [pv_at(e) for e in exclusion_radii]
    # Richardson in the radius: the exclusion error is linear in eps
    e = np.asarray(exclusion_radii, dtype=float)
    levels = len(vals)
    for lvl in range(1, levels):
        nxt = []
        for i in range(levels - lvl):
            x0, x1 = e[i], e[i + lvl]
            nxt.append((x0 * vals[i + 1] - x1 * vals[i]) / (x0 - x1))
        vals = nxt
    pv = vals[0]
    return complex(np.cos(np.pi * alpha) + 1j * np.sin(np.pi * alpha) / np.pi * pv)


def singular_offdiagonal(alpha: float, u) -> np.ndarray:
    """Closed-form value of the convolution part away from the diagonal:
    (i sin(a pi)/pi) e^{i[a]u} (1/2 + (i/2) cot(u/2))."""
    u = np.asarray(u, dtype=float)
    core = 0.5 + 0.5j / np.tan(0.5 * u)
    out = (1j * np.sin(np.pi * alpha) / np.pi) * np.exp(1j * flux_step(alpha) * u) * core
    return out


# ===================================================================
# plane kernels
# ===================================================================

@dataclass(frozen=True)
class ScatteringKernel:
    """Plane scattering kernel in structural form.

    Evaluated value away from the diagonal:
    e^{i(w theta + p(theta))} (S_alpha(theta - theta') + R(theta, theta'))
    e^{-i(w(theta' + pi) + q(theta' + pi))}
    with winding w, out phase p, in phase q, and smooth remainder R given on
    a uniform grid (trigonometric interpolation off the nodes).
    """

    alpha: float
    winding: int
    phase_out: AngularFunction
    phase_in: AngularFunction
    thetas: np.ndarray
    remainder: np.ndarray
    bound_C: float
    bound_delta: float
    lam: float = 1.0
    dimension: int = 2

    def __post_init__(self):
        th = np.asarray(self.thetas, dtype=float)
        R = np.asarray(self.remainder, dtype=complex)
        M = th.size
        if R.shape != (M, M):
            raise ValueError("remainder grid must be square over the angle grid")
        if M < 16 or not np.allclose(th, np.arange(M) * 2 * np.pi / M, atol=1e-12):
            raise ValueError("angle grid must be uniform on [0, 2 pi), at least 16 nodes")
        if not (0 <= self.bound_delta < 1):
            raise ValueError("remainder bound exponent must lie in [0, 1)")
        th.flags.writeable = False
        R.flags.writeable = False
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "remainder", R)
        verify_remainder_bound(th, R, self.bound_C, self.bound_delta)

    @property
    def n_grid(self) -> int:
        return self.thetas.size

    def effective_flux(self) -> float:
        return self.alpha + self.winding

    def singular_parameters(self) -> tuple:
        """(cos(a pi), sin(a pi), [a]) of the stored base flux."""
        return (float(np.cos(np.pi * self.alpha)), float(np.sin(np.pi * self.alpha)),
                flux_step(self.alpha))

    def prefactor_out(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.exp(1j * (self.winding * theta + self.phase_out(theta)))

    def prefactor_in(self, theta_prime) -> np.ndarray:
        t = np.asarray(theta_prime, dtype=float) + np.pi
        return np.exp(-1j * (self.winding * t + self.phase_in(t)))

    def remainder_at(self, theta, theta_prime) -> np.ndarray:
        """Trigonometric interpolation of the remainder grid (exact for
        band-limited remainders; only meaningful off the diagonal)."""
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        tp = np.atleast_1d(np.asarray(theta_prime, dtype=float))
        M = self.n_grid
        fr = np.fft.fft2(self.remainder) / M**2
        js = np.fft.fftfreq(M, d=1.0 / M).astype(int)
        Eo = np.exp(1j * np.outer(th, js))
        Ei = np.exp(1j * np.outer(js, tp))
        vals = Eo @ fr @ Ei
        return vals[0, 0] if (np.isscalar(theta) and np.isscalar(theta_prime)) else vals

    def evaluate(self, theta, theta_prime) -> np.ndarray:
        """Kernel value away from the diagonal (the delta term is excluded)."""
        th = np.asarray(theta, dtype=float)
        tp = np.asarray(theta_prime, dtype=float)
        u = th - tp if th.shape == tp.shape else np.subtract.outer(th, tp)
        base = singular_offdiagonal(self.alpha, u)
        rem = self.remainder_at(theta, theta_prime)
        if th.shape == tp.shape and rem.ndim == 2 and np.ndim(u) == 1:
            rem = np.diag(rem)
        out = self.prefactor_out(th)
        inc = self.prefactor_in(tp)
        pref = out * inc if np.ndim(u) <= 1 else np.multiply.outer(out, inc)
        return pref * (base + rem)

    def value_grid(self) -> np.ndarray:
        """Full off-diagonal value matrix on the stored grid (diagonal cells
        hold only prefactor * remainder; comparisons must mask the band)."""
        th = self.thetas
        u = np.subtract.outer(th, th)
        mask = ~np.eye(th.size, dtype=bool)
        base = np.zeros((th.size, th.size), dtype=complex)
        base[mask] = singular_offdiagonal(self.alpha, u[mask])
        pref = np.multiply.outer(self.prefactor_out(th), self.prefactor_in(th))
        return pref * (base + self.remainder)

    def channel_spectrum(self, N: int = 32) -> ChannelSpectrum:
        """Channels of the convolution-plus-winding part: the winding
        prefactors shift the effective flux by the Fourier shift law."""
        return ab_kernel_channels(self.effective_flux(), N)

    def header_dict(self) -> dict:
        return {
            "schema_version": 1,
            "dimension": self.dimension,
            "lam": self.lam,
            "alpha": self.alpha,
            "winding": self.winding,
            "delta": self.bound_delta,
            "C": self.bound_C,
            "n_grid": self.n_grid,
            "phase_out": self.phase_out.to_triples(),
            "phase_in": self.phase_in.to_triples(),
        }

    @classmethod
    def from_header_and_grid(cls, header: dict, remainder: np.ndarray) -> "ScatteringKernel":
        M = int(header["n_grid"])
        return cls(alpha=float(header["alpha"]), winding=int(header["winding"]),
                   phase_out=AngularFunction.from_triples(header["phase_out"]),
                   phase_in=AngularFunction.from_triples(header["phase_in"]),
                   thetas=np.arange(M) * 2 * np.pi / M,
                   remainder=np.asarray(remainder, dtype=complex).reshape(M, M),
                   bound_C=float(header["C"]), bound_delta=float(header["delta"]),
                   lam=float(header["lam"]), dimension=int(header.get("dimension", 2)))

    def remainder_to_csv(self, path) -> None:
        M = self.n_grid
        ii, jj = np.divmod(np.arange(M * M), M)
        body = np.column_stack([ii, jj, self.remainder.real.ravel(), self.remainder.imag.ravel()])
        np.savetxt(path, body, delimiter=",", header="i,j,re,im", comments="")

    @staticmethod
    def remainder_from_csv(path) -> np.ndarray:
        body = np.loadtxt(path, delimiter=",", skiprows=1)
        M = int(np.sqrt(body.shape[0]))
        return (body[:, 2] + 1j * body[:, 3]).reshape(M, M)


def verify_remainder_bound(thetas: np.ndarray, remainder: np.ndarray,
                           C: float, delta: float) -> None:
    """Check |R(theta, theta')| <= C dist(theta, theta')^{-delta} on the grid."""
    u = np.abs(np.subtract.outer(thetas, thetas))
    dist = np.minimum(u, 2 * np.pi - u)
    mask = dist > 0
    allowed = C * dist[mask] ** (-delta)
    worst = np.max(np.abs(remainder[mask]) - allowed)
    if worst > 1e-12 * max(1.0, C):
        raise RemainderBoundViolated(
            f"remainder exceeds C dist^-delta bound by {worst:.3e}")


def fit_remainder_bound(thetas: np.ndarray, remainder: np.ndarray,
                        delta: float = 0.5) -> float:
    """Smallest constant C certifying |R| <= C dist^{-delta}, padded 5 percent."""
    u = np.abs(np.subtract.outer(thetas, thetas))
    dist = np.minimum(u, 2 * np.pi - u)
    mask = dist > 0
    vals = np.abs(remainder[mask]) * dist[mask] ** delta
    top = float(np.max(vals)) if vals.size else 0.0
    return 1.05 * top if top > 0 else 0.0


def assemble_kernel(alpha: float, a0_in: AngularFunction | None = None,
                    a0_out: AngularFunction | None = None,
                    smooth=None, lam: float = 1.0, n_grid: int = 256,
                    winding: int = 0, bound_C: float | None = None,
                    bound_delta: float = 0.5) -> ScatteringKernel:
    """Build a plane kernel from flux, in/out phase profiles, and a smooth
    remainder (an (M, M) array or a callable R(theta, theta')).

    The declared (C, delta) bound is verified on the grid; C is fitted when
    not given. RemainderBoundViolated when a declared bound fails.
    """
    zero = AngularFunction.zero()
    a0_in = zero if a0_in is None else a0_in
    a0_out = zero if a0_out is None else a0_out
    thetas = np.arange(n_grid) * 2 * np.pi / n_grid
    if smooth is None:
        R = np.zeros((n_grid, n_grid), dtype=complex)
    elif callable(smooth):
        tt, pp = np.meshgrid(thetas, thetas, indexing="ij")
        R = np.asarray(smooth(tt, pp), dtype=complex)
    else:
        R = np.asarray(smooth, dtype=complex)
        if R.shape != (n_grid, n_grid):
            raise ValueError("remainder grid shape must match n_grid")
    C = fit_remainder_bound(thetas, R, bound_delta) if bound_C is None else float(bound_C)
    return ScatteringKernel(alpha=float(alpha), winding=int(winding),
                            phase_out=a0_out, phase_in=a0_in, thetas=thetas,
                            remainder=R, bound_C=C, bound_delta=float(bound_delta),
                            lam=float(lam))


def apply_gauge_to_kernel(S, g: GaugeElement):
    """Gauge action on kernels: out phase gains m theta + phi(theta), in phase
    gains the same profile read at theta' + pi; the flux parameters and the
    remainder grid are untouched (the action is a pure prefactor). Short-range
    scalar parts of g do not act on the kernel data model."""
    if isinstance(S, ScatteringKernel):
        if g.dimension != 2:
            raise DimensionMismatch("plane kernel requires a plane gauge")
        phi = g.phi if g.phi is not None else AngularFunction.zero()
        return replace(S, winding=S.winding + g.m,
                       phase_out=S.phase_out + phi, phase_in=S.phase_in + phi)
    if isinstance(S, SphereScatteringKernel):
        if g.dimension != 3:
            raise DimensionMismatch("sphere kernel requires a 3-space gauge")
        if g.m != 0:
            raise DimensionMismatch("winding is only defined in the plane")
        phi_vals = _gauge_phase_on_grid(g, S.grid)
        pref = np.exp(1j * phi_vals)
        anti = np.exp(-1j * phi_vals[S.grid.antipode])
        return replace(S, values=pref[:, None] * S.values * anti[None, :])
    raise DimensionMismatch("unsupported kernel type")


def _gauge_phase_on_grid(g: GaugeElement, grid: SphereGrid) -> np.ndarray:
    if g.phi_sphere is not None:
        if g.phi_sphere.grid is not grid and g.phi_sphere.grid.refinement != grid.refinement:
            raise GridMismatch("gauge phase and kernel live on different sphere grids")
        if g.phi_sphere.grid is grid:
            return np.asarray(g.phi_sphere.values, dtype=float)
        return np.array([g.phi_sphere(w) for w in grid.vertices])
    if g.phi_callable is not None:
        return np.asarray(g.phi_callable(grid.vertices), dtype=float)
    return np.zeros(grid.size)


def kernel_distance(S1, S2, diag_margin: int = DIAG_MARGIN_CELLS) -> float:
    """Off-diagonal sup distance plus channel-spectrum distance.

    The diagonal band (|i - j| <= diag_margin cells, cyclically) is excluded:
    remainders may blow up there and the delta term is not discretized.
    """
    if isinstance(S1, SphereScatteringKernel) and isinstance(S2, SphereScatteringKernel):
        if S1.grid is not S2.grid and S1.grid.refinement != S2.grid.refinement:
            raise GridMismatch("kernels on different sphere grids")
        if S1.lam != S2.lam:
            raise GridMismatch("kernels at different energies")
        mask = S1.grid.vertices @ S1.grid.vertices.T < np.cos(0.15)
        return float(np.max(np.abs(S1.values - S2.values)[mask]))
    if not (isinstance(S1, ScatteringKernel) and isinstance(S2, ScatteringKernel)):
        raise DimensionMismatch("kernel types differ")
    if S1.n_grid != S2.n_grid or not np.allclose(S1.thetas, S2.thetas, atol=1e-12):
        raise GridMismatch("kernels on different angle grids")
    if S1.lam != S2.lam:
        raise GridMismatch("kernels at different energies")
    M = S1.n_grid
    idx = np.arange(M)
    sep = np.abs(np.subtract.outer(idx, idx))
    sep = np.minimum(sep, M - sep)
    mask = sep > diag_margin
    off = float(np.max(np.abs(S1.value_grid() - S2.value_grid())[mask]))
    chan = S1.channel_spectrum().distance(S2.channel_spectrum())
    return off + chan


def near_diagonal_growth(S: ScatteringKernel, u_lo: float = 1e-3, u_hi: float = 1e-1,
                         n_samples: int = 24, theta0: float = 0.37) -> tuple[float, float]:
    """Fitted (exponent, constant) of |S(theta0 + u, theta0)| ~ C u^{-p}."""
    us = np.geomspace(u_lo, u_hi, n_samples)
    vals = np.abs(S.evaluate(theta0 + us, np.full(n_samples, theta0)))
    if isinstance(vals, np.ndarray) and vals.ndim == 2:
        vals = np.diag(vals)
    logs = np.log(vals)
    A = np.column_stack([np.log(us), np.ones(n_samples)])
    slope, intercept = np.linalg.lstsq(A, logs, rcond=None)[0]
    return float(-slope), float(np.exp(intercept))


# ===================================================================
# sphere kernels (n >= 3)
# ===================================================================

@dataclass(frozen=True)
class SphereScatteringKernel:
    """Kernel values on sphere-grid direction pairs, with a declared
    singular-support flag (the diagonal principal-value structure cannot be
    inferred from grid data; it is an input hypothesis)."""

    grid: SphereGrid
    values: np.ndarray
    lam: float = 1.0
    singular_support: bool = True
    dimension: int = 3

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.size, self.grid.size):
            raise ValueError("values must be square over the sphere grid")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


def synthesize_sphere_kernel(grid: SphereGrid, base: Callable | None = None,
                             lam: float = 1.0, width: float = 0.6,
                             singular_support: bool = True) -> SphereScatteringKernel:
    """Diagonal-concentrated smooth stand-in kernel: base defaults to
    exp(-|w - w'|^2 / width^2) plus a fixed small offset so the ratio is
    anchored everywhere near the diagonal."""
    V = grid.vertices
    if base is None:
        d2 = np.maximum(2.0 - 2.0 * (V @ V.T), 0.0)
        vals = np.exp(-d2 / width**2) + 0.05
    else:
        vals = np.asarray(base(V), dtype=complex)
    return SphereScatteringKernel(grid=grid, values=vals, lam=lam,
                                  singular_support=singular_support)


# ===================================================================
# gauge-equivalence solver
# ===================================================================

@dataclass(frozen=True)
class SolverResult:
    verdict: str  # "equivalent" | "not_equivalent" | "ambiguous"
    gauge: GaugeElement | None = None
    witness: dict | None = None
    reason: str | None = None
    provenance: dict | None = None

    @property
    def equivalent(self) -> bool:
        return self.verdict == "equivalent"


def _spectrum_flux(spec: ChannelSpectrum, tol: float = 1e-6):
    """Effective flux from a channel spectrum: step index from the jump
    location, fractional part from the argument on the upper side. Returns
    None for a constant spectrum (integer flux: no jump to locate)."""
    vals = spec.values
    jumps = np.nonzero(np.abs(np.diff(vals)) > tol)[0]
    if jumps.size == 0:
        return None
    if jumps.size > 1:
        raise ValueError("channel spectrum has multiple jumps; not a flux kernel")
    step = int(spec.indices[jumps[0] + 1])
    upper = complex(vals[jumps[0] + 1])
    frac = float(np.angle(upper * (-1.0) ** step) / np.pi)
    frac = frac % 2.0
    if frac >= 1.0:  # upper argument determines alpha pi mod 2 pi; fold
        frac -= 2.0
    return step + frac


def _fit_plane_gauge(S1: ScatteringKernel, S2: ScatteringKernel, m: int,
                     k_max: int | None = None):
    """Fit the periodic phase phi from the off-diagonal value ratio.

    Along each band theta' = theta - u the ratio of a gauge pair equals
    e^{i m (u - pi)} e^{i (phi(theta) - phi(theta - u + pi))}; after removing
    the known constant, the Fourier transform over theta gives
    phi_hat[k] (1 - e^{i k (pi - u)}) per band, solved per harmonic in least
    squares over several bands.
    """
    M = S1.n_grid
    th = S1.thetas
    if k_max is None:
        k_max = min(M // 4, 64)
    strides = [p for p in (8, 9, 16, 24, 32, 48) if p < M // 2]
    strides = strides + [-p for p in strides]
    G1, G2 = S1.value_grid(), S2.value_grid()
    ks = np.fft.fftfreq(M, d=1.0 / M).astype(int)
    num = np.zeros(M, dtype=complex)
    den = np.zeros(M)
    for p in strides:
        u = 2 * np.pi * p / M
        cols = (np.arange(M) - p) % M
        ratio = G2[np.arange(M), cols] / G1[np.arange(M), cols]
        core = ratio * np.exp(-1j * m * (u - np.pi))
        xi = np.unwrap(np.angle(core))
        xi = xi - np.mean(xi)
        xi_hat = np.fft.fft(xi) / M
        A = 1.0 - np.exp(1j * ks * (np.pi - u))
        num += np.conj(A) * xi_hat
        den += np.abs(A) ** 2
    keep = (np.abs(ks) >= 1) & (np.abs(ks) <= k_max) & (den > 1e-9)
    phi_hat = np.zeros(M, dtype=complex)
    phi_hat[keep] = num[keep] / den[keep]
    coeffs = {int(k): complex(phi_hat[i]) for i, k in enumerate(ks)
              if keep[i] and abs(phi_hat[i]) > 1e-13}
    phi = AngularFunction.from_coefficients(coeffs) if coeffs else AngularFunction.zero()
    # cross-check of the winding from two adjacent bands: the constant phase
    # advances by m times the band spacing
    pa, pb = 8, 9
    ua, ub = 2 * np.pi * pa / M, 2 * np.pi * pb / M
    ca = (np.arange(M) - pa) % M
    cb = (np.arange(M) - pb) % M
    qa = G2[np.arange(M), ca] / G1[np.arange(M), ca]
    qb = G2[np.arange(M), cb] / G1[np.arange(M), cb]
    incr = np.angle(qb * np.conj(qa))
    m_check = float(np.mean(incr) / (ub - ua))
    return phi, m_check


def gauge_equivalence_solver(S1, S2, verify_tol: float = 1e-6,
                             phase_tol: float = 1e-6) -> SolverResult:
    """Decide whether S2 is a gauge transform of S1 and produce the gauge.

    Plane: effective fluxes from the channel spectra must differ by an
    integer m (else NotEquivalent with a channel witness); integer base flux
    is Ambiguous (no diagonal singularity to anchor the phase); the periodic
    phase is fitted from the off-diagonal ratio and the verdict is confirmed
    by applying the fitted gauge and measuring the kernel distance.

    Sphere: requires declared singular support on S1; the diagonal ratio
    gives the odd part of the phase (it must vanish for a legitimate gauge:
    direction functions entering gauges are antipodally even), near-diagonal
    pairs give even-part differences solved in least squares over the grid
    graph; verified by applying the fitted gauge.
    """
    if isinstance(S1, ScatteringKernel) and isinstance(S2, ScatteringKernel):
        return _solve_plane(S1, S2, verify_tol, phase_tol)
    if isinstance(S1, SphereScatteringKernel) and isinstance(S2, SphereScatteringKernel):
        return _solve_sphere(S1, S2, verify_tol, phase_tol)
    raise DimensionMismatch("kernel types differ")


def _solve_plane(S1: ScatteringKernel, S2: ScatteringKernel,
                 verify_tol: float, phase_tol: float) -> SolverResult:
    if S1.n_grid != S2.n_grid or not np.allclose(S1.thetas, S2.thetas, atol=1e-12):
        raise GridMismatch("kernels on different angle grids")
    if S1.lam != S2.lam:
        raise GridMismatch("kernels at different energies")
    spec1, spec2 = S1.channel_spectrum(), S2.channel_spectrum()
    f1, f2 = _spectrum_flux(spec1), _spectrum_flux(spec2)
    if f1 is None or f2 is None:
        return SolverResult(
            verdict="ambiguous",
            reason="integer flux: the diagonal singularity vanishes and the "
                   "phase cannot be anchored",
            provenance={"flux_1": f1, "flux_2": f2,
                        "channel_distance": spec1.distance(spec2)})
    dflux = f2 - f1
    m = int(np.round(dflux))
    frac_defect = abs(dflux - m)
    prov = {"flux_1": f1, "flux_2": f2, "m": m, "fractional_defect": frac_defect}
    if frac_defect > phase_tol:
        return SolverResult(
            verdict="not_equivalent",
            witness={"kind": "channel_spectrum",
                     "flux_difference_mod_1": dflux - m,
                     "channel_distance": spec1.distance(spec2)},
            provenance=prov)
    phi, m_check = _fit_plane_gauge(S1, S2, m)
    prov["m_ratio_check"] = m_check
    if abs(m_check - m) > 0.25:
        return SolverResult(
            verdict="not_equivalent",
            witness={"kind": "ratio_winding",
                     "m_from_spectra": m, "m_from_ratio": m_check},
            provenance=prov)
    g = GaugeElement(dimension=2, m=m, phi=phi)
    dist = kernel_distance(apply_gauge_to_kernel(S1, g), S2)
    scale = max(1.0, float(np.max(np.abs(S2.value_grid()))))
    prov["verify_distance"] = dist
    if dist > verify_tol * scale:
        return SolverResult(
            verdict="not_equivalent",
            witness={"kind": "verification", "distance": dist,
                     "fitted_m": m, "fitted_phase_max": phi.max_abs()},
            provenance=prov)
    return SolverResult(verdict="equivalent", gauge=g, provenance=prov)


def _solve_sphere(S1: SphereScatteringKernel, S2: SphereScatteringKernel,
                  verify_tol: float, phase_tol: float) -> SolverResult:
    if S1.grid is not S2.grid and S1.grid.refinement != S2.grid.refinement:
        raise GridMismatch("kernels on different sphere grids")
    if S1.lam != S2.lam:
        raise GridMismatch("kernels at different energies")
    if not S1.singular_support:
        raise SingularPartMissing(
            "no declared diagonal singularity on the base kernel; "
            "the prefactor ratio cannot be anchored")
    grid = S1.grid
    floor = 1e-8 * float(np.max(np.abs(S1.values)))
    diag = np.abs(np.diagonal(S1.values))
    if np.min(diag) < floor:
        raise SingularPartMissing("base kernel vanishes on the diagonal set")
    n = grid.size
    ratio_diag = np.diagonal(S2.values) / np.diagonal(S1.values)
    odd = 0.5 * np.angle(ratio_diag)
    evenness_defect = float(np.max(np.abs(odd + odd[grid.antipode])))
    prov = {"odd_part_max": float(np.max(np.abs(odd))),
            "odd_antisymmetry_defect": evenness_defect}
    # even part differences on grid edges: for neighbors w_j ~ w_i the kernel
    # entry (i, j) carries phi(w_i) - phi(-w_j) = o_i + o_j + e_i - e_j
    rows, rhs = [], []
    eq = 0
    for (i, j) in grid.edges():
        if abs(S1.values[i, j]) < floor:
            continue
        beta = float(np.angle(S2.values[i, j] / S1.values[i, j])) - odd[i] - odd[j]
        beta = (beta + np.pi) % (2 * np.pi) - np.pi
        rows.append((eq, i, 1.0))
        rows.append((eq, j, -1.0))
        rhs.append(beta)
        eq += 1
    if eq < n:
        return SolverResult(verdict="ambiguous",
                            reason="too few anchored near-diagonal pairs to fit the phase",
                            provenance=prov)
    A = np.zeros((eq + 1, n))
    for (r, c, v) in rows:
        A[r, c] = v
    A[eq, :] = 1.0  # mean-zero normalization
    b = np.asarray(rhs + [0.0])
    even, *_ = np.linalg.lstsq(A, b, rcond=None)
    residual = float(np.max(np.abs(A[:-1] @ even - b[:-1])))
    prov["even_fit_residual"] = residual
    phi_vals = even + odd
    phi = SphereFunction(grid=grid, values=phi_vals)
    if prov["odd_part_max"] > phase_tol:
        return SolverResult(
            verdict="not_equivalent",
            witness={"kind": "odd_phase",
                     "odd_part_max": prov["odd_part_max"],
                     "note": "gauge direction functions must be antipodally even"},
            provenance=prov)
    g = GaugeElement(dimension=3, phi_sphere=phi)
    dist = kernel_distance(apply_gauge_to_kernel(S1, g), S2)
    scale = max(1.0, float(np.max(np.abs(S2.values))))
    prov["verify_distance"] = dist
    if dist > verify_tol * scale:
        return SolverResult(
            verdict="not_equivalent",
            witness={"kind": "verification", "distance": dist},
            provenance=prov)
    return SolverResult(verdict="equivalent", gauge=g, provenance=prov)
