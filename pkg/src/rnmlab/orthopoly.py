"""Orthonormal polynomial bases for planar weights e^{-mQ} and the
associated weighted reproducing kernels.

All kernel arithmetic runs in log-magnitude + phase form, so the
exponentially large intermediate factors appearing at m >= 64 never
overflow; only the (bounded) weighted combinations are exponentiated.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss as _leggauss_uncached
from scipy.integrate import quad
from scipy.linalg import solve_triangular
from scipy.optimize import brentq

from .potential import Potential, compute_droplet


class DivergentNormError(ValueError):
    """Monomial norm integral diverges: the n/m window exceeds the growth rate."""


class RankLossError(ValueError):
    """Gram-Schmidt pivot collapsed below the working precision."""


class UnsupportedPotentialError(ValueError):
    """Operation needs field data (radial profile, polarization) that is absent."""


class GridResolutionError(ValueError):
    """Quadrature grid too coarse to represent the kernel faithfully."""


@lru_cache(maxsize=32)
def leggauss(n: int):
    return _leggauss_uncached(n)


# ---------------------------------------------------------------------------
# quadrature grids


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Product grid implementing integration against dA = d^2z / pi.

    Radial direction: Gauss-Legendre on [0, r_cut].  Angular direction:
    n_theta uniform nodes, which integrate e^{ik theta} exactly for
    0 < |k| < n_theta.  ``weights`` absorb the polar Jacobian and the 1/pi.
    """

    r_cut: float
    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    n_theta: int
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def disk(cls, r_cut: float, n_radial: int = 400, n_theta: int = 256) -> "QuadratureGrid":
        x, w = leggauss(n_radial)
        r = 0.5 * r_cut * (x + 1.0)
        wr = 0.5 * r_cut * w
        theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
        z = r[:, None] * np.exp(1j * theta)[None, :]
        wa = np.broadcast_to((2.0 / n_theta) * (wr * r)[:, None], z.shape)
        return cls(r_cut=float(r_cut), radial_nodes=r, radial_weights=wr,
                   n_theta=int(n_theta), nodes=z.ravel(), weights=wa.ravel().copy())

    def integrate(self, values) -> complex:
        return np.sum(self.weights * np.asarray(values).ravel())


def default_grid(pot: Potential, m: float, n: int,
                 n_radial: int = 400, n_theta: Optional[int] = None) -> QuadratureGrid:
    """Grid sized for a degree-(n-1) kernel at weight e^{-mQ}: [0, 2R] extended
    until the heaviest norm integrand has decayed below 1e-14 of its peak."""
    tau = n / m
    radius = compute_droplet(pot, tau).radius
    r_cut = 2.0 * radius
    if pot.radial_profile is not None and n >= 1:
        prof = pot.radial_profile
        a = 2 * (n - 1) + 1
        r_peak, log_peak = _norm_integrand_peak(prof, m, a)
        ell = lambda r: a * np.log(r) - m * float(prof.q(r))
        r_tail = max(r_peak, 1e-3)
        while ell(r_tail) > log_peak - 40.0 and r_tail < 1e6:
            r_tail *= 1.25
        r_cut = max(r_cut, r_tail)
    if n_theta is None:
        n_theta = max(256, 4 * n)
    return QuadratureGrid.disk(r_cut, n_radial=n_radial, n_theta=n_theta)


# ---------------------------------------------------------------------------
# radial norms


def _norm_integrand_peak(profile, m, a):
    """Peak location and log-height of r^a e^{-m q(r)}; raises if divergent."""
    dq = profile.dq

    def slope(r):
        return m * r * float(dq(r)) - a

    hi = 1.0
    while slope(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e9:
            raise DivergentNormError(
                "norm integrand never decays: growth condition violated")
    r_peak = brentq(slope, 1e-12, hi, xtol=1e-14, rtol=8.9e-16)
    log_peak = a * np.log(r_peak) - m * float(profile.q(r_peak))
    return r_peak, log_peak


def _log_radial_integral(profile, m, a, scheme="adaptive", n_gauss=800):
    """log of int_0^inf r^a e^{-m q(r)} dr, computed with a peak shift."""
    q = profile.q
    r_peak, log_peak = _norm_integrand_peak(profile, m, a)

    def ell(r):
        return a * np.log(r) - m * np.asarray(q(r), dtype=float)

    r_hi = max(r_peak, 1e-6)
    while ell(r_hi) > log_peak - 80.0:
        r_hi *= 1.5
        if r_hi > 1e9:
            raise DivergentNormError("norm integrand tail does not decay")

    if scheme == "adaptive":
        val, _ = quad(lambda r: np.exp(ell(r) - log_peak), 0.0, r_hi,
                      points=[r_peak], limit=200, epsabs=0.0, epsrel=1e-12)
    elif scheme == "gauss":
        x, w = leggauss(n_gauss)
        r = 0.5 * r_hi * (x + 1.0)
        val = np.sum(0.5 * r_hi * w * np.exp(ell(r) - log_peak))
    else:
        raise ValueError(f"unknown quadrature scheme {scheme!r}")
    return log_peak + np.log(val)


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Orthonormal basis of analytic polynomials of degree < n for e^{-mQ}.

    Radial mode stores log of the squared monomial norms h_k (phi_k is then
    z^k / sqrt(h_k)); general mode stores a lower-triangular coefficient
    matrix C with phi_j = sum_k C[j, k] z^k.
    """

    m: float
    n: int
    mode: str
    potential: Potential
    log_norms: Optional[np.ndarray] = None
    coeffs: Optional[np.ndarray] = None

    @property
    def norms(self) -> np.ndarray:
        if self.log_norms is None:
            raise ValueError("norms are only stored in radial mode")
        return np.exp(self.log_norms)


def radial_norms(pot: Potential, m: float, n: int, scheme: str = "adaptive") -> OrthonormalBasis:
    """Squared monomial norms h_k = int r^{2k} e^{-m q(r)} 2r dr, k < n.

    The quadrature window is chosen per k so the discarded tail is below
    1e-14 of the integral; a divergent top norm (n/m beyond the growth
    exponent) raises DivergentNormError.
    """
    if pot.radial_profile is None:
        raise UnsupportedPotentialError("radial_norms needs a radial profile")
    prof = pot.radial_profile
    logs = np.empty(n)
    for k in range(n):
        try:
            logs[k] = np.log(2.0) + _log_radial_integral(prof, m, 2 * k + 1, scheme=scheme)
        except DivergentNormError as exc:
            raise DivergentNormError(
                f"h_{k} diverges for m={m}, n={n}: need m/n > 1/rho "
                f"(rho = {pot.growth_exponent})") from exc
    return OrthonormalBasis(m=float(m), n=int(n), mode="radial",
                            potential=pot, log_norms=logs)


def gram_schmidt_basis(pot: Potential, m: float, n: int, grid: QuadratureGrid) -> OrthonormalBasis:
    """Modified Gram-Schmidt on monomials under the grid inner product.

    The grid must resolve degree n-1 (n_theta >= 4n).  Intended for the
    general-Q path at moderate m; the radial route is preferred when a
    profile is available.
    """
    if grid.n_theta < 4 * n:
        raise ValueError(f"grid does not resolve degree {n-1}: need n_theta >= {4*n}")
    z = grid.nodes
    sw = np.sqrt(grid.weights) * np.exp(-0.5 * m * pot.evaluate(z))
    V = z[:, None] ** np.arange(n)[None, :] * sw[:, None]

    Q = np.empty_like(V)
    R = np.zeros((n, n), dtype=complex)
    for j in range(n):
        v = V[:, j].copy()
        for i in range(j):
            R[i, j] = np.vdot(Q[:, i], v)
            v -= R[i, j] * Q[:, i]
        piv = np.linalg.norm(v)
        if piv < 1e-13 * abs(R[0, 0]):
            raise RankLossError(
                f"pivot {piv:.3e} at degree {j} below 1e-13 of leading norm; "
                "use a smaller n or higher precision accumulation")
        R[j, j] = piv
        Q[:, j] = v / piv

    inv_r = solve_triangular(R, np.eye(n, dtype=complex))
    basis = OrthonormalBasis(m=float(m), n=int(n), mode="general",
                             potential=pot, coeffs=inv_r.T.copy())
    resid = orthonormality_residual(basis, grid)
    if resid > 1e-8:
        raise RankLossError(f"orthonormality residual {resid:.2e} exceeds 1e-8")
    return basis


def orthonormality_residual(basis: OrthonormalBasis, grid: QuadratureGrid) -> float:
    """max_{j,k} |<phi_j, phi_k>_grid - delta_{jk}|."""
    kern = WeightedKernel(basis, basis.potential)
    F = kern.features(grid.nodes) * np.sqrt(grid.weights)[:, None]
    gram = F.conj().T @ F
    return float(np.max(np.abs(gram - np.eye(basis.n))))


# ---------------------------------------------------------------------------
# weighted kernel


def _shifted_phase_sum(logmag, phase, axis=-1):
    """(L, s) with sum exp(logmag + i*phase) = exp(L) * s, L the running max."""
    L = np.max(logmag, axis=axis, keepdims=True)
    L = np.where(np.isfinite(L), L, 0.0)
    s = np.sum(np.exp(logmag - L) * np.exp(1j * phase), axis=axis)
    return np.squeeze(L, axis=axis), s


_CHUNK = 1 << 22  # cap on batch * n intermediate entries

_LOG_FLOOR = -1e250  # stands in for log(0); k * floor still underflows exp to 0


def _safe_log(x):
    with np.errstate(divide="ignore"):
        out = np.log(x)
    return np.maximum(out, _LOG_FLOOR)


@dataclass(frozen=True, eq=False)
class WeightedKernel:
    """Evaluator for the weighted kernel K(z,w) e^{-m(Q(z)+Q(w))/2} and the
    one-point density R1(z) = K(z,z) e^{-mQ(z)} of the rank-n projection."""

    basis: OrthonormalBasis
    potential: Potential

    @property
    def m(self) -> float:
        return self.basis.m

    @property
    def n(self) -> int:
        return self.basis.n

    # -- feature vectors ----------------------------------------------------

    def features(self, z):
        """psi_j(z) = phi_j(z) e^{-mQ(z)/2}; shape z.shape + (n,).

        The squared row norm is R1(z) and K_w(z, w) = <psi(z), psi(w)>.
        """
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape + (self.n,), dtype=complex)
        step = max(1, _CHUNK // max(self.n, 1))
        for lo in range(0, flat.size, step):
            out[lo:lo + step] = self._features_chunk(flat[lo:lo + step])
        return out.reshape(z.shape + (self.n,))

    def _features_chunk(self, z):
        b = self.basis
        if b.mode == "radial":
            k = np.arange(b.n)
            lr = _safe_log(np.abs(z))
            halfq = 0.5 * b.m * np.asarray(b.potential.evaluate(z), dtype=float)
            logmag = k * lr[:, None] - 0.5 * b.log_norms[None, :] - halfq[:, None]
            ang = np.angle(z)
            return np.exp(logmag) * np.exp(1j * k * ang[:, None])
        V = z[:, None] ** np.arange(b.n)[None, :]
        phi = V @ b.coeffs.T
        return phi * np.exp(-0.5 * b.m * np.asarray(b.potential.evaluate(z), dtype=float))[:, None]

    # -- kernel values ------------------------------------------------------

    def log_weighted(self, z, w):
        """(log|.|, arg) of the weighted kernel; safe at any magnitude."""
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        z, w = np.broadcast_arrays(z, w)
        b = self.basis
        if b.mode == "radial":
            flatz, flatw = z.ravel(), w.ravel()
            k = np.arange(b.n)
            lrr = _safe_log(np.abs(flatz)) + _safe_log(np.abs(flatw))
            ang = np.angle(flatz) - np.angle(flatw)
            logmag = k * lrr[:, None] - b.log_norms[None, :]
            L, s = _shifted_phase_sum(logmag, k * ang[:, None])
            halfq = 0.5 * b.m * (np.asarray(b.potential.evaluate(flatz), dtype=float)
                                 + np.asarray(b.potential.evaluate(flatw), dtype=float))
            with np.errstate(divide="ignore"):
                logabs = L - halfq + np.log(np.abs(s))
            return logabs.reshape(z.shape), np.angle(s).reshape(z.shape)
        val = np.sum(self.features(z) * np.conj(self.features(w)), axis=-1)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(val)), np.angle(val)

    def weighted(self, z, w):
        logabs, phase = self.log_weighted(z, w)
        return np.exp(logabs) * np.exp(1j * phase)

    def log_one_point(self, z):
        z = np.asarray(z, dtype=complex)
        b = self.basis
        if b.mode == "radial":
            flat = z.ravel()
            k = np.arange(b.n)
            lr2 = 2.0 * _safe_log(np.abs(flat))
            logmag = k * lr2[:, None] - b.log_norms[None, :]
            L = np.max(logmag, axis=-1)
            tot = L + np.log(np.sum(np.exp(logmag - L[:, None]), axis=-1))
            tot -= b.m * np.asarray(b.potential.evaluate(flat), dtype=float)
            return tot.reshape(z.shape)
        feats = self.features(z)
        with np.errstate(divide="ignore"):
            return np.log(np.sum(np.abs(feats) ** 2, axis=-1))

    def one_point(self, z):
        """R1(z) >= 0; tiny negative round-off is clamped, anything worse raises."""
        val = np.exp(self.log_one_point(z))
        val = np.asarray(val)
        if np.any(val < -1e-12):
            raise FloatingPointError("one-point density came out negative")
        out = np.clip(val, 0.0, None)
        return out if out.shape else float(out)

    def trace_on(self, grid: QuadratureGrid) -> float:
        return float(np.real(grid.integrate(self.one_point(grid.nodes))))


def weighted_kernel(pot: Potential, m: float, n: int,
                    grid: Optional[QuadratureGrid] = None,
                    scheme: str = "adaptive") -> WeightedKernel:
    """Kernel via radial norms when a profile exists, else grid Gram-Schmidt."""
    if pot.radial_profile is not None:
        return WeightedKernel(radial_norms(pot, m, n, scheme=scheme), pot)
    if grid is None:
        raise UnsupportedPotentialError("general-Q kernel needs an explicit grid")
    return WeightedKernel(gram_schmidt_basis(pot, m, n, grid), pot)


def kernel_eval(kern: WeightedKernel, z, w):
    """Weighted kernel value K(z,w) e^{-m(Q(z)+Q(w))/2} (complex)."""
    return kern.weighted(z, w)


def one_point(kern: WeightedKernel, z):
    """One-point density R1(z) = K(z,z) e^{-mQ(z)}."""
    return kern.one_point(z)


def diagonal_expansion_residual(kern: WeightedKernel, z) -> float:
    """| R1(z) - m lap Q(z) - (1/2) lap log lap Q(z) |, the bulk expansion
    error; O(1/m) at bulk points (|z| <= 0.75 R)."""
    z = np.asarray(z, dtype=complex)
    pred = kern.m * np.asarray(kern.potential.laplacian(z), dtype=float) \
        + np.asarray(kern.potential.subleading_density(z), dtype=float)
    resid = np.abs(kern.one_point(z) - pred)
    return float(resid) if resid.shape == () else resid


def offdiagonal_decay_profile(kern: WeightedKernel, z0, radii, n_theta: int = 64) -> np.ndarray:
    """max over angle of |weighted kernel(z0, z0 + h)| for each |h| in radii."""
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    radii = np.asarray(radii, dtype=float)
    h = radii[:, None] * np.exp(1j * theta)[None, :]
    logabs, _ = kern.log_weighted(np.asarray(z0, dtype=complex), np.asarray(z0) + h)
    return np.exp(np.max(logabs, axis=-1))


def fit_decay_rate(radii, profile, m: float, floor: float = 1e-280):
    """Least-squares decay rate of an envelope profile, and its epsilon in the
    e^{-eps sqrt(m) |h|} parametrization."""
    radii = np.asarray(radii, dtype=float)
    profile = np.asarray(profile, dtype=float)
    keep = profile > floor
    if np.count_nonzero(keep) < 3:
        raise ValueError("profile underflows on nearly all radii; reduce them")
    slope, _ = np.polyfit(radii[keep], -np.log(profile[keep]), 1)
    return float(slope), float(slope / np.sqrt(m))


def bergman_approx(pot: Potential, m: float, z, w):
    """First-order approximating kernel, weighted:
    (m b0(z, wbar) + b1(z, wbar)) e^{m psi(z, wbar) - m(Q(z)+Q(w))/2}.

    Usable near the anti-diagonal; needs the field's polarization data.
    """
    if pot.analytic_extension is None or pot.polarized_laplacian is None:
        raise UnsupportedPotentialError(
            f"field {pot.name!r} carries no analytic extension")
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    wbar = np.conj(w)
    psi = pot.analytic_extension(z, wbar)
    b0 = pot.polarized_laplacian(z, wbar)
    b1 = pot.polarized_subleading(z, wbar) if pot.polarized_subleading is not None else 0.0
    logmag = m * np.real(psi) - 0.5 * m * (np.asarray(pot.evaluate(z), dtype=float)
                                           + np.asarray(pot.evaluate(w), dtype=float))
    return (m * b0 + b1) * np.exp(logmag) * np.exp(1j * m * np.imag(psi))


def nystrom_matrix(kern: WeightedKernel, grid: QuadratureGrid) -> np.ndarray:
    """Hermitian Nystrom matrix sqrt(w_a) K_w(z_a, z_b) sqrt(w_b).

    Dense (G x G); meant for modest grids when checking projection identities.
    """
    U = kern.features(grid.nodes) * np.sqrt(grid.weights)[:, None]
    return U @ U.conj().T
