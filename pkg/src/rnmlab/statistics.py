"""Linear eigenvalue statistics: fluctuation values, empirical cumulants with
Monte Carlo error bars, the Gaussian-limit predictions (mean from the
correction measure, variance from the Dirichlet integral), exponential
tilting consistency, and the constant-Laplacian boundary formulas.

Gradient and Laplacian conventions: ``gradient`` is the usual R^2 gradient
and ``laplacian_std`` the classical Laplacian; the quarter-Laplacian used by
the kernel expansion is converted explicitly at every call site.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .potential import Droplet, Potential
from .sampler import PointConfiguration, sample_dpp, sample_ginibre_matrix, SamplerConfig
from .orthopoly import leggauss, weighted_kernel, UnsupportedPotentialError


class SupportError(ValueError):
    """Test function support violates a bulk-support precondition."""


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A smooth real statistic with its first two derivatives.

    ``support_center``/``support_radius`` describe a compact support disk;
    both None means globally supported.  ``radial`` marks invariance under
    rotations about the origin, which some evaluators exploit.
    """

    value: Callable
    gradient: Callable
    laplacian_std: Callable
    support_center: Optional[complex] = None
    support_radius: Optional[float] = None
    smoothness: str = "smooth"
    radial: bool = False

    @property
    def compactly_supported(self) -> bool:
        return self.support_radius is not None


def bump(center: complex = 0.0, radius: float = 0.5) -> TestFunction:
    """The standard plateau-free bump: exp(1 - 1/(1 - |z-c|^2/r^2)) inside the
    disk, 0 outside, with closed-form gradient and classical Laplacian."""
    if radius <= 0:
        raise ValueError("bump radius must be positive")
    c = complex(center)
    r2 = float(radius) ** 2

    def _u(z):
        z = np.asarray(z, dtype=complex)
        return (np.abs(z - c) ** 2) / r2

    def value(z):
        u = _u(z)
        inside = u < 1.0
        uu = np.where(inside, u, 0.5)
        g = np.exp(1.0 - 1.0 / (1.0 - uu))
        return np.where(inside, g, 0.0)

    def _dg_du(u):
        # d/du exp(1 - (1-u)^-1) = -g / (1-u)^2
        g = np.exp(1.0 - 1.0 / (1.0 - u))
        return -g / (1.0 - u) ** 2

    def _d2g_du2(u):
        g = np.exp(1.0 - 1.0 / (1.0 - u))
        return g * (1.0 / (1.0 - u) ** 4 - 2.0 / (1.0 - u) ** 3)

    def gradient(z):
        z = np.asarray(z, dtype=complex)
        u = _u(z)
        inside = u < 1.0
        uu = np.where(inside, u, 0.5)
        fac = np.where(inside, _dg_du(uu), 0.0) * (2.0 / r2)
        return np.stack([fac * (z.real - c.real), fac * (z.imag - c.imag)], axis=-1)

    def laplacian_std(z):
        z = np.asarray(z, dtype=complex)
        u = _u(z)
        inside = u < 1.0
        uu = np.where(inside, u, 0.5)
        # lap g(u(z)) = g''(u) |grad u|^2 + g'(u) lap u,  |grad u|^2 = 4u/r^2, lap u = 4/r^2
        val = _d2g_du2(uu) * (4.0 * uu / r2) + _dg_du(uu) * (4.0 / r2)
        return np.where(inside, val, 0.0)

    return TestFunction(value=value, gradient=gradient, laplacian_std=laplacian_std,
                        support_center=c, support_radius=float(radius),
                        radial=(c == 0.0))


def re_coordinate(taper_start: float = 2.0, taper_end: float = 3.0) -> TestFunction:
    """Re(z), smoothly tapered to zero between the two radii.  Globally
    supported; the taper sits far outside any droplet of interest so samples
    never see it."""
    if not (0 < taper_start < taper_end):
        raise ValueError("need 0 < taper_start < taper_end")
    a, bnd = float(taper_start), float(taper_end)
    width = bnd - a

    def _window(r):
        t = (r - a) / width
        t = np.clip(t, 0.0, 1.0)
        inside = t <= 0.0
        outside = t >= 1.0
        tt = np.where((~inside) & (~outside), t, 0.5)
        w = np.exp(1.0 - 1.0 / (1.0 - tt**2))
        return np.where(inside, 1.0, np.where(outside, 0.0, w))

    def _dwindow(r):
        t = (r - a) / width
        mid = (t > 0.0) & (t < 1.0)
        tt = np.where(mid, t, 0.5)
        w = np.exp(1.0 - 1.0 / (1.0 - tt**2))
        dw = w * (-2.0 * tt / (1.0 - tt**2) ** 2) / width
        return np.where(mid, dw, 0.0)

    def value(z):
        z = np.asarray(z, dtype=complex)
        return z.real * _window(np.abs(z))

    def gradient(z):
        z = np.asarray(z, dtype=complex)
        r = np.maximum(np.abs(z), 1e-300)
        w = _window(r)
        dw = _dwindow(r)
        gx = w + z.real * dw * (z.real / r)
        gy = z.real * dw * (z.imag / r)
        return np.stack([gx, gy], axis=-1)

    def laplacian_std(z, h=1e-5):
        z = np.asarray(z, dtype=complex)
        return ((value(z + h) + value(z - h) + value(z + 1j * h) + value(z - 1j * h)
                 - 4.0 * value(z)) / h**2)

    return TestFunction(value=value, gradient=gradient, laplacian_std=laplacian_std,
                        support_center=None, support_radius=None, radial=False)


# ---------------------------------------------------------------------------
# quadrature helpers on a support disk


def _disk_rule(center: complex, radius: float, n_radial: int = 400, n_theta: int = 256):
    x, w = leggauss(n_radial)
    r = 0.5 * radius * (x + 1.0)
    wr = 0.5 * radius * w
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    z = center + r[:, None] * np.exp(1j * theta)[None, :]
    wa = np.broadcast_to((2.0 / n_theta) * (wr * r)[:, None], z.shape)
    return z.ravel(), wa.ravel()


def gradient_pair_integral(f: TestFunction, g: TestFunction,
                           n_radial: int = 400, n_theta: int = 256) -> float:
    """int grad f . grad g dA over the union of the support disks."""
    for t in (f, g):
        if not t.compactly_supported:
            raise SupportError("gradient integrals need compact supports")
    # integrate over the larger disk containing both supports
    c1, r1 = f.support_center, f.support_radius
    c2, r2 = g.support_center, g.support_radius
    if abs(c1 - c2) + r1 <= r2:
        center, radius = c2, r2
    elif abs(c1 - c2) + r2 <= r1:
        center, radius = c1, r1
    else:
        radius = 0.5 * (abs(c1 - c2) + r1 + r2)
        direction = (c2 - c1) / abs(c2 - c1) if c1 != c2 else 0.0
        center = c1 + direction * (radius - r1)
    z, w = _disk_rule(center, radius, n_radial, n_theta)
    dot = np.sum(np.asarray(f.gradient(z)) * np.asarray(g.gradient(z)), axis=-1)
    return float(np.sum(w * dot))


def dirichlet_energy(g: TestFunction, **kw) -> float:
    """int |grad g|^2 dA."""
    return gradient_pair_integral(g, g, **kw)


def variance_prediction(g: TestFunction, **kw) -> float:
    """Limiting fluctuation variance (1/4) int |grad g|^2 dA."""
    return 0.25 * dirichlet_energy(g, **kw)


def covariance_prediction(f: TestFunction, g: TestFunction, **kw) -> float:
    return 0.25 * gradient_pair_integral(f, g, **kw)


@lru_cache(maxsize=None)
def equilibrium_integral(g: TestFunction, drop: Droplet) -> float:
    """int g d(sigma_tau), cached per (statistic, droplet)."""
    z, w = _disk_rule(0.0, drop.radius)
    vals = np.asarray(g.value(z), dtype=float)
    dens = np.asarray(drop.equilibrium_density(z), dtype=float)
    return float(np.sum(w * vals * dens))


@lru_cache(maxsize=None)
def mean_prediction(g: TestFunction, drop: Droplet) -> float:
    """Limiting fluctuation mean: the correction-measure integral of g."""
    z, w = _disk_rule(0.0, drop.radius)
    vals = np.asarray(g.value(z), dtype=float)
    dens = np.asarray(drop.nu_density(z), dtype=float)
    return float(np.sum(w * vals * dens))


# ---------------------------------------------------------------------------
# fluctuations and empirical reports


def trace_statistic(cfg: PointConfiguration, g: TestFunction) -> float:
    return float(np.sum(np.real(g.value(cfg.points))))


def fluct_value(cfg: PointConfiguration, g: TestFunction, drop: Droplet) -> float:
    """sum_j g(lambda_j) - n int g d(sigma_tau)."""
    n = len(cfg.points)
    return trace_statistic(cfg, g) - n * equilibrium_integral(g, drop)


def fluct_values(samples: Sequence[PointConfiguration], g: TestFunction,
                 drop: Droplet) -> np.ndarray:
    base = equilibrium_integral(g, drop)
    return np.array([float(np.sum(np.real(g.value(c.points)))) - len(c.points) * base
                     for c in samples])


def _skewness(x):
    x = np.asarray(x, dtype=float)
    s = x.std(ddof=1)
    return float(np.mean((x - x.mean()) ** 3) / s**3)


def _excess_kurtosis(x):
    x = np.asarray(x, dtype=float)
    s = x.std(ddof=1)
    return float(np.mean((x - x.mean()) ** 4) / s**4 - 3.0)


def _se_skewness(n):
    return np.sqrt(6.0 * n * (n - 1) / ((n - 2) * (n + 1) * (n + 3)))


def _se_kurtosis(n):
    return 2.0 * _se_skewness(n) * np.sqrt((n**2 - 1.0) / ((n - 3) * (n + 5)))


def jarque_bera(x) -> float:
    """Moment-based normality statistic; chi^2_2 under the Gaussian null
    (1% critical value 9.21)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    return n * (_skewness(x) ** 2 / 6.0 + _excess_kurtosis(x) ** 2 / 24.0)


@dataclass(frozen=True)
class FluctuationReport:
    n_samples: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    mcse_mean: float
    mcse_variance: float
    mcse_skewness: float
    mcse_kurtosis: float
    predicted_mean: float
    predicted_variance: float


def clt_report(samples: Sequence[PointConfiguration], g: TestFunction,
               drop: Droplet, pot: Potential) -> FluctuationReport:
    """Empirical moments of the fluctuation statistic with Monte Carlo
    standard errors, next to the Gaussian-limit predictions.  The statistic
    must be supported well inside the droplet."""
    if not g.compactly_supported or \
            abs(g.support_center) + g.support_radius > 0.9 * drop.radius:
        raise SupportError("test function not bulk-supported")
    x = fluct_values(samples, g, drop)
    n = len(x)
    var = float(x.var(ddof=1))
    return FluctuationReport(
        n_samples=n,
        mean=float(x.mean()),
        variance=var,
        skewness=_skewness(x),
        excess_kurtosis=_excess_kurtosis(x),
        mcse_mean=float(x.std(ddof=1) / np.sqrt(n)),
        mcse_variance=float(var * np.sqrt(2.0 / (n - 1))),
        mcse_skewness=float(_se_skewness(n)),
        mcse_kurtosis=float(_se_kurtosis(n)),
        predicted_mean=mean_prediction(g, drop),
        predicted_variance=variance_prediction(g),
    )


class CovarianceCheck(NamedTuple):
    empirical: float
    predicted: float
    mcse: float


def covariance_check(samples: Sequence[PointConfiguration], f: TestFunction,
                     g: TestFunction, drop: Droplet) -> CovarianceCheck:
    """Empirical covariance of the two fluctuation statistics against the
    polarized Dirichlet prediction (1/4) int grad f . grad g dA."""
    xf = fluct_values(samples, f, drop)
    xg = fluct_values(samples, g, drop)
    n = len(xf)
    cov = float(np.cov(xf, xg, ddof=1)[0, 1])
    se = np.sqrt((xf.var(ddof=1) * xg.var(ddof=1) + cov**2) / (n - 1))
    return CovarianceCheck(empirical=cov, predicted=covariance_prediction(f, g),
                           mcse=float(se))


# ---------------------------------------------------------------------------
# exponential tilting


@dataclass(frozen=True)
class TiltingRow:
    lam: float
    derivative: float
    prediction: float
    ess_fraction: float


@dataclass(frozen=True)
class TiltingResult:
    rows: tuple
    slope: float
    slope_prediction: float
    intercept: float
    second_derivative_min: float
    low_ess: bool


def tilting_check(pot: Potential, m: float, n: int, g: TestFunction,
                  lam_grid: Sequence[float], drop: Droplet,
                  n_samples: int = 100_000, rng=None) -> TiltingResult:
    """Derivative of the tilted log-moment-generating function of the
    fluctuation statistic, by reweighted Monte Carlo, against the affine
    prediction  e_g + lam * (1/4) int |grad g|^2 dA.

    Ginibre uses matrix eigenvalues; other radial fields fall back to the
    determinantal sampler (keep n small for importance-sampling stability).
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if pot.name == "ginibre" and m == n:
        samples = [sample_ginibre_matrix(n, rng) for _ in range(n_samples)]
    else:
        kern = weighted_kernel(pot, m, n)
        cfg = SamplerConfig(master_seed=0)
        samples = [sample_dpp(kern, cfg, rng) for _ in range(n_samples)]
    x = fluct_values(samples, g, drop)

    v_pred = variance_prediction(g)
    e_pred = mean_prediction(g, drop)
    rows = []
    derivs = []
    second_min = np.inf
    low_ess = False
    for lam in lam_grid:
        logw = lam * x
        logw -= logw.max()
        w = np.exp(logw)
        wsum = w.sum()
        ess = wsum**2 / (np.sum(w**2) * len(x))
        if ess < 0.05:
            low_ess = True
            warnings.warn(f"effective sample size {ess:.1%} at lambda={lam}; "
                          "enlarge the sample", RuntimeWarning)
        mean_w = float(np.sum(w * x) / wsum)
        var_w = float(np.sum(w * (x - mean_w) ** 2) / wsum)
        second_min = min(second_min, var_w)
        derivs.append(mean_w)
        rows.append(TiltingRow(lam=float(lam), derivative=mean_w,
                               prediction=e_pred + lam * v_pred,
                               ess_fraction=float(ess)))
    slope, intercept = np.polyfit(np.asarray(lam_grid, dtype=float),
                                  np.asarray(derivs), 1)
    return TiltingResult(rows=tuple(rows), slope=float(slope),
                         slope_prediction=v_pred, intercept=float(intercept),
                         second_derivative_min=float(second_min), low_ess=low_ess)


# ---------------------------------------------------------------------------
# boundary statistics (constant-Laplacian fields, disk droplet)


class BoundaryPrediction(NamedTuple):
    e_f: float
    v_f2: float
    interior_energy: float
    exterior_energy: float


def boundary_statistics(f: TestFunction, drop: Droplet,
                        n_theta: int = 512, n_radial: int = 400) -> BoundaryPrediction:
    """Limit mean and variance of the fluctuation of a global statistic for a
    constant-Laplacian (Hele-Shaw type) field with disk droplet:

        e_f  = (1/4) int_boundary dn f ds           (ds = arclength / 2 pi)
        v_f2 = (1/4) [ int_disk |grad f|^2 dA
                       + Dirichlet energy of the bounded harmonic extension ]

    The harmonic extension is built from the Fourier coefficients of the
    boundary restriction; a non-constant Laplacian near the droplet raises
    UnsupportedPotentialError (the general mean formula carries extra terms
    that are out of scope here).
    """
    R = drop.radius
    pot = drop.potential
    probe = np.linspace(0.7 * R, 1.3 * R, 64).astype(complex)
    lap = np.asarray(pot.laplacian(probe), dtype=float)
    if np.max(np.abs(lap - lap[0])) > 1e-10 * max(1.0, abs(lap[0])):
        raise UnsupportedPotentialError(
            "boundary formulas are implemented only for constant-Laplacian fields")

    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    ring = R * np.exp(1j * theta)
    grad = np.asarray(f.gradient(ring))
    normal = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    dn = np.sum(grad * normal, axis=-1)
    e_f = 0.25 * R * float(np.mean(dn))

    coeff = np.fft.fft(np.asarray(f.value(ring), dtype=float)) / n_theta
    kk = np.fft.fftfreq(n_theta, d=1.0 / n_theta)
    exterior = 2.0 * float(np.sum(np.abs(kk) * np.abs(coeff) ** 2))

    z, w = _disk_rule(0.0, R, n_radial=n_radial, n_theta=n_theta)
    gsq = np.sum(np.asarray(f.gradient(z)) ** 2, axis=-1)
    interior = float(np.sum(w * gsq))

    return BoundaryPrediction(e_f=e_f, v_f2=0.25 * (interior + exterior),
                              interior_energy=interior, exterior_energy=exterior)
