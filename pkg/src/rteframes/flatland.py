"""Two-dimensional (flatland) transport: eigenvalues, normalization, and
the point-source energy density built from modified Bessel functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import kv

from .medium import Medium2D
from .quadrature import tanh_sinh_01

__all__ = [
    "phi_nu",
    "gamma_polys",
    "dispersion_2d",
    "lambda_2d",
    "Spectrum2D",
    "eigenvalues_2d",
    "Norm2D",
    "norm_2d",
    "density_2d",
]


def gamma_polys(medium: Medium2D, z, L: int) -> np.ndarray:
    """gamma_0..gamma_L from  2 z h_m gamma_m = gamma_{m+1} + gamma_{m-1},
    seeded by gamma_0 = 1, gamma_1 = (1 - albedo) z."""
    if L < 0:
        raise ValueError("L must be >= 0")
    z = complex(z) if isinstance(z, complex) else float(z)
    out = np.zeros(L + 1, dtype=complex if isinstance(z, complex) else float)
    out[0] = 1.0
    if L >= 1:
        out[1] = (1.0 - medium.albedo) * z
    for m in range(1, L):
        out[m + 1] = 2.0 * z * medium.h2d(m) * out[m] - out[m - 1]
    return out


def _g2d_cheb(medium: Medium2D, z, arg_t) -> float:
    """g^(2D)(z, phi) with cos(m phi) supplied as Chebyshev T_m(arg_t)."""
    gam = gamma_polys(medium, z, medium.l_max)
    tm_prev, tm = 1.0, arg_t
    total = 1.0
    for m in range(1, medium.l_max + 1):
        total += 2.0 * medium.beta2d[m] * gam[m] * tm
        tm_prev, tm = tm, 2.0 * arg_t * tm - tm_prev
    return total


def _g2d_phi(medium: Medium2D, z, phi) -> np.ndarray:
    gam = gamma_polys(medium, z, medium.l_max)
    phi = np.asarray(phi, dtype=float)
    total = np.ones_like(phi, dtype=gam.dtype)
    for m in range(1, medium.l_max + 1):
        total = total + 2.0 * medium.beta2d[m] * gam[m] * np.cos(m * phi)
    return total


def dispersion_2d(medium: Medium2D, z: float, n_phi: int = 256) -> float:
    """Lambda^(2D)(z) for |z| > 1.

    The m = 0 azimuthal integral has the closed 1/sqrt(z^2-1) kernel; the
    m >= 1 terms are integrated on a uniform azimuthal grid (spectrally
    accurate for the smooth periodic integrand).
    """
    if abs(z) <= 1.0:
        raise ValueError("dispersion_2d needs |z| > 1")
    root = math.sqrt(z * z - 1.0)
    base = 1.0 / root  # (1/2pi) int dphi / (z - cos phi)
    if medium.l_max == 0:
        integral = base
    else:
        phi = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
        rest = _g2d_phi(medium, z, phi) - 1.0
        integral = base + float(np.mean(rest / (z - np.cos(phi))))
    return 1.0 - medium.albedo * z * integral


def lambda_2d(medium: Medium2D, nu: float) -> float:
    """Principal-value dispersion lambda^(2D)(nu) on the continuum (-1,1).

    PV of cos(m phi)/(nu - cos phi) over a period is -2 pi U_{m-1}(nu)
    (Glauert), and the m = 0 part vanishes, so the result is a finite
    Chebyshev sum.
    """
    if not -1.0 < nu < 1.0:
        raise ValueError("lambda_2d needs nu inside (-1, 1)")
    if medium.l_max == 0:
        return 1.0
    gam = gamma_polys(medium, nu, medium.l_max)
    u_prev, u = 1.0, 2.0 * nu  # U_0, U_1
    total = 0.0
    for m in range(1, medium.l_max + 1):
        um1 = u_prev  # U_{m-1}
        total += medium.beta2d[m] * gam[m] * um1
        u_prev, u = u, 2.0 * nu * u - u_prev
    return 1.0 + 2.0 * medium.albedo * nu * total


@dataclass(frozen=True)
class Spectrum2D:
    eigenvalues: np.ndarray
    gamma_at_nu0: np.ndarray

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    @property
    def nu0(self) -> float:
        return float(self.eigenvalues[0])


def eigenvalues_2d(medium: Medium2D, nu_max: float = 1e6) -> Spectrum2D:
    """Positive roots of Lambda^(2D) on (1, nu_max), largest first."""
    if medium.albedo >= 1.0:
        raise ValueError("needs albedo < 1")
    f = lambda z: dispersion_2d(medium, z)
    # Lambda -> 1 - albedo at infinity and -inf at 1+; scan for sign changes
    grid = 1.0 + np.logspace(-8, math.log10(nu_max - 1.0), 200)
    vals = np.array([f(z) for z in grid])
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(f, a, b, xtol=1e-14, rtol=8.9e-16))
    if not roots:
        raise RuntimeError("no discrete 2D eigenvalue found")
    roots = np.array(sorted(set(roots), reverse=True))
    return Spectrum2D(eigenvalues=roots, gamma_at_nu0=gamma_polys(medium, roots[0], medium.l_max))


def _phi_eigfun_sq_cos_integral(medium: Medium2D, nu: float, n_phi: int = 4096) -> float:
    """int_0^2pi phi^(2D)(nu, phi)^2 cos(phi) dphi for a discrete nu > 1.

    The discrete eigenfunction is regular, so the orthogonality integral
    can be taken literally on a uniform grid.
    """
    w = medium.albedo
    phi = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
    g = _g2d_phi(medium, nu, phi)
    f = (w * nu / (2.0 * math.pi)) * g / (nu - np.cos(phi))
    return float(np.mean(f * f * np.cos(phi)) * 2.0 * math.pi)


def phi_nu(nu: float) -> complex:
    """Angle phi_nu with cos(phi_nu) = nu: real arccos on the continuum,
    i*arccosh off it (shifted by pi for nu < -1)."""
    if -1.0 <= nu <= 1.0:
        return complex(math.acos(nu))
    if nu > 1.0:
        return 1j * math.acosh(nu)
    return math.pi + 1j * math.acosh(-nu)


@dataclass(frozen=True)
class Norm2D:
    nu: float
    value: float


def norm_2d(medium: Medium2D, nu: float) -> Norm2D:
    """Normalization factor N^(2D)(nu) in the convention used by density_2d.

    Discrete branch (|nu| > 1): 2 pi times the orthogonality integral
    int phi^2 cos(phi) dphi of the regular discrete eigenfunction, done by
    direct quadrature (the eigenfunction is smooth there).

    Continuum branch (0 < |nu| < 1): the delta(nu - nu') coefficient of
    the singular-eigenfunction overlap, carrying the two-branch Jacobian
    2/sqrt(1-nu^2) of cos(phi) = nu:

        N = 2 pi (2 nu/sqrt(1-nu^2))
              [ (albedo nu g(nu, phi_nu)/2)^2 + (1-nu^2) lambda(nu)^2/4 ].

    Both branches are fixed against the exact Fourier resolvent of the
    isotropic flatland problem (pole residue and branch-cut density).
    """
    if nu == 0.0 or abs(abs(nu) - 1.0) < 1e-12:
        raise ValueError("nu must not be 0 or +-1")
    w = medium.albedo
    if abs(nu) > 1.0:
        val = 2.0 * math.pi * _phi_eigfun_sq_cos_integral(medium, abs(nu))
        return Norm2D(nu=nu, value=val)
    lam = lambda_2d(medium, nu)
    g_cut = _g2d_cheb(medium, nu, nu)  # cos(m phi_nu) = T_m(nu) on the cut
    val = (2.0 * math.pi) * (2.0 * nu / math.sqrt(1.0 - nu * nu)) * (
        (0.5 * w * nu * g_cut) ** 2 + (1.0 - nu * nu) * lam**2 / 4.0
    )
    return Norm2D(nu=nu, value=float(val))


def density_2d(medium: Medium2D, x: float) -> float:
    """Flatland energy density u^(2D) at optical distance x = mu_t |rho|
    from an isotropic point source [1/length].

    u = (mu_t/pi) [ sum_j K_0(x/nu_j) / (nu_j N(nu_j))
                    + int_0^1 K_0(x/nu) / (nu N(nu)) dnu ].
    """
    if x <= 0:
        raise ValueError("x must be > 0 (K_0 is singular at the source)")
    spec = eigenvalues_2d(medium)
    disc = sum(
        float(kv(0, x / nu)) / (nu * norm_2d(medium, float(nu)).value)
        for nu in spec.eigenvalues
    )

    def integrand(nus):
        out = np.zeros_like(nus)
        for i, nu in enumerate(nus):
            if nu <= 0.0 or nu >= 1.0 - 1e-12 or x / nu > 700.0:
                continue
            out[i] = float(kv(0, x / nu)) / (nu * norm_2d(medium, float(nu)).value)
        return out

    # substitute nu = 1 - t^2 near the nu -> 1 endpoint for the soft edge
    def integrand_t(ts):
        nus = 1.0 - ts * ts
        vals = integrand(nus)
        return vals * 2.0 * ts

    cont = float(np.real(tanh_sinh_01(integrand_t, max_level=11, tol=1e-10)))
    return (medium.mu_t / math.pi) * (disc + cont)
