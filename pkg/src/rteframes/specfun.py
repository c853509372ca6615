"""Special-function kernel shared by all transport solvers.

Legendre family, normalized Chandrasekhar polynomials with overflow-safe
log scaling, analytically continued Wigner d-matrices for imaginary
rotation angles, Clebsch-Gordan coefficients, and the Bessel conventions
used by the closed-form Green's functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sp

__all__ = [
    "double_factorial",
    "legendre_p",
    "p_poly",
    "p_poly_table",
    "ChandraTable",
    "chandra_g",
    "wigner_d_complex",
    "WignerSlice",
    "clebsch_gordan",
    "bessel",
    "sph_harm",
]


def double_factorial(n: int) -> float:
    """(2m-1)!! style double factorial with (-1)!! = 1."""
    if n <= 0:
        return 1.0
    out = 1.0
    while n > 1:
        out *= n
        n -= 2
    return out


def legendre_p(l: int, m: int, mu):
    """Associated Legendre polynomial P_l^m with the Condon-Shortley sign.

    Parameters
    ----------
    l, m : int
        Degree and order, 0 <= m <= l.
    mu : float or ndarray
        Argument; the classical domain is [-1, 1] but the polynomials are
        evaluated for any real or complex argument (entire continuation,
        with (1-mu^2)^(m/2) taken through the principal branch).
    """
    if m < 0 or m > l:
        raise ValueError(f"need 0 <= m <= l, got l={l} m={m}")
    mu = np.asarray(mu)
    # seed P_m^m = (-1)^m (2m-1)!! (1-mu^2)^(m/2), then upward recurrence in l
    somx2 = np.sqrt((1.0 - mu) * (1.0 + mu) + 0j) if np.iscomplexobj(mu) or np.any(
        np.abs(mu) > 1.0
    ) else np.sqrt((1.0 - mu) * (1.0 + mu))
    pmm = ((-1.0) ** m) * double_factorial(2 * m - 1) * somx2**m
    if l == m:
        return pmm[()] if pmm.ndim == 0 else pmm
    pmmp1 = (2.0 * m + 1.0) * mu * pmm
    if l == m + 1:
        return pmmp1[()] if pmmp1.ndim == 0 else pmmp1
    for ll in range(m + 2, l + 1):
        pll = ((2.0 * ll - 1.0) * mu * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m)
        pmm, pmmp1 = pmmp1, pll
    return pmmp1[()] if pmmp1.ndim == 0 else pmmp1


def p_poly(l: int, m: int, mu):
    """Renormalized Legendre polynomial p_l^m.

    Defined through the symmetric three-term recurrence

        sqrt((l+1)^2 - m^2) p_{l+1} + sqrt(l^2 - m^2) p_{l-1} = (2l+1) mu p_l

    seeded with p_m^m = (2m-1)!!/sqrt((2m)!).  Negative orders follow
    p_l^{-m} = (-1)^m p_l^m.  Entire in mu, so complex arguments are fine.
    """
    if l < abs(m):
        raise ValueError(f"need l >= |m|, got l={l} m={m}")
    sign = (-1.0) ** m if m < 0 else 1.0
    m = abs(m)
    mu = np.asarray(mu)
    pm = np.full_like(mu, double_factorial(2 * m - 1) / math.sqrt(math.factorial(2 * m)), dtype=mu.dtype if mu.dtype.kind == "c" else float)
    if l == m:
        out = sign * pm
        return out[()] if out.ndim == 0 else out
    pm1 = math.sqrt(2 * m + 1.0) * mu * pm
    for ll in range(m + 1, l):
        pm1, pm = (
            ((2.0 * ll + 1.0) * mu * pm1 - math.sqrt(ll**2 - m**2) * pm)
            / math.sqrt((ll + 1.0) ** 2 - m**2),
            pm1,
        )
    out = sign * pm1
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class _ScaledTable:
    """Three-term-recurrence values as mantissa * exp(log_scale) pairs."""

    m: int
    lmin: int
    mantissa: np.ndarray
    log_scale: np.ndarray

    def value(self, l: int):
        """Plain float value; may overflow to inf for extreme arguments."""
        i = l - self.lmin
        return self.mantissa[i] * np.exp(self.log_scale[i])

    def values(self) -> np.ndarray:
        return self.mantissa * np.exp(self.log_scale)

    def log_abs(self, l: int) -> float:
        i = l - self.lmin
        mag = np.abs(self.mantissa[i])
        return -np.inf if mag == 0 else float(np.log(mag) + self.log_scale[i])

    def ratio(self, l_num: int, l_den: int):
        """value(l_num) / value(l_den) without overflow."""
        i, j = l_num - self.lmin, l_den - self.lmin
        return (self.mantissa[i] / self.mantissa[j]) * np.exp(
            self.log_scale[i] - self.log_scale[j]
        )


class ChandraTable(_ScaledTable):
    """Normalized Chandrasekhar polynomials g_l^m(nu), l = |m|..L."""


_RESCALE = 1e150
_LOG_RESCALE = math.log(_RESCALE)


def _three_term_scaled(m: int, L: int, coef, cls=_ScaledTable):
    """Run  sqrt((l+1)^2-m^2) y_{l+1} = coef(l) y_l - sqrt(l^2-m^2) y_{l-1}
    from y_m = (2m-1)!!/sqrt((2m)!), rescaling mantissas on overflow."""
    m = abs(m)
    n = L - m + 1
    complex_out = np.iscomplexobj(np.asarray(coef(m)))
    mant = np.zeros(n, dtype=complex if complex_out else float)
    logs = np.zeros(n)
    mant[0] = double_factorial(2 * m - 1) / math.sqrt(math.factorial(2 * m))
    scale = 0.0
    prev = 0.0  # y_{m-1} is zero by convention
    cur = mant[0]
    for l in range(m, L):
        nxt = (coef(l) * cur - math.sqrt(float(l * l - m * m)) * prev) / math.sqrt(
            float((l + 1) ** 2 - m * m)
        )
        if abs(nxt) > _RESCALE:
            nxt /= _RESCALE
            cur /= _RESCALE
            scale += _LOG_RESCALE
        prev, cur = cur, nxt
        mant[l + 1 - m] = cur
        logs[l + 1 - m] = scale
    return cls(m=m, lmin=m, mantissa=mant, log_scale=logs)


def chandra_g(medium, m: int, nu, L: int) -> ChandraTable:
    """Chandrasekhar polynomial table g_{|m|}^m(nu) .. g_L^m(nu).

    The forward recurrence

        sqrt((l+1)^2 - m^2) g_{l+1} + sqrt(l^2 - m^2) g_{l-1} = nu h_l g_l

    is seeded from g_m^m = (2m-1)!!/sqrt((2m)!) and run with per-entry
    mantissa/exponent rescaling, so ratios at large degree remain usable
    even when raw values overflow.  Negative m maps to (-1)^m g_l^{|m|}.

    Parameters
    ----------
    medium : Medium
        Supplies h_l = 2l+1 - albedo * beta_l for l <= l_max, else 2l+1.
    m : int
        Azimuthal order.
    nu : float or complex
        Argument; must be nonzero.
    L : int
        Largest degree tabulated (L >= |m|).
    """
    if L < abs(m):
        raise ValueError("L must be at least |m|")
    if nu == 0:
        raise ValueError("nu = 0 is not a valid Chandrasekhar argument")
    table = _three_term_scaled(m, L, lambda l: nu * medium.h(l), cls=ChandraTable)
    if m < 0 and m % 2 != 0:
        table = ChandraTable(
            m=m, lmin=abs(m), mantissa=-table.mantissa, log_scale=table.log_scale
        )
    return table


def chandra_g_minimal(medium, m: int, nu: float, L: int, pad: int = 60) -> np.ndarray:
    """Decaying Chandrasekhar solution g_{|m|}^m(nu)..g_L^m(nu) at a discrete
    eigenvalue, by Miller backward recurrence with the standard seed
    g_m^m = (2m-1)!!/sqrt((2m)!).

    At an eigenvalue the g_l sequence is the minimal solution of the
    three-term recurrence, so the forward direction (chandra_g) loses all
    relative accuracy; the backward sweep from a zero tail is stable.
    """
    m = abs(m)
    top = L + pad
    g_hi = 0.0
    g_cur = 1.0
    out = np.zeros(top - m + 1)
    out[-1] = g_cur
    for l in range(top, m, -1):
        g_lo = (
            nu * medium.h(l) * g_cur - math.sqrt((l + 1.0) ** 2 - m * m) * g_hi
        ) / math.sqrt(float(l * l - m * m))
        g_hi, g_cur = g_cur, g_lo
        out[l - 1 - m] = g_cur
        if abs(g_cur) > 1e250:
            out[l - 1 - m :] /= abs(g_cur)
            g_hi /= abs(g_cur)
            g_cur = out[l - 1 - m]
    out = out[: L - m + 1]
    seed = double_factorial(2 * m - 1) / math.sqrt(math.factorial(2 * m))
    return out * (seed / out[0])


def p_poly_table(m: int, mu, L: int) -> _ScaledTable:
    """Scaled table of p_l^m(mu), l = |m|..L (same engine as chandra_g)."""
    if L < abs(m):
        raise ValueError("L must be at least |m|")
    table = _three_term_scaled(m, L, lambda l: (2.0 * l + 1.0) * mu)
    if m < 0 and m % 2 != 0:
        table = _ScaledTable(
            m=m, lmin=abs(m), mantissa=-table.mantissa, log_scale=table.log_scale
        )
    return table


@dataclass(frozen=True)
class WignerSlice:
    """All d^l_{m'm}[i tau] for one degree l at fixed nu*q.

    matrix[i, j] = d^l_{m' m} with m' = i - l, m = j - l.  The entries obey
    the non-conjugated orthogonality sum_m' d_{m'm} d_{m'm''} = delta_{mm''}.
    """

    l: int
    tau_arg: float
    matrix: np.ndarray

    def d(self, mp: int, m: int):
        return self.matrix[mp + self.l, m + self.l]


def _wigner_d_sum(l: int, mp: int, m: int, c: float, s2: float) -> complex:
    """Explicit Wigner sum continued to cos(theta/2)=c >= 1, sin^2(theta/2)=-s2.

    For the imaginary angle every term in the sum has one sign, so the
    evaluation is cancellation-free; logs of factorials keep it in range.
    """
    kmin = max(0, m - mp)
    kmax = min(l + m, l - mp)
    if kmin > kmax:
        return 0.0
    pref = 0.5 * (
        math.lgamma(l + m + 1)
        + math.lgamma(l - m + 1)
        + math.lgamma(l + mp + 1)
        + math.lgamma(l - mp + 1)
    )
    tot = 0.0
    logc = math.log(c)
    logs = 0.5 * math.log(s2) if s2 > 0 else -math.inf
    for k in range(kmin, kmax + 1):
        lg = pref - (
            math.lgamma(k + 1)
            + math.lgamma(l + m - k + 1)
            + math.lgamma(l - mp - k + 1)
            + math.lgamma(mp - m + k + 1)
        )
        p_c = 2 * l + m - mp - 2 * k
        p_s = 2 * k + mp - m
        if p_s == 0:
            term = math.exp(lg + p_c * logc)
        elif s2 == 0.0:
            continue
        else:
            term = math.exp(lg + p_c * logc + p_s * logs)
        tot += term
    # (-1)^(k+mp-m) from the sum and i^(2k+mp-m) from sin(theta/2) = i*sigma
    # combine into the k-independent phase (-i)^(mp-m); the k-sum itself
    # stays single-signed, which is what makes the continuation stable.
    return ((-1j) ** (mp - m)) * tot


def wigner_d_complex(l_max: int, nu_q: float) -> list[WignerSlice]:
    """Analytically continued Wigner d-matrices d^l_{m'm}[i tau(nu q)].

    The complex polar angle satisfies cos(theta) = sqrt(1 + (nu q)^2) and
    sin(theta) = i |nu q|; equivalently cos(theta/2) = sqrt((1+kz)/2) and
    sin(theta/2) = i sqrt((kz-1)/2).  Entries are real for m' - m even and
    purely imaginary for m' - m odd.

    Returns one WignerSlice per degree l = 0..l_max.
    """
    t = abs(float(nu_q))
    if not math.isfinite(t):
        raise ValueError("nu*q must be finite")
    kz = math.hypot(1.0, t)
    c = math.sqrt((1.0 + kz) / 2.0)
    s2 = (kz - 1.0) / 2.0  # equals -sin^2(theta/2)
    slices = []
    for l in range(l_max + 1):
        size = 2 * l + 1
        mat = np.zeros((size, size), dtype=complex)
        for mp in range(-l, l + 1):
            for m in range(-l, l + 1):
                mat[mp + l, m + l] = _wigner_d_sum(l, mp, m, c, s2)
        slices.append(WignerSlice(l=l, tau_arg=t, matrix=mat))
    return slices


@lru_cache(maxsize=100000)
def _cg_cached(l1, m1, l2, m2, l3, m3) -> float:
    # Racah's closed form, evaluated with exact integer factorials
    f = math.factorial
    pref = (2 * l3 + 1) * (
        f(l3 + l1 - l2) * f(l3 - l1 + l2) * f(l1 + l2 - l3)
    ) / f(l1 + l2 + l3 + 1)
    pref *= (
        f(l3 + m3) * f(l3 - m3)
        * f(l1 - m1) * f(l1 + m1)
        * f(l2 - m2) * f(l2 + m2)
    )
    kmin = max(0, l2 - l3 - m1, l1 - l3 + m2)
    kmax = min(l1 + l2 - l3, l1 - m1, l2 + m2)
    tot = 0.0
    for k in range(kmin, kmax + 1):
        den = (
            f(k)
            * f(l1 + l2 - l3 - k)
            * f(l1 - m1 - k)
            * f(l2 + m2 - k)
            * f(l3 - l2 + m1 + k)
            * f(l3 - l1 - m2 + k)
        )
        tot += (-1.0) ** k / den
    return math.sqrt(pref) * tot


def clebsch_gordan(l1: int, m1: int, l2: int, m2: int, l3: int, m3: int) -> float:
    """Clebsch-Gordan coefficient C^{l3 m3}_{l1 m1 l2 m2}.

    Returns 0 for arguments outside the triangle/projection rules instead
    of raising, which keeps coupled sums branch-free.
    """
    if m3 != m1 + m2:
        return 0.0
    if not (abs(l1 - l2) <= l3 <= l1 + l2):
        return 0.0
    if abs(m1) > l1 or abs(m2) > l2 or abs(m3) > l3:
        return 0.0
    return _cg_cached(l1, m1, l2, m2, l3, m3)


def bessel(kind: str, order: int, x):
    """Bessel evaluations in the conventions used by the Green's functions.

    kind:
      'J'                     ordinary Bessel J_order
      'K0'                    modified Bessel of the second kind, order 0
      'modified_spherical_k'  k_n without the pi/2 factor, k_0(x)=exp(-x)/x
      'spherical_j'           spherical Bessel j_L
    """
    x = np.asarray(x, dtype=float)
    if kind == "J":
        return sp.jv(order, x)
    if kind == "K0":
        if np.any(x <= 0):
            raise ValueError("K_0 needs x > 0")
        return sp.kv(0, x)
    if kind == "modified_spherical_k":
        if np.any(x <= 0):
            raise ValueError("k_n needs x > 0")
        return (2.0 / math.pi) * sp.spherical_kn(order, x)
    if kind == "spherical_j":
        return sp.spherical_jn(order, x)
    raise ValueError(f"unknown Bessel kind {kind!r}")


def sph_harm(l: int, m: int, mu, phi):
    """Spherical harmonic Y_lm(theta, phi) with mu = cos(theta)."""
    mu = np.asarray(mu, dtype=float)
    theta = np.arccos(np.clip(mu, -1.0, 1.0))
    return sp.sph_harm_y(l, m, theta, np.asarray(phi, dtype=float))
