"""Quadrature engines: half-range Gauss-Legendre rules and semi-infinite
Bessel-weighted integrals (Ogata's rule for oscillatory tails, tanh-sinh
for the non-oscillatory r = 0 case)."""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

__all__ = ["HalfRangeRule", "gauss_legendre_half", "hankel_integral", "tanh_sinh_01"]


@dataclass(frozen=True)
class HalfRangeRule:
    """Gauss-Legendre nodes on (0,1), mirrored onto (-1,0).

    nodes/weights cover the positive half-range in ascending order; the
    mirrored node -mu_i reuses weight w_i.  full_nodes() lays out all 2N
    directions as [mu_1..mu_N, -mu_1..-mu_N].
    """

    N: int
    nodes: np.ndarray
    weights: np.ndarray

    def full_nodes(self) -> np.ndarray:
        return np.concatenate([self.nodes, -self.nodes])

    def full_weights(self) -> np.ndarray:
        return np.concatenate([self.weights, self.weights])


def gauss_legendre_half(N: int) -> HalfRangeRule:
    """N-point Gauss-Legendre rule mapped affinely from (-1,1) to (0,1)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    x, w = np.polynomial.legendre.leggauss(N)
    order = np.argsort(x)
    return HalfRangeRule(N=N, nodes=(x[order] + 1.0) / 2.0, weights=w[order] / 2.0)


def tanh_sinh_01(f, max_level: int = 12, tol: float = 1e-12):
    """Tanh-sinh quadrature of f over (0,1), tolerant of endpoint blowup."""
    # x(t) = (1 + tanh((pi/2) sinh t)) / 2 on t in (-tmax, tmax)
    tmax = 3.8
    total = None
    prev = None
    for level in range(3, max_level + 1):
        n = 2**level
        t = np.linspace(-tmax, tmax, 2 * n + 1)
        st = np.sinh(t) * (math.pi / 2.0)
        x = 0.5 * (1.0 + np.tanh(st))
        dx = 0.25 * math.pi * np.cosh(t) / np.cosh(st) ** 2
        good = (x > 0.0) & (x < 1.0) & (dx > 0.0)
        vals = np.zeros(len(t), dtype=complex)
        vals[good] = f(x[good])
        total = np.sum(vals * dx) * (t[1] - t[0])
        if prev is not None and abs(total - prev) <= tol * (abs(total) + 1e-300):
            break
        prev = total
    total = complex(total)
    return total.real if abs(total.imag) < 1e-13 * (abs(total.real) + 1e-300) else total


class HankelNonConvergence(RuntimeError):
    """Raised when the transform does not settle within the node budget;
    carries the partial value in .partial."""

    def __init__(self, msg, partial):
        super().__init__(msg)
        self.partial = partial


def _ogata_psi(t):
    arg = np.minimum(0.5 * math.pi * np.sinh(np.minimum(t, 300.0)), 300.0)
    return t * np.tanh(arg)


def _ogata_psi_prime(t):
    arg = np.minimum(0.5 * math.pi * np.sinh(np.minimum(t, 300.0)), 300.0)
    th = np.tanh(arg)
    sech2 = np.where(arg < 300.0, 1.0 / np.cosh(arg) ** 2, 0.0)
    return th + 0.5 * math.pi * t * np.cosh(np.minimum(t, 300.0)) * sech2


@lru_cache(maxsize=64)
def _ogata_nodes(m: int, n_nodes: int):
    xi = sp.jn_zeros(m, n_nodes) / math.pi
    w = sp.yv(m, math.pi * xi) / sp.jv(m + 1, math.pi * xi)
    return xi, w


def _ogata_transform(g, m: int, h: float, n_nodes: int):
    """Ogata (2005) rule for int_0^inf g(x) J_m(x) dx with step h."""
    xi, w = _ogata_nodes(m, n_nodes)
    hxi = h * xi
    x = (math.pi / h) * _ogata_psi(hxi)
    dpsi = _ogata_psi_prime(hxi)
    jm = sp.jv(m, x)
    vals = np.asarray(g(x), dtype=complex)
    terms = math.pi * w * vals * jm * dpsi
    return np.sum(terms), terms


def hankel_integral(f, bessel_order: int = 0, scale: float = 0.0,
                    rtol: float = 1e-8, max_nodes: int = 6000):
    """Evaluate int_0^inf q J_m(q r) f(q) dq.

    Parameters
    ----------
    f : callable
        Smooth integrand with at least algebraic decay; must accept a
        vector of q >= 0 and be side-effect free (the engine batches and
        may reorder evaluations).
    bessel_order : int
        Order m of the Bessel kernel.
    scale : float
        Radial scale r >= 0.  r = 0 with m = 0 degenerates to a plain
        semi-infinite integral; r = 0 with m > 0 is identically zero.
    rtol : float
        Relative settling target between refinement passes.

    Raises
    ------
    HankelNonConvergence
        When refinement stalls; the exception carries the partial value.
    """
    if scale < 0:
        raise ValueError("scale must be >= 0")
    m = int(bessel_order)
    if scale == 0.0 and m != 0:
        return 0.0
    if scale < 0.02:
        # weak oscillation regime: fold J_m into the integrand and run
        # tanh-sinh on the compactified half-line
        def wrapped(x):
            q = x / (1.0 - x)
            kern = sp.jv(m, q * scale) if scale > 0.0 else 1.0
            return np.asarray(f(q)) * kern * q / (1.0 - x) ** 2
        return tanh_sinh_01(wrapped, max_level=13, tol=rtol * 1e-2)

    def g(x):
        q = x / scale
        # int_0^inf q J_m(q r) f(q) dq = (1/r^2) int x J_m(x) f(x/r) dx
        return np.asarray(f(q)) * q / scale

    best = None
    prev = None
    h = 0.2
    while True:
        # nodes past hxi ~ 4.3 are annihilated by the double-exponential map
        n = min(int(math.ceil(4.3 / h)) + 8, max_nodes)
        val, terms = _ogata_transform(g, m, h, n)
        tail = np.max(np.abs(terms[-4:]))
        best = val
        settled = prev is not None and abs(val - prev) <= rtol * (abs(val) + 1e-300)
        if settled and tail <= 1e3 * rtol * (abs(val) + 1e-300):
            out = complex(best)
            return out.real if abs(out.imag) <= 1e-12 * (abs(out.real) + 1e-300) else out
        prev = val
        h /= 2.0
        if int(math.ceil(4.3 / h)) + 8 > max_nodes:
            raise HankelNonConvergence(
                f"Hankel transform did not settle to rtol={rtol}",
                partial=complex(best),
            )
