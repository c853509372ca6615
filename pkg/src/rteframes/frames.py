"""Complex unit vectors k(nu, q) and the frame-rotation operator.

The rotation acts on spherical-harmonic expansions through analytically
continued Wigner d-matrices; it is block-diagonal in degree l and uses the
Euler angles (phi_k, theta_k, 0), with theta_k = i*tau purely imaginary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import sph_harm, wigner_d_complex

__all__ = ["Frame", "ShExpansion", "rotate", "inverse_rotate", "rotated_mu", "evaluate"]


@dataclass(frozen=True)
class Frame:
    """Reference frame whose z-axis points along k(nu, q).

    nu is the separation constant (nonzero real), q >= 0 the spatial
    frequency in mu_t units, phi_q the azimuth of the frequency vector.
    Derived quantities: k_z = sqrt(1+(nu q)^2) (real, >= 1), tau_arg =
    |nu q|, and the azimuth phi_k of the complex unit vector, which is
    phi_q + pi for nu > 0 and phi_q for nu < 0.  At q = 0 the rotation is
    the identity and phi_k is fixed to 0 (the azimuth is then arbitrary;
    the identity choice keeps q -> 0 limits aligned with the lab frame).
    """

    nu: float
    q: float
    phi_q: float = 0.0

    def __post_init__(self):
        if self.nu == 0:
            raise ValueError("nu must be nonzero")
        if self.q < 0:
            raise ValueError("q must be >= 0")

    @property
    def k_z(self) -> float:
        return math.hypot(1.0, self.nu * self.q)

    @property
    def tau_arg(self) -> float:
        return abs(self.nu * self.q)

    @property
    def phi_k(self) -> float:
        if self.q == 0.0:
            return 0.0
        return self.phi_q + math.pi if self.nu > 0 else self.phi_q


@dataclass
class ShExpansion:
    """Truncated spherical-harmonic expansion sum f_lm Y_lm.

    coeffs[l] is a complex vector of length 2l+1 indexed by m + l.
    """

    l_max: int
    coeffs: list = field(default_factory=list)

    @classmethod
    def zeros(cls, l_max: int) -> "ShExpansion":
        return cls(l_max=l_max, coeffs=[np.zeros(2 * l + 1, dtype=complex) for l in range(l_max + 1)])

    @classmethod
    def unit(cls, l: int, m: int, l_max: int | None = None) -> "ShExpansion":
        out = cls.zeros(max(l, l_max if l_max is not None else l))
        out.coeffs[l][m + l] = 1.0
        return out

    def get(self, l: int, m: int) -> complex:
        return self.coeffs[l][m + l]

    def norm_sq(self) -> float:
        return float(sum(np.sum(np.abs(c) ** 2) for c in self.coeffs))


def _phase_vector(l: int, phi: float) -> np.ndarray:
    m = np.arange(-l, l + 1)
    return np.exp(-1j * m * phi)


def rotate(frame: Frame, f: ShExpansion) -> ShExpansion:
    """Apply the frame rotation to an expansion.

    Degree blocks transform independently:
    (Rf)_{lm'} = sum_m exp(-i m' phi_k) d^l_{m'm}[i tau] f_{lm}.
    """
    slices = wigner_d_complex(f.l_max, frame.tau_arg)
    out = ShExpansion.zeros(f.l_max)
    for l in range(f.l_max + 1):
        block = slices[l].matrix @ f.coeffs[l]
        out.coeffs[l] = _phase_vector(l, frame.phi_k) * block
    return out


def inverse_rotate(frame: Frame, f: ShExpansion) -> ShExpansion:
    """Inverse of rotate: (R^-1 f)_{lm'} = sum_m f_lm e^{i m phi_k} d^l_{m m'}."""
    slices = wigner_d_complex(f.l_max, frame.tau_arg)
    out = ShExpansion.zeros(f.l_max)
    for l in range(f.l_max + 1):
        phased = f.coeffs[l] * np.conj(_phase_vector(l, frame.phi_k))
        out.coeffs[l] = slices[l].matrix.T @ phased
    return out


def rotated_mu(frame: Frame, mu: float, phi: float) -> complex:
    """R_k mu = k_z mu - i nu q sqrt(1-mu^2) cos(phi - phi_q) = s.k."""
    s = math.sqrt(max(0.0, 1.0 - mu * mu))
    return frame.k_z * mu - 1j * frame.nu * frame.q * s * math.cos(phi - frame.phi_q)


def evaluate(f: ShExpansion, mu, phi):
    """Pointwise value sum_lm f_lm Y_lm(s) at direction (mu, phi)."""
    mu = np.asarray(mu, dtype=float)
    phi = np.asarray(phi, dtype=float)
    total = np.zeros(np.broadcast(mu, phi).shape, dtype=complex)
    for l in range(f.l_max + 1):
        for m in range(-l, l + 1):
            c = f.coeffs[l][m + l]
            if c != 0:
                total = total + c * sph_harm(l, m, mu, phi)
    return total[()] if total.ndim == 0 else total
