"""Optical media and scattering phase functions.

Every solver in the package consumes the expansion coefficients beta_l
stored here (the (2l+1)-weighted Legendre convention); nothing downstream
ever sees a raw phase-function table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Medium", "Medium2D", "henyey_greenstein", "phase_eval", "hg_phase_closed_form"]


def henyey_greenstein(g: float, l_max: int) -> list[float]:
    """Expansion coefficients beta_l = (2l+1) g^l of the H-G phase function.

    Parameters
    ----------
    g : float
        Scattering asymmetry, |g| < 1.
    l_max : int
        Truncation degree (inclusive).
    """
    if not abs(g) < 1.0:
        raise ValueError(f"Henyey-Greenstein needs |g| < 1, got g={g}")
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    return [(2 * l + 1) * g**l for l in range(l_max + 1)]


@dataclass(frozen=True)
class Medium:
    """Homogeneous scattering medium for the three-dimensional RTE.

    Attributes
    ----------
    mu_a, mu_s : float
        Absorption and scattering coefficients [1/length].
    beta : tuple of float
        Phase-function coefficients beta_0..beta_{l_max}; beta_0 == 1 and
        |beta_l| <= 2l+1 are enforced.
    hg_g : float or None
        Set when the coefficients came from henyey_greenstein(); lets the
        Monte Carlo sampler use the exact inverse CDF instead of a table.
    """

    mu_a: float
    mu_s: float
    beta: tuple = (1.0,)
    hg_g: float | None = None

    def __post_init__(self):
        if self.mu_a < 0:
            raise ValueError("mu_a must be >= 0")
        if self.mu_s <= 0:
            raise ValueError("mu_s must be > 0")
        beta = tuple(float(b) for b in self.beta)
        object.__setattr__(self, "beta", beta)
        if not beta or abs(beta[0] - 1.0) > 1e-12:
            raise ValueError("beta_0 must equal 1")
        for l, b in enumerate(beta):
            if abs(b) > 2 * l + 1 + 1e-9:
                raise ValueError(f"|beta_{l}| = {abs(b)} exceeds 2l+1 = {2*l+1}")
        if self.albedo < 1.0:
            for l, b in enumerate(beta):
                if 2 * l + 1 - self.albedo * b <= 0:
                    raise ValueError(f"h_{l} <= 0: unphysical phase expansion")

    @classmethod
    def hg(cls, mu_a: float, mu_s: float, g: float, l_max: int) -> "Medium":
        return cls(mu_a=mu_a, mu_s=mu_s, beta=tuple(henyey_greenstein(g, l_max)),
                   hg_g=g)

    @property
    def mu_t(self) -> float:
        return self.mu_a + self.mu_s

    @property
    def albedo(self) -> float:
        return self.mu_s / (self.mu_a + self.mu_s)

    @property
    def l_max(self) -> int:
        return len(self.beta) - 1

    @property
    def g(self) -> float:
        """Mean scattering cosine beta_1 / 3 (zero for isotropic media)."""
        return self.beta[1] / 3.0 if len(self.beta) > 1 else 0.0

    def h(self, l: int) -> float:
        """h_l = 2l+1 - albedo * beta_l for l <= l_max, else 2l+1."""
        if l <= self.l_max:
            return 2.0 * l + 1.0 - self.albedo * self.beta[l]
        return 2.0 * l + 1.0

    def beta_l(self, l: int) -> float:
        return self.beta[l] if l <= self.l_max else 0.0

    @classmethod
    def from_config(cls, path) -> "Medium":
        """Read a medium from a plain key=value file.

        Recognized keys: mu_a, mu_s, and either (g, l_max) or beta as a
        comma-separated list.  Lines starting with '#' are comments.
        """
        keys = {}
        with open(path) as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"bad config line: {raw!r}")
                k, v = line.split("=", 1)
                keys[k.strip()] = v.strip()
        try:
            mu_a = float(keys["mu_a"])
            mu_s = float(keys["mu_s"])
        except KeyError as e:
            raise ValueError(f"config missing key {e}") from None
        if "beta" in keys:
            beta = tuple(float(x) for x in keys["beta"].split(","))
            return cls(mu_a=mu_a, mu_s=mu_s, beta=beta)
        if "g" in keys:
            l_max = int(keys.get("l_max", 0))
            return cls.hg(mu_a, mu_s, float(keys["g"]), l_max)
        return cls(mu_a=mu_a, mu_s=mu_s)


@dataclass(frozen=True)
class Medium2D:
    """Flatland medium with the cosine-series phase expansion."""

    mu_a: float
    mu_s: float
    beta2d: tuple = (1.0,)

    def __post_init__(self):
        if self.mu_a < 0:
            raise ValueError("mu_a must be >= 0")
        if self.mu_s <= 0:
            raise ValueError("mu_s must be > 0")
        beta = tuple(float(b) for b in self.beta2d)
        object.__setattr__(self, "beta2d", beta)
        if not beta or abs(beta[0] - 1.0) > 1e-12:
            raise ValueError("beta2d_0 must equal 1")
        if any(abs(b) > 1.0 + 1e-12 for b in beta[1:]):
            raise ValueError("|beta2d_m| must be <= 1")

    @property
    def mu_t(self) -> float:
        return self.mu_a + self.mu_s

    @property
    def albedo(self) -> float:
        return self.mu_s / (self.mu_a + self.mu_s)

    @property
    def l_max(self) -> int:
        return len(self.beta2d) - 1

    def h2d(self, m: int) -> float:
        """h_m = 1 - albedo * beta_m, with beta_m = 0 beyond the truncation."""
        b = self.beta2d[m] if m <= self.l_max else 0.0
        return 1.0 - self.albedo * b


def phase_eval(medium: Medium, cosangle) -> np.ndarray:
    """Phase function value (1/4pi) sum_l beta_l P_l(s.s') [1/steradian]."""
    cosangle = np.asarray(cosangle, dtype=float)
    if np.any(np.abs(cosangle) > 1.0 + 1e-12):
        raise ValueError("cosangle must lie in [-1, 1]")
    val = np.polynomial.legendre.legval(np.clip(cosangle, -1, 1), medium.beta)
    return val / (4.0 * math.pi)


def hg_phase_closed_form(g: float, cosangle) -> np.ndarray:
    """Closed-form Henyey-Greenstein density (the l_max -> infinity limit)."""
    cosangle = np.asarray(cosangle, dtype=float)
    return (1.0 - g * g) / (4.0 * math.pi * (1.0 + g * g - 2.0 * g * cosangle) ** 1.5)
