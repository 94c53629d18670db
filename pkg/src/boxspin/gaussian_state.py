"""Two-mode squeezed vacuum state in the position representation.

The wavefunction is real and Gaussian,

    psi(q, q') = pi**-0.5 * exp(q*q'*sinh(2r) - 0.5*(q**2 + q'**2)*cosh(2r)),

so psi**2 is a bivariate normal density with per-mode variance
cosh(2r)/2 and correlation coefficient tanh(2r).  Positions are
dimensionless (scaled by the oscillator length), so all box lengths
in this package are dimensionless as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidScale

__all__ = [
    "MAX_SQUEEZING",
    "SqueezeState",
    "wavefunction",
    "joint_density",
    "marginal_density",
    "czz_asymptote",
]

# Guard against overflow in cosh(2r) based prefactors; cosh(10) ~ 1.1e4
# is far from float limits but r beyond 5 is outside any regime this
# package is validated for.
MAX_SQUEEZING = 5.0


@dataclass(frozen=True)
class SqueezeState:
    """Squeezing parameter together with derived constants.

    Attributes
    ----------
    r : float
        Squeezing parameter, 0 <= r <= MAX_SQUEEZING.
    cosh2r, sinh2r : float
        cosh(2r) and sinh(2r), precomputed once.
    rho : float
        Correlation coefficient tanh(2r) of the position density.
    sigma2 : float
        Marginal variance cosh(2r)/2 of each mode's position.
    """

    r: float
    cosh2r: float = field(init=False)
    sinh2r: float = field(init=False)
    rho: float = field(init=False)
    sigma2: float = field(init=False)

    def __post_init__(self) -> None:
        r = float(self.r)
        if not math.isfinite(r) or r < 0.0 or r > MAX_SQUEEZING:
            raise InvalidScale(
                f"squeezing parameter must satisfy 0 <= r <= {MAX_SQUEEZING}, got {r!r}"
            )
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "cosh2r", math.cosh(2.0 * r))
        object.__setattr__(self, "sinh2r", math.sinh(2.0 * r))
        object.__setattr__(self, "rho", math.tanh(2.0 * r))
        object.__setattr__(self, "sigma2", math.cosh(2.0 * r) / 2.0)

    @property
    def sigma(self) -> float:
        """Marginal standard deviation of each mode's position."""
        return math.sqrt(self.sigma2)


def wavefunction(q, q2, state: SqueezeState):
    """Evaluate psi(q, q2).  Accepts scalars or broadcastable arrays."""
    q = np.asarray(q, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    out = math.pi**-0.5 * np.exp(
        q * q2 * state.sinh2r - 0.5 * (q * q + q2 * q2) * state.cosh2r
    )
    if out.ndim == 0:
        return float(out)
    return out


def joint_density(q, q2, state: SqueezeState):
    """Evaluate psi(q, q2)**2, the joint position density."""
    q = np.asarray(q, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    out = (1.0 / math.pi) * np.exp(
        2.0 * q * q2 * state.sinh2r - (q * q + q2 * q2) * state.cosh2r
    )
    if out.ndim == 0:
        return float(out)
    return out


def marginal_density(q, state: SqueezeState):
    """Single-mode position density: centered normal, variance cosh(2r)/2."""
    q = np.asarray(q, dtype=float)
    s2 = state.sigma2
    out = np.exp(-q * q / (2.0 * s2)) / math.sqrt(2.0 * math.pi * s2)
    if out.ndim == 0:
        return float(out)
    return out


def czz_asymptote(r: float) -> float:
    """Large-box limit of the parity-parity correlator: (2/pi)*atan(sinh(2r))."""
    return (2.0 / math.pi) * math.atan(math.sinh(2.0 * float(r)))
