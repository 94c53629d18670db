"""Pseudo-spin correlators of the squeezed state over a position-box lattice.

Site spin components are defined from position boxes of length ``l``:
``s_z`` is +1 on even boxes and -1 on odd boxes, while ``s_x`` and
``s_y`` are built from the translation that maps each odd box onto the
even box below it.  Every two-site correlator then reduces to a signed
sum over box pairs of a Gaussian integral with the separable form

    exp(kappa*u*v + A(u) + B(v) + log_prefactor),

where A and B are downward parabolas shifted so their peaks are zero.
The shifted form keeps every exponent in a safe floating-point range;
analytic prefactors (including the ratio exp(sinh(2r)*l**2) between the
two translate products entering xx and yy) are applied afterwards.  See
docs/correlator-reduction.md for the derivations.

Results are cached per (piece, l, r, spec); the cache is a plain dict,
safe under concurrent reads with at worst duplicated work on a race.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidScale, RangeError
from .gaussian_state import SqueezeState, joint_density, marginal_density
from .quadrature import (
    IntegralResult,
    QuadratureSpec,
    integrate_lattice_signed,
    integrate_line_signed,
    spec_for_gaussian,
)

__all__ = [
    "PAIRS",
    "MAX_BOX_LENGTH",
    "CorrelatorSet",
    "correlator",
    "single_site",
    "correlator_set",
    "rotated_correlator",
    "czz_sampled",
    "default_spec",
    "clear_cache",
]

PAIRS = ("zz", "xx", "yy", "zx", "xz")

# Beyond this the xx/yy prefactor exponents can overflow double range.
MAX_BOX_LENGTH = 50.0

# A set's cross correlators must agree within this multiple of their
# combined error estimates (the estimates are not strict bounds).
_SYMMETRY_SLACK = 10.0


@dataclass(frozen=True)
class CorrelatorSet:
    """All five measured correlators at one (l, r), with error estimates."""

    l: float
    r: float
    czz: float
    cxx: float
    cyy: float
    czx: float
    cxz: float
    czz_err: float
    cxx_err: float
    cyy_err: float
    czx_err: float
    cxz_err: float

    def __post_init__(self) -> None:
        for name in ("czz", "cxx", "cyy", "czx", "cxz"):
            value = getattr(self, name)
            err = getattr(self, name + "_err")
            if abs(value) > 1.0 + 10.0 * err + 1e-12:
                raise RangeError(
                    f"{name} = {value!r} exceeds magnitude 1 beyond tolerance"
                )
        slack = _SYMMETRY_SLACK * (self.czx_err + self.cxz_err) + 1e-9
        if abs(self.czx - self.cxz) > slack:
            raise RangeError(
                f"czx and cxz differ by {abs(self.czx - self.cxz):.3e}, "
                f"more than the allowed {slack:.3e}"
            )

    def as_dict(self) -> dict:
        return {
            "l": self.l,
            "r": self.r,
            "czz": self.czz,
            "cxx": self.cxx,
            "cyy": self.cyy,
            "czx": self.czx,
            "cxz": self.cxz,
            "errs": {
                "czz": self.czz_err,
                "cxx": self.cxx_err,
                "cyy": self.cyy_err,
                "czx": self.czx_err,
                "cxz": self.cxz_err,
            },
        }


def default_spec(l: float, state: SqueezeState, *, abs_tol: float = 1e-7) -> QuadratureSpec:
    """Quadrature spec sized to this box length and state width.

    The tail radius follows the marginal std; the panel cap follows the
    conditional std 1/sqrt(2*cosh2r), which is the Gaussian scale of
    every correlator integrand's axis sections and shrinks as r grows.
    """
    return spec_for_gaussian(
        l,
        state.sigma,
        slice_scale=state.sigma / state.cosh2r,
        abs_tol=abs_tol,
    )


def _check_box_length(l: float) -> float:
    l = float(l)
    if not (math.isfinite(l) and 0.0 < l <= MAX_BOX_LENGTH):
        raise InvalidScale(
            f"box length must be in (0, {MAX_BOX_LENGTH}], got {l!r}"
        )
    return l


# Sign functions over box index pairs.  Boxes are [n*l, (n+1)*l); the
# box parity (-1)**n and the even-box indicator both follow Python's
# floor-mod convention for negative n.

def _sign_parity_parity(n, m):
    return 1 - 2 * ((n + m) % 2)


def _sign_even_even(n, m):
    return ((n % 2 == 0) & (m % 2 == 0)).astype(int)


def _sign_parity_even(n, m):
    return (1 - 2 * (n % 2)) * (m % 2 == 0)


def _sign_even_parity(n, m):
    return (n % 2 == 0) * (1 - 2 * (m % 2))


def _sign_even_all(n, m):
    return (n % 2 == 0) * np.ones_like(m)


def _piece_exp_part(name: str, l: float, state: SqueezeState):
    """Shifted exponent closure, coupling sign function, and log prefactor.

    The raw lattice integral L of exp(kappa*u*v + A(u) + B(v)) relates
    to the physical piece through value = exp(log_pref) * L; A and B
    peak at zero so the integrand never overflows for l <= 50, r <= 5.
    """
    c = state.cosh2r
    s = state.sinh2r
    kappa = 2.0 * s
    log_pi = math.log(math.pi)
    if name == "density":
        a_shift, b_shift = 0.0, 0.0
        log_pref = -log_pi
    elif name == "step":
        # Translate product psi(u, v+l)*psi(u+l, v); both axes peak at
        # (s - c)*l / (2c).
        a_shift = b_shift = (s - c) * l / (2.0 * c)
        log_pref = -log_pi - l * l * (1.0 + 2.0 * s * c) / (2.0 * c)
    elif name == "zx":
        a_shift = s * l / (2.0 * c)
        b_shift = -l / 2.0
        log_pref = -log_pi - l * l / (4.0 * c)
    elif name in ("xz", "site_x"):
        a_shift = -l / 2.0
        b_shift = s * l / (2.0 * c)
        log_pref = -log_pi - l * l / (4.0 * c)
    else:
        raise ValueError(f"unknown piece {name!r}")

    def f(u, v):
        du = u - a_shift
        dv = v - b_shift
        return np.exp(kappa * (u * v) - c * (du * du) - c * (dv * dv))

    signs = {
        "density": _sign_parity_parity,
        "step": _sign_even_even,
        "zx": _sign_parity_even,
        "xz": _sign_even_parity,
        "site_x": _sign_even_all,
    }
    return f, signs[name], log_pref


_PIECE_CACHE: dict = {}


def clear_cache() -> None:
    _PIECE_CACHE.clear()


def _lattice_piece(name: str, l: float, state: SqueezeState, spec: QuadratureSpec) -> IntegralResult:
    """Raw lattice integral L for one piece, cached per (name, l, r, spec)."""
    key = (name, l, state.r, spec)
    hit = _PIECE_CACHE.get(key)
    if hit is not None:
        return hit
    f, sign, _ = _piece_exp_part(name, l, state)
    result = integrate_lattice_signed(f, l, sign, spec)
    _PIECE_CACHE[key] = result
    return result


def _xx_yy_prefactors(l: float, state: SqueezeState) -> tuple[float, float]:
    """Coefficients p_xx, p_yy with xx = p_xx * L_step, yy = -p_yy * L_step.

    The diagonal translate product equals exp(s*l**2) times the
    anti-diagonal one, so xx = 2*(exp(s*l**2) + 1) * pref * L and
    yy = 2*(1 - exp(s*l**2)) * pref * L.  Folding exp(s*l**2) into the
    step prefactor keeps both exponents negative.
    """
    c = state.cosh2r
    s = state.sinh2r
    e_anti = math.exp(-l * l * (1.0 + 2.0 * s * c) / (2.0 * c))
    e_diag = math.exp(-l * l / (2.0 * c))
    p_xx = (2.0 / math.pi) * (e_diag + e_anti)
    p_yy = (2.0 / math.pi) * (e_diag - e_anti)
    return p_xx, p_yy


def correlator(
    pair: str,
    l: float,
    r: float,
    spec: QuadratureSpec | None = None,
) -> tuple[float, float]:
    """Two-site correlator for ``pair`` in {'zz', 'xx', 'yy', 'zx', 'xz'}.

    Returns (value, error_estimate).
    """
    if pair not in PAIRS:
        raise ValueError(f"pair must be one of {PAIRS}, got {pair!r}")
    l = _check_box_length(l)
    state = SqueezeState(r)
    if spec is None:
        spec = default_spec(l, state)

    if pair == "zz":
        res = _lattice_piece("density", l, state, spec)
        pref = 1.0 / math.pi
        return pref * res.value, pref * res.error_estimate
    if pair in ("xx", "yy"):
        res = _lattice_piece("step", l, state, spec)
        p_xx, p_yy = _xx_yy_prefactors(l, state)
        if pair == "xx":
            return p_xx * res.value, p_xx * res.error_estimate
        return -p_yy * res.value, p_yy * res.error_estimate
    # zx / xz: a parity sum on one site against the translate overlap
    # on the other; the factor 2 counts both off-diagonal directions.
    res = _lattice_piece(pair, l, state, spec)
    c = state.cosh2r
    pref = (2.0 / math.pi) * math.exp(-l * l / (4.0 * c))
    return pref * res.value, pref * res.error_estimate


def single_site(
    axis: str,
    l: float,
    r: float,
    spec: QuadratureSpec | None = None,
) -> tuple[float, float]:
    """Single-site expectation of s_z or s_x.  Returns (value, error)."""
    l = _check_box_length(l)
    state = SqueezeState(r)
    if spec is None:
        spec = default_spec(l, state)
    if axis == "z":
        res = integrate_line_signed(
            lambda q: marginal_density(q, state),
            l,
            lambda n: 1 - 2 * (n % 2),
            spec,
        )
        return res.value, res.error_estimate
    if axis == "x":
        res = _lattice_piece("site_x", l, state, spec)
        c = state.cosh2r
        pref = (2.0 / math.pi) * math.exp(-l * l / (4.0 * c))
        return pref * res.value, pref * res.error_estimate
    raise ValueError(f"axis must be 'z' or 'x', got {axis!r}")


def correlator_set(
    l: float,
    r: float,
    spec: QuadratureSpec | None = None,
) -> CorrelatorSet:
    """All five correlators at one (l, r) as a validated set."""
    values = {}
    errs = {}
    for pair in PAIRS:
        values[pair], errs[pair] = correlator(pair, l, r, spec)
    return CorrelatorSet(
        l=float(l),
        r=float(r),
        czz=values["zz"],
        cxx=values["xx"],
        cyy=values["yy"],
        czx=values["zx"],
        cxz=values["xz"],
        czz_err=errs["zz"],
        cxx_err=errs["xx"],
        cyy_err=errs["yy"],
        czx_err=errs["zx"],
        cxz_err=errs["xz"],
    )


def rotated_correlator(
    angle_a: float,
    angle_b: float,
    corr: CorrelatorSet,
) -> float:
    """Correlator of spins rotated in the x-z plane by the given angles.

    Direction at angle t measures cos(t)*s_z + sin(t)*s_x, so the full
    bilinear form is ca*cb*czz + sa*sb*cxx + ca*sb*czx + sa*cb*cxz; the
    cross terms are kept even though they vanish for this state, so the
    symmetry is tested rather than baked in.
    """
    ca, sa = math.cos(angle_a), math.sin(angle_a)
    cb, sb = math.cos(angle_b), math.sin(angle_b)
    return (
        ca * cb * corr.czz
        + sa * sb * corr.cxx
        + ca * sb * corr.czx
        + sa * cb * corr.cxz
    )


def czz_sampled(
    l: float,
    r: float,
    n_samples: int = 1_000_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo estimate of the parity-parity correlator.

    Draws position pairs from the joint density (a bivariate normal
    with per-mode variance cosh(2r)/2 and correlation tanh(2r)) and
    averages the box-parity product.  Returns (estimate, std_error).
    """
    l = _check_box_length(l)
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    state = SqueezeState(r)
    rng = np.random.Generator(np.random.PCG64(seed))
    sigma = state.sigma
    rho = state.rho
    z1 = rng.standard_normal(n_samples)
    z2 = rng.standard_normal(n_samples)
    q = sigma * z1
    q2 = sigma * (rho * z1 + math.sqrt(1.0 - rho * rho) * z2)
    parity = 1 - 2 * ((np.floor(q / l) + np.floor(q2 / l)) % 2)
    mean = float(parity.mean())
    # parity is +/-1, so the sample variance is 1 - mean**2 up to the
    # n/(n-1) correction.
    var = max(0.0, 1.0 - mean * mean) * n_samples / (n_samples - 1)
    return mean, math.sqrt(var / n_samples)
