"""Physical constants, unit conversions, and validated parameter specifications.

Everything internal runs in CGS (cm, g, s, erg); user-facing layers convert
a.m.u. and milliseconds at the boundary.  All spec types are immutable after
validation and safe to share between workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: Reduced Planck constant, erg*s (CGS).  Single source of truth.
HBAR = 1.054571817e-27

#: Atomic mass unit, g.
AMU = 1.66053906660e-24


class ArrivalLabError(Exception):
    """Base class for all domain errors raised by this package."""


class ParameterError(ArrivalLabError, ValueError):
    """A parameter specification violates its invariants."""


class NonPositiveError(ParameterError):
    def __init__(self, fieldname: str, value):
        super().__init__(f"{fieldname} must be > 0, got {value!r}")
        self.fieldname = fieldname


class NonFiniteError(ParameterError):
    def __init__(self, fieldname: str, value):
        super().__init__(f"{fieldname} must be finite, got {value!r}")
        self.fieldname = fieldname


def amu_to_g(mass_amu: float) -> float:
    return mass_amu * AMU


def g_to_amu(mass_g: float) -> float:
    return mass_g / AMU


def ms_to_s(t_ms: float) -> float:
    return t_ms * 1e-3


def s_to_ms(t_s: float) -> float:
    return t_s * 1e3


@dataclass(frozen=True)
class PacketSpec:
    """Initial Gaussian packet plus the linear-potential slope V = k_slope * x.

    sigma0   -- initial width parameter, cm
    c_param  -- dimensionless width-phase parameter (0 = minimum uncertainty)
    u        -- group velocity, cm/s
    mass     -- particle mass, g
    k_slope  -- potential slope (constant force), dyn
    """

    sigma0: float
    c_param: float
    u: float
    mass: float
    k_slope: float = 0.0


@dataclass(frozen=True)
class WindowPolicy:
    """How the time-integration window for arrival statistics is chosen.

    In ``fixed`` mode the window is [0, t_max] verbatim.  In ``adaptive`` mode
    the window starts near four ballistic flight times and doubles until the
    norm and first-moment integrals are stable to the given relative
    tolerances, hard-capped at t_cap.
    """

    mode: str = "adaptive"
    t_max: float | None = None
    rel_tol_norm: float = 1e-6
    rel_tol_moment: float = 1e-6
    t_cap: float = 10.0

    def __post_init__(self):
        if self.mode not in ("fixed", "adaptive"):
            raise ParameterError(f"window mode must be 'fixed' or 'adaptive', got {self.mode!r}")
        if self.mode == "fixed":
            if self.t_max is None or not math.isfinite(self.t_max):
                raise NonFiniteError("t_max", self.t_max)
            if self.t_max <= 0:
                raise NonPositiveError("t_max", self.t_max)
        for name in ("rel_tol_norm", "rel_tol_moment"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ParameterError(f"{name} must lie in (0, 1), got {v!r}")
        if not (self.t_cap > 0 and math.isfinite(self.t_cap)):
            raise NonPositiveError("t_cap", self.t_cap)


@dataclass(frozen=True)
class DetectorSpec:
    """Detector position (cm) and the window policy used for its statistics."""

    x_detector: float
    window: WindowPolicy = field(default_factory=WindowPolicy)

    def __post_init__(self):
        if not math.isfinite(self.x_detector):
            raise NonFiniteError("x_detector", self.x_detector)


@dataclass(frozen=True)
class Tolerances:
    """Shared numeric-tolerance policy.

    quad_abs / quad_rel -- absolute and relative quadrature targets
    fd_step_scale       -- finite-difference step as a fraction of the local
                           length/time scales (continuity diagnostics)
    """

    quad_abs: float = 1e-16
    quad_rel: float = 1e-10
    fd_step_scale: float = 1e-3

    def __post_init__(self):
        for name in ("quad_abs", "quad_rel", "fd_step_scale"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise NonPositiveError(name, v)
        if self.quad_rel >= 1.0:
            raise ParameterError(f"quad_rel must be < 1, got {self.quad_rel!r}")


DEFAULT_TOLERANCES = Tolerances()

_PACKET_FIELDS = ("sigma0", "c_param", "u", "mass", "k_slope")


def validate_packet(spec: PacketSpec) -> PacketSpec:
    """Check all PacketSpec invariants; return the spec unchanged if they hold.

    Raises NonFiniteError for any non-finite field and NonPositiveError when
    sigma0 or mass is not strictly positive.
    """
    for name in _PACKET_FIELDS:
        v = getattr(spec, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            raise NonFiniteError(name, v)
    if spec.sigma0 <= 0:
        raise NonPositiveError("sigma0", spec.sigma0)
    if spec.mass <= 0:
        raise NonPositiveError("mass", spec.mass)
    return spec


@dataclass(frozen=True)
class DerivedQuantities:
    p_bar: float        # mean momentum, g*cm/s
    k_wave: float       # wavenumber, 1/cm
    spread_rate: float  # dispersion rate hbar/(2 m sigma0^2), 1/s


def derived_quantities(spec: PacketSpec) -> DerivedQuantities:
    """Mean momentum, wavenumber and dispersion rate of a validated packet."""
    p_bar = spec.mass * spec.u
    return DerivedQuantities(
        p_bar=p_bar,
        k_wave=p_bar / HBAR,
        spread_rate=HBAR / (2.0 * spec.mass * spec.sigma0 * spec.sigma0),
    )


def packet_center(spec: PacketSpec, t):
    """Center of the packet at time t: u*t - (k/2m) t^2 (same for both mechanics)."""
    return spec.u * t - 0.5 * (spec.k_slope / spec.mass) * t * t


#: Gaussian exponents below this are flushed to exactly zero so that
#: quadrature tails stay clean (no subnormals).
UNDERFLOW_EXPONENT = -700.0


def gaussian_density(offset, sigma):
    """Normalized Gaussian density exp(-offset^2/2sigma^2)/sqrt(2 pi sigma^2).

    Works on scalars and arrays; underflowing values are exactly 0.
    """
    offset = np.asarray(offset, dtype=float)
    ex = -(offset * offset) / (2.0 * sigma * sigma)
    dead = ex < UNDERFLOW_EXPONENT
    val = np.exp(np.where(dead, 0.0, ex)) / np.sqrt(2.0 * np.pi * sigma * sigma)
    out = np.where(dead, 0.0, val)
    if out.ndim == 0:
        return float(out)
    return out
