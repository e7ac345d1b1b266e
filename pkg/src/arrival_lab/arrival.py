"""Arrival-time statistics from a detector current t -> J(X, t).

The distribution is |J| normalized on a finite window [0, T].  The window is
made explicit everywhere: integrals to infinity hide the fact that the first
moment is truncation-sensitive for light packets, so T is resolved by a
doubling rule (or fixed by policy) and recorded in every result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    HBAR,
    ArrivalLabError,
    DetectorSpec,
    PacketSpec,
    Tolerances,
    DEFAULT_TOLERANCES,
    ParameterError,
    validate_packet,
)
from .quadrature import integrate_adaptive
from . import quantum, classical

__all__ = [
    "ArrivalStats", "CurrentSeries", "Window", "NoArrivalError",
    "quantum_current", "classical_current",
    "choose_window", "arrival_stats", "sample_series",
]


class NoArrivalError(ArrivalLabError):
    """The current is numerically zero on the whole window."""


@dataclass(frozen=True)
class ArrivalStats:
    """Normalization, mean and rms spread of the arrival-time distribution."""

    norm: float            # integral of |J| over the window (dimensionless)
    mean_t: float          # s
    delta_t: float         # s
    t_window: float        # actual upper limit used, s
    truncation_flag: bool  # window hit its hard cap before stabilizing
    neval: int
    var_clamped: bool = False  # variance was rounded negative and clamped


@dataclass(frozen=True)
class CurrentSeries:
    """Uniform samples of a detector current (signed and modulus retained)."""

    times: np.ndarray
    values: np.ndarray
    abs_values: np.ndarray
    mechanics_tag: str

    def __post_init__(self):
        if not (len(self.times) == len(self.values) == len(self.abs_values)):
            raise ParameterError("series arrays must have equal lengths")
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("series times must be strictly increasing")


@dataclass(frozen=True)
class Window:
    """Resolved integration window plus pulse-location hints for quadrature."""

    t_max: float
    truncated: bool
    clusters: tuple = field(default=())  # (center, width) ballistic guesses


def quantum_current(spec: PacketSpec, x_detector: float):
    """t -> J_quantum(x_detector, t); accepts scalars and arrays."""
    def current(t):
        return quantum.j_q(spec, x_detector, t)
    current.mechanics_tag = "quantum"
    return current


def classical_current(spec: PacketSpec, x_detector: float):
    """t -> J_classical(x_detector, t); accepts scalars and arrays."""
    def current(t):
        return classical.j_c(spec, x_detector, t)
    current.mechanics_tag = "classical"
    return current


def ballistic_roots(spec: PacketSpec, x_detector: float) -> tuple[float, ...]:
    """Positive times at which the packet center crosses the detector."""
    m, u, k, x = spec.mass, spec.u, spec.k_slope, x_detector
    if k == 0.0:
        if u != 0.0 and x / u > 0:
            return (x / u,)
        return ()
    # (k/2m) t^2 - u t + x = 0, solved in the numerically stable form
    a = 0.5 * k / m
    disc = u * u - 4.0 * a * x
    if disc < 0:
        return ()
    sq = math.sqrt(disc)
    q = -0.5 * (-u + math.copysign(sq, -u)) if u != 0 else 0.5 * sq
    roots = []
    if q != 0.0:
        roots.append(x / q)
    if a != 0.0 and q != 0.0:
        roots.append(q / a)
    elif a != 0.0 and u == 0.0 and disc > 0:
        roots = [sq / (2 * a), -sq / (2 * a)]
    return tuple(sorted(r for r in roots if r > 0 and math.isfinite(r)))


def _velocity_sigma(spec: PacketSpec) -> float:
    return HBAR / (2.0 * spec.sigma0 * spec.mass)


def _pulse_width(spec: PacketSpec, t_root: float) -> float:
    """Crude arrival-pulse time width at a ballistic crossing (cluster scale)."""
    sv = _velocity_sigma(spec)
    v = abs(spec.u - spec.k_slope * t_root / spec.mass)
    spread = max(float(quantum.sigma_q(spec, t_root)), float(classical.sigma_c(spec, t_root)))
    return (spread + sv * t_root) / max(v, sv)


def _physics_clusters(spec: PacketSpec, x_detector: float) -> tuple:
    roots = ballistic_roots(spec, x_detector)
    return tuple((r, _pulse_width(spec, r)) for r in roots)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, a: float, b: float, iters: int = 80) -> float:
    """Golden-section maximizer of a scalar unimodal function on [a, b]."""
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if b - a <= 1e-14 * (abs(a) + abs(b)):
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
    return 0.5 * (a + b)


def _refined_clusters(current, clusters, t_max: float):
    """Golden-section refinement of each ballistic guess against |current|."""
    out = []
    for center, width in clusters:
        lo = max(center - 4.0 * width, 1e-12 * t_max)
        hi = min(center + 4.0 * width, t_max)
        if lo >= hi:
            continue
        peak = _golden_max(lambda t: abs(float(current(t))), lo, hi)
        out.append((peak, width))
    return tuple(out)


def _scan_cluster(current, t_max: float):
    """Fallback pulse search when no ballistic hints exist: dense scan + refine."""
    grid = np.unique(np.concatenate([
        np.linspace(0.0, t_max, 513)[1:],
        np.geomspace(t_max * 1e-9, t_max, 256),
    ]))
    vals = np.abs(np.asarray(current(grid), dtype=float))
    i = int(np.argmax(vals))
    if vals[i] == 0.0:
        return ()
    t0 = float(grid[i])
    peak = _golden_max(lambda t: abs(float(current(t))), t0 / 3.0, min(3.0 * t0, t_max))
    pv = abs(float(current(peak)))
    # expand outwards to the half-maximum for a width scale
    w = peak * 1e-9 + 1e-30
    while w < t_max and abs(float(current(min(peak + w, t_max)))) > 0.5 * pv:
        w *= 2.0
    return ((peak, w),)


def _breakpoints(clusters, t_max: float):
    pts = set()
    for center, width in clusters:
        pts.add(center)
        for k in range(8):
            step = width * (2.0 ** k)
            pts.add(center - step)
            pts.add(center + step)
    return sorted(p for p in pts if 0.0 < p < t_max)


def choose_window(spec: PacketSpec, det: DetectorSpec,
                  tol: Tolerances = DEFAULT_TOLERANCES) -> Window:
    """Resolve the integration window for (spec, det).

    Fixed policy returns t_max verbatim.  Adaptive policy starts at four
    ballistic flight times and doubles until the norm and first-moment
    integrals of both the quantum and classical currents are stable, capped
    at t_cap (truncated=True when the cap cuts the doubling short).  Raises
    NoArrivalError when the current is numerically zero on the whole window.
    """
    validate_packet(spec)
    clusters = _physics_clusters(spec, det.x_detector)
    if det.window.mode == "fixed":
        return Window(det.window.t_max, False, clusters)

    sv = _velocity_sigma(spec)
    sigma_x = spec.sigma0 * math.sqrt(1.0 + spec.c_param ** 2)
    if clusters:
        t0 = 4.0 * clusters[-1][0]
    else:
        v_char = abs(spec.u) + 4.0 * sv + math.sqrt(2.0 * abs(spec.k_slope * det.x_detector) / spec.mass)
        t0 = 4.0 * (abs(det.x_detector) + sigma_x) / v_char

    cap = det.window.t_cap
    t = min(t0, cap)
    currents = (quantum_current(spec, det.x_detector),
                classical_current(spec, det.x_detector))
    bps = _breakpoints(clusters, t)
    norms = []
    moments = []
    for cur in currents:
        norms.append(integrate_adaptive(lambda s: np.abs(cur(s)), 0.0, t, tol, breakpoints=bps).value)
        moments.append(integrate_adaptive(lambda s: np.abs(cur(s)) * s, 0.0, t, tol, breakpoints=bps).value)

    converged = False
    while t < cap:
        t_next = min(2.0 * t, cap)
        changes = []
        for i, cur in enumerate(currents):
            dn = integrate_adaptive(lambda s: np.abs(cur(s)), t, t_next, tol).value
            dm = integrate_adaptive(lambda s: np.abs(cur(s)) * s, t, t_next, tol).value
            norms[i] += dn
            moments[i] += dm
            changes.append(dn / norms[i] if norms[i] > 0 else (0.0 if dn == 0 else 1.0))
            changes.append(dm / moments[i] if moments[i] > 0 else (0.0 if dm == 0 else 1.0))
        t = t_next
        if (max(changes[0], changes[2]) < det.window.rel_tol_norm
                and max(changes[1], changes[3]) < det.window.rel_tol_moment):
            converged = True
            break
        if max(norms) == 0.0 and t >= min(4.0 * t0, cap):
            break  # nothing ever arrives; stop doubling early

    if max(norms) == 0.0:
        raise NoArrivalError(
            f"current is numerically zero on [0, {t!r}] at x={det.x_detector!r}"
        )
    return Window(t, not converged, clusters)


def _resolve_window(det: DetectorSpec, window: Window | None) -> Window:
    if window is not None:
        return window
    if det.window.mode == "fixed":
        return Window(det.window.t_max, False, ())
    raise ParameterError(
        "adaptive window policies must be resolved with choose_window(spec, det) first"
    )


def arrival_stats(current, det: DetectorSpec, tol: Tolerances = DEFAULT_TOLERANCES,
                  *, window: Window | None = None) -> ArrivalStats:
    """Arrival-time statistics of |current| on the detector window.

    mean_t is the |J|-weighted first moment; delta_t the rms spread, computed
    from the centered second moment to avoid the cancellation in
    <t^2> - <t>^2 when the pulse is narrow.  All integrals share one window,
    one breakpoint set and one tolerance.
    """
    win = _resolve_window(det, window)
    T = win.t_max
    clusters = _refined_clusters(current, win.clusters, T) or _scan_cluster(current, T)
    bps = _breakpoints(clusters, T)

    f_abs = lambda s: np.abs(current(s))
    r_norm = integrate_adaptive(f_abs, 0.0, T, tol, breakpoints=bps)
    if r_norm.value == 0.0:
        raise NoArrivalError(f"current is numerically zero on [0, {T!r}]")
    r_m1 = integrate_adaptive(lambda s: np.abs(current(s)) * s, 0.0, T, tol, breakpoints=bps)
    mean = r_m1.value / r_norm.value
    r_var = integrate_adaptive(lambda s: np.abs(current(s)) * (s - mean) ** 2,
                               0.0, T, tol, breakpoints=bps)
    var = r_var.value / r_norm.value
    clamped = False
    if var < 0.0:
        msq = var + mean * mean
        clamped = var < -1e-12 * abs(msq)
        var = 0.0
    return ArrivalStats(
        norm=r_norm.value,
        mean_t=mean,
        delta_t=math.sqrt(var),
        t_window=T,
        truncation_flag=win.truncated,
        neval=r_norm.neval + r_m1.neval + r_var.neval,
        var_clamped=clamped,
    )


def sample_series(current, det: DetectorSpec, n: int, *,
                  window: Window | None = None, tag: str | None = None) -> CurrentSeries:
    """Sample the current on a uniform grid over [0, t_window] (n >= 2)."""
    if n < 2:
        raise ParameterError(f"need n >= 2 samples, got {n}")
    win = _resolve_window(det, window)
    times = np.linspace(0.0, win.t_max, int(n))
    values = np.asarray(current(times), dtype=float)
    return CurrentSeries(
        times=times,
        values=values,
        abs_values=np.abs(values),
        mechanics_tag=tag or getattr(current, "mechanics_tag", "unknown"),
    )


def pulse_grid(spec: PacketSpec, det: DetectorSpec, n: int,
               tol: Tolerances = DEFAULT_TOLERANCES, span: float = 12.0) -> np.ndarray:
    """Uniform time grid resolving the primary arrival pulse at the detector.

    Used for figure data: a grid over the whole window would undersample
    pulses that are orders of magnitude narrower than the window.
    """
    win = choose_window(spec, det, tol)
    cur = quantum_current(spec, det.x_detector)
    clusters = _refined_clusters(cur, win.clusters, win.t_max) or _scan_cluster(cur, win.t_max)
    if not clusters:
        raise NoArrivalError(f"no arrival pulse found at x={det.x_detector!r}")
    peak, width = clusters[0]
    lo = max(peak - span * width, 0.0)
    hi = min(peak + span * width, win.t_max)
    return np.linspace(lo, hi, int(n))
