"""Monte Carlo oracle for the classical arrival statistics.

Samples the initial product-form ensemble, pushes every particle along its
exact parabolic trajectory, and pools all detector crossings (each crossing
counts once, with unit weight, matching what the |J| quadrature measures).

Randomness comes from the counter-based Philox generator keyed per
(seed, batch index), with normals drawn by numpy's Generator; the batch
structure is fixed, so results are bit-identical regardless of how batches
are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ArrivalLabError, DetectorSpec, PacketSpec, validate_packet
from .classical import PhaseSpacePoint, momentum_sigma

__all__ = [
    "McConfig", "McEstimate", "NoCrossingsError",
    "sample_initial", "crossing_times", "estimate",
]

_BATCH = 1 << 17
_MASK64 = (1 << 64) - 1
_JACKKNIFE_BLOCKS = 20


class NoCrossingsError(ArrivalLabError):
    """No sampled particle crossed the detector inside the window."""


@dataclass(frozen=True)
class McConfig:
    n_particles: int = 1_000_000
    seed: int = 20260810
    t_window: float = 10.0


@dataclass(frozen=True)
class McEstimate:
    mean_t: float        # s
    delta_t: float       # s
    stderr_mean: float   # s
    stderr_delta: float  # jackknife, s
    n_crossings: int
    n_never: int         # particles with no crossing inside the window


def _rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & _MASK64, batch & _MASK64]))


def _draw(spec: PacketSpec, seed: int, batch: int, count: int):
    rng = _rng(seed, batch)
    sx = spec.sigma0 * math.sqrt(1.0 + spec.c_param ** 2)
    sp = momentum_sigma(spec)
    x0 = sx * rng.standard_normal(count)
    p0 = spec.mass * spec.u + sp * rng.standard_normal(count)
    return x0, p0


def sample_initial(spec: PacketSpec, cfg: McConfig):
    """Draw the initial ensemble: x0 ~ N(0, sigma0^2 (1+c^2)), p0 ~ N(p_bar, (hbar/2 sigma0)^2).

    Returns parallel arrays (x0, p0) of length cfg.n_particles; deterministic
    under cfg.seed.
    """
    validate_packet(spec)
    xs, ps = [], []
    remaining = cfg.n_particles
    batch = 0
    while remaining > 0:
        count = min(_BATCH, remaining)
        x0, p0 = _draw(spec, cfg.seed, batch, count)
        xs.append(x0)
        ps.append(p0)
        remaining -= count
        batch += 1
    return np.concatenate(xs), np.concatenate(ps)


def _crossings_arrays(spec: PacketSpec, x0, p0, x_det: float, t_window: float):
    """All crossing times in (0, t_window] for each particle.

    Returns (times, particle_index), times ascending within a particle.
    Trajectories are exact parabolas, so crossings solve a quadratic; k=0
    degenerates to the single ballistic root.
    """
    m, k = spec.mass, spec.k_slope
    if k == 0.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            t = m * (x_det - x0) / p0
        ok = np.isfinite(t) & (t > 0.0) & (t <= t_window)
        return t[ok], np.nonzero(ok)[0]

    # -(k/2m) t^2 + (p0/m) t + (x0 - X) = 0, stable two-root form
    a = -0.5 * k / m
    b = p0 / m
    c = x0 - x_det
    disc = b * b - 4.0 * a * c
    has = disc >= 0.0
    sq = np.sqrt(np.where(has, disc, 0.0))
    q = -0.5 * (b + np.where(b >= 0, sq, -sq))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(has, q / a, np.nan)
        r2 = np.where(has, c / q, np.nan)
    times = []
    idx = []
    for r in (r1, r2):
        ok = np.isfinite(r) & (r > 0.0) & (r <= t_window)
        times.append(r[ok])
        idx.append(np.nonzero(ok)[0])
    t_all = np.concatenate(times)
    i_all = np.concatenate(idx)
    order = np.lexsort((t_all, i_all))
    return t_all[order], i_all[order]


def crossing_times(spec: PacketSpec, point: PhaseSpacePoint, x_det: float,
                   t_window: float) -> tuple[float, ...]:
    """Ascending crossing times of one trajectory in (0, t_window]."""
    if t_window <= 0:
        raise ValueError(f"t_window must be > 0, got {t_window!r}")
    t, _ = _crossings_arrays(spec, np.array([point.x]), np.array([point.p]),
                             x_det, t_window)
    return tuple(float(v) for v in np.sort(t))


def estimate(spec: PacketSpec, det: DetectorSpec, cfg: McConfig) -> McEstimate:
    """Pooled crossing-time statistics of the sampled ensemble.

    Every crossing contributes once (flux through the detector in either
    direction), mirroring the |J| functional the quadrature integrates.
    delta_t uncertainty comes from a jackknife over 20 particle blocks.
    """
    validate_packet(spec)
    times = []
    blocks = []
    n_never = 0
    remaining = cfg.n_particles
    batch = 0
    offset = 0
    n = cfg.n_particles
    while remaining > 0:
        count = min(_BATCH, remaining)
        x0, p0 = _draw(spec, cfg.seed, batch, count)
        t, pidx = _crossings_arrays(spec, x0, p0, det.x_detector, cfg.t_window)
        n_never += count - np.unique(pidx).size
        times.append(t)
        blocks.append(np.minimum((pidx + offset) * _JACKKNIFE_BLOCKS // n,
                                 _JACKKNIFE_BLOCKS - 1))
        offset += count
        remaining -= count
        batch += 1

    t_all = np.concatenate(times)
    block_all = np.concatenate(blocks)
    if t_all.size == 0:
        raise NoCrossingsError(
            f"no crossings at x={det.x_detector!r} within {cfg.t_window!r} s "
            f"for {cfg.n_particles} particles"
        )

    mean = float(t_all.mean())
    delta = float(t_all.std())
    stderr_mean = float(t_all.std(ddof=1) / math.sqrt(t_all.size)) if t_all.size > 1 else float("inf")

    deltas = []
    for b in range(_JACKKNIFE_BLOCKS):
        keep = block_all != b
        if keep.sum() > 1 and keep.sum() < t_all.size:
            deltas.append(t_all[keep].std())
    if len(deltas) >= 2:
        deltas = np.asarray(deltas)
        nb = len(deltas)
        stderr_delta = float(math.sqrt((nb - 1) / nb * np.sum((deltas - deltas.mean()) ** 2)))
    else:
        stderr_delta = float("inf")

    return McEstimate(
        mean_t=mean,
        delta_t=delta,
        stderr_mean=stderr_mean,
        stderr_delta=stderr_delta,
        n_crossings=int(t_all.size),
        n_never=int(n_never),
    )
