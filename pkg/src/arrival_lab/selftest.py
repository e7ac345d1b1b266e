"""Built-in invariant suite behind `arrival-lab selftest`.

Each check exercises one structural identity of the implementation (current
coincidence at c=0, the width identity, continuity, Liouville constancy,
marginal consistency, moment recovery, scale invariance, oracle agreement,
determinism) and reports pass/fail with a one-line detail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import (
    DetectorSpec, PacketSpec, Tolerances, WindowPolicy, amu_to_g, packet_center,
)
from . import classical, quantum
from .arrival import arrival_stats, choose_window, classical_current, quantum_current, Window
from .quadrature import integrate_adaptive
from .mc import McConfig, estimate
from .sweep import SweepPlan, run_sweep, rows_to_csv

_TOL = Tolerances()


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _spec(mass_amu=1000.0, sigma0=1e-4, c=100.0, u=10.0, k=0.0) -> PacketSpec:
    return PacketSpec(sigma0=sigma0, c_param=c, u=u, mass=amu_to_g(mass_amu), k_slope=k)


def _check_c0_coincidence() -> CheckResult:
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(5):
        spec = _spec(
            mass_amu=float(rng.uniform(1, 5000)),
            sigma0=float(10 ** rng.uniform(-5, -3)),
            c=0.0,
            u=float(rng.uniform(1, 100)),
            k=float(rng.uniform(-1e-18, 1e-18)),
        )
        t = np.linspace(1e-6, 0.02, 20)
        for ti in t:
            xc = packet_center(spec, ti)
            sq = float(quantum.sigma_q(spec, ti))
            x = np.linspace(xc - 6 * sq, xc + 6 * sq, 100)
            jq = quantum.j_q(spec, x, ti)
            jc = classical.j_c(spec, x, ti)
            scale = np.max(np.abs(jq))
            if scale > 0:
                worst = max(worst, float(np.max(np.abs(jq - jc)) / scale))
    return CheckResult("c0_current_coincidence", worst < 1e-10, f"max rel gap {worst:.2e}")


def _check_width_identity() -> CheckResult:
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(100):
        c = float(rng.choice([-1, 1]) * 10 ** rng.uniform(0, 3.3))
        spec = _spec(mass_amu=float(10 ** rng.uniform(0, 4)),
                     sigma0=float(10 ** rng.uniform(-5, -3)), c=c)
        s = quantum.derived_quantities(spec).spread_rate
        t = float(10 ** rng.uniform(-2, 2) / s)
        lhs = classical.sigma_c(spec, t) ** 2 - quantum.sigma_q(spec, t) ** 2
        ref = -2.0 * c * spec.sigma0 ** 2 * (s * t)
        worst = max(worst, abs(lhs - ref) / abs(ref))
        if math.copysign(1.0, lhs) != math.copysign(1.0, -c):
            return CheckResult("width_identity", False, f"sign mismatch at c={c}")
    return CheckResult("width_identity", worst < 1e-10, f"max rel err {worst:.2e}")


def _check_continuity() -> CheckResult:
    spec = _spec(mass_amu=10.0, c=5.0, k=1e-19)
    t0 = 0.004
    x0 = packet_center(spec, t0) + 0.5 * float(quantum.sigma_q(spec, t0))
    r1 = quantum.continuity_residual(spec, x0, t0)
    tol_half = Tolerances(fd_step_scale=_TOL.fd_step_scale / 2)
    r2 = quantum.continuity_residual(spec, x0, t0, tol=tol_half)
    order = math.log2(r1 / r2) if r2 > 0 else float("nan")
    ok = r1 < 1e-6 and 1.8 <= order <= 2.2
    return CheckResult("continuity_residual", ok, f"residual {r1:.2e}, order {order:.2f}")


def _check_quantum_norm() -> CheckResult:
    spec = _spec(mass_amu=50.0, c=20.0)
    worst = 0.0
    for t in (0.0, 0.003, 0.02):
        sq = float(quantum.sigma_q(spec, t))
        xc = packet_center(spec, t)
        r = integrate_adaptive(lambda x: quantum.rho_q(spec, x, t),
                               xc - 12 * sq, xc + 12 * sq, _TOL)
        worst = max(worst, abs(r.value - 1.0))
    return CheckResult("quantum_normalization", worst < 1e-9, f"max |norm-1| {worst:.2e}")


def _check_liouville() -> CheckResult:
    spec = _spec(mass_amu=10.0, c=30.0, k=2e-19)
    rng = np.random.default_rng(13)
    sp = classical.momentum_sigma(spec)
    sx = spec.sigma0 * math.sqrt(1 + spec.c_param ** 2)
    worst = 0.0
    for _ in range(1000):
        pt = classical.PhaseSpacePoint(
            x=float(rng.normal(0, sx)), p=float(rng.normal(spec.mass * spec.u, sp)))
        t = float(rng.uniform(0, 0.02))
        moved = classical.hamilton_flow(spec, pt, t)
        a = classical.d_t(spec, moved.x, moved.p, t)
        b = classical.d0(spec, pt.x, pt.p)
        if b > 0:
            worst = max(worst, abs(a - b) / b)
    return CheckResult("liouville_constancy", worst < 1e-12, f"max rel err {worst:.2e}")


def _check_marginals() -> CheckResult:
    spec = _spec(mass_amu=100.0, c=50.0, k=1e-19)
    worst = 0.0
    for t in (0.001, 0.01):
        xc = packet_center(spec, t)
        sc = float(classical.sigma_c(spec, t))
        for x in np.linspace(xc - 3 * sc, xc + 3 * sc, 10):
            r_ref = classical.rho_c_from_density(spec, float(x), t)
            j_ref = classical.j_c_from_density(spec, float(x), t)
            worst = max(worst, abs(float(classical.rho_c(spec, x, t)) / r_ref - 1.0))
            if j_ref != 0:
                worst = max(worst, abs(float(classical.j_c(spec, x, t)) / j_ref - 1.0))
    return CheckResult("momentum_marginals", worst < 1e-8, f"max rel err {worst:.2e}")


def _gauss_pulse(mu, sig):
    def current(t):
        t = np.asarray(t, dtype=float)
        return np.exp(-((t - mu) ** 2) / (2 * sig * sig)) / math.sqrt(2 * math.pi * sig * sig)
    return current


def _check_pulse_moments() -> CheckResult:
    mu, sig = 1.0, 0.05
    det = DetectorSpec(0.0, WindowPolicy(mode="fixed", t_max=2.0))
    stats = arrival_stats(_gauss_pulse(mu, sig), det, _TOL)
    err = max(abs(stats.mean_t - mu) / mu, abs(stats.delta_t - sig) / sig)
    return CheckResult("pulse_moment_recovery", err < 1e-8, f"max rel err {err:.2e}")


def _check_scale_invariance() -> CheckResult:
    spec = _spec(mass_amu=1000.0, c=100.0)
    det = DetectorSpec(0.1, WindowPolicy())
    win = choose_window(spec, det, _TOL)
    base = classical_current(spec, det.x_detector)
    scaled = lambda t: 7.3 * base(t)
    a = arrival_stats(base, det, _TOL, window=win)
    b = arrival_stats(scaled, det, _TOL, window=win)
    err = max(abs(a.mean_t - b.mean_t) / a.mean_t, abs(a.delta_t - b.delta_t) / a.delta_t)
    return CheckResult("scale_invariance", err < 1e-12, f"max rel shift {err:.2e}")


def _check_mc_agreement() -> CheckResult:
    spec = _spec(mass_amu=1000.0, c=100.0)
    det = DetectorSpec(0.1, WindowPolicy())
    win = choose_window(spec, det, _TOL)
    stats = arrival_stats(classical_current(spec, det.x_detector), det, _TOL, window=win)
    est = estimate(spec, det, McConfig(n_particles=200_000, seed=5, t_window=win.t_max))
    pull = abs(est.mean_t - stats.mean_t) / est.stderr_mean
    return CheckResult("mc_vs_quadrature", pull < 4.0, f"mean discrepancy {pull:.2f} stderr")


def _check_determinism() -> CheckResult:
    plan = SweepPlan(base=_spec(), det=DetectorSpec(0.1, WindowPolicy()),
                     masses_amu=(100.0, 1000.0), c_values=(100.0,))
    a = rows_to_csv(run_sweep(plan, _TOL, threads=1))
    b = rows_to_csv(run_sweep(plan, _TOL, threads=4))
    return CheckResult("thread_determinism", a == b, "byte-identical across thread counts")


def run_selftest(quick: bool = False) -> list[CheckResult]:
    checks = [
        _check_c0_coincidence,
        _check_width_identity,
        _check_continuity,
        _check_quantum_norm,
        _check_liouville,
        _check_marginals,
        _check_pulse_moments,
        _check_scale_invariance,
    ]
    if not quick:
        checks += [_check_mc_agreement, _check_determinism]
    results = []
    for fn in checks:
        try:
            results.append(fn())
        except Exception as exc:  # a crash is a failed check, not a crashed suite
            results.append(CheckResult(fn.__name__.removeprefix("_check_"), False,
                                       f"{type(exc).__name__}: {exc}"))
    return results
