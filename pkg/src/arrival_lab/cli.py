"""Command-line interface.

Subcommands: eval (point evaluation), arrive (arrival statistics), sweep
(mass/c sweeps incl. table presets), figure (current-series presets), oracle
(Monte Carlo vs quadrature), selftest (invariant suite).

User-facing units are the benchmark ones (a.m.u., ms, cm); everything is
converted to CGS at this boundary.  Exit codes: 0 success, 1 domain error
(machine-readable JSON on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .model import (
    ArrivalLabError,
    DetectorSpec,
    PacketSpec,
    Tolerances,
    WindowPolicy,
    amu_to_g,
    ms_to_s,
    s_to_ms,
    validate_packet,
)
from . import classical, quantum
from .arrival import arrival_stats, choose_window, classical_current, quantum_current
from .mc import McConfig, estimate
from .presets import figure_variants, table_plan
from .sweep import (
    SweepPlan,
    convergence_threshold,
    figure_data,
    run_sweep,
    serialize,
    series_to_json,
)

_DEFAULTS = {
    "mass_amu": 1.0,
    "sigma0_cm": 1e-4,
    "u_cm_s": 10.0,
    "c": 0.0,
    "k_dyn": 0.0,
    "x_cm": 0.1,
    "window": "adaptive",
    "t_max_ms": None,
    "t_cap_ms": 10_000.0,
    "rel_tol_norm": 1e-6,
    "rel_tol_moment": 1e-6,
    "quad_rel": 1e-10,
    "seed": 20260810,
    "n_particles": 1_000_000,
}

_CONFIG_KEYS = set(_DEFAULTS) | {"threads", "format", "out"}


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON file of flag defaults")
    p.add_argument("--mass-amu", type=float, dest="mass_amu")
    p.add_argument("--sigma0-cm", type=float, dest="sigma0_cm")
    p.add_argument("--u-cm-s", type=float, dest="u_cm_s")
    p.add_argument("--c", type=float, dest="c")
    p.add_argument("--k-dyn", type=float, dest="k_dyn")
    p.add_argument("--x-cm", type=float, dest="x_cm")
    p.add_argument("--window", choices=("adaptive", "fixed"), dest="window")
    p.add_argument("--t-max-ms", type=float, dest="t_max_ms")
    p.add_argument("--t-cap-ms", type=float, dest="t_cap_ms")
    p.add_argument("--rel-tol-norm", type=float, dest="rel_tol_norm")
    p.add_argument("--rel-tol-moment", type=float, dest="rel_tol_moment")
    p.add_argument("--quad-rel", type=float, dest="quad_rel")
    p.add_argument("--seed", type=int, dest="seed")
    p.add_argument("--threads", type=int, dest="threads")
    p.add_argument("--out", dest="out")
    p.add_argument("--format", choices=("csv", "json"), dest="format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arrival-lab",
        description="Quantum vs classical arrival-time distributions "
                    "for a Gaussian packet in a linear potential.",
    )
    parser.add_argument("--version", action="version", version=f"arrival-lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate densities/currents at one (x, t)")
    _common_flags(p_eval)
    p_eval.add_argument("--t-ms", type=float, dest="t_ms", required=True)

    p_arr = sub.add_parser("arrive", help="arrival statistics at the detector")
    _common_flags(p_arr)

    p_sweep = sub.add_parser("sweep", help="mass/c sweep (presets: --table 1|2|3)")
    _common_flags(p_sweep)
    p_sweep.add_argument("--table", type=int, choices=(1, 2, 3))
    p_sweep.add_argument("--masses-amu", dest="masses_amu",
                         help="comma-separated mass list for a custom sweep")
    p_sweep.add_argument("--mc", action="store_true", help="add Monte Carlo columns")
    p_sweep.add_argument("--threshold-eps", type=float, dest="threshold_eps",
                         help="also report the convergence-threshold mass")

    p_fig = sub.add_parser("figure", help="current-series data (presets: --id 1|2)")
    _common_flags(p_fig)
    p_fig.add_argument("--id", type=int, choices=(1, 2), required=True)
    p_fig.add_argument("--n", type=int, default=1201)

    p_orc = sub.add_parser("oracle", help="Monte Carlo check of the classical statistics")
    _common_flags(p_orc)
    p_orc.add_argument("--n-particles", type=int, dest="n_particles")

    p_self = sub.add_parser("selftest", help="run the invariant suite")
    _common_flags(p_self)
    p_self.add_argument("--quick", action="store_true", help="skip the slower checks")

    return parser


def _load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ArrivalLabError(f"config file must hold a JSON object, got {type(raw).__name__}")
    out = {}
    for key, value in raw.items():
        dest = key.replace("-", "_")
        if dest not in _CONFIG_KEYS:
            raise SystemExit(2)  # unknown key is a usage error, same as unknown flag
        out[dest] = value
    return out


def _resolve(ns: argparse.Namespace) -> argparse.Namespace:
    """Fill unset flags from the config file, then from hard defaults."""
    cfg = _load_config(ns.config) if getattr(ns, "config", None) else {}
    for key, hard in _DEFAULTS.items():
        if getattr(ns, key, None) is None:
            setattr(ns, key, cfg.get(key, hard))
    for key in ("threads", "format", "out"):
        if getattr(ns, key, None) is None and key in cfg:
            setattr(ns, key, cfg[key])
    if ns.threads is None:
        env = os.environ.get("ARRIVAL_LAB_THREADS")
        ns.threads = int(env) if env else None
    return ns


def _packet(ns) -> PacketSpec:
    return validate_packet(PacketSpec(
        sigma0=ns.sigma0_cm,
        c_param=ns.c,
        u=ns.u_cm_s,
        mass=amu_to_g(ns.mass_amu),
        k_slope=ns.k_dyn,
    ))


def _window_policy(ns) -> WindowPolicy:
    return WindowPolicy(
        mode=ns.window,
        t_max=ms_to_s(ns.t_max_ms) if ns.t_max_ms is not None else None,
        rel_tol_norm=ns.rel_tol_norm,
        rel_tol_moment=ns.rel_tol_moment,
        t_cap=ms_to_s(ns.t_cap_ms),
    )


def _detector(ns) -> DetectorSpec:
    return DetectorSpec(x_detector=ns.x_cm, window=_window_policy(ns))


def _tolerances(ns) -> Tolerances:
    return Tolerances(quad_rel=ns.quad_rel)


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"wrote {out_path}")
    else:
        sys.stdout.write(text)


def _cmd_eval(ns) -> int:
    spec = _packet(ns)
    x, t = ns.x_cm, ms_to_s(ns.t_ms)
    amp = quantum.psi(spec, x, t)
    doc = {
        "x_cm": x,
        "t_ms": ns.t_ms,
        "sigma_q_cm": float(quantum.sigma_q(spec, t)),
        "sigma_c_cm": float(classical.sigma_c(spec, t)),
        "rho_q_per_cm": float(quantum.rho_q(spec, x, t)),
        "rho_c_per_cm": float(classical.rho_c(spec, x, t)),
        "j_q_per_s": float(quantum.j_q(spec, x, t)),
        "j_c_per_s": float(classical.j_c(spec, x, t)),
        "psi_re": amp.real,
        "psi_im": amp.imag,
    }
    _emit(json.dumps(doc, indent=2) + "\n", ns.out)
    return 0


def _stats_json(stats) -> dict:
    return {
        "norm": stats.norm,
        "mean_t_ms": s_to_ms(stats.mean_t),
        "delta_t_ms": s_to_ms(stats.delta_t),
        "t_window_s": stats.t_window,
        "truncated": stats.truncation_flag,
        "neval": stats.neval,
    }


def _cmd_arrive(ns) -> int:
    spec = _packet(ns)
    det = _detector(ns)
    tol = _tolerances(ns)
    window = choose_window(spec, det, tol)
    sq = arrival_stats(quantum_current(spec, det.x_detector), det, tol, window=window)
    sc = arrival_stats(classical_current(spec, det.x_detector), det, tol, window=window)
    doc = {
        "parameters": {
            "mass_amu": ns.mass_amu, "sigma0_cm": ns.sigma0_cm, "u_cm_s": ns.u_cm_s,
            "c": ns.c, "k_dyn": ns.k_dyn, "x_cm": ns.x_cm,
        },
        "quantum": _stats_json(sq),
        "classical": _stats_json(sc),
    }
    _emit(json.dumps(doc, indent=2) + "\n", ns.out)
    return 0


def _custom_plan(ns) -> SweepPlan:
    masses = tuple(float(m) for m in ns.masses_amu.split(","))
    return SweepPlan(
        base=PacketSpec(sigma0=ns.sigma0_cm, c_param=ns.c, u=ns.u_cm_s,
                        mass=amu_to_g(masses[0]), k_slope=ns.k_dyn),
        det=_detector(ns),
        masses_amu=masses,
        c_values=(ns.c,),
        include_mc=ns.mc,
        mc=McConfig(n_particles=ns.n_particles, seed=ns.seed),
    )


def _cmd_sweep(ns) -> int:
    if ns.table is not None:
        plan = table_plan(ns.table, include_mc=ns.mc,
                          mc=McConfig(n_particles=ns.n_particles, seed=ns.seed))
    elif ns.masses_amu:
        plan = _custom_plan(ns)
    else:
        print("sweep needs --table or --masses-amu", file=sys.stderr)
        return 2
    tol = _tolerances(ns)
    rows = run_sweep(plan, tol, threads=ns.threads)
    fmt = ns.format or ("csv" if ns.out and ns.out.endswith(".csv") else "json")
    payload = serialize(rows, fmt, plan=plan, tol=tol).decode()
    _emit(payload, ns.out)
    if ns.out:
        header = f"{'m(amu)':>9} {'t_c(ms)':>9} {'t_q(ms)':>9} {'dt_c':>7} {'dt_q':>7}  window(s)"
        print(header)
        for r in rows:
            print(f"{r.mass_amu:9.0f} {r.t_c_ms:9.3f} {r.t_q_ms:9.3f} "
                  f"{r.dt_c_ms:7.3f} {r.dt_q_ms:7.3f}  {r.window_s:.4g}"
                  + (" (truncated)" if r.truncated else ""))
    if ns.threshold_eps is not None:
        report = convergence_threshold(rows, ns.threshold_eps)
        print(f"threshold mass: {report.threshold_mass_amu:g} amu "
              f"(eps={report.criterion_eps:g})")
    return 0


def _cmd_figure(ns) -> int:
    variants, det = figure_variants(ns.id)
    pairs = figure_data(variants, det, n=ns.n, tol=_tolerances(ns))
    meta = {"tool_version": __version__, "figure": ns.id, "n": ns.n}
    _emit(series_to_json(pairs, meta), ns.out)
    return 0


def _cmd_oracle(ns) -> int:
    spec = _packet(ns)
    det = _detector(ns)
    tol = _tolerances(ns)
    window = choose_window(spec, det, tol)
    stats = arrival_stats(classical_current(spec, det.x_detector), det, tol, window=window)
    cfg = McConfig(n_particles=ns.n_particles, seed=ns.seed, t_window=window.t_max)
    est = estimate(spec, det, cfg)
    doc = {
        "quadrature": _stats_json(stats),
        "monte_carlo": {
            "mean_t_ms": s_to_ms(est.mean_t),
            "delta_t_ms": s_to_ms(est.delta_t),
            "stderr_mean_ms": s_to_ms(est.stderr_mean),
            "stderr_delta_ms": s_to_ms(est.stderr_delta),
            "n_crossings": est.n_crossings,
            "n_never": est.n_never,
            "seed": cfg.seed,
            "n_particles": cfg.n_particles,
        },
        "mean_discrepancy_sigmas": abs(est.mean_t - stats.mean_t) / est.stderr_mean,
        "delta_discrepancy_sigmas": abs(est.delta_t - stats.delta_t) / est.stderr_delta,
    }
    _emit(json.dumps(doc, indent=2) + "\n", ns.out)
    return 0


def _cmd_selftest(ns) -> int:
    from .selftest import run_selftest
    results = run_selftest(quick=ns.quick)
    passed = sum(1 for r in results if r.ok)
    for r in results:
        mark = "ok  " if r.ok else "FAIL"
        print(f"{mark} {r.name}: {r.detail}")
    print(f"passed {passed}/{len(results)}")
    return 0 if passed == len(results) else 1


_COMMANDS = {
    "eval": _cmd_eval,
    "arrive": _cmd_arrive,
    "sweep": _cmd_sweep,
    "figure": _cmd_figure,
    "oracle": _cmd_oracle,
    "selftest": _cmd_selftest,
}


def run(ns: argparse.Namespace) -> int:
    return _COMMANDS[ns.command](ns)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        ns = _resolve(ns)
        return run(ns)
    except ArrivalLabError as exc:
        error = {"error": type(exc).__name__.removesuffix("Error"), "message": str(exc)}
        print(json.dumps(error), file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": "IoError", "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
