"""Mass / width-parameter sweeps, convergence reports, figure data, serialization.

One row per (mass, c) pair; quantum and classical statistics in a row always
share the same resolved window and tolerances, and the window is a column so
truncation effects stay auditable.  Serialization is deterministic: identical
plans (including seeds) produce byte-identical CSV/JSON.
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace, asdict

import numpy as np

from . import __version__
from .model import (
    ArrivalLabError,
    DetectorSpec,
    PacketSpec,
    ParameterError,
    Tolerances,
    DEFAULT_TOLERANCES,
    amu_to_g,
    s_to_ms,
)
from .arrival import (
    CurrentSeries,
    arrival_stats,
    choose_window,
    classical_current,
    pulse_grid,
    quantum_current,
)
from .mc import McConfig, estimate

__all__ = [
    "SweepPlan", "SweepRow", "ConvergenceReport", "NotConvergedError",
    "run_sweep", "convergence_threshold", "figure_data",
    "rows_to_csv", "rows_from_csv", "sweep_to_json", "series_to_json",
    "report_to_json", "serialize", "CSV_FIELDS",
]


class NotConvergedError(ArrivalLabError):
    """No listed mass meets the convergence criterion."""


@dataclass(frozen=True)
class SweepPlan:
    base: PacketSpec
    det: DetectorSpec
    masses_amu: tuple
    c_values: tuple
    include_mc: bool = False
    mc: McConfig = field(default_factory=McConfig)

    def __post_init__(self):
        object.__setattr__(self, "masses_amu", tuple(float(m) for m in self.masses_amu))
        object.__setattr__(self, "c_values", tuple(float(c) for c in self.c_values))
        if not self.masses_amu:
            raise ParameterError("mass list must not be empty")
        if any(b <= a for a, b in zip(self.masses_amu, self.masses_amu[1:])):
            raise ParameterError("masses must be strictly increasing")
        if not self.c_values:
            raise ParameterError("c list must not be empty")


@dataclass(frozen=True)
class SweepRow:
    mass_amu: float
    c_param: float
    t_c_ms: float
    t_q_ms: float
    dt_c_ms: float
    dt_q_ms: float
    rel_dev_mean: float
    rel_dev_fluct: float
    window_s: float
    truncated: bool
    mc_mean_ms: float | None = None
    mc_stderr_ms: float | None = None
    status: str = "ok"


CSV_FIELDS = (
    "mass_amu", "c_param", "t_c_ms", "t_q_ms", "dt_c_ms", "dt_q_ms",
    "rel_dev_mean", "rel_dev_fluct", "window_s", "truncated",
    "mc_mean_ms", "mc_stderr_ms", "status",
)


@dataclass(frozen=True)
class ConvergenceReport:
    threshold_mass_amu: float
    criterion_eps: float
    monotone_after_amu: float


def _compute_row(plan: SweepPlan, tol: Tolerances, mass_amu: float, c: float) -> SweepRow:
    spec = replace(plan.base, mass=amu_to_g(mass_amu), c_param=c)
    try:
        window = choose_window(spec, plan.det, tol)
        stats_q = arrival_stats(quantum_current(spec, plan.det.x_detector),
                                plan.det, tol, window=window)
        stats_c = arrival_stats(classical_current(spec, plan.det.x_detector),
                                plan.det, tol, window=window)
        mc_mean = mc_err = None
        if plan.include_mc:
            cfg = replace(plan.mc, t_window=window.t_max)
            est = estimate(spec, plan.det, cfg)
            mc_mean = s_to_ms(est.mean_t)
            mc_err = s_to_ms(est.stderr_mean)
        return SweepRow(
            mass_amu=mass_amu,
            c_param=c,
            t_c_ms=s_to_ms(stats_c.mean_t),
            t_q_ms=s_to_ms(stats_q.mean_t),
            dt_c_ms=s_to_ms(stats_c.delta_t),
            dt_q_ms=s_to_ms(stats_q.delta_t),
            rel_dev_mean=abs(stats_q.mean_t - stats_c.mean_t) / stats_c.mean_t,
            rel_dev_fluct=abs(stats_q.delta_t - stats_c.delta_t) / stats_c.delta_t,
            window_s=window.t_max,
            truncated=window.truncated,
            mc_mean_ms=mc_mean,
            mc_stderr_ms=mc_err,
        )
    except ArrivalLabError as exc:
        nan = float("nan")
        return SweepRow(mass_amu, c, nan, nan, nan, nan, nan, nan, nan, False,
                        status=type(exc).__name__)


def run_sweep(plan: SweepPlan, tol: Tolerances = DEFAULT_TOLERANCES,
              *, threads: int | None = None) -> list[SweepRow]:
    """Compute one row per (c, mass) pair, in plan order.

    Per-row domain errors are captured in the row's status field and never
    abort the sweep.  Row values are independent of the thread count.
    """
    pairs = [(m, c) for c in plan.c_values for m in plan.masses_amu]
    if threads is not None and threads <= 1:
        return [_compute_row(plan, tol, m, c) for m, c in pairs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_compute_row, plan, tol, m, c) for m, c in pairs]
        return [f.result() for f in futures]


def convergence_threshold(rows, eps: float) -> ConvergenceReport:
    """Smallest listed mass from which both relative deviations stay below eps.

    Rows must share one c value.  Raises NotConvergedError when no listed
    mass qualifies.
    """
    rows = sorted(rows, key=lambda r: r.mass_amu)
    if not rows:
        raise ParameterError("no rows given")
    if len({r.c_param for r in rows}) != 1:
        raise ParameterError("convergence report requires rows sharing one c value")

    def ok(row):
        return (row.status == "ok"
                and row.rel_dev_mean < eps and row.rel_dev_fluct < eps)

    threshold = None
    for i, row in enumerate(rows):
        if all(ok(r) for r in rows[i:]):
            threshold = row.mass_amu
            break
    if threshold is None:
        raise NotConvergedError(
            f"no listed mass keeps both deviations below {eps!r}"
        )

    monotone_after = rows[-1].mass_amu
    for i in range(len(rows) - 1, -1, -1):
        devs = [r.rel_dev_mean for r in rows[i:]]
        if all(b < a for a, b in zip(devs, devs[1:])):
            monotone_after = rows[i].mass_amu
        else:
            break
    return ConvergenceReport(threshold, eps, monotone_after)


def figure_data(variants, det: DetectorSpec, n: int = 1201,
                tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    """Quantum/classical series pairs for labelled packet variants.

    variants is an iterable of (label, PacketSpec).  Both series in a pair
    share one pulse-resolved grid so pointwise gaps are meaningful.
    """
    out = {}
    for label, spec in variants:
        times = pulse_grid(spec, det, n, tol)
        jq = quantum_current(spec, det.x_detector)
        jc = classical_current(spec, det.x_detector)
        vq = np.asarray(jq(times), dtype=float)
        vc = np.asarray(jc(times), dtype=float)
        out[label] = (
            CurrentSeries(times, vq, np.abs(vq), "quantum"),
            CurrentSeries(times, vc, np.abs(vc), "classical"),
        )
    return out


# --- serialization ---------------------------------------------------------

def _fmt_csv(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_FIELDS) + "\n")
    for r in rows:
        d = asdict(r)
        buf.write(",".join(_fmt_csv(d[k]) for k in CSV_FIELDS) + "\n")
    return buf.getvalue()


def rows_from_csv(text: str) -> list[SweepRow]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != ",".join(CSV_FIELDS):
        raise ParameterError("unrecognized CSV header")
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(CSV_FIELDS):
            raise ParameterError(f"malformed CSV row: {ln!r}")
        vals = dict(zip(CSV_FIELDS, parts))
        out.append(SweepRow(
            mass_amu=float(vals["mass_amu"]),
            c_param=float(vals["c_param"]),
            t_c_ms=float(vals["t_c_ms"]),
            t_q_ms=float(vals["t_q_ms"]),
            dt_c_ms=float(vals["dt_c_ms"]),
            dt_q_ms=float(vals["dt_q_ms"]),
            rel_dev_mean=float(vals["rel_dev_mean"]),
            rel_dev_fluct=float(vals["rel_dev_fluct"]),
            window_s=float(vals["window_s"]),
            truncated=vals["truncated"] == "true",
            mc_mean_ms=float(vals["mc_mean_ms"]) if vals["mc_mean_ms"] else None,
            mc_stderr_ms=float(vals["mc_stderr_ms"]) if vals["mc_stderr_ms"] else None,
            status=vals["status"],
        ))
    return out


def _metadata(plan: SweepPlan, tol: Tolerances) -> dict:
    w = plan.det.window
    return {
        "tool_version": __version__,
        "k_slope": plan.base.k_slope,
        "sigma0_cm": plan.base.sigma0,
        "u_cm_s": plan.base.u,
        "x_detector_cm": plan.det.x_detector,
        "c_values": list(plan.c_values),
        "masses_amu": list(plan.masses_amu),
        "window_policy": {
            "mode": w.mode,
            "t_max_s": w.t_max,
            "rel_tol_norm": w.rel_tol_norm,
            "rel_tol_moment": w.rel_tol_moment,
            "t_cap_s": w.t_cap,
        },
        "tolerances": {
            "quad_abs": tol.quad_abs,
            "quad_rel": tol.quad_rel,
            "fd_step_scale": tol.fd_step_scale,
        },
        "include_mc": plan.include_mc,
        "mc_seed": plan.mc.seed if plan.include_mc else None,
        "mc_n_particles": plan.mc.n_particles if plan.include_mc else None,
    }


def _row_json(r: SweepRow) -> dict:
    d = asdict(r)
    d["display"] = {k: f"{getattr(r, k):.3f}"
                    for k in ("t_c_ms", "t_q_ms", "dt_c_ms", "dt_q_ms")}
    return d


def sweep_to_json(rows, plan: SweepPlan, tol: Tolerances = DEFAULT_TOLERANCES) -> str:
    doc = {
        "schema": 1,
        "metadata": _metadata(plan, tol),
        "rows": [_row_json(r) for r in rows],
    }
    return json.dumps(doc, indent=2) + "\n"


def _series_json(s: CurrentSeries) -> dict:
    return {
        "mechanics": s.mechanics_tag,
        "times_s": [float(v) for v in s.times],
        "values": [float(v) for v in s.values],
        "abs_values": [float(v) for v in s.abs_values],
    }


def series_to_json(pairs: dict, metadata: dict | None = None) -> str:
    doc = {
        "schema": 1,
        "metadata": metadata or {"tool_version": __version__},
        "series": {
            label: {"quantum": _series_json(q), "classical": _series_json(c)}
            for label, (q, c) in pairs.items()
        },
    }
    return json.dumps(doc, indent=2) + "\n"


def report_to_json(report: ConvergenceReport) -> str:
    doc = {"schema": 1, "tool_version": __version__, **asdict(report)}
    return json.dumps(doc, indent=2) + "\n"


def serialize(obj, fmt: str = "json", *, plan: SweepPlan | None = None,
              tol: Tolerances = DEFAULT_TOLERANCES) -> bytes:
    """Encode sweep rows, figure series, or a convergence report.

    Rows support csv and json (json needs the plan for its metadata block);
    series and reports are json-only.
    """
    if fmt not in ("csv", "json"):
        raise ParameterError(f"format must be 'csv' or 'json', got {fmt!r}")
    if isinstance(obj, list) and all(isinstance(r, SweepRow) for r in obj):
        if fmt == "csv":
            return rows_to_csv(obj).encode()
        if plan is None:
            raise ParameterError("row JSON needs the originating plan for metadata")
        return sweep_to_json(obj, plan, tol).encode()
    if isinstance(obj, ConvergenceReport):
        if fmt == "csv":
            raise ParameterError("convergence reports serialize to JSON only")
        return report_to_json(obj).encode()
    if isinstance(obj, dict):
        if fmt == "csv":
            raise ParameterError("figure series serialize to JSON only")
        return series_to_json(obj).encode()
    raise ParameterError(f"cannot serialize object of type {type(obj).__name__}")
