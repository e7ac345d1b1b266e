"""Built-in benchmark parameter sets for the sweep and figure commands.

Tables 1-3 share sigma0 = 1e-4 cm, u = 10 cm/s, X = 0.1 cm and differ in the
width-phase parameter c (1000 / 500 / 100) and their mass lists; figures 1-2
use sigma0 = 1e-5 cm, u = 1e4 cm/s, X = 1 cm.  The potential slope is 0 in
every preset and recorded in output metadata.
"""

from __future__ import annotations

from dataclasses import replace

from .model import DetectorSpec, PacketSpec, WindowPolicy, amu_to_g
from .mc import McConfig
from .sweep import SweepPlan

TABLE_IDS = (1, 2, 3)
FIGURE_IDS = (1, 2)

_TABLE_C = {1: 1000.0, 2: 500.0, 3: 100.0}
_TABLE_MASSES = {
    1: (1.0, 5.0, 25.0, 50.0, 100.0, 500.0, 1000.0, 5000.0, 10000.0),
    2: (1.0, 5.0, 25.0, 50.0, 100.0, 500.0, 1000.0, 5000.0),
    3: (1.0, 5.0, 25.0, 50.0, 100.0, 500.0, 1000.0),
}

_TABLE_PACKET = PacketSpec(sigma0=1e-4, c_param=0.0, u=10.0, mass=amu_to_g(1.0), k_slope=0.0)
_TABLE_DETECTOR = DetectorSpec(x_detector=0.1, window=WindowPolicy())

_FIGURE_PACKET = PacketSpec(sigma0=1e-5, c_param=50.0, u=1e4, mass=amu_to_g(1.0), k_slope=0.0)
_FIGURE_DETECTOR = DetectorSpec(x_detector=1.0, window=WindowPolicy())

_FIGURE_MASSES = {1: (1.0, 50.0, 720.0)}
_FIGURE_CS = {2: (100.0, 10.0, 1.0)}


def table_plan(table: int, *, include_mc: bool = False,
               mc: McConfig | None = None) -> SweepPlan:
    """Sweep plan for benchmark table 1, 2 or 3."""
    if table not in TABLE_IDS:
        raise ValueError(f"table must be one of {TABLE_IDS}, got {table!r}")
    return SweepPlan(
        base=_TABLE_PACKET,
        det=_TABLE_DETECTOR,
        masses_amu=_TABLE_MASSES[table],
        c_values=(_TABLE_C[table],),
        include_mc=include_mc,
        mc=mc if mc is not None else McConfig(),
    )


def figure_variants(figure: int) -> tuple[list, DetectorSpec]:
    """Labelled packet variants plus detector for benchmark figure 1 or 2."""
    if figure not in FIGURE_IDS:
        raise ValueError(f"figure must be one of {FIGURE_IDS}, got {figure!r}")
    if figure == 1:
        variants = [
            (f"m={int(m)}", replace(_FIGURE_PACKET, mass=amu_to_g(m), c_param=50.0))
            for m in _FIGURE_MASSES[1]
        ]
    else:
        variants = [
            (f"C={int(c)}", replace(_FIGURE_PACKET, mass=amu_to_g(1.0), c_param=c))
            for c in _FIGURE_CS[2]
        ]
    return variants, _FIGURE_DETECTOR
