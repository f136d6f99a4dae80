"""Three-point-bending statics/kinematics and residual thermal stress.

Sign convention, used consistently everywhere (the inputs this models mix
conventions between sources, so one is fixed here and tested):

* load P is positive downward on the midspan of the simply supported beam;
* midspan moment M = −P·L/4 and center deflection y are negative;
* compression is negative.  Gauge 1 sits above the neutral axis in the
  ``INITIAL`` orientation, so it carries negative (compressive) strain
  under load; gauge 2 mirrors it.  Flipping the sample swaps the signs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import PhysicsError
from .section import BeamGeometry, MaterialSet, SectionProperties, section_properties

GAUGES = (1, 2)


class Orientation(enum.Enum):
    INITIAL = "initial"
    FLIPPED = "flipped"


class FailureBand(enum.Enum):
    ELASTIC = "elastic"
    COMPRESSIVE_YIELD = "compressive_yield"
    TENSILE_YIELD = "tensile_yield"


@dataclass(frozen=True)
class LoadCase:
    """Midspan force (N, >= 0, downward) and sample orientation."""

    P: float
    orientation: Orientation = Orientation.INITIAL

    def __post_init__(self):
        if self.P < 0:
            raise PhysicsError(f"load must be >= 0 (downward), got {self.P}")


@dataclass(frozen=True)
class BendingState:
    """Linear-elastic response of the beam to one load case.

    ``eps_max`` is the strain at the composite-line centroid on the
    compression side (≤ 0); ``eps_avg`` is half of it (average over the
    simply supported span).  ``sigma_fiber_max`` is the stress in the
    fibers furthest from the neutral axis on the compression side (≤ 0).
    ``gauge_strain`` maps gauge number to its signed centroid strain for
    the load case's orientation.
    """

    M: float
    y_max: float
    eps_max: float
    eps_avg: float
    sigma_fiber_max: float
    gauge_strain: dict[int, float]


@dataclass(frozen=True)
class ThermalState:
    """Residual stress on the composite after print cool-down.

    ``sigma_therm`` < 0 (fibers in compression) for the datasheet
    parameter set; ``dT_comp``/``dT_PETG`` are ambient minus deposition
    temperatures (negative: the material cools down).
    """

    sigma_therm: float
    dT_comp: float
    dT_PETG: float


def bend(geometry: BeamGeometry, materials: MaterialSet, load: LoadCase) -> BendingState:
    """Evaluate the three-point-bending response in the linear regime.

    Moment, deflection, centroid strain and extreme-fiber stress follow
    classical beam theory on the transformed section.  The identity
    eps_max == 12·d_NA·y_max/L² ties the force-based and deflection-based
    strain paths together and is enforced by tests, not recomputed here.
    """
    sec = section_properties(geometry, materials)
    L = geometry.span_L
    EJ = materials.E_PETG * sec.J_beam
    M = -load.P * L / 4.0 + 0.0  # +0.0 normalizes -0.0 at zero load
    y_max = -load.P * L**3 / (48.0 * EJ) + 0.0
    # Compression side: gauge above the neutral axis, strain <= 0.
    eps_max = geometry.d_NA * M / EJ + 0.0
    eps_avg = eps_max / 2.0
    sigma_fiber_max = sec.n * M * (geometry.d_NA + 0.5 * geometry.h_comp) / sec.J_beam + 0.0
    if load.orientation is Orientation.INITIAL:
        gauge_strain = {1: eps_max, 2: -eps_max}
    else:
        gauge_strain = {1: -eps_max, 2: eps_max}
    return BendingState(
        M=M,
        y_max=y_max,
        eps_max=eps_max,
        eps_avg=eps_avg,
        sigma_fiber_max=sigma_fiber_max,
        gauge_strain=gauge_strain,
    )


def gauge_fiber_stress(bending: BendingState, gauge: int) -> float:
    """Signed extreme-fiber loading stress at one gauge's side."""
    if gauge not in GAUGES:
        raise PhysicsError(f"gauge must be one of {GAUGES}")
    eps = bending.gauge_strain[gauge]
    if bending.eps_max == 0.0:
        return 0.0
    return bending.sigma_fiber_max * (eps / bending.eps_max)


def residual_thermal_stress(
    geometry: BeamGeometry,
    materials: MaterialSet,
    include_composite_in_matrix_area: bool = False,
) -> ThermalState:
    """Residual stress on the composite from CTE mismatch after printing.

    Models the composite lines and the PETG bulk as two bars rigidly
    joined at their deposition temperatures and cooled to ambient.  The
    fibers dominate the composite's thermal behaviour, so the composite
    uses the fiber CTE.  Independent of load and of span.
    """
    m = materials
    sec = section_properties(geometry, m, include_composite_in_matrix_area)
    dT_comp = m.T_ambient - m.T_comp
    dT_PETG = m.T_ambient - m.T_PETG
    num = m.E_PETG * m.E_comp * sec.A_PETG * (m.alpha_PETG * dT_PETG - m.alpha_fiber * dT_comp)
    den = m.E_PETG * sec.A_PETG * (1.0 + m.alpha_fiber * dT_comp) + m.E_comp * (
        2.0 * sec.A_comp
    ) * (1.0 + m.alpha_PETG * dT_PETG)
    if den <= 0:
        raise PhysicsError(f"thermal-stress denominator is {den:.4g} <= 0; unphysical inputs")
    return ThermalState(sigma_therm=num / den, dT_comp=dT_comp, dT_PETG=dT_PETG)


def classify_band(sigma_total: float, materials: MaterialSet) -> FailureBand:
    """Band of a total fiber stress against the composite strength limits."""
    if sigma_total <= -materials.sigma_t_comp_compression:
        return FailureBand.COMPRESSIVE_YIELD
    if sigma_total >= materials.sigma_t_comp_tension:
        return FailureBand.TENSILE_YIELD
    return FailureBand.ELASTIC


def total_fiber_stress(
    bending: BendingState,
    thermal: ThermalState,
    materials: MaterialSet,
    gauge: int,
) -> tuple[float, FailureBand]:
    """Loading plus residual stress at one gauge, with its failure band."""
    sigma = gauge_fiber_stress(bending, gauge) + thermal.sigma_therm
    return sigma, classify_band(sigma, materials)


def table_report_rows(
    cases: list[tuple[str, BeamGeometry, MaterialSet, float]],
) -> list[dict[str, float]]:
    """Stress summary rows for a list of (label, geometry, materials, P).

    One row per case with the compression-side loading stress, residual
    thermal stress and their total, in MPa; feeds the CSV report emitter.
    """
    rows = []
    for label, geom, mat, P in cases:
        bending = bend(geom, mat, LoadCase(P=P))
        thermal = residual_thermal_stress(geom, mat)
        total, band = total_fiber_stress(bending, thermal, mat, gauge=1)
        rows.append(
            {
                "label": label,
                "height_mm": geom.h_beam * 1e3,
                "P_N": P,
                "sigma_load_MPa": bending.sigma_fiber_max / 1e6,
                "sigma_therm_MPa": thermal.sigma_therm / 1e6,
                "sigma_total_MPa": total / 1e6,
                "band": band.value,
            }
        )
    return rows
