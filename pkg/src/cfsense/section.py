"""Cross-section model of the printed sandwich beam.

The beam is a PETG rectangle with a rectangular hollow core and two
identical continuous-fiber composite lines mirrored about the neutral
axis.  The composite is stiffer than the PETG matrix, so bending
properties are computed with the transformed-section method: composite
area is scaled by the stiffness ratio n = E_comp / E_PETG.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PhysicsError


@dataclass(frozen=True)
class BeamGeometry:
    """All cross-section and span dimensions of one sample, in metres.

    ``d_NA`` is the distance from the neutral axis to the centroid of one
    composite line; ``span_L`` is the support-to-support distance of the
    three-point bending fixture.
    """

    h_beam: float
    b_beam: float
    h_hollow: float
    b_hollow: float
    h_comp: float
    b_comp: float
    d_NA: float
    span_L: float

    def __post_init__(self):
        pos = {
            "h_beam": self.h_beam, "b_beam": self.b_beam,
            "h_comp": self.h_comp, "b_comp": self.b_comp,
            "d_NA": self.d_NA, "span_L": self.span_L,
        }
        for name, v in pos.items():
            if not v > 0:
                raise PhysicsError(f"{name} must be > 0, got {v}")
        if self.h_hollow < 0 or self.b_hollow < 0:
            raise PhysicsError("hollow dimensions must be >= 0")
        if self.h_hollow >= self.h_beam or self.b_hollow >= self.b_beam:
            raise PhysicsError("hollow core must fit inside the beam section")
        # Composite lines must lie fully inside the section height.
        if self.d_NA + self.h_comp / 2 > self.h_beam / 2 + 1e-12:
            raise PhysicsError(
                "composite line extends outside the section: "
                f"d_NA + h_comp/2 = {self.d_NA + self.h_comp / 2:.6g} m "
                f"> h_beam/2 = {self.h_beam / 2:.6g} m"
            )


@dataclass(frozen=True)
class MaterialSet:
    """Stiffnesses, CTEs, print temperatures, resistivities and strengths.

    Units: Pa, 1/K, °C, Ω·m.  ``E_fiber`` and ``E_PLA`` are carried for
    completeness of the datasheet set but take part in no computation.
    Strength fields are positive magnitudes; the compressive strength of
    the aligned composite is far below its tensile strength.
    """

    E_PETG: float
    E_comp: float
    E_fiber: float
    E_PLA: float
    alpha_PETG: float
    alpha_fiber: float
    T_ambient: float
    T_comp: float
    T_PETG: float
    rho_fiber: float
    rho_matrix: float
    sigma_t_comp_tension: float
    sigma_t_comp_compression: float
    sigma_t_comp_tension_unc: float = 0.0
    sigma_t_comp_compression_unc: float = 0.0

    def __post_init__(self):
        if not (self.E_comp > self.E_PETG > 0):
            raise PhysicsError(
                f"need E_comp > E_PETG > 0 (got {self.E_comp:.4g}, {self.E_PETG:.4g})"
            )
        if self.rho_fiber <= 0 or self.rho_matrix <= 0:
            raise PhysicsError("resistivities must be > 0")
        if self.sigma_t_comp_tension <= 0 or self.sigma_t_comp_compression <= 0:
            raise PhysicsError("strengths must be positive magnitudes")
        if not self.sigma_t_comp_compression < self.sigma_t_comp_tension:
            raise PhysicsError("compressive strength must be below tensile strength")


@dataclass(frozen=True)
class SectionProperties:
    """Transformed-section properties.

    n:      stiffness transformation factor E_comp / E_PETG
    A_comp: area of ONE composite line (m²)
    A_PETG: PETG area = gross − hollow − both composite lines (m²)
    J_beam: transformed second moment of area (m⁴)
    """

    n: float
    A_comp: float
    A_PETG: float
    J_beam: float


def section_properties(
    geometry: BeamGeometry,
    materials: MaterialSet,
    include_composite_in_matrix_area: bool = False,
) -> SectionProperties:
    """Compute transformed-section properties of the sandwich beam.

    The second moment of area counts the gross rectangle minus the hollow
    core at matrix stiffness, plus both composite lines scaled by 2n
    (own inertia and parallel-axis term at d_NA).

    ``include_composite_in_matrix_area`` switches A_PETG to the gross
    minus hollow area (composite lines not subtracted); useful for
    sensitivity studies of the residual-stress model, which is the one
    consumer of A_PETG.
    """
    g, m = geometry, materials
    n = m.E_comp / m.E_PETG
    A_comp = g.h_comp * g.b_comp
    A_PETG = g.b_beam * g.h_beam - g.b_hollow * g.h_hollow
    if not include_composite_in_matrix_area:
        A_PETG -= 2 * A_comp
    if A_PETG <= 0:
        raise PhysicsError("section has no PETG area left; check dimensions")
    J_beam = (g.b_beam * g.h_beam**3 - g.b_hollow * g.h_hollow**3) / 12.0 + 2 * n * (
        g.b_comp * g.h_comp**3 / 12.0 + A_comp * g.d_NA**2
    )
    return SectionProperties(n=n, A_comp=A_comp, A_PETG=A_PETG, J_beam=J_beam)
