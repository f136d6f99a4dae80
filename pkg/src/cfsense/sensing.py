"""Electrical model of one embedded carbon-fiber strain gauge.

A gauge is a bundle of parallel monofilaments.  Compressive overload
breaks filaments; a broken filament first behaves as a strain-modulated
crack bridged by a resistive path, and with growing damage loses contact
entirely.  With a conductive matrix the lost filaments stay weakly
connected through the matrix; with an insulating matrix they are gone and
the gauge eventually opens.  The small-signal gauge factor of this
network rises with damage up to a peak and falls beyond it, which is what
makes controlled overloading ("breaking in") useful.

Filament strengths are Weibull distributed and damage is driven by the
most severe stress peak seen so far, so load history below the standing
peak is a no-op.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import PhysicsError


class Matrix(enum.Enum):
    INSULATING = "insulating"
    CONDUCTIVE = "conductive"


@dataclass(frozen=True)
class GaugeConfig:
    """Electrical and damage parameters of one gauge.

    R0:                      unstrained, undamaged resistance (Ω)
    k_intrinsic:             gauge factor of the intact bundle (≈ 0)
    matrix:                  co-extrusion material class
    filament_count:          monofilaments in the bundle
    filament_diameter:       m
    gauge_length:            m
    weibull_modulus:         shape of the filament strength distribution
    weibull_scale:           Pa, scale of the strength distribution
    bridge_resistance_scale: Ω, crack-bridging path (conductive matrix);
                             for an insulating matrix the same scale seeds
                             the filament-contact term, which grows without
                             bound as damage approaches 1
    crack_sensitivity:       relative resistance growth of a bridged crack
                             per unit strain
    matrix_bridge_resistance: Ω, path through the bulk matrix for filaments
                             that lost direct contact (conductive only)
    matrix_crack_sensitivity: strain sensitivity of that bulk path
    disconnect_exponent:     q; share of broken filaments with no direct
                             contact left is 1 − (1−β)^q
    coalescence_exponent:    a; crack sensitivity scales with β^(a−1),
                             cracks interact as damage densifies
    stress_concentration_factor: multiplier turning tensile stress on an
                             already-damaged gauge into crack-driving
                             stress (crack-tip concentration); an intact
                             gauge is never damaged by tension
    tension_damage_min_fraction: damage level below which tensile stress
                             drives no further damage (isolated filament
                             breaks do not concentrate stress)
    crack_opening_asymmetry: response ratio for crack-closing (negative)
                             strain relative to crack-opening strain
    """

    R0: float
    k_intrinsic: float = 0.0
    matrix: Matrix = Matrix.CONDUCTIVE
    filament_count: int = 1500
    filament_diameter: float = 7e-6
    gauge_length: float = 0.13
    weibull_modulus: float = 5.0
    weibull_scale: float = 700e6
    bridge_resistance_scale: float = 67.5e3
    crack_sensitivity: float = 4000.0
    matrix_bridge_resistance: float = 6.75e6
    matrix_crack_sensitivity: float = 20.0
    disconnect_exponent: float = 2.0
    coalescence_exponent: float = 2.0
    stress_concentration_factor: float = 3.0
    tension_damage_min_fraction: float = 0.01
    crack_opening_asymmetry: float = 1.0

    def __post_init__(self):
        if self.R0 <= 0:
            raise PhysicsError(f"R0 must be > 0, got {self.R0}")
        if self.filament_count < 1:
            raise PhysicsError("filament_count must be >= 1")
        if self.weibull_scale <= 0 or self.weibull_modulus <= 0:
            raise PhysicsError("Weibull scale and modulus must be > 0")
        if self.bridge_resistance_scale <= 0:
            raise PhysicsError("bridge_resistance_scale must be > 0")

    @property
    def filament_resistance(self) -> float:
        """Resistance of one filament path: N parallel filaments give R0."""
        return self.R0 * self.filament_count


@dataclass(frozen=True)
class GaugeState:
    """Damage state plus derived electrical parameters of one gauge.

    ``sigma_peak_seen`` is the most compressive total stress ever applied
    (≤ 0); ``damage_drive_peak`` is the largest crack-driving stress
    magnitude seen, which also folds in concentrated tension on a damaged
    gauge.  Both only ever grow in magnitude.
    """

    config: GaugeConfig
    broken_count: int = 0
    sigma_peak_seen: float = 0.0
    damage_drive_peak: float = 0.0
    R_unstrained: float = 0.0
    k_effective: float = 0.0
    open_circuit: bool = False

    @property
    def broken_fraction(self) -> float:
        return self.broken_count / self.config.filament_count


def baseline_resistance(config: GaugeConfig, rho_fiber: float) -> float:
    """Bundle resistance from fiber resistivity: R = ρ·L / (N·π·(d/2)²)."""
    area = config.filament_count * math.pi * (config.filament_diameter / 2.0) ** 2
    if area <= 0:
        raise PhysicsError("zero filament cross-section area")
    return rho_fiber * config.gauge_length / area


def matrix_parallel_ratio(rho_matrix: float, rho_fiber: float, area_ratio: float) -> float:
    """Resistance ratio of the matrix path to the fiber path.

    (ρ_matrix/ρ_fiber) / area_ratio; callers treat the matrix path as
    negligible for an undamaged gauge when this is large (≥ ~100).
    """
    if rho_matrix <= 0 or rho_fiber <= 0 or area_ratio <= 0:
        raise PhysicsError("matrix_parallel_ratio needs positive inputs")
    return (rho_matrix / rho_fiber) / area_ratio


def linear_resistance(R_unstrained: float, k_effective: float, eps_avg: float) -> float:
    """Strained resistance R = R_unstrained · (1 + k · ε̄)."""
    factor = 1.0 + k_effective * eps_avg
    if factor <= 0:
        raise PhysicsError(
            f"non-physical resistance: 1 + k*eps = {factor:.4g} <= 0 "
            f"(k={k_effective:.4g}, eps={eps_avg:.4g})"
        )
    return R_unstrained * factor


def weibull_cdf(stress_mag: float, scale: float, modulus: float) -> float:
    """Fraction of filaments whose strength lies below ``stress_mag``."""
    if stress_mag <= 0:
        return 0.0
    ratio = stress_mag / scale
    if ratio <= 0.0:  # underflow for denormal stress
        return 0.0
    log_t = modulus * math.log(ratio)
    if log_t > 700.0:  # exp would overflow; CDF saturated
        return 1.0
    return -math.expm1(-math.exp(log_t))


def _network_terms(config: GaugeConfig, beta: float) -> tuple[float, float]:
    """Relative conductance and small-signal gauge factor at damage β.

    Three parallel populations: intact filaments, bridged cracks, and
    filaments without direct contact.  Each contributes its conductance
    share times its own strain sensitivity; the total resistance is the
    reciprocal of the summed conductance (relative to the undamaged
    bundle, so the return value G satisfies R_unstrained = R0 / G).
    """
    c = config
    beta = min(max(beta, 0.0), 1.0)
    k_i = c.k_intrinsic
    delta = 1.0 - (1.0 - beta) ** c.disconnect_exponent
    w_i = 1.0 - beta
    w_b = beta * (1.0 - delta)
    w_d = beta * delta

    # Bridged-crack path, in units of the single-filament resistance.
    u_b = c.bridge_resistance_scale / c.filament_resistance
    if c.matrix is Matrix.INSULATING and beta < 1.0:
        u_b /= 1.0 - beta  # contact term worsens as damage accumulates
    coalesce = beta ** (c.coalescence_exponent - 1.0) if beta > 0 else 0.0
    g_b = 1.0 / (1.0 + u_b)
    s_b = (k_i + c.crack_sensitivity * coalesce * u_b) / (1.0 + u_b)

    if c.matrix is Matrix.CONDUCTIVE:
        u_d = c.matrix_bridge_resistance / c.filament_resistance
        g_d = 1.0 / (1.0 + u_d)
        s_d = (k_i + c.matrix_crack_sensitivity * u_d) / (1.0 + u_d)
    else:
        g_d, s_d = 0.0, 0.0

    if beta >= 1.0 and c.matrix is Matrix.INSULATING:
        return 0.0, 0.0
    G = w_i + w_b * g_b + w_d * g_d
    if G <= 0.0:
        return 0.0, 0.0
    k_eff = (w_i * k_i + w_b * g_b * s_b + w_d * g_d * s_d) / G
    return G, k_eff


def gauge_factor_from_damage(state: GaugeState) -> float:
    """Effective gauge factor of the crack network at the current damage."""
    _, k_eff = _network_terms(state.config, state.broken_fraction)
    return k_eff


def new_state(config: GaugeConfig) -> GaugeState:
    """Pristine gauge state: no damage, baseline electrical parameters."""
    G, k_eff = _network_terms(config, 0.0)
    return GaugeState(config=config, R_unstrained=config.R0 / G, k_effective=k_eff)


def _refresh_electrical(state: GaugeState) -> GaugeState:
    G, k_eff = _network_terms(state.config, state.broken_fraction)
    if G <= 0.0:
        return replace(state, R_unstrained=math.inf, k_effective=0.0, open_circuit=True)
    return replace(state, R_unstrained=state.config.R0 / G, k_effective=k_eff)


def apply_stress_peak(
    state: GaugeState, sigma_total: float, rng: np.random.Generator
) -> GaugeState:
    """Advance the damage state with one total-stress peak.

    Compressive peaks drive damage directly.  Tensile peaks drive damage
    only on a gauge that already has broken filaments (crack tips
    concentrate stress), scaled by the concentration factor.  A peak that
    does not exceed the standing crack-driving record changes nothing, so
    replaying history is a no-op and the state is irreversible.

    New failures are binomial draws over the surviving filaments such
    that the expected cumulative broken fraction equals the Weibull CDF
    of the record stress.
    """
    cfg = state.config
    if sigma_total < 0:
        drive = -sigma_total
    elif sigma_total > 0 and state.broken_fraction >= cfg.tension_damage_min_fraction:
        drive = cfg.stress_concentration_factor * sigma_total
    else:
        drive = 0.0

    sigma_peak_seen = min(state.sigma_peak_seen, sigma_total)
    if drive <= state.damage_drive_peak:
        if sigma_peak_seen == state.sigma_peak_seen:
            return state
        return replace(state, sigma_peak_seen=sigma_peak_seen)

    F_old = weibull_cdf(state.damage_drive_peak, cfg.weibull_scale, cfg.weibull_modulus)
    F_new = weibull_cdf(drive, cfg.weibull_scale, cfg.weibull_modulus)
    intact = cfg.filament_count - state.broken_count
    newly = 0
    if intact > 0 and F_new > F_old:
        # Conditional failure probability of a filament that survived F_old.
        p = (F_new - F_old) / max(1.0 - F_old, 1e-300)
        newly = int(rng.binomial(intact, min(p, 1.0)))
    state = replace(
        state,
        broken_count=state.broken_count + newly,
        sigma_peak_seen=sigma_peak_seen,
        damage_drive_peak=drive,
    )
    return _refresh_electrical(state)


def strain_response(state: GaugeState, eps_avg: float) -> float:
    """Resistance of the gauge at average strain ε̄.

    Crack-opening (positive) and crack-closing (negative) strain may act
    with different sensitivity; the default asymmetry of 1 makes the
    response the plain linear law.
    """
    if state.open_circuit:
        return math.inf
    eps_eff = eps_avg if eps_avg >= 0 else state.config.crack_opening_asymmetry * eps_avg
    return linear_resistance(state.R_unstrained, state.k_effective, eps_eff)


@dataclass(frozen=True)
class DividerConfig:
    """One readout channel: series resistor R_div and supply voltage."""

    R_div: float
    V_supply: float = 5.0

    def __post_init__(self):
        if self.R_div <= 0 or self.V_supply <= 0:
            raise PhysicsError("divider needs R_div > 0 and V_supply > 0")


def divider_forward(R_gauge: float, cfg: DividerConfig) -> float:
    """Measured voltage with the gauge on the low side of the divider."""
    if R_gauge <= 0:
        raise PhysicsError(f"gauge resistance must be > 0, got {R_gauge}")
    if math.isinf(R_gauge):
        return cfg.V_supply
    return cfg.V_supply * R_gauge / (R_gauge + cfg.R_div)


def divider_inverse(V: float, cfg: DividerConfig) -> float:
    """Gauge resistance from the measured voltage; exact inversion.

    Voltages at or above the supply mean an open/saturated channel and
    at or below zero a shorted one; both are rejected.
    """
    if not 0.0 < V < cfg.V_supply:
        raise PhysicsError(
            f"divider voltage {V!r} outside (0, {cfg.V_supply}); open or shorted channel"
        )
    return cfg.R_div * V / (cfg.V_supply - V)
