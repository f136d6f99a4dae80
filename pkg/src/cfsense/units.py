"""Unit handling for configuration I/O.

All internal math is SI (m, Pa, K, Ω, V, N, s).  Configuration files tag
every number with a unit string and values are converted exactly once, at
the boundary.  Temperatures are kept in °C: every formula in the toolkit
uses temperature *differences*, for which °C and K coincide.
"""

from __future__ import annotations

from .errors import ConfigError

# Multiplicative factors to SI, keyed by dimension then unit string.
_FACTORS: dict[str, dict[str, float]] = {
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6},
    "pressure": {"Pa": 1.0, "kPa": 1e3, "MPa": 1e6, "GPa": 1e9},
    "force": {"N": 1.0},
    "temperature": {"degC": 1.0, "C": 1.0},
    "cte": {"1/K": 1.0, "1/degC": 1.0, "u/K": 1e-6, "u/degC": 1e-6},
    "resistivity": {"ohm.m": 1.0, "ohm.cm": 1e-2, "mohm.cm": 1e-5},
    "resistance": {"ohm": 1.0, "kohm": 1e3},
    "voltage": {"V": 1.0},
    "frequency": {"Hz": 1.0},
    "time": {"s": 1.0},
    "dimensionless": {"1": 1.0, "": 1.0},
}


def convert(value: float, unit: str, dimension: str) -> float:
    """Convert ``value`` with unit tag ``unit`` to SI for ``dimension``."""
    try:
        table = _FACTORS[dimension]
    except KeyError:
        raise ConfigError(f"unknown dimension {dimension!r}") from None
    try:
        return float(value) * table[unit]
    except KeyError:
        allowed = ", ".join(sorted(table))
        raise ConfigError(
            f"unit {unit!r} not valid for {dimension} (allowed: {allowed})"
        ) from None


def parse_quantity(node: object, dimension: str, where: str) -> float:
    """Parse a ``{"value": x, "unit": "..."}`` JSON node into an SI float.

    A bare number is accepted only for dimensionless entries; everything
    else must be explicitly tagged.  Unknown keys inside the node are an
    error so typos in physics inputs cannot pass silently.
    """
    if isinstance(node, (int, float)) and not isinstance(node, bool):
        if dimension == "dimensionless":
            return float(node)
        raise ConfigError(f"{where}: bare number; expected {{value, unit}} tagged quantity")
    if not isinstance(node, dict):
        raise ConfigError(f"{where}: expected a quantity object, got {type(node).__name__}")
    extra = set(node) - {"value", "unit", "uncertainty"}
    if extra:
        raise ConfigError(f"{where}: unknown quantity keys {sorted(extra)}")
    if "value" not in node or "unit" not in node:
        raise ConfigError(f"{where}: quantity needs both 'value' and 'unit'")
    if not isinstance(node["value"], (int, float)) or isinstance(node["value"], bool):
        raise ConfigError(f"{where}: 'value' must be a number")
    return convert(node["value"], str(node["unit"]), dimension)
