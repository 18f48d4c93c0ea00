from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Settings:
    """Numerical knobs shared by the metric functions.

    ``distance_mode`` selects center-to-center ("center") or
    footprint-to-footprint ("footprint") distances.
    """

    distance_mode: str = "footprint"
    contact_tol: float = 1e-9
    time_tol: float = 1e-6
    # bisection resolution in the searched variable (s, m/s^2, m)
    resolution: float = 1e-3
    accel_floor: float = -30.0
    accel_ceiling: float = 30.0
    gap_max: float = 1000.0
    omega_eps: float = 1e-6

    def __post_init__(self):
        if self.distance_mode not in ("center", "footprint"):
            raise ValueError(f"unknown distance mode {self.distance_mode!r}")
        if self.resolution <= 0 or self.time_tol <= 0:
            raise ValueError("resolutions must be positive")
        if self.accel_floor >= 0 or self.accel_ceiling <= 0:
            raise ValueError("accel_floor must be negative and accel_ceiling positive")


DEFAULT = Settings()
CENTER = Settings(distance_mode="center")
