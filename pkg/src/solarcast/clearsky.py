"""Solar geometry and the simplified Solis clear-sky model.

Clear-sky global horizontal irradiance:

    H_gh = H'0 * exp(-tau / sin^b(h)) * sin(h)        (0 for h <= 0)

with h the solar elevation, tau the total atmospheric optical depth and b
a fitting exponent.  H'0 is the eccentricity-corrected solar constant.
Elevation uses the Spencer declination series and the hour angle of the
slot's true solar hour, so slot 4 is solar noon exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import FitError, ValidationError
from .series import DAY_START_HOUR, HOURS_PER_DAY, SiteGeometry

SOLAR_CONSTANT = 1367.0  # W/m^2, equivalently Wh/m^2 over one hour

# Denominator floor for clear-sky divisions: winter 08:00 slots can have a
# tiny H_gh and an unfloored clear-sky index explodes.
GHI_FLOOR = 5.0


@dataclass(frozen=True)
class SolisParams:
    tau: float
    b: float

    def __post_init__(self):
        if self.tau < 0:
            raise ValidationError(f"optical depth tau={self.tau} must be >= 0")
        if self.b <= 0:
            raise ValidationError(f"exponent b={self.b} must be > 0")


@dataclass(frozen=True)
class SolarPosition:
    elevation: float  # radians
    extraterrestrial: float  # Wh/m^2, eccentricity-corrected


def eccentricity_correction(day_of_year):
    return 1.0 + 0.033 * np.cos(2.0 * np.pi * np.asarray(day_of_year, dtype=float) / 365.0)


def declination(day_of_year):
    """Solar declination in radians (Spencer 1971 Fourier series)."""
    g = 2.0 * np.pi * (np.asarray(day_of_year, dtype=float) - 1.0) / 365.0
    return (
        0.006918
        - 0.399912 * np.cos(g)
        + 0.070257 * np.sin(g)
        - 0.006758 * np.cos(2 * g)
        + 0.000907 * np.sin(2 * g)
        - 0.002697 * np.cos(3 * g)
        + 0.00148 * np.sin(3 * g)
    )


def elevation_angle(latitude_deg, day_of_year, slot):
    """Solar elevation (radians) at a daylight slot, slots counted from 08:00."""
    lat = np.deg2rad(latitude_deg)
    dec = declination(day_of_year)
    hour_angle = np.deg2rad(15.0 * (DAY_START_HOUR + np.asarray(slot, dtype=float) - 12.0))
    sin_h = np.sin(lat) * np.sin(dec) + np.cos(lat) * np.cos(dec) * np.cos(hour_angle)
    return np.arcsin(np.clip(sin_h, -1.0, 1.0))


def solar_position(geo: SiteGeometry, day_of_year: int, slot: int) -> SolarPosition:
    if not 1 <= day_of_year <= 366:
        raise ValidationError(f"day_of_year {day_of_year} outside [1, 366]")
    if not 0 <= slot <= HOURS_PER_DAY - 1:
        raise ValidationError(f"slot {slot} outside [0, {HOURS_PER_DAY - 1}]")
    doy = min(day_of_year, 365)
    h = float(elevation_angle(geo.latitude, doy, slot))
    h0 = SOLAR_CONSTANT * float(eccentricity_correction(doy))
    return SolarPosition(elevation=h, extraterrestrial=h0)


def solis_ghi(pos: SolarPosition, params: SolisParams) -> float:
    return float(_solis(pos.elevation, pos.extraterrestrial, params.tau, params.b))


def _solis(elevation, h0, tau, b):
    h = np.atleast_1d(np.asarray(elevation, dtype=float))
    h0_arr = np.broadcast_to(np.asarray(h0, dtype=float), h.shape)
    sin_h = np.sin(h)
    out = np.zeros_like(sin_h)
    up = sin_h > 0
    out[up] = h0_arr[up] * np.exp(-tau / sin_h[up] ** b) * sin_h[up]
    return out if np.ndim(elevation) else float(out[0])


def clear_sky_values(geo, params, s):
    """Clear-sky H_gh for every slot of a series' calendar."""
    doy = np.repeat(s.season_day, HOURS_PER_DAY)
    slots = np.tile(np.arange(HOURS_PER_DAY), s.n_days)
    h = elevation_angle(geo.latitude, doy, slots)
    h0 = SOLAR_CONSTANT * eccentricity_correction(doy)
    return _solis(h, h0, params.tau, params.b)


def detect_clear_days(s, window=10, ratio_floor=0.88, var_threshold=0.0020):
    """Flag days whose profile hugs a running per-slot envelope.

    The envelope (per-slot max over +-window days) approximates the local
    clear-sky curve without needing fitted parameters; a clear day has a
    high, nearly constant ratio to it.
    """
    grid = s.values.reshape(-1, HOURS_PER_DAY)
    n_days = grid.shape[0]
    clear = np.zeros(n_days, dtype=bool)
    for d in range(n_days):
        lo, hi = max(0, d - window), min(n_days, d + window + 1)
        env = np.maximum(grid[lo:hi].max(axis=0), GHI_FLOOR)
        ratio = grid[d] / env
        clear[d] = ratio.mean() > ratio_floor and ratio.var() < var_threshold
    return clear


def fit_solis(s, geo, clear_mask=None, min_clear_days=5):
    """Fit (tau, b) by least squares on detected clear days.

    Coarse grid search seeds a Nelder-Mead refinement.  Raises FitError
    when fewer than `min_clear_days` days look clear or when the residual
    nRMSE on the clear-day samples exceeds 10% (caller should then supply
    parameters manually).
    """
    if clear_mask is None:
        clear_mask = detect_clear_days(s)
    clear_mask = np.asarray(clear_mask, dtype=bool)
    if clear_mask.sum() < min_clear_days:
        raise FitError(
            f"only {int(clear_mask.sum())} clear days detected; "
            f"need {min_clear_days} to fit the clear-sky model"
        )

    slot_mask = np.repeat(clear_mask, HOURS_PER_DAY)
    doy = np.repeat(s.season_day, HOURS_PER_DAY)[slot_mask]
    slots = np.tile(np.arange(HOURS_PER_DAY), s.n_days)[slot_mask]
    x = s.values[slot_mask]
    sin_h = np.sin(elevation_angle(geo.latitude, doy, slots))
    h0 = SOLAR_CONSTANT * eccentricity_correction(doy)
    up = sin_h > 0.02
    x, sin_h, h0 = x[up], sin_h[up], h0[up]

    def sse(tau, b):
        model = h0 * np.exp(-tau / sin_h**b) * sin_h
        return float(np.sum((x - model) ** 2))

    taus = np.linspace(0.0, 1.0, 26)
    bs = np.linspace(0.1, 2.0, 20)
    best = min(((sse(t, b), t, b) for t in taus for b in bs), key=lambda z: z[0])

    def objective(p):
        tau, b = p
        if tau < 0 or b <= 0.01:
            return np.inf
        return sse(tau, b)

    res = minimize(
        objective,
        x0=[best[1], best[2]],
        method="Nelder-Mead",
        options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 2000},
    )
    tau, b = max(float(res.x[0]), 0.0), float(res.x[1])
    model = h0 * np.exp(-tau / sin_h**b) * sin_h
    nrmse = np.sqrt(np.mean((x - model) ** 2)) / np.sqrt(np.mean(x**2))
    if nrmse > 0.10:
        raise FitError(
            f"clear-sky fit residual nRMSE {nrmse:.1%} exceeds 10%; "
            "supply tau and b manually"
        )
    return SolisParams(tau=tau, b=b)
