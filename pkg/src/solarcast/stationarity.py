"""Clear-sky-index stationarization pipeline and its validation statistics.

The chain that turns measured radiation X into the stationary series CSI*:

    CSI  = X / H_gh                      ratio to the clear-sky curve
    MM   = 9-slot centered moving average of CSI
    C    = CSI / MM                      periodic coefficients
    T    = per hour-of-year mean of C    (3285-slot table)
    CSI* = CSI / T

and the exact inverse X = CSI* * T * H_gh.  Stationarity is checked with
the variation coefficient (sigma/mu) and a two-way variance-ratio test of
the period effect against the interaction residual.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.stats import f as f_dist

from .clearsky import GHI_FLOOR, SolisParams, clear_sky_values, fit_solis
from .errors import FitError, InsufficientDataError, ValidationError
from .series import HOURS_PER_DAY, SLOTS_PER_YEAR, HourlySeries

# Floor for dimensionless ratio denominators (moving averages, table entries).
RATIO_FLOOR = 1e-6

MA_HALF_WIDTH = 4  # 2*4 + 1 = 9 slots, one full day


@dataclass(frozen=True)
class PeriodicTable:
    """Per hour-of-year mean periodic coefficient, 3285 entries, all > 0."""

    coefficients: np.ndarray
    years_averaged: int

    def __post_init__(self):
        coeff = np.asarray(self.coefficients, dtype=float)
        if coeff.shape != (SLOTS_PER_YEAR,):
            raise ValidationError(
                f"periodic table must have {SLOTS_PER_YEAR} entries, got {coeff.shape}"
            )
        if not np.all(coeff > 0):
            raise ValidationError("periodic table entries must be positive")
        object.__setattr__(self, "coefficients", coeff)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["slot", "coefficient"])
            for i, c in enumerate(self.coefficients):
                writer.writerow([i, repr(float(c))])

    @classmethod
    def read_csv(cls, path, years_averaged=0):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        coeff = np.empty(len(rows))
        for row in rows:
            coeff[int(row["slot"])] = float(row["coefficient"])
        return cls(coefficients=coeff, years_averaged=years_averaged)


@dataclass
class StationarityPipeline:
    """Fitted clear-sky parameters plus the periodic-coefficient table."""

    solis: SolisParams
    geo: object
    table: PeriodicTable | None = None
    ma_half_width: int = MA_HALF_WIDTH

    def __post_init__(self):
        if 2 * self.ma_half_width + 1 != HOURS_PER_DAY:
            raise ValidationError("moving-average window must span one 9-hour day")

    def clear_sky(self, s):
        return clear_sky_values(self.geo, self.solis, s)


def fit_pipeline(s, geo, solis=None, clear_mask=None):
    """Fit the full stationarization pipeline on a radiation series."""
    if solis is None:
        solis = fit_solis(s, geo, clear_mask=clear_mask)
    pipeline = StationarityPipeline(solis=solis, geo=geo)
    csi = to_csi(s, pipeline)
    mm = moving_average(csi, pipeline.ma_half_width)
    c = periodic_coefficients(csi, mm)
    pipeline.table = build_periodic_table(c)
    return pipeline


def to_csi(x, pipeline):
    """Clear-sky index: measured radiation over (floored) clear-sky radiation."""
    hgh = np.maximum(pipeline.clear_sky(x), GHI_FLOOR)
    return x.replace_values(x.values / hgh)


def moving_average(csi, half_width=MA_HALF_WIDTH):
    """Centered moving average over 2*half_width+1 slots of the concatenated series.

    Edges use shrunken one-sided windows so the output keeps a whole number
    of days.
    """
    values = csi.values if isinstance(csi, HourlySeries) else np.asarray(csi, float)
    w = 2 * half_width + 1
    if values.size < w:
        raise ValidationError(f"series of length {values.size} shorter than window {w}")
    out = np.empty_like(values)
    interior = np.lib.stride_tricks.sliding_window_view(values, w).mean(axis=1)
    out[half_width : values.size - half_width] = interior
    for t in range(half_width):
        out[t] = values[: t + half_width + 1].mean()
        out[values.size - 1 - t] = values[values.size - 1 - t - half_width :].mean()
    if isinstance(csi, HourlySeries):
        return csi.replace_values(out)
    return out


def periodic_coefficients(csi, mm):
    """Ratio of CSI to its moving average, with the denominator floored."""
    return csi.replace_values(csi.values / np.maximum(mm.values, RATIO_FLOOR))


def build_periodic_table(c):
    """Average the periodic coefficients per hour-of-year slot over the years."""
    slots = c.hour_of_year_slots()
    counts = np.bincount(slots, minlength=SLOTS_PER_YEAR)
    if counts.min() < 2:
        raise InsufficientDataError(
            "periodic table needs at least 2 whole years of coefficients"
        )
    sums = np.bincount(slots, weights=c.values, minlength=SLOTS_PER_YEAR)
    return PeriodicTable(
        coefficients=np.maximum(sums / counts, RATIO_FLOOR),
        years_averaged=int(counts.min()),
    )


def to_csi_star(x, pipeline):
    """Full stationarization: CSI divided by the hour-of-year table entry."""
    if pipeline.table is None:
        raise ValidationError("pipeline table not built; call fit_pipeline first")
    csi = to_csi(x, pipeline)
    return csi.replace_values(
        csi.values / pipeline.table.coefficients[csi.hour_of_year_slots()]
    )


def invert_csi_star(csi_star, pipeline):
    """Back to physical units: X = CSI* * E[C] * H_gh (same floored factors)."""
    if pipeline.table is None:
        raise ValidationError("pipeline table not built; call fit_pipeline first")
    hgh = np.maximum(pipeline.clear_sky(csi_star), GHI_FLOOR)
    table = pipeline.table.coefficients[csi_star.hour_of_year_slots()]
    return csi_star.replace_values(csi_star.values * table * hgh)


def scale_factors(pipeline, s):
    """Per-slot CSI*-to-Wh/m^2 multipliers (table entry times floored H_gh)."""
    hgh = np.maximum(pipeline.clear_sky(s), GHI_FLOOR)
    return pipeline.table.coefficients[s.hour_of_year_slots()] * hgh


@dataclass(frozen=True)
class VcResult:
    vc: float
    undefined: bool = False


def variation_coefficient(s):
    """Population sigma over mu; flagged undefined when the mean is ~0."""
    values = s.values if isinstance(s, HourlySeries) else np.asarray(s, float)
    mu = float(np.mean(values))
    if abs(mu) < 1e-12:
        return VcResult(vc=float("nan"), undefined=True)
    return VcResult(vc=float(np.std(values) / mu))


@dataclass(frozen=True)
class FisherResult:
    f_c: float
    v_p: float
    v_r: float
    p: int
    n: int
    f_limit: float
    seasonal: bool


def fisher_statistic(grid):
    """Two-way decomposition of an (N periods x p measures) grid.

    V_p is the between-measure variance (column effect scaled by N), V_R
    the interaction residual variance; their ratio is the empirical Fisher
    statistic.
    """
    grid = np.asarray(grid, dtype=float)
    n, p = grid.shape
    if n < 2 or p < 2:
        raise ValidationError(f"grid {grid.shape} too small for the variance ratio")
    grand = grid.mean()
    col_means = grid.mean(axis=0)
    row_means = grid.mean(axis=1)
    v_p = n * np.sum((col_means - grand) ** 2) / (p - 1)
    resid = grid - row_means[:, None] - col_means[None, :] + grand
    v_r = np.sum(resid**2) / ((p - 1) * (n - 1))
    return float(v_p), float(v_r)


def fisher_test(s, mode, alpha=0.05):
    """Variance-ratio seasonality test on the daylight series.

    mode="daily" reshapes into years x 3285 hour-of-year measures;
    mode="yearly" into days x 9 hour-of-day measures (the convention the
    stationarity reports follow).  seasonal=True when F_c exceeds the
    F(p-1, (N-1)(p-1)) quantile at `alpha`.
    """
    values = s.values if isinstance(s, HourlySeries) else np.asarray(s, float)
    if mode == "daily":
        p = SLOTS_PER_YEAR
    elif mode == "yearly":
        p = HOURS_PER_DAY
    else:
        raise ValidationError(f"unknown fisher mode {mode!r}")
    if values.size % p != 0:
        raise ValidationError(
            f"series length {values.size} does not reshape into periods of {p}"
        )
    n = values.size // p
    if n < 2:
        raise ValidationError(f"need at least 2 periods of {p}, got {n}")
    v_p, v_r = fisher_statistic(values.reshape(n, p))
    if v_r == 0.0:
        raise ValidationError("degenerate residual: V_R is zero")
    f_c = v_p / v_r
    f_limit = float(f_dist.ppf(1.0 - alpha, p - 1, (n - 1) * (p - 1)))
    return FisherResult(
        f_c=float(f_c),
        v_p=v_p,
        v_r=v_r,
        p=p,
        n=n,
        f_limit=f_limit,
        seasonal=bool(f_c > f_limit),
    )
