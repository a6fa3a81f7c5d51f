"""Residual-switched combination of the AR and MLP forecasters.

Both sub-models forecast every hour on the stationary scale; the emitted
forecast follows whichever had the smaller absolute residual at the
previous hour (ties go to AR, the first step of a run goes to the MLP).
Because the two forecasts share the hour's inversion factors, comparing
residuals on the stationary or the physical scale selects identically.

Per-hour confidence half-widths are the training-period mean absolute
residual of the deployed configuration, averaged per hour-of-year slot.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ar import predict_one
from .errors import ValidationError
from .mlp import N_ENDO_LAGS, assemble_features
from .series import SLOTS_PER_YEAR
from .stationarity import scale_factors

AR_CHOICE = "AR"
ANN_CHOICE = "ANN"


@dataclass(frozen=True)
class ConfidenceTable:
    """Mean absolute residual per hour-of-year slot (stationary units)."""

    ci_star: np.ndarray
    years: int

    def __post_init__(self):
        ci = np.asarray(self.ci_star, dtype=float)
        if ci.shape != (SLOTS_PER_YEAR,):
            raise ValidationError(f"confidence table needs {SLOTS_PER_YEAR} entries")
        if np.any(ci < 0):
            raise ValidationError("confidence entries must be >= 0")
        object.__setattr__(self, "ci_star", ci)


def build_confidence(residuals, years):
    """Average |residual| per in-year position across `years` stacked years."""
    r = np.asarray(residuals, dtype=float)
    if years < 2:
        raise ValidationError(f"need at least 2 years of residuals, got {years}")
    if r.size != years * SLOTS_PER_YEAR:
        raise ValidationError(
            f"residual length {r.size} does not reshape into {years} x {SLOTS_PER_YEAR}"
        )
    table = np.abs(r).reshape(years, SLOTS_PER_YEAR).mean(axis=0)
    return ConfidenceTable(ci_star=table, years=years)


@dataclass
class HybridForecaster:
    """Switching state machine over a fitted AR model and MLP ensemble."""

    ar: object
    ann: object
    pipeline: object
    mask: np.ndarray
    use_exogenous: bool = True
    confidence: ConfidenceTable | None = None
    eps_ar: float | None = None
    eps_ann: float | None = None
    ar_count: int = 0
    ann_count: int = 0

    def reset(self):
        self.eps_ar = self.eps_ann = None
        self.ar_count = self.ann_count = 0

    def forecast_step(self, csi_star, panel, t):
        """Forecast hour t+1 on the stationary scale.

        Returns (forecast, chosen, ar_forecast, ann_forecast); both
        sub-forecasts are always computed so both residual streams stay
        defined for the next switch decision.
        """
        v = csi_star.values
        if t + 1 >= len(v) or t < max(self.ar.p - 1, N_ENDO_LAGS - 1):
            raise ValidationError(f"t={t} outside the forecastable range")
        f_ar = predict_one(self.ar, v[t - self.ar.p + 1 : t + 1])
        feats = assemble_features(csi_star, panel, self.mask, t, self.use_exogenous)
        f_ann = float(self.ann.predict(feats))
        if self.eps_ar is None or self.eps_ann is None:
            chosen = ANN_CHOICE  # no residual history yet; the MLP is the workhorse
        elif abs(self.eps_ar) <= abs(self.eps_ann):
            chosen = AR_CHOICE
        else:
            chosen = ANN_CHOICE
        if chosen == AR_CHOICE:
            self.ar_count += 1
        else:
            self.ann_count += 1
        return (f_ar if chosen == AR_CHOICE else f_ann), chosen, f_ar, f_ann

    def observe(self, actual, f_ar, f_ann):
        """Update the switch state once the hour's measurement arrives."""
        self.eps_ar = actual - f_ar
        self.eps_ann = actual - f_ann

    def usage_ratio(self):
        return self.ar_count, self.ann_count


@dataclass
class HybridRun:
    """Sequential walk results; index i corresponds to target slot target_idx[i]."""

    target_idx: np.ndarray
    forecast: np.ndarray  # stationary scale
    chosen: list
    f_ar: np.ndarray
    f_ann: np.ndarray
    residual: np.ndarray = field(default=None)


def run_hybrid(forecaster, csi_star, panel, t_start, t_stop=None):
    """Walk forecast_step/observe over targets t_start+1 .. t_stop.

    The walk is strictly sequential: each switch decision depends on the
    residuals of the previous hour.
    """
    v = csi_star.values
    t_stop = len(v) - 1 if t_stop is None else t_stop
    first = max(forecaster.ar.p - 1, N_ENDO_LAGS - 1)
    if t_start < first:
        raise ValidationError(f"t_start={t_start} lacks lag history (need >= {first})")
    targets, preds, chosen, ars, anns = [], [], [], [], []
    for t in range(t_start, t_stop):
        f, c, f_ar, f_ann = forecaster.forecast_step(csi_star, panel, t)
        forecaster.observe(v[t + 1], f_ar, f_ann)
        targets.append(t + 1)
        preds.append(f)
        chosen.append(c)
        ars.append(f_ar)
        anns.append(f_ann)
    target_idx = np.array(targets, dtype=int)
    forecast = np.array(preds)
    return HybridRun(
        target_idx=target_idx,
        forecast=forecast,
        chosen=chosen,
        f_ar=np.array(ars),
        f_ann=np.array(anns),
        residual=v[target_idx] - forecast,
    )


def training_residuals(forecaster, csi_star, panel):
    """Emitted-forecast residuals over the whole training period.

    The first forecastable target sits ~10 slots into the series; the
    leading gap is backfilled with the first available residual so the
    result reshapes into whole years for the confidence table.
    """
    forecaster.reset()
    first = max(forecaster.ar.p - 1, N_ENDO_LAGS - 1)
    run = run_hybrid(forecaster, csi_star, panel, first)
    residuals = np.empty(len(csi_star))
    residuals[run.target_idx] = run.residual
    residuals[: run.target_idx[0]] = run.residual[0]
    forecaster.reset()
    return residuals


def interval_half_width(table, pipeline, s, target_idx):
    """Physical-unit half-widths: CI* expanded by the hour's inversion factors."""
    factors = scale_factors(pipeline, s)[target_idx]
    hoy = s.hour_of_year_slots()[target_idx]
    return table.ci_star[hoy] * factors


def forecast_with_interval(forecaster, csi_star, panel, t, table):
    """(physical forecast, lower, upper) for hour t+1."""
    if table is None:
        raise ValidationError("confidence table not built")
    f, chosen, f_ar, f_ann = forecaster.forecast_step(csi_star, panel, t)
    factor = float(scale_factors(forecaster.pipeline, csi_star)[t + 1])
    hoy = int(csi_star.hour_of_year_slots()[t + 1])
    x = f * factor
    half = float(table.ci_star[hoy]) * factor
    return (x, x - half, x + half), chosen, (f_ar, f_ann)
