"""Forecast scoring: nRMSE, the persistence baseline, and seasonal breakdowns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .series import HourlySeries

SEASON_MONTHS = {
    "winter": (12, 1, 2),
    "spring": (3, 4, 5),
    "summer": (6, 7, 8),
    "autumn": (9, 10, 11),
}
SEASONS = ("winter", "spring", "summer", "autumn")


def nrmse(measured, predicted):
    """Root-mean-square error over the root mean square of measurements, in %."""
    x = np.asarray(measured, dtype=float)
    xhat = np.asarray(predicted, dtype=float)
    if x.size == 0 or x.shape != xhat.shape:
        raise ValidationError(f"mismatched lengths {x.shape} vs {xhat.shape}")
    denom = np.sqrt(np.mean(x**2))
    if denom == 0:
        raise ValidationError("measured series is identically zero")
    return float(100.0 * np.sqrt(np.mean((x - xhat) ** 2)) / denom)


def persistence(values):
    """Naive forecast x(t+1) = x(t) on the concatenated series.

    Returns predictions for targets 1..n-1 (align against values[1:]).
    """
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise ValidationError("persistence needs at least 2 values")
    return v[:-1].copy()


def seasonal_split(s: HourlySeries):
    """Slot indices per meteorological season (DJF, MAM, JJA, SON)."""
    months = s.month_per_slot()
    return {
        name: np.flatnonzero(np.isin(months, SEASON_MONTHS[name])) for name in SEASONS
    }


@dataclass(frozen=True)
class ScoreReport:
    nrmse_annual: float
    nrmse_by_season: dict
    n_samples: dict

    def as_dict(self):
        return {
            "annual": self.nrmse_annual,
            **{s: self.nrmse_by_season[s] for s in SEASONS},
            "n": dict(self.n_samples),
        }


def score_model(measured: HourlySeries, predicted, target_idx):
    """Annual plus per-season nRMSE of predictions at the given slot indices."""
    target_idx = np.asarray(target_idx, dtype=int)
    predicted = np.asarray(predicted, dtype=float)
    if predicted.shape != target_idx.shape:
        raise ValidationError("predictions and target indices differ in length")
    x = measured.values[target_idx]
    buckets = seasonal_split(measured)
    by_season, n = {}, {"annual": int(target_idx.size)}
    for name in SEASONS:
        sel = np.isin(target_idx, buckets[name])
        n[name] = int(sel.sum())
        by_season[name] = nrmse(x[sel], predicted[sel]) if sel.any() else float("nan")
    return ScoreReport(
        nrmse_annual=nrmse(x, predicted), nrmse_by_season=by_season, n_samples=n
    )


def compare_models(measured: HourlySeries, predictions: dict):
    """Score several models on the same test series.

    predictions maps model name -> (predicted values, target indices).
    Returns ({name: ScoreReport}, {bucket: best model name}).
    """
    reports = {
        name: score_model(measured, pred, idx) for name, (pred, idx) in predictions.items()
    }
    best = {}
    for bucket in ("annual",) + SEASONS:
        scored = {
            name: (r.nrmse_annual if bucket == "annual" else r.nrmse_by_season[bucket])
            for name, r in reports.items()
        }
        scored = {k: v for k, v in scored.items() if np.isfinite(v)}
        if scored:
            best[bucket] = min(scored, key=scored.get)
    return reports, best
