"""Autoregressive model fit by Yule-Walker on the standardized stationary series.

The series is centered and reduced with its own (training) moments, the
AR coefficients solve the p x p Toeplitz system of biased sample
autocovariances, and one-step prediction de-standardizes with the same
training moments.  Residual whiteness is checked with the +-1.96/sqrt(n)
autocorrelation band.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import FitError, ValidationError
from .series import HourlySeries


def _values(s):
    return s.values if isinstance(s, HourlySeries) else np.asarray(s, dtype=float)


@dataclass(frozen=True)
class ArModel:
    p: int
    phi: np.ndarray
    mean: float
    std: float

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        if phi.shape != (self.p,) or self.p < 1:
            raise ValidationError(f"phi must have length p={self.p}")
        if self.std <= 0:
            raise ValidationError("standardization std must be positive")
        object.__setattr__(self, "phi", phi)

    def to_json(self):
        return json.dumps(
            {
                "schema_version": 1,
                "p": self.p,
                "phi": [float(v) for v in self.phi],
                "mean": self.mean,
                "std": self.std,
            }
        )

    @classmethod
    def from_dict(cls, d):
        return cls(p=int(d["p"]), phi=np.asarray(d["phi"], float), mean=d["mean"], std=d["std"])


def autocovariance(x, max_lag):
    """Biased (1/n) sample autocovariances, lags 0..max_lag."""
    x = np.asarray(x, dtype=float)
    n = x.size
    xc = x - x.mean()
    return np.array([float(xc[: n - k] @ xc[k:]) / n for k in range(max_lag + 1)])


def is_stationary(phi):
    """All characteristic roots strictly inside the unit circle."""
    roots = np.roots(np.concatenate([[1.0], -np.asarray(phi, float)]))
    return roots.size == 0 or float(np.max(np.abs(roots))) < 1.0


def fit_yule_walker(s, p):
    """Solve the Toeplitz autocovariance system for an AR(p).

    The biased autocovariance estimator keeps the system positive
    definite, so the fitted model is stationary; an unstable result is
    reported as a fit failure rather than returned.
    """
    x = _values(s)
    if p < 1:
        raise ValidationError(f"order p={p} must be >= 1")
    if x.size < 10 * p:
        raise ValidationError(f"series of length {x.size} too short for p={p} (need 10p)")
    mean, std = float(x.mean()), float(x.std())
    if std <= 1e-12:
        raise FitError("constant series: Toeplitz system is singular")
    z = (x - mean) / std
    gamma = autocovariance(z, p)
    toeplitz = np.empty((p, p))
    for i in range(p):
        for j in range(p):
            toeplitz[i, j] = gamma[abs(i - j)]
    try:
        phi = np.linalg.solve(toeplitz, gamma[1 : p + 1])
    except np.linalg.LinAlgError as exc:
        raise FitError(f"singular Toeplitz system: {exc}") from None
    if not is_stationary(phi):
        raise FitError(f"fitted AR({p}) has unstable roots")
    return ArModel(p=p, phi=phi, mean=mean, std=std)


def predict_one(model, recent):
    """One-step forecast from the last p values (chronological order)."""
    recent = np.asarray(recent, dtype=float)
    if recent.size < model.p:
        raise ValidationError(f"need {model.p} recent values, got {recent.size}")
    z = (recent[-model.p :] - model.mean) / model.std
    acc = float(np.dot(model.phi, z[::-1]))
    return model.mean + model.std * acc


def predict_series(model, s, start, stop=None):
    """Vectorized one-step predictions for targets start..stop-1."""
    x = _values(s)
    stop = x.size if stop is None else stop
    if start < model.p:
        raise ValidationError(f"start={start} lacks {model.p} lags")
    z = (x - model.mean) / model.std
    targets = np.arange(start, stop)
    acc = np.zeros(targets.size)
    for i in range(1, model.p + 1):
        acc += model.phi[i - 1] * z[targets - i]
    return model.mean + model.std * acc


def _nrmse(target, predicted):
    denom = np.sqrt(np.mean(target**2))
    if denom == 0:
        denom = 1.0
    return float(np.sqrt(np.mean((target - predicted) ** 2)) / denom)


def choose_order(s, p_max=5, val_fraction=0.2):
    """Fit p = 1..p_max on the head, score one-step nRMSE on the tail."""
    x = _values(s)
    cut = int(round(x.size * (1.0 - val_fraction)))
    best = None
    for p in range(1, p_max + 1):
        model = fit_yule_walker(x[:cut], p)
        pred = predict_series(model, x, cut)
        score = _nrmse(x[cut:], pred)
        if best is None or score < best[0]:
            best = (score, p)
    return best[1]


@dataclass(frozen=True)
class WhitenessReport:
    autocorrelations: np.ndarray
    band: float
    fraction_inside: float
    white: bool
    degenerate: bool = False


def whiteness(residuals, max_lag=20):
    """Sample autocorrelations of the residuals against the 95% noise band."""
    r = np.asarray(residuals, dtype=float)
    if r.size < 100:
        raise ValidationError(f"need at least 100 residuals, got {r.size}")
    gamma = autocovariance(r, max_lag)
    if gamma[0] <= 1e-300:
        return WhitenessReport(
            autocorrelations=np.zeros(max_lag),
            band=1.96 / np.sqrt(r.size),
            fraction_inside=0.0,
            white=False,
            degenerate=True,
        )
    rho = gamma[1:] / gamma[0]
    band = 1.96 / np.sqrt(r.size)
    inside = float(np.mean(np.abs(rho) <= band))
    return WhitenessReport(
        autocorrelations=rho, band=band, fraction_inside=inside, white=inside >= 0.95
    )
