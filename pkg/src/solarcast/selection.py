"""Pre-input-layer selection by multiple linear regression and per-weight T-tests.

A linear model of the next stationary value on 10 endogenous lags and 2
lags of each forecast column (19 coefficients with the intercept) is fit
by least squares; a feature survives when |t_j| = |w_j / se_j| exceeds the
threshold (1.96 by default, the large-sample 5% level).  Survivors define
the input mask of the perceptron; the intercept is always kept.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import CollinearityError, InsufficientDataError, ValidationError
from .mlp import EXO_ORDER, FULL_WIDTH, N_ENDO_LAGS, build_dataset

T_THRESHOLD = 1.96
MIN_ROWS = 100

_EXO_LABEL = {"pressure": "P", "nebulosity": "N", "rain": "PR", "temperature": "T"}


def column_names(use_exogenous=True):
    names = ["const"] + [f"endo_{j}" for j in range(1, N_ENDO_LAGS + 1)]
    if use_exogenous:
        for name in EXO_ORDER:
            names += [f"{name}_t+1", f"{name}_t"]
    return names


@dataclass
class DesignMatrix:
    """Standardized regression design: intercept column plus z-scored predictors."""

    x: np.ndarray  # (N, 1 + n_features) with leading ones column
    y: np.ndarray
    names: list
    col_means: np.ndarray
    col_stds: np.ndarray
    raw: np.ndarray  # unstandardized predictors, for downstream reuse
    target_idx: np.ndarray


def build_design(csi_star, panel=None, use_exogenous=True, min_rows=MIN_ROWS):
    """One row per forecastable hour; predictors standardized, intercept exempt.

    Constant predictor columns carry no signal; they stay in the matrix as
    zero columns and fit_ols rejects them from the mask without treating
    them as a collinearity failure.
    """
    raw, y, target_idx = build_dataset(
        csi_star,
        panel,
        np.ones(FULL_WIDTH if use_exogenous else N_ENDO_LAGS, dtype=bool),
        use_exogenous=use_exogenous,
    )
    if raw.shape[0] < min_rows:
        raise InsufficientDataError(
            f"{raw.shape[0]} usable rows after lag trimming; need {min_rows}"
        )
    means = raw.mean(axis=0)
    stds = raw.std(axis=0)
    stds_safe = np.where(stds > 0, stds, 1.0)
    z = (raw - means) / stds_safe
    x = np.column_stack([np.ones(raw.shape[0]), z])
    return DesignMatrix(
        x=x,
        y=np.asarray(y, dtype=float),
        names=column_names(use_exogenous),
        col_means=means,
        col_stds=stds_safe,
        raw=raw,
        target_idx=target_idx,
    )


@dataclass
class SelectionReport:
    """Raw-scale weights, standard errors, t statistics and the derived mask."""

    weights: np.ndarray  # intercept first, raw (unstandardized) scale
    std_errors: np.ndarray
    t_stats: np.ndarray
    mask: np.ndarray  # booleans over the non-intercept columns
    names: list
    threshold: float

    def architecture_string(self, use_exogenous=True):
        """Compact mask description, e.g. Endo^{1:5,9,10} PR^{1,2} N^{1,2}."""
        parts = []
        endo = [j + 1 for j in range(N_ENDO_LAGS) if self.mask[j]]
        if endo:
            parts.append(f"Endo^{{{_runs(endo)}}}")
        if use_exogenous:
            for pos, name in enumerate(("rain", "nebulosity", "pressure", "temperature")):
                c = EXO_ORDER.index(name)
                lags = [
                    k + 1
                    for k in range(2)
                    if self.mask[N_ENDO_LAGS + 2 * c + k]
                ]
                if lags:
                    parts.append(f"{_EXO_LABEL[name]}^{{{_runs(lags)}}}")
        return " ".join(parts)

    def to_json(self, use_exogenous=True):
        return json.dumps(
            {
                "schema_version": 1,
                "threshold": self.threshold,
                "names": self.names,
                "weights": [float(v) for v in self.weights],
                "std_errors": [float(v) for v in self.std_errors],
                "t_stats": [float(v) for v in self.t_stats],
                "mask": [bool(v) for v in self.mask],
                "architecture": self.architecture_string(use_exogenous),
            },
            indent=2,
        )


def _runs(indices):
    """Compress sorted lag indices: [1,2,3,4,5,9,10] -> '1:5,9,10'."""
    out, i = [], 0
    while i < len(indices):
        j = i
        while j + 1 < len(indices) and indices[j + 1] == indices[j] + 1:
            j += 1
        if j - i >= 2:
            out.append(f"{indices[i]}:{indices[j]}")
        else:
            out.extend(str(k) for k in indices[i : j + 1])
        i = j + 1
    return ",".join(out)


def fit_ols(design, threshold=T_THRESHOLD):
    """Least squares on the standardized design, with per-weight T-tests.

    Constant predictors are dropped from the solve and report t = 0.
    Raises CollinearityError for an ill-conditioned normal system among
    the varying columns, naming the most correlated pair.
    """
    x, y = design.x, design.y
    n, k_full = x.shape
    live = np.flatnonzero(x.std(axis=0) > 0)  # intercept column has std 0
    live = np.concatenate([[0], live])
    xl = x[:, live]
    k = xl.shape[1]
    if n <= k:
        raise InsufficientDataError(f"{n} rows cannot identify {k} coefficients")
    gram = xl.T @ xl
    if np.linalg.cond(gram) >= 1e12:
        pair = _worst_pair(design)
        raise CollinearityError(
            f"design matrix is numerically singular (worst pair: {', '.join(pair)})",
            columns=pair,
        )
    gram_inv = np.linalg.inv(gram)
    w_live = gram_inv @ (xl.T @ y)
    resid = y - xl @ w_live
    s2 = float(resid @ resid) / (n - k)
    se_live = np.sqrt(np.maximum(s2 * np.diag(gram_inv), 0.0))

    w_std = np.zeros(k_full)
    se_std = np.zeros(k_full)
    w_std[live] = w_live
    se_std[live] = se_live

    t = np.zeros_like(w_std)
    nz = se_std > 0
    t[nz] = w_std[nz] / se_std[nz]
    t[~nz & (np.abs(w_std) > 1e-12)] = np.inf
    mask = np.abs(t[1:]) > threshold

    # report on the raw predictor scale (t statistics are scale-free)
    weights = w_std.copy()
    std_errors = se_std.copy()
    weights[1:] = w_std[1:] / design.col_stds
    std_errors[1:] = se_std[1:] / design.col_stds
    weights[0] = w_std[0] - float(np.sum(w_std[1:] * design.col_means / design.col_stds))

    return SelectionReport(
        weights=weights,
        std_errors=std_errors,
        t_stats=t,
        mask=mask,
        names=design.names,
        threshold=float(threshold),
    )


def _worst_pair(design):
    z = design.x[:, 1:]
    keep = np.flatnonzero(z.std(axis=0) > 0)
    corr = np.corrcoef(z[:, keep], rowvar=False)
    np.fill_diagonal(corr, 0.0)
    i, j = np.unravel_index(np.argmax(np.abs(corr)), corr.shape)
    return design.names[1 + keep[i]], design.names[1 + keep[j]]


def apply_mask(mask, expected_width=None):
    """Indices of retained feature columns; the MLP is built on these only."""
    mask = np.asarray(mask, dtype=bool)
    if expected_width is not None and mask.size != expected_width:
        raise ValidationError(f"mask length {mask.size}, expected {expected_width}")
    if not mask.any():
        raise ValidationError("selection mask keeps no inputs")
    return np.flatnonzero(mask)
