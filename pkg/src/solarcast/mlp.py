"""One-hidden-layer perceptron trained by Levenberg-Marquardt.

The network maps a masked feature vector (10 endogenous lags of the
stationary series plus, optionally, two lags of each NWP forecast column)
to the next hour's stationary value:

    yhat = b2 + sum_i w2_i * tanh(sum_j w1_ij * x_j + b1_i)

Training is damped Gauss-Newton on the training split with validation
early stopping (max_fail consecutive accepted epochs without improvement),
ensembled over 5 seeds, with an optional hidden-width search.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import kernels
from .errors import DivergenceError, ValidationError
from .series import HOURS_PER_DAY

N_ENDO_LAGS = 10
EXO_ORDER = ("pressure", "nebulosity", "rain", "temperature")
N_EXO_LAGS = 2
FULL_WIDTH = N_ENDO_LAGS + N_EXO_LAGS * len(EXO_ORDER)  # 18

INPUT_RANGE = (-0.9, 0.9)


@dataclass
class MlpModel:
    """Fitted network parameters plus the input mask and normalization."""

    w1: np.ndarray  # (H, In)
    b1: np.ndarray  # (H,)
    w2: np.ndarray  # (H,)
    b2: float
    mask: np.ndarray  # bool over the raw feature vector; In = mask.sum()
    input_scale: np.ndarray  # per masked input, applied before the network
    input_offset: np.ndarray

    def __post_init__(self):
        self.w1 = np.asarray(self.w1, dtype=float)
        self.b1 = np.asarray(self.b1, dtype=float)
        self.w2 = np.asarray(self.w2, dtype=float)
        self.mask = np.asarray(self.mask, dtype=bool)
        self.input_scale = np.asarray(self.input_scale, dtype=float)
        self.input_offset = np.asarray(self.input_offset, dtype=float)
        h, n_in = self.w1.shape
        if not 1 <= h <= 20:
            raise ValidationError(f"hidden width {h} outside [1, 20]")
        if n_in != int(self.mask.sum()):
            raise ValidationError(
                f"w1 expects {n_in} inputs but mask keeps {int(self.mask.sum())}"
            )
        for arr in (self.w1, self.b1, self.w2, np.atleast_1d(self.b2)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError("non-finite network parameter")

    @property
    def hidden(self):
        return self.w1.shape[0]

    @property
    def n_params(self):
        h, n_in = self.w1.shape
        return h * n_in + 2 * h + 1

    def normalize(self, x):
        return x * self.input_scale + self.input_offset

    def predict(self, x):
        """Forward pass on raw masked features; x is (In,) or (N, In)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x2 = np.atleast_2d(x)
        if x2.shape[1] != self.w1.shape[1]:
            raise ValidationError(
                f"feature width {x2.shape[1]} does not match network input "
                f"width {self.w1.shape[1]}"
            )
        y = kernels.mlp_forward(self.w1, self.b1, self.w2, float(self.b2), self.normalize(x2))
        return float(y[0]) if single else y


def forward(model, x):
    return model.predict(x)


def jacobian(model, x):
    """d error / d parameter for each sample (error = target - prediction)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] == 0:
        raise ValidationError("empty batch")
    _, jac = kernels.mlp_forward_jacobian(
        model.w1, model.b1, model.w2, float(model.b2), model.normalize(x)
    )
    return -jac


def flatten_params(model):
    return np.concatenate(
        [model.w1.ravel(), model.b1, model.w2, np.array([model.b2])]
    )


def unflatten_params(model, theta):
    h, n_in = model.w1.shape
    w1 = theta[: h * n_in].reshape(h, n_in)
    b1 = theta[h * n_in : h * n_in + h]
    w2 = theta[h * n_in + h : h * n_in + 2 * h]
    return replace(model, w1=w1, b1=b1, w2=w2, b2=float(theta[-1]))


def init_model(hidden, mask, rng, input_scale=None, input_offset=None):
    """Seeded uniform init in +-0.5/sqrt(fan-in), keeping tanh unsaturated."""
    mask = np.asarray(mask, dtype=bool)
    n_in = int(mask.sum())
    if n_in == 0:
        raise ValidationError("mask keeps no inputs")
    bound = 0.5 / np.sqrt(n_in)
    if input_scale is None:
        input_scale = np.ones(n_in)
    if input_offset is None:
        input_offset = np.zeros(n_in)
    return MlpModel(
        w1=rng.uniform(-bound, bound, size=(hidden, n_in)),
        b1=rng.uniform(-bound, bound, size=hidden),
        w2=rng.uniform(-0.5, 0.5, size=hidden),
        b2=float(rng.uniform(-0.5, 0.5)),
        mask=mask,
        input_scale=np.asarray(input_scale, dtype=float),
        input_offset=np.asarray(input_offset, dtype=float),
    )


@dataclass(frozen=True)
class TrainerConfig:
    mu0: float = 1e-3
    mu_dec: float = 0.1
    mu_inc: float = 10.0
    mu_max: float = 1e10
    max_fail: int = 5
    max_epochs: int = 1000
    train_fraction: float = 0.8
    val_fraction: float = 0.2
    seed: int = 0
    ensemble_size: int = 5

    def __post_init__(self):
        if self.mu0 <= 0:
            raise ValidationError("mu0 must be positive")
        if abs(self.train_fraction + self.val_fraction - 1.0) > 1e-9:
            raise ValidationError("train and validation fractions must sum to 1")


@dataclass(frozen=True)
class TraceRow:
    epoch: int
    mu: float
    train_sse: float
    val_nrmse: float
    accepted: bool


def _nrmse(target, predicted):
    denom = np.sqrt(np.mean(target**2))
    if denom == 0:
        denom = 1.0
    return float(np.sqrt(np.mean((target - predicted) ** 2)) / denom)


def chronological_split(n, train_fraction):
    cut = int(round(n * train_fraction))
    return slice(0, cut), slice(cut, n)


def propose_step(model, x, y, mu):
    """One damped Gauss-Newton step candidate on the given batch."""
    xn = model.normalize(np.atleast_2d(x))
    yhat, jac = kernels.mlp_forward_jacobian(
        model.w1, model.b1, model.w2, float(model.b2), xn
    )
    e = y - yhat
    a = jac.T @ jac
    a[np.diag_indices_from(a)] += mu
    c, low = cho_factor(a)
    return cho_solve((c, low), jac.T @ e)


def train_lm(init, x, y, cfg):
    """Levenberg-Marquardt with validation early stopping.

    A proposed step is accepted only when it lowers the training SSE;
    mu shrinks by mu_dec on acceptance, grows by mu_inc on rejection.
    Returns (validation-best model, trace).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    tr, va = chronological_split(len(y), cfg.train_fraction)
    xt, yt = x[tr], y[tr]
    xv, yv = x[va], y[va]
    if len(yt) == 0 or len(yv) == 0:
        raise ValidationError("train/validation split left an empty partition")

    model = init
    theta = flatten_params(model)
    xt_n = model.normalize(xt)

    def evaluate(th):
        m = unflatten_params(model, th)
        yhat = kernels.mlp_forward(m.w1, m.b1, m.w2, m.b2, xt_n)
        return m, yhat

    cur, yhat = evaluate(theta)
    e = yt - yhat
    sse = float(e @ e)
    if not np.isfinite(sse):
        raise DivergenceError("non-finite loss at initialization")
    cur_val = _nrmse(yv, cur.predict(xv))
    best_val = cur_val
    best_theta = theta.copy()
    mu = cfg.mu0
    fails = 0
    trace = []
    jac = None

    for epoch in range(1, cfg.max_epochs + 1):
        if jac is None:
            yhat, jac = kernels.mlp_forward_jacobian(
                cur.w1, cur.b1, cur.w2, cur.b2, xt_n
            )
            e = yt - yhat
            gram = jac.T @ jac
            jte = jac.T @ e
        a = gram.copy()
        a[np.diag_indices_from(a)] += mu
        try:
            c, low = cho_factor(a)
            delta = cho_solve((c, low), jte)
        except np.linalg.LinAlgError:
            delta = None
        if delta is not None:
            cand_theta = theta + delta
            cand, cand_yhat = evaluate(cand_theta)
            cand_e = yt - cand_yhat
            cand_sse = float(cand_e @ cand_e)
            if not np.isfinite(cand_sse):
                raise DivergenceError("non-finite training loss", trace=trace)
        else:
            cand_sse = np.inf

        if cand_sse < sse:
            theta, cur, sse = cand_theta, cand, cand_sse
            mu = max(mu * cfg.mu_dec, 1e-20)
            jac = None  # recompute at the new point
            cur_val = _nrmse(yv, cur.predict(xv))
            trace.append(TraceRow(epoch, mu, sse, cur_val, True))
            if cur_val < best_val:
                best_val, best_theta, fails = cur_val, theta.copy(), 0
            else:
                fails += 1
                if fails >= cfg.max_fail:
                    break
        else:
            mu *= cfg.mu_inc
            trace.append(TraceRow(epoch, mu, sse, cur_val, False))
            if mu > cfg.mu_max:
                break

    return unflatten_params(model, best_theta), trace


@dataclass
class EnsembleModel:
    """Five independently initialized networks; prediction is the member mean."""

    members: list
    seeds: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.members) != 5:
            raise ValidationError(f"ensemble needs exactly 5 members, got {len(self.members)}")

    @property
    def mask(self):
        return self.members[0].mask

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        preds = np.stack([np.atleast_1d(m.predict(x)) for m in self.members])
        out = preds.mean(axis=0)
        return float(out[0]) if single else out


def ensemble_train(x, y, mask, cfg, hidden, input_scale=None, input_offset=None):
    """Train cfg.ensemble_size members with consecutive seeds.

    A diverging member is retried with a shifted seed, at most 3 times.
    Returns (EnsembleModel, list of traces).
    """
    members, seeds, traces = [], [], []
    for k in range(cfg.ensemble_size):
        seed = cfg.seed + k
        for attempt in range(4):
            rng = np.random.default_rng(seed)
            init = init_model(hidden, mask, rng, input_scale, input_offset)
            try:
                model, trace = train_lm(init, x, y, cfg)
            except DivergenceError:
                if attempt == 3:
                    raise
                seed += 100_003  # fresh stream, keep determinism
                continue
            members.append(model)
            seeds.append(seed)
            traces.append(trace)
            break
    return EnsembleModel(members=members, seeds=seeds), traces


def search_hidden(x, y, mask, cfg, h_range=(1, 20), input_scale=None, input_offset=None):
    """Try every hidden width in the inclusive range; keep the best validation
    nRMSE of the ensemble mean, ties going to the smaller width."""
    lo, hi = int(h_range[0]), int(h_range[1])
    if not 1 <= lo <= hi <= 20:
        raise ValidationError(f"hidden range {h_range} outside [1, 20]")
    _, va = chronological_split(len(y), cfg.train_fraction)
    best = None
    scores = {}
    for h in range(lo, hi + 1):
        ensemble, traces = ensemble_train(x, y, mask, cfg, h, input_scale, input_offset)
        score = _nrmse(y[va], ensemble.predict(x[va]))
        scores[h] = score
        if best is None or score < best[0]:
            best = (score, h, ensemble, traces)
    return best[1], best[2], {"scores": scores, "traces": best[3]}


def fit_input_affine(x, lo=INPUT_RANGE[0], hi=INPUT_RANGE[1]):
    """Per-column affine onto [lo, hi]; constant columns collapse to 0."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    xmin, xmax = x.min(axis=0), x.max(axis=0)
    span = xmax - xmin
    flat = span <= 0
    span[flat] = 1.0
    scale = (hi - lo) / span
    offset = lo - scale * xmin
    scale[flat] = 0.0
    offset[flat] = 0.0
    return scale, offset


def assemble_features(csi_star, panel, mask, t, use_exogenous=True):
    """Raw feature vector for forecasting hour t+1, masked last.

    Order: 10 endogenous lags CSI*(t)..CSI*(t-9), then for each forecast
    column (pressure, nebulosity, rain, temperature) its value at t+1 and
    at t.  Lags run over the concatenated series, crossing day boundaries.
    """
    n = len(csi_star)
    if t < N_ENDO_LAGS - 1:
        raise ValidationError(f"t={t} lacks {N_ENDO_LAGS} endogenous lags")
    if t + 1 >= n:
        raise ValidationError(f"t={t} has no slot t+1 in a series of length {n}")
    feats = list(csi_star.values[t - N_ENDO_LAGS + 1 : t + 1][::-1])
    if use_exogenous:
        cols = panel.columns()
        for name in EXO_ORDER:
            col = cols[name].values
            feats.extend([col[t + 1], col[t]])
    vec = np.array(feats, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if mask.size != vec.size:
        raise ValidationError(f"mask length {mask.size} does not match {vec.size} features")
    return vec[mask]


def build_dataset(csi_star, panel, mask, use_exogenous=True):
    """Stack every forecastable hour into (X raw-masked, y, target indices)."""
    n = len(csi_star)
    ts = np.arange(N_ENDO_LAGS - 1, n - 1)
    if ts.size == 0:
        raise ValidationError("series too short to build any training row")
    width = FULL_WIDTH if use_exogenous else N_ENDO_LAGS
    raw = np.empty((ts.size, width))
    v = csi_star.values
    for j in range(N_ENDO_LAGS):
        raw[:, j] = v[ts - j]
    if use_exogenous:
        cols = panel.columns()
        for c, name in enumerate(EXO_ORDER):
            col = cols[name].values
            raw[:, N_ENDO_LAGS + 2 * c] = col[ts + 1]
            raw[:, N_ENDO_LAGS + 2 * c + 1] = col[ts]
    mask = np.asarray(mask, dtype=bool)
    return raw[:, mask], v[ts + 1], ts + 1
