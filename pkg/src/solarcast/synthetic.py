"""Synthetic stand-ins for the proprietary station data.

Three generators: a two-cosine radiation process with a Markov cloud
field (the data-model the stationarization pipeline is designed for), AR
processes used as estimation oracles, and a regime-switching fixture
(linear sunny hours, nonlinear cloudy hours) for exercising the hybrid
switch.  All draws flow from a single seed, so every fixture is
reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from . import clearsky
from .ar import is_stationary
from .errors import ValidationError
from .series import HOURS_PER_DAY, ExogenousPanel, HourlySeries, SiteGeometry

DEFAULT_SITE = SiteGeometry(latitude=41.9, longitude=8.8, altitude=4.0)


def make_calendar(years, start_year=2001):
    """Day ordinals for whole 365-day years; Feb 29 is skipped so every
    synthetic year holds exactly 3285 slots."""
    if years < 1:
        raise ValidationError("need at least one year")
    ordinals = []
    d = date(start_year, 1, 1)
    while len(ordinals) < years * 365:
        if not (d.month == 2 and d.day == 29):
            ordinals.append(d.toordinal())
        d += timedelta(days=1)
    return np.array(ordinals, dtype=np.int64)


@dataclass(frozen=True)
class SynthConfig:
    """Two-cosine radiation process: X = (a cos(w1 t) + b cos(w2 t)) * R."""

    years: int = 6
    seed: int = 0
    start_year: int = 2001
    amp_yearly: float = 200.0  # a(t) baseline, Wh/m^2
    amp_daily: float = 600.0  # b(t) baseline, Wh/m^2
    p_clear_stay: float = 0.95
    p_cloud_stay: float = 0.90
    atten_lo: float = 0.05  # cloudy attenuation range (0, 1]
    atten_hi: float = 0.95
    forecast_noise: float = 0.3  # octas of nebulosity forecast error

    def __post_init__(self):
        if not (0.0 < self.atten_lo <= self.atten_hi <= 1.0):
            raise ValidationError("attenuation range must sit inside (0, 1]")
        for p in (self.p_clear_stay, self.p_cloud_stay):
            if not 0.0 <= p <= 1.0:
                raise ValidationError("transition probabilities must be in [0, 1]")


def _cloud_occurrence(n, cfg, rng):
    """Two-state Markov chain; returns R in (0, 1] (1 = clear)."""
    cloudy = np.empty(n, dtype=bool)
    cloudy[0] = rng.random() < 0.3
    stay_clear = rng.random(n)
    stay_cloud = rng.random(n)
    for t in range(1, n):
        if cloudy[t - 1]:
            cloudy[t] = stay_cloud[t] < cfg.p_cloud_stay
        else:
            cloudy[t] = stay_clear[t] > cfg.p_clear_stay
    r = np.ones(n)
    k = int(cloudy.sum())
    r[cloudy] = cfg.atten_lo + (cfg.atten_hi - cfg.atten_lo) * rng.beta(2.0, 2.0, size=k)
    return r, cloudy


def _weather_panel(series, r, cfg_noise, rng, neb_reported=None, seasonal_temp=True, rain_threshold=6.0):
    """Forecast columns consistent with the cloud field.

    With zero forecast noise the nebulosity column is exactly 8 * (1 - R);
    otherwise it is quantized and perturbed like an imperfect NWP output.
    `neb_reported` overrides the pre-noise nebulosity signal (used to model
    hours where the NWP's cloud field is simply wrong).
    """
    n = len(series)
    doy = np.repeat(series.day_of_year, HOURS_PER_DAY).astype(float)
    neb_true = 8.0 * (1.0 - r)
    signal = neb_true if neb_reported is None else np.asarray(neb_reported, float)
    if cfg_noise > 0:
        neb = np.clip(np.round(signal) + rng.normal(0.0, cfg_noise, n), 0.0, 8.0)
    else:
        neb = signal
    season = np.cos(2.0 * np.pi * (doy - 200.0) / 365.0) if seasonal_temp else 0.0
    temp = 15.0 + 8.0 * season - 4.0 * (1.0 - r) + rng.normal(0.0, 0.6, n)
    walk = np.zeros(n)
    steps = rng.normal(0.0, 40.0, n)
    for t in range(1, n):
        walk[t] = 0.97 * walk[t - 1] + steps[t]
    press = 101300.0 - 900.0 * (1.0 - r) + walk
    rain = np.where(signal > rain_threshold, rng.gamma(1.0, 0.8, n), 0.0)
    mk = series.replace_values
    return ExogenousPanel(
        nebulosity=mk(neb),
        pressure=mk(press),
        temperature=mk(temp),
        rain=mk(rain),
    )


def gen_radiation(cfg: SynthConfig):
    """Sample the clamped-nonnegative two-cosine process on the 9-hour grid."""
    rng = np.random.default_rng(cfg.seed)
    ordinals = make_calendar(cfg.years, cfg.start_year)
    n_days = ordinals.size
    n = n_days * HOURS_PER_DAY

    day_idx = np.repeat(np.arange(n_days), HOURS_PER_DAY)
    hour = np.tile(np.arange(HOURS_PER_DAY) + 8.0, n_days)
    t_abs = day_idx * 24.0 + hour
    w1 = 2.0 * np.pi / (365.0 * 24.0)
    w2 = 2.0 * np.pi / 24.0
    # slow multi-year drift keeps the envelopes "functions", not constants
    a = cfg.amp_yearly * (1.0 + 0.05 * np.sin(2.0 * np.pi * t_abs / (3.0 * 365.0 * 24.0)))
    b = cfg.amp_daily * (1.0 + 0.03 * np.sin(2.0 * np.pi * t_abs / (5.0 * 365.0 * 24.0)))
    envelope = a * np.cos(w1 * (t_abs - 172.0 * 24.0)) + b * np.cos(w2 * (hour - 12.0))
    envelope = np.maximum(envelope, 0.0)

    r, _ = _cloud_occurrence(n, cfg, rng)
    series = HourlySeries(envelope * r, day_ordinals=ordinals)
    panel = _weather_panel(series, r, cfg.forecast_noise, rng)
    return series, panel


def gen_ar(phi, sigma, n, seed, burn_in=1000):
    """Gaussian AR(p) sample path used as a Yule-Walker oracle."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if not is_stationary(phi):
        raise ValidationError(f"unstable AR coefficients {phi.tolist()}")
    rng = np.random.default_rng(seed)
    p = phi.size
    eps = rng.normal(0.0, sigma, n + burn_in)
    x = np.zeros(n + burn_in)
    for t in range(p, n + burn_in):
        x[t] = float(np.dot(phi, x[t - p : t][::-1])) + eps[t]
    return x[burn_in:]


REGIME_SUNNY, REGIME_CLOUDY = 0, 1


@dataclass(frozen=True)
class RegimeConfig:
    """Regime-switching fixture built around storm-front passages.

    Calm hours follow a glassy AR(1) around the clear-sky level.  Fronts
    arrive every few days, knock the level down by a large step, and keep
    a nonlinear cloud texture while they last.  The NWP nebulosity column
    announces arrivals a couple of hours ahead -- and also produces runs
    of false alarms (densest in its bad season), during which nothing in
    a feature row distinguishes a real warning from a bogus one.  A model
    leaning on the forecast wins the real fronts and pays through the
    false-alarm runs; a lag-only linear model does the opposite.
    """

    years: int = 6
    seed: int = 0
    start_year: int = 2001
    calm_phi: float = 0.95
    calm_sigma: float = 0.008
    storm_phi: float = 0.35
    storm_sigma: float = 0.025
    nonlin_amp: float = 0.06
    front_gap_hours: float = 130.0  # mean calm hours between arrivals
    front_dur: tuple = (12, 30)
    front_depth: tuple = (0.65, 0.90)
    alarm_lead_min: int = 1  # a front stalls offshore at least this long
    alarm_lead_max: int = 2
    false_alarm_gap: float = 400.0  # mean hours between false-alarm runs
    false_alarm_len: tuple = (2, 5)
    bust_months: tuple = (4, 5, 6)  # false alarms come 4x denser here
    bust_rate_mult: float = 3.0
    forecast_noise: float = 0.3  # octas of nebulosity forecast error
    # the NWP switches to a new model cycle partway through the record;
    # the new cycle over-diagnoses boundary-layer moisture, so every deck
    # thinner than the floor is reported at the floor (deep decks intact)
    nwp_shift_year: int = 4  # 0-based year index when the cycle changes
    nwp_shift_floor: float = 0.35
    nwp_shift_jitter: float = 0.08
    tau: float = 0.25  # clear-sky curve shaping the physical units
    b: float = 1.1
    site: SiteGeometry = DEFAULT_SITE


def gen_regime_switch(cfg: RegimeConfig):
    """Returns (radiation series, forecast panel, stormy labels per slot)."""
    rng = np.random.default_rng(cfg.seed)
    ordinals = make_calendar(cfg.years, cfg.start_year)
    n = ordinals.size * HOURS_PER_DAY

    shape = HourlySeries(np.zeros(n), day_ordinals=ordinals)
    month = shape.month_per_slot()

    stormy = np.zeros(n, dtype=bool)
    depth = np.zeros(n)
    neb_signal = np.zeros(n)

    # schedule the fronts and their advance warnings; the warning sits at
    # full strength for a random stall time, so warning rows and ongoing
    # false alarms are indistinguishable hour by hour
    t = int(rng.exponential(cfg.front_gap_hours)) + cfg.alarm_lead_max
    while t < n:
        dur = int(rng.integers(cfg.front_dur[0], cfg.front_dur[1] + 1))
        dep = rng.uniform(*cfg.front_depth)
        hi = min(t + dur, n)
        stormy[t:hi] = True
        depth[t:hi] = dep
        neb_signal[t:hi] = 8.0 * dep
        lead = int(rng.integers(cfg.alarm_lead_min, cfg.alarm_lead_max + 1))
        for k in range(1, lead + 1):
            if t - k >= 0 and not stormy[t - k]:
                neb_signal[t - k] = 8.0 * dep
        t = hi + max(1, int(rng.exponential(cfg.front_gap_hours)))

    # false-alarm runs: the NWP insists a front is coming while the sky
    # stays calm; denser during its bad season
    t = int(rng.exponential(cfg.false_alarm_gap))
    while t < n:
        run = int(rng.integers(cfg.false_alarm_len[0], cfg.false_alarm_len[1] + 1))
        bogus = 8.0 * rng.uniform(cfg.front_depth[0], cfg.front_depth[1])
        for k in range(t, min(t + run, n)):
            if not stormy[k] and neb_signal[k] == 0.0:
                neb_signal[k] = bogus
        gap = cfg.false_alarm_gap
        if month[min(t + run, n - 1)] in cfg.bust_months:
            gap /= cfg.bust_rate_mult
        t += run + max(1, int(rng.exponential(gap)))

    # small persistent wobble of the storm deck (valid NWP detail)
    wob = np.zeros(n)
    u = rng.uniform(-1.0, 1.0, n)
    for t in range(1, n):
        wob[t] = 0.95 * wob[t - 1] + 0.05 * u[t]
    level = 1.0 - depth * (1.0 + 0.45 * wob)
    neb_signal = np.where(stormy, neb_signal * (1.0 + 0.45 * wob), neb_signal)

    eps = rng.normal(0.0, 1.0, n)
    z = np.empty(n)
    z[0] = 1.0
    for t in range(1, n):
        if stormy[t]:
            z[t] = (
                level[t]
                + cfg.storm_phi * (z[t - 1] - level[t])
                + cfg.nonlin_amp * np.sin(2.5 * np.pi * z[t - 1])
                + cfg.storm_sigma * eps[t]
            )
        else:
            z[t] = 1.0 + cfg.calm_phi * (z[t - 1] - 1.0) + cfg.calm_sigma * eps[t]
        z[t] = max(z[t], 0.02)

    kernel = clearsky.clear_sky_values(
        cfg.site, clearsky.SolisParams(tau=cfg.tau, b=cfg.b), shape
    )
    series = shape.replace_values(z * np.maximum(kernel, clearsky.GHI_FLOOR))

    # a new NWP cycle mid-record recalibrates the reported cloud deck;
    # models fitted on earlier years meet a shifted mapping afterwards
    if cfg.nwp_shift_year is not None and cfg.nwp_shift_year < cfg.years:
        shifted = slice(cfg.nwp_shift_year * 365 * HOURS_PER_DAY, n)
        wobble_floor = cfg.nwp_shift_floor + cfg.nwp_shift_jitter * rng.standard_normal(
            n - shifted.start
        )
        neb_signal[shifted] = np.maximum(
            neb_signal[shifted], 8.0 * np.clip(wobble_floor, 0.05, 0.95)
        )

    # every forecast column follows the NWP's own (possibly wrong) story,
    # so a false alarm is self-consistent across nebulosity, pressure,
    # temperature and rain
    r_belief = 1.0 - np.clip(neb_signal, 0.0, 8.0) / 8.0
    panel = _weather_panel(
        series,
        r_belief,
        cfg.forecast_noise,
        rng,
        seasonal_temp=False,
        rain_threshold=3.5,
    )
    return series, panel, stormy
