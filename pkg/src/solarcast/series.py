"""Hourly series data model, CSV ingestion, cleaning, and windowing.

Everything downstream operates on a 9-slot daylight grid: only the hours
between 08:00 and 16:00 true solar time are kept, giving 9 values per day
and 365 * 9 = 3285 values per (non-leap) year.  Timestamps are reduced at
load time to (day ordinal, slot 0..8); all lag arithmetic afterwards runs
on the concatenated series, so slot 0 of a day follows slot 8 of the
previous day.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta

import numpy as np

from .errors import InsufficientDataError, ParseError, ValidationError

HOURS_PER_DAY = 9
DAY_START_HOUR = 8
SLOTS_PER_YEAR = 365 * HOURS_PER_DAY

CSV_COLUMNS = ("timestamp", "ghi", "nebulosity", "pressure", "temperature", "rain")


@dataclass(frozen=True)
class SeriesLayout:
    hours_per_day: int = HOURS_PER_DAY
    day_start_hour: int = DAY_START_HOUR
    slots_per_year: int = SLOTS_PER_YEAR

    def __post_init__(self):
        if self.hours_per_day != HOURS_PER_DAY or self.slots_per_year != SLOTS_PER_YEAR:
            raise ValidationError(
                "layout is fixed at 9 hours per day and 3285 slots per year"
            )


@dataclass(frozen=True)
class SiteGeometry:
    """Station coordinates; latitude/longitude in degrees, altitude in metres."""

    latitude: float
    longitude: float
    altitude: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValidationError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValidationError(f"longitude {self.longitude} outside [-180, 180]")


def equation_of_time(day_of_year):
    """Equation of time in minutes (Spencer Fourier series)."""
    b = 2.0 * np.pi * (np.asarray(day_of_year, dtype=float) - 1.0) / 365.0
    return 229.18 * (
        0.000075
        + 0.001868 * np.cos(b)
        - 0.032077 * np.sin(b)
        - 0.014615 * np.cos(2 * b)
        - 0.04089 * np.sin(2 * b)
    )


def solar_offset_minutes(longitude, day_of_year):
    """Minutes to add to UTC to obtain true solar time at `longitude`."""
    return 4.0 * longitude + equation_of_time(day_of_year)


class HourlySeries:
    """One value per daylight slot, with a per-slot missing mask.

    values:       float array, length 9 * n_days
    missing:      bool array, same length; values are finite wherever False
    day_ordinals: proleptic-Gregorian ordinal per day (strictly increasing)
    """

    def __init__(self, values, missing=None, day_ordinals=None, layout=None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1:
            raise ValidationError("values must be one-dimensional")
        if values.size % HOURS_PER_DAY != 0:
            raise ValidationError(
                f"series length {values.size} is not a multiple of {HOURS_PER_DAY}"
            )
        n_days = values.size // HOURS_PER_DAY
        if missing is None:
            missing = np.zeros(values.size, dtype=bool)
        else:
            missing = np.asarray(missing, dtype=bool)
            if missing.shape != values.shape:
                raise ValidationError("missing mask shape does not match values")
        if day_ordinals is None:
            day_ordinals = date(2001, 1, 1).toordinal() + np.arange(n_days)
        day_ordinals = np.asarray(day_ordinals, dtype=np.int64)
        if day_ordinals.size != n_days:
            raise ValidationError(
                f"{day_ordinals.size} day ordinals for {n_days} days of values"
            )
        if n_days > 1 and np.any(np.diff(day_ordinals) <= 0):
            raise ValidationError("day ordinals must be strictly increasing")
        if not np.all(np.isfinite(values[~missing])):
            raise ValidationError("non-finite value outside the missing mask")

        self.layout = layout or SeriesLayout()
        self.values = values
        self.missing = missing
        self.day_ordinals = day_ordinals
        dates = [date.fromordinal(int(o)) for o in day_ordinals]
        self.day_of_year = np.array([d.timetuple().tm_yday for d in dates], dtype=np.int64)
        self.month = np.array([d.month for d in dates], dtype=np.int64)
        self.year = np.array([d.year for d in dates], dtype=np.int64)
        # 365-slot seasonal day index: leap years fold Feb 29 onto Feb 28 so
        # the same calendar date lands on the same table band every year
        leap = (self.year % 4 == 0) & ((self.year % 100 != 0) | (self.year % 400 == 0))
        self.season_day = self.day_of_year - (leap & (self.day_of_year >= 60))
        for arr in (self.values, self.missing, self.day_ordinals):
            arr.flags.writeable = False

    def __len__(self):
        return self.values.size

    @property
    def n_days(self):
        return self.day_ordinals.size

    @property
    def n_years(self):
        return len(set(self.year.tolist()))

    def replace_values(self, values, missing=None):
        """New series with the same calendar but different values."""
        if missing is None:
            missing = self.missing
        return HourlySeries(values, missing, self.day_ordinals, self.layout)

    def slice_days(self, start_day, stop_day):
        lo, hi = start_day * HOURS_PER_DAY, stop_day * HOURS_PER_DAY
        return HourlySeries(
            self.values[lo:hi],
            self.missing[lo:hi],
            self.day_ordinals[start_day:stop_day],
            self.layout,
        )

    def hour_of_year_slots(self):
        """Hour-of-year index in [0, 3285) per slot; Feb 29 reuses the Feb 28 band."""
        return np.repeat((self.season_day - 1) * HOURS_PER_DAY, HOURS_PER_DAY) + np.tile(
            np.arange(HOURS_PER_DAY), self.n_days
        )

    def month_per_slot(self):
        return np.repeat(self.month, HOURS_PER_DAY)

    def timestamps(self):
        """Solar-time timestamps, one per slot."""
        out = []
        for o in self.day_ordinals:
            d = date.fromordinal(int(o))
            for k in range(HOURS_PER_DAY):
                out.append(datetime(d.year, d.month, d.day, DAY_START_HOUR + k))
        return out


@dataclass(frozen=True)
class ExogenousPanel:
    """NWP forecast columns aligned slot-for-slot with the radiation series.

    Each column is the forecast valid at its own timestamp (the model's
    06:00 analysis with lead times covering 08:00-16:00).
    """

    nebulosity: HourlySeries
    pressure: HourlySeries
    temperature: HourlySeries
    rain: HourlySeries

    def __post_init__(self):
        ref = self.nebulosity
        for name in ("pressure", "temperature", "rain"):
            col = getattr(self, name)
            if len(col) != len(ref) or not np.array_equal(
                col.day_ordinals, ref.day_ordinals
            ):
                raise ValidationError(f"panel column {name} is not aligned")
        neb = self.nebulosity
        ok = ~neb.missing
        if np.any((neb.values[ok] < 0) | (neb.values[ok] > 8)):
            raise ValidationError("nebulosity outside [0, 8] octas")
        rain = self.rain
        if np.any(rain.values[~rain.missing] < 0):
            raise ValidationError("negative rain precipitation")

    def columns(self):
        return {
            "nebulosity": self.nebulosity,
            "pressure": self.pressure,
            "temperature": self.temperature,
            "rain": self.rain,
        }

    def replace(self, **series):
        cols = self.columns()
        cols.update(series)
        return ExogenousPanel(**cols)

    def slice_days(self, start_day, stop_day):
        return ExogenousPanel(
            **{k: v.slice_days(start_day, stop_day) for k, v in self.columns().items()}
        )


def _parse_timestamp(text, row):
    try:
        return datetime.fromisoformat(text.strip())
    except ValueError:
        raise ParseError(f"malformed timestamp {text!r}", row=row) from None


def _parse_cell(text, column, row):
    text = text.strip() if text is not None else ""
    if text == "":
        return math.nan, True
    try:
        return float(text), False
    except ValueError:
        raise ParseError(f"malformed {column} value {text!r}", row=row) from None


def load_series(path, schema=None, geo=None, time_reference="solar"):
    """Read the canonical CSV into an (HourlySeries, ExogenousPanel) pair.

    schema maps canonical column names to the file's header names (defaults
    to the canonical names themselves).  With time_reference="utc" the
    timestamps are shifted to true solar time using the site longitude and
    the equation of time; "solar" takes them as already solar.

    Rows outside the 08:00-16:00 window are dropped; absent in-window rows
    become masked slots.  Days with no in-window rows at all are skipped.
    """
    schema = dict(schema or {})
    colmap = {name: schema.get(name, name) for name in CSV_COLUMNS}
    if time_reference not in ("solar", "utc"):
        raise ValidationError(f"unknown time_reference {time_reference!r}")
    if time_reference == "utc" and geo is None:
        raise ValidationError("time_reference='utc' requires site geometry")

    cells = {}  # (ordinal, slot) -> row values
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("empty file", row=1)
        for name, header in colmap.items():
            if header not in reader.fieldnames:
                raise ParseError(f"missing column {header!r}", row=1)
        for i, row in enumerate(reader, start=2):
            ts = _parse_timestamp(row[colmap["timestamp"]], i)
            if time_reference == "utc":
                doy = ts.timetuple().tm_yday
                ts = ts + timedelta(
                    minutes=float(solar_offset_minutes(geo.longitude, doy))
                )
            hour = round(ts.hour + ts.minute / 60.0 + ts.second / 3600.0)
            day = ts.date()
            if hour == 24:
                day, hour = day + timedelta(days=1), 0
            if not DAY_START_HOUR <= hour <= DAY_START_HOUR + HOURS_PER_DAY - 1:
                continue
            key = (day.toordinal(), hour - DAY_START_HOUR)
            if key in cells:
                raise ParseError(f"duplicate timestamp {row[colmap['timestamp']]!r}", row=i)
            cells[key] = tuple(
                _parse_cell(row[colmap[c]], c, i)
                for c in ("ghi", "nebulosity", "pressure", "temperature", "rain")
            )

    if not cells:
        raise InsufficientDataError(f"no in-window rows found in {path}")

    ordinals = sorted({k[0] for k in cells})
    index = {o: d for d, o in enumerate(ordinals)}
    n = len(ordinals) * HOURS_PER_DAY
    data = np.full((5, n), np.nan)
    mask = np.ones((5, n), dtype=bool)
    for (o, slot), row_vals in cells.items():
        pos = index[o] * HOURS_PER_DAY + slot
        for c, (value, missing) in enumerate(row_vals):
            data[c, pos] = value
            mask[c, pos] = missing

    day_ordinals = np.array(ordinals, dtype=np.int64)
    ghi = HourlySeries(data[0], mask[0], day_ordinals)
    panel = ExogenousPanel(
        nebulosity=HourlySeries(data[1], mask[1], day_ordinals),
        pressure=HourlySeries(data[2], mask[2], day_ordinals),
        temperature=HourlySeries(data[3], mask[3], day_ordinals),
        rain=HourlySeries(data[4], mask[4], day_ordinals),
    )
    return ghi, panel


def write_series(path, ghi, panel=None, extra=None):
    """Write the canonical CSV (plus optional derived columns) in solar time."""
    extra = extra or {}
    cols = panel.columns() if panel is not None else {}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(CSV_COLUMNS) + list(extra))
        stamps = ghi.timestamps()
        for i, ts in enumerate(stamps):
            row = [ts.isoformat()]
            for s in (ghi, *cols.values()):
                row.append("" if s.missing[i] else repr(float(s.values[i])))
            for values in extra.values():
                row.append(repr(float(values[i])))
            writer.writerow(row)


def clean_missing(s):
    """Fill masked slots with the mean of observed values at the same hour-of-day.

    Refuses when 10% or more of the slots are masked (the fill rule was
    only ever validated on sparser gaps).
    """
    if not np.any(s.missing):
        return s
    frac = float(np.mean(s.missing))
    if frac >= 0.10:
        raise ValidationError(
            f"{frac:.1%} of slots missing; hourly-mean fill requires < 10%"
        )
    values = s.values.copy()
    grid = values.reshape(-1, HOURS_PER_DAY)
    mask = s.missing.reshape(-1, HOURS_PER_DAY)
    for k in range(HOURS_PER_DAY):
        col, bad = grid[:, k], mask[:, k]
        if np.all(bad):
            raise InsufficientDataError(
                f"hour-of-day slot {k} has no observed values; gap is unrecoverable"
            )
        col[bad] = col[~bad].mean()
    return s.replace_values(values, missing=np.zeros(len(s), dtype=bool))


def clean_panel(panel):
    return ExogenousPanel(**{k: clean_missing(v) for k, v in panel.columns().items()})


@dataclass(frozen=True)
class AffineMap:
    """y = scale * x + offset, with exact inverse."""

    scale: float
    offset: float

    def apply(self, x):
        return self.scale * np.asarray(x, dtype=float) + self.offset

    def invert(self, y):
        return (np.asarray(y, dtype=float) - self.offset) / self.scale


def fit_affine(values, lo, hi):
    vmin, vmax = float(np.min(values)), float(np.max(values))
    if vmax <= vmin:
        raise ValidationError("constant series has a degenerate range")
    scale = (hi - lo) / (vmax - vmin)
    return AffineMap(scale=scale, offset=lo - scale * vmin)


def normalize_interval(s, lo, hi):
    """Affinely map the series onto [lo, hi]; returns the map for exact inversion."""
    if hi <= lo:
        raise ValidationError(f"interval [{lo}, {hi}] is empty")
    mapping = fit_affine(s.values, lo, hi)
    return s.replace_values(mapping.apply(s.values)), mapping


def split_train_test(s, panel, train_years):
    """Chronological split on a calendar-year boundary; no leakage.

    Returns ((train series, train panel), (test series, test panel)).
    """
    years = sorted(set(s.year.tolist()))
    if not 0 < train_years < len(years):
        raise ValidationError(
            f"train_years={train_years} must be in (0, {len(years)}) for this series"
        )
    boundary_year = years[train_years]
    split_day = int(np.argmax(s.year >= boundary_year))
    train = (s.slice_days(0, split_day), panel.slice_days(0, split_day) if panel else None)
    test = (
        s.slice_days(split_day, s.n_days),
        panel.slice_days(split_day, s.n_days) if panel else None,
    )
    return train, test


def concat_series(a, b):
    """Concatenate two aligned series chronologically (inverse of a split)."""
    return HourlySeries(
        np.concatenate([a.values, b.values]),
        np.concatenate([a.missing, b.missing]),
        np.concatenate([a.day_ordinals, b.day_ordinals]),
        a.layout,
    )
