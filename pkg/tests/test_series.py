import csv
from datetime import datetime

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from solarcast.errors import InsufficientDataError, ParseError, ValidationError
from solarcast.series import (
    CSV_COLUMNS,
    HOURS_PER_DAY,
    HourlySeries,
    SeriesLayout,
    SiteGeometry,
    clean_missing,
    concat_series,
    load_series,
    normalize_interval,
    split_train_test,
    write_series,
)
from solarcast.synthetic import SynthConfig, gen_radiation

from .conftest import make_panel, make_series


def write_rows(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        w.writerows(rows)


def day_rows(date, hours, ghi=500.0):
    return [
        [f"{date}T{h:02d}:00:00", ghi, 3, 101300.0, 15.0, 0.0] for h in hours
    ]


class TestLayout:
    def test_fixed_geometry(self):
        layout = SeriesLayout()
        assert layout.hours_per_day == 9
        assert layout.slots_per_year == 3285

    def test_rejects_other_shapes(self):
        with pytest.raises(ValidationError):
            SeriesLayout(hours_per_day=24)

    def test_site_bounds(self):
        with pytest.raises(ValidationError):
            SiteGeometry(latitude=91.0, longitude=0.0)
        with pytest.raises(ValidationError):
            SiteGeometry(latitude=0.0, longitude=181.0)


class TestLoad:
    def test_full_day_window(self, tmp_path):
        # 9 in-window rows plus 15 out-of-window rows -> one 9-slot day
        rows = day_rows("2004-06-01", range(24))
        path = tmp_path / "d.csv"
        write_rows(path, rows)
        s, panel = load_series(path)
        assert len(s) == 9
        assert not s.missing.any()

    def test_absent_row_becomes_mask(self, tmp_path):
        rows = day_rows("2004-06-01", [h for h in range(8, 17) if h != 10])
        path = tmp_path / "d.csv"
        write_rows(path, rows)
        s, _ = load_series(path)
        assert len(s) == 9
        assert s.missing[2]
        assert s.missing.sum() == 1

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        values = rng.uniform(0, 800, 27)
        missing = np.zeros(27, dtype=bool)
        missing[[4, 13]] = True
        values[missing] = np.nan
        s = HourlySeries(values, missing, make_series(np.zeros(27)).day_ordinals)
        panel = make_panel(make_series(np.nan_to_num(values)))
        path = tmp_path / "rt.csv"
        write_series(path, s, panel)
        s2, panel2 = load_series(path)
        assert_array_equal(s.missing, s2.missing)
        assert_allclose(s.values[~s.missing], s2.values[~s2.missing])
        for name, col in panel.columns().items():
            assert_allclose(col.values, panel2.columns()[name].values)

    def test_malformed_timestamp_names_row(self, tmp_path):
        rows = day_rows("2004-06-01", range(8, 17))
        rows[3][0] = "not-a-date"
        path = tmp_path / "bad.csv"
        write_rows(path, rows)
        with pytest.raises(ParseError, match="row 5"):
            load_series(path)

    def test_duplicate_timestamp_rejected(self, tmp_path):
        rows = day_rows("2004-06-01", range(8, 17))
        rows.append(rows[0])
        path = tmp_path / "dup.csv"
        write_rows(path, rows)
        with pytest.raises(ParseError, match="duplicate"):
            load_series(path)

    def test_missing_cells_masked(self, tmp_path):
        rows = day_rows("2004-06-01", range(8, 17))
        rows[2][1] = ""
        path = tmp_path / "gap.csv"
        write_rows(path, rows)
        s, _ = load_series(path)
        assert s.missing[2] and s.missing.sum() == 1

    def test_utc_reference_shifts_slots(self, tmp_path):
        # 60 degrees west: solar time lags UTC by ~4 hours, so a 12:00 UTC
        # row lands near 08:00 solar
        rows = day_rows("2004-06-01", [12])
        path = tmp_path / "utc.csv"
        write_rows(path, rows)
        geo = SiteGeometry(latitude=0.0, longitude=-60.0)
        s, _ = load_series(path, geo=geo, time_reference="utc")
        assert len(s) == 9
        assert not s.missing[0]


class TestCleanMissing:
    def test_fills_with_hourly_mean(self):
        values = np.full(27, 100.0)
        values[np.arange(2, 27, 9)] = 500.0
        missing = np.zeros(27, dtype=bool)
        missing[2] = True
        values[2] = np.nan
        s = make_series(np.zeros(27)).replace_values(values, missing)
        out = clean_missing(s)
        assert out.values[2] == 500.0
        assert not out.missing.any()

    def test_identity_when_complete(self):
        s = make_series(np.arange(18.0))
        assert clean_missing(s) is s

    def test_matches_groupby_oracle(self):
        rng = np.random.default_rng(7)
        n = 90 * 9
        values = rng.uniform(10, 800, n)
        missing = rng.random(n) < 0.03
        masked = values.copy()
        masked[missing] = np.nan
        s = make_series(np.zeros(n)).replace_values(masked, missing)
        out = clean_missing(s)
        for i in np.flatnonzero(missing):
            k = i % 9
            pool = [values[j] for j in range(k, n, 9) if not missing[j]]
            assert out.values[i] == pytest.approx(np.mean(pool), rel=1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(8)
        values = rng.uniform(0, 100, 45)
        missing = np.zeros(45, dtype=bool)
        missing[7] = True
        s = make_series(np.zeros(45)).replace_values(values, missing)
        once = clean_missing(s)
        twice = clean_missing(once)
        assert_array_equal(once.values, twice.values)

    def test_refuses_heavy_gaps(self):
        values = np.zeros(90)
        missing = np.zeros(90, dtype=bool)
        missing[:20] = True
        s = make_series(np.zeros(90)).replace_values(values, missing)
        with pytest.raises(ValidationError, match="10%"):
            clean_missing(s)

    def test_unrecoverable_hour(self):
        values = np.zeros(18)
        missing = np.zeros(18, dtype=bool)
        missing[[2, 11]] = True  # every 10:00 slot masked, but < 10% overall
        s = make_series(np.zeros(18)).replace_values(values, missing)
        with pytest.raises((InsufficientDataError, ValidationError)):
            clean_missing(s)


class TestNormalize:
    def test_endpoints(self):
        s = make_series(np.linspace(0, 100, 18))
        out, m = normalize_interval(s, -0.9, 0.9)
        assert out.values.min() == pytest.approx(-0.9)
        assert out.values.max() == pytest.approx(0.9)

    def test_identity_case(self):
        s = make_series(np.linspace(-0.9, 0.9, 18))
        out, _ = normalize_interval(s, -0.9, 0.9)
        assert_allclose(out.values, s.values, atol=1e-15)

    def test_inverse_round_trip(self):
        rng = np.random.default_rng(5)
        s = make_series(rng.uniform(-50, 900, 36))
        out, m = normalize_interval(s, -0.9, 0.9)
        assert_allclose(m.invert(out.values), s.values, rtol=1e-12)

    def test_constant_rejected(self):
        with pytest.raises(ValidationError):
            normalize_interval(make_series(np.full(9, 3.0)), -0.9, 0.9)

    @settings(max_examples=25, deadline=None)
    @given(
        st.lists(
            st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
            min_size=9,
            max_size=9,
        )
    )
    def test_round_trip_property(self, values):
        values = np.asarray(values)
        if values.max() - values.min() < 1e-6:
            return
        s = make_series(values)
        out, m = normalize_interval(s, -0.9, 0.9)
        assert_allclose(m.invert(out.values), values, rtol=1e-12, atol=1e-9)


class TestSplit:
    def test_six_year_split(self):
        s, panel = gen_radiation(SynthConfig(years=6, seed=0))
        (tr, tr_p), (te, te_p) = split_train_test(s, panel, 4)
        assert len(tr) == 4 * 3285
        assert len(te) == 2 * 3285
        assert len(tr_p.nebulosity) == len(tr)

    def test_degenerate_split_rejected(self):
        s, panel = gen_radiation(SynthConfig(years=2, seed=0))
        with pytest.raises(ValidationError):
            split_train_test(s, panel, 0)
        with pytest.raises(ValidationError):
            split_train_test(s, panel, 2)

    def test_split_concat_identity(self):
        s, panel = gen_radiation(SynthConfig(years=3, seed=1))
        (tr, _), (te, _) = split_train_test(s, panel, 2)
        back = concat_series(tr, te)
        assert_array_equal(back.values, s.values)
        assert_array_equal(back.day_ordinals, s.day_ordinals)

    def test_no_leakage_year_boundary(self):
        s, panel = gen_radiation(SynthConfig(years=3, seed=1))
        (tr, _), (te, _) = split_train_test(s, panel, 1)
        assert set(tr.year) == {2001}
        assert set(te.year) == {2002, 2003}


class TestCalendar:
    def test_hour_of_year_slots(self):
        s = make_series(np.zeros(3285))
        hoy = s.hour_of_year_slots()
        assert hoy[0] == 0
        assert hoy[-1] == 3284
        assert len(set(hoy.tolist())) == 3285

    def test_timestamps_are_solar_hours(self):
        s = make_series(np.zeros(18))
        ts = s.timestamps()
        assert ts[0] == datetime(2001, 1, 1, 8)
        assert ts[8] == datetime(2001, 1, 1, 16)
        assert ts[9] == datetime(2001, 1, 2, 8)
