import numpy as np
import pytest
from numpy.testing import assert_allclose

from solarcast.clearsky import (
    SOLAR_CONSTANT,
    SolarPosition,
    SolisParams,
    clear_sky_values,
    detect_clear_days,
    fit_solis,
    solar_position,
    solis_ghi,
)
from solarcast.errors import FitError, ValidationError
from solarcast.series import SiteGeometry

from .conftest import SITE, make_series


def synthetic_clear_series(geo, params, days=40):
    """Radiation that follows the clear-sky model exactly (spring calendar)."""
    from datetime import date

    from solarcast.series import HourlySeries

    ordinals = date(2001, 4, 1).toordinal() + np.arange(days)
    s = HourlySeries(np.zeros(days * 9), day_ordinals=ordinals)
    return s.replace_values(clear_sky_values(geo, params, s))


class TestSolarPosition:
    def test_equator_equinox_noon_near_zenith(self):
        geo = SiteGeometry(latitude=0.0, longitude=0.0)
        pos = solar_position(geo, day_of_year=80, slot=4)
        assert abs(pos.elevation - np.pi / 2) < 0.02

    def test_noon_symmetry(self):
        for k in range(4):
            a = solar_position(SITE, 172, k).elevation
            b = solar_position(SITE, 172, 8 - k).elevation
            assert abs(a - b) < 0.01

    def test_against_published_noon_elevations(self):
        # solar noon elevation = 90 - |lat - declination|; reference
        # declinations: +23.44 deg (Jun 21), -23.44 (Dec 21), ~0 (Mar 21)
        cases = [(172, 23.44), (355, -23.44), (80, 0.0)]
        for doy, dec in cases:
            expected = np.deg2rad(90.0 - abs(41.9 - dec))
            got = solar_position(SiteGeometry(41.9, 0.0), doy, 4).elevation
            assert abs(got - expected) < 0.01

    def test_extraterrestrial_range(self):
        for doy in (1, 100, 172, 355):
            pos = solar_position(SITE, doy, 4)
            assert 1320 <= pos.extraterrestrial <= 1420

    def test_input_bounds(self):
        with pytest.raises(ValidationError):
            solar_position(SITE, 0, 4)
        with pytest.raises(ValidationError):
            solar_position(SITE, 100, 9)


class TestSolisGhi:
    def test_zero_depth_at_zenith(self):
        pos = SolarPosition(elevation=np.pi / 2, extraterrestrial=1367.0)
        assert solis_ghi(pos, SolisParams(tau=0.0, b=1.0)) == pytest.approx(1367.0)

    def test_horizon_is_zero(self):
        pos = SolarPosition(elevation=0.0, extraterrestrial=1367.0)
        assert solis_ghi(pos, SolisParams(tau=0.2, b=1.0)) == 0.0
        below = SolarPosition(elevation=-0.1, extraterrestrial=1367.0)
        assert solis_ghi(below, SolisParams(tau=0.2, b=1.0)) == 0.0

    def test_hand_evaluated_point(self):
        # tau=0.2, b=1, h=pi/6: H0 * exp(-0.4) * 0.5
        pos = SolarPosition(elevation=np.pi / 6, extraterrestrial=1367.0)
        expected = 1367.0 * np.exp(-0.4) * 0.5
        assert solis_ghi(pos, SolisParams(tau=0.2, b=1.0)) == pytest.approx(
            expected, rel=1e-12
        )
        assert expected == pytest.approx(458.2, abs=0.1)

    def test_monotone_in_elevation(self):
        params = SolisParams(tau=0.3, b=0.9)
        hs = np.linspace(0.01, np.pi / 2, 50)
        vals = [
            solis_ghi(SolarPosition(h, 1367.0), params) for h in hs
        ]
        assert np.all(np.diff(vals) > 0)

    def test_bounded_by_extraterrestrial(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            pos = SolarPosition(rng.uniform(0, np.pi / 2), 1367.0)
            params = SolisParams(tau=rng.uniform(0, 1), b=rng.uniform(0.2, 2))
            assert solis_ghi(pos, params) <= pos.extraterrestrial + 1e-9

    def test_decreasing_in_tau(self):
        # finite-difference check of the optical-depth sensitivity
        pos = SolarPosition(elevation=0.7, extraterrestrial=1367.0)
        for tau in (0.05, 0.3, 0.8):
            lo = solis_ghi(pos, SolisParams(tau=tau, b=1.1))
            hi = solis_ghi(pos, SolisParams(tau=tau + 1e-6, b=1.1))
            assert hi - lo <= 0

    def test_param_validation(self):
        with pytest.raises(ValidationError):
            SolisParams(tau=-0.1, b=1.0)
        with pytest.raises(ValidationError):
            SolisParams(tau=0.1, b=0.0)


class TestFitSolis:
    def test_self_consistency_recovery(self):
        truth = SolisParams(tau=0.15, b=0.8)
        s = synthetic_clear_series(SITE, truth, days=60)
        fit = fit_solis(s, SITE)
        assert fit.tau == pytest.approx(0.15, abs=1e-3)
        assert fit.b == pytest.approx(0.8, abs=1e-3)

    def test_zero_tau_boundary(self):
        s = synthetic_clear_series(SITE, SolisParams(tau=0.0, b=1.0), days=60)
        fit = fit_solis(s, SITE)
        assert fit.tau <= 1e-3

    def test_deterministic(self):
        s = synthetic_clear_series(SITE, SolisParams(tau=0.3, b=1.2), days=40)
        a = fit_solis(s, SITE)
        b = fit_solis(s, SITE)
        assert a == b

    def test_no_clear_days_error(self):
        rng = np.random.default_rng(1)
        s = make_series(rng.uniform(0, 300, 40 * 9))  # pure noise, nothing clear
        with pytest.raises(FitError):
            fit_solis(s, SITE)


class TestDetectClearDays:
    def test_flags_clear_days_in_mixed_series(self):
        truth = SolisParams(tau=0.2, b=1.0)
        s = synthetic_clear_series(SITE, truth, days=30)
        values = s.values.copy()
        rng = np.random.default_rng(2)
        cloudy_days = [3, 7, 8, 15, 22]
        for d in cloudy_days:
            values[d * 9 : (d + 1) * 9] *= rng.uniform(0.2, 0.6, 9)
        mixed = s.replace_values(values)
        clear = detect_clear_days(mixed)
        assert not clear[cloudy_days].any()
        assert clear.sum() >= 15
