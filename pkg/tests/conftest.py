import numpy as np
import pytest

from solarcast.series import HOURS_PER_DAY, ExogenousPanel, HourlySeries, SiteGeometry
from solarcast.synthetic import make_calendar

SITE = SiteGeometry(latitude=41.9, longitude=8.8, altitude=4.0)


@pytest.fixture
def site():
    return SITE


def make_series(values, years=None, start_year=2001):
    values = np.asarray(values, dtype=float)
    n_days = values.size // HOURS_PER_DAY
    if years is None:
        ordinals = make_calendar(max(1, -(-n_days // 365)), start_year)[:n_days]
    else:
        ordinals = make_calendar(years, start_year)
    return HourlySeries(values, day_ordinals=ordinals)


def make_panel(series, rng=None):
    rng = rng or np.random.default_rng(0)
    n = len(series)
    return ExogenousPanel(
        nebulosity=series.replace_values(rng.uniform(0, 8, n)),
        pressure=series.replace_values(101300 + rng.normal(0, 100, n)),
        temperature=series.replace_values(15 + rng.normal(0, 3, n)),
        rain=series.replace_values(np.abs(rng.normal(0, 0.5, n))),
    )
