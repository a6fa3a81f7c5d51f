"""Next-hour global solar radiation forecasting toolkit.

Pipeline: clear-sky / seasonal-adjustment stationarization of the hourly
radiation series, a Yule-Walker AR model and an LM-trained perceptron on
the stationary scale (the latter fed with NWP forecast columns), combined
by a previous-hour-residual switch, with per-hour confidence intervals.
"""

from .ar import ArModel, WhitenessReport, choose_order, fit_yule_walker, predict_one, whiteness
from .clearsky import SolarPosition, SolisParams, fit_solis, solar_position, solis_ghi
from .errors import (
    CollinearityError,
    ConfigError,
    DivergenceError,
    FitError,
    InsufficientDataError,
    ParseError,
    SolarcastError,
    ValidationError,
)
from .evaluation import ScoreReport, compare_models, nrmse, persistence, seasonal_split
from .hybrid import ConfidenceTable, HybridForecaster, build_confidence, run_hybrid
from .kernels import BACKEND as KERNEL_BACKEND
from .mlp import (
    EnsembleModel,
    MlpModel,
    TrainerConfig,
    assemble_features,
    ensemble_train,
    search_hidden,
    train_lm,
)
from .selection import SelectionReport, apply_mask, build_design, fit_ols
from .series import (
    ExogenousPanel,
    HourlySeries,
    SeriesLayout,
    SiteGeometry,
    clean_missing,
    load_series,
    normalize_interval,
    split_train_test,
    write_series,
)
from .stationarity import (
    FisherResult,
    PeriodicTable,
    StationarityPipeline,
    VcResult,
    build_periodic_table,
    fisher_test,
    fit_pipeline,
    invert_csi_star,
    moving_average,
    periodic_coefficients,
    to_csi,
    to_csi_star,
    variation_coefficient,
)
from .synthetic import RegimeConfig, SynthConfig, gen_ar, gen_radiation, gen_regime_switch

__version__ = "0.1.0"
