"""Equity home bias: global and bilateral measures, determinant factors, OLS."""

from .domain import (
    BilateralPosition,
    CountryAttributes,
    CountryId,
    DomainError,
    Finding,
    HoldingsRecord,
    InsufficientDataError,
    MarketClass,
    MonthlySeries,
    Panel,
    SeriesKind,
    Subsample,
    validate_panel,
)
from .factors import (
    COLUMN_NAMES,
    DesignMatrix,
    EmptyDesignError,
    FactorConfig,
    FactorVector,
    build_design_matrix,
    distance_feature,
    fx_volatility,
    market_size_share,
    return_covariance,
    trade_openness,
)
from .ingest import (
    IngestError,
    PanelError,
    SchemaError,
    assemble_panel,
    load_attributes,
    load_holdings,
    load_monthly_series,
    load_panel_dir,
    load_positions,
    write_panel_dir,
)
from .metrics import (
    BilateralBiasResult,
    HomeBiasResult,
    actual_foreign_share,
    bilateral_home_bias,
    bilateral_table,
    hb_table,
    home_bias,
    optimal_share,
)
from .ols import (
    CollinearityError,
    OlsFit,
    RegressionReport,
    estimate_model,
    fit_ols,
    fit_ols_normal_equations,
    inference,
)

__version__ = "0.1.0"
