"""Ordinary least squares with classical inference.

The primary solver factors the design with Householder QR and
back-substitutes; :func:`fit_ols_normal_equations` solves the normal
equations directly and exists only as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.stats

from .domain import DomainError, Panel, Subsample
from .factors import DesignMatrix, Exclusion, FactorConfig, build_design_matrix

RCOND_MIN = 1e-12
# residual norm below this fraction of ||y|| counts as an exact fit
PERFECT_FIT_RTOL = 1e-10


class CollinearityError(DomainError):
    def __init__(self, columns: Sequence[str], rcond: float):
        self.columns = tuple(columns)
        self.rcond = rcond
        super().__init__(
            f"design is rank deficient (reciprocal condition {rcond:.3g}); "
            f"dependent columns: {', '.join(self.columns) or '?'}"
        )


class InsufficientObservationsError(DomainError):
    pass


@dataclass
class OlsFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    n_obs: int
    n_params: int
    include_intercept: bool
    names: tuple[str, ...]
    X: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    method: str = "qr"

    @property
    def rss(self) -> float:
        return float(self.residuals @ self.residuals)

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])


def _with_intercept(X: np.ndarray, names: Sequence[str], include_intercept: bool):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(X.shape[1]))
    if include_intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
        names = ("CONST",) + names
    return X, names


def check_rank(X: np.ndarray, names: Sequence[str]) -> float:
    """Raise :class:`CollinearityError` if the column-equilibrated design is singular.

    Returns the reciprocal condition number of the equilibrated design.
    """
    norms = np.linalg.norm(X, axis=0)
    zero = [names[j] for j in np.flatnonzero(norms == 0)]
    if zero:
        raise CollinearityError(zero, 0.0)
    _, s, vt = np.linalg.svd(X / norms, full_matrices=False)
    rcond = float(s[-1] / s[0])
    if rcond < RCOND_MIN:
        null = vt[s < RCOND_MIN * s[0]]
        weight = np.abs(null).max(axis=0)
        dependent = [names[j] for j in np.flatnonzero(weight > 1e-6 * weight.max())]
        raise CollinearityError(dependent, rcond)
    return rcond


def _check_shape(X: np.ndarray, y: np.ndarray):
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError(f"response has shape {y.shape}, expected ({n},)")
    if n <= p:
        raise InsufficientObservationsError(f"{n} observations for {p} parameters; need n > p")


def fit_arrays(
    X: np.ndarray,
    y: np.ndarray,
    include_intercept: bool = True,
    names: Optional[Sequence[str]] = None,
) -> OlsFit:
    Xf, names = _with_intercept(X, names, include_intercept)
    y = np.asarray(y, dtype=float)
    _check_shape(Xf, y)
    check_rank(Xf, names)
    q, r = scipy.linalg.qr(Xf, mode="economic")
    beta = scipy.linalg.solve_triangular(r, q.T @ y)
    fitted = Xf @ beta
    return OlsFit(beta, y - fitted, fitted, Xf.shape[0], Xf.shape[1], include_intercept, names, Xf, y, "qr")


def normal_equations_arrays(
    X: np.ndarray,
    y: np.ndarray,
    include_intercept: bool = True,
    names: Optional[Sequence[str]] = None,
) -> OlsFit:
    Xf, names = _with_intercept(X, names, include_intercept)
    y = np.asarray(y, dtype=float)
    _check_shape(Xf, y)
    try:
        beta = np.linalg.solve(Xf.T @ Xf, Xf.T @ y)
    except np.linalg.LinAlgError as exc:
        raise CollinearityError(names, 0.0) from exc
    fitted = Xf @ beta
    return OlsFit(beta, y - fitted, fitted, Xf.shape[0], Xf.shape[1], include_intercept, names, Xf, y, "normal")


def fit_ols(design: DesignMatrix, include_intercept: bool = True) -> OlsFit:
    return fit_arrays(design.X, design.response, include_intercept, design.column_names)


def fit_ols_normal_equations(design: DesignMatrix, include_intercept: bool = True) -> OlsFit:
    return normal_equations_arrays(design.X, design.response, include_intercept, design.column_names)


@dataclass(frozen=True)
class CoefficientRow:
    name: str
    coefficient: float
    std_error: float
    t_stat: Optional[float]
    p_value: Optional[float]


@dataclass
class RegressionReport:
    rows: list[CoefficientRow]
    r_squared: float
    n_obs: int
    df_resid: int
    rss: float
    se_type: str = "classical"
    subsample: Subsample = Subsample.ALL
    label: str = ""
    config_header: str = ""
    exclusions: list[Exclusion] = field(default_factory=list)
    perfect_fit: bool = False

    def row(self, name: str) -> CoefficientRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def coefficient(self, name: str) -> float:
        return self.row(name).coefficient


def inference(fit: OlsFit, se_type: str = "classical") -> RegressionReport:
    """Standard errors, t-statistics, two-sided p-values and R².

    When residual variance is zero the standard errors are 0 and t-statistics
    and p-values are ``None`` (undefined), never infinite.
    """
    n, p = fit.n_obs, fit.n_params
    if n <= p:
        raise InsufficientObservationsError(f"{n} observations for {p} parameters")
    df = n - p
    e, y = fit.residuals, fit.y
    rss = fit.rss
    perfect = bool(rss <= (PERFECT_FIT_RTOL**2) * float(y @ y))

    _, r = scipy.linalg.qr(fit.X, mode="economic")
    r_inv = scipy.linalg.solve_triangular(r, np.eye(p))
    bread = r_inv @ r_inv.T  # (X'X)^-1
    if perfect:
        se = np.zeros(p)
    elif se_type == "classical":
        se = np.sqrt(rss / df * np.diag(bread))
    elif se_type == "hc1":
        meat = (fit.X * (e**2)[:, None]).T @ fit.X
        se = np.sqrt(np.diag(bread @ meat @ bread) * n / df)
    else:
        raise ValueError(f"unknown se_type {se_type!r}")

    rows = []
    for name, b, s in zip(fit.names, fit.coefficients, se):
        if s > 0:
            t = float(b / s)
            pv = float(2 * scipy.stats.t.sf(abs(t), df))
        else:
            t = pv = None
        rows.append(CoefficientRow(name, float(b), float(s), t, pv))

    if fit.include_intercept:
        tss = float(((y - y.mean()) ** 2).sum())
    else:
        tss = float(y @ y)
    if perfect:
        r2 = 1.0
    elif tss > 0:
        r2 = 1.0 - rss / tss
    else:
        r2 = float("nan")

    # regressors first, intercept last
    rows.sort(key=lambda row: row.name == "CONST")
    return RegressionReport(rows, r2, n, df, rss, se_type, perfect_fit=perfect)


def estimate_model(
    panel: Panel,
    years: Sequence[int],
    subsample: Subsample = Subsample.ALL,
    config: FactorConfig = FactorConfig(),
) -> RegressionReport:
    """Fit the nine-factor model (with intercept) pooled over ``years``."""
    design = build_design_matrix(panel, years, subsample, config)
    fit = fit_ols(design, include_intercept=True)
    report = inference(fit, se_type=config.se_type)
    report.subsample = subsample
    report.label = year_label(design.years)
    report.config_header = config.header()
    report.exclusions = list(design.exclusions)
    return report


def year_label(years: Sequence[int]) -> str:
    years = sorted(years)
    if len(years) == 1:
        return str(years[0])
    if years == list(range(years[0], years[-1] + 1)):
        return f"{years[0]}-{years[-1]} pooled"
    return ",".join(map(str, years)) + " pooled"
