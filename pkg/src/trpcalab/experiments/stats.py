"""Summaries of experiment records: means, quantiles, pass rates and trend tests."""

import logging
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy.stats import binomtest

logger = logging.getLogger(__name__)

POINT_COLUMNS = ["n1", "n3", "r", "rho"]
_NON_MEASUREMENTS = {"seed", "trial", "n1", "n2", "n3", "r", "rho", "runtime_s"}
# n1 and n2 move together in the square experiments.
_LINKED = {"n1": {"n1", "n2"}, "n2": {"n1", "n2"}}

PRIMARY_VALUE = {
    "sign": "ratio",
    "pt": "epsilon",
    "ptomega": "excess",
    "infty": "ratio",
    "dev": "c0_sqrt",
    "certify": "spectral_sum",
    "phase": "l_error",
}



class TrendCheck(NamedTuple):
    """A default trend test. For an alarm check a significant result is a failure."""
    by: str
    value: str
    direction: str
    alarm: bool = False


DEFAULT_TRENDS = {
    "sign": [TrendCheck("rho", "ratio", "increasing")],
    "pt": [TrendCheck("rho", "epsilon", "decreasing")],
    "ptomega": [TrendCheck("n1", "excess", "decreasing")],
    # c0_sqrt should stay bounded in n; significant growth flags a violation.
    "dev": [TrendCheck("n1", "c0_sqrt", "increasing", alarm=True)],
    "phase": [TrendCheck("rho", "l_error", "increasing"), TrendCheck("r", "l_error", "increasing")],
}

FLAG_COLUMNS = ("passed", "success", "converged")


class PassRate(NamedTuple):
    rate: float
    successes: int
    trials: int
    ci_low: float
    ci_high: float


class TrendTest(NamedTuple):
    """One-sided sign test on trial-paired differences along a grid."""
    by: str
    value: str
    direction: str
    pairs: int
    agreeing: int
    pvalue: float
    significant: bool


def pass_rate(records: pd.DataFrame, flag: str = "passed", confidence: float = 0.95) -> PassRate:
    """Fraction of records with the flag set and its Clopper-Pearson interval.

    Raises:
        ValueError: If records is empty.
    """
    values = records[flag].astype(bool)
    trials = int(values.size)
    if trials == 0:
        raise ValueError("Cannot compute a pass rate from zero records")
    successes = int(values.sum())
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="exact")
    return PassRate(successes / trials, successes, trials, float(ci.low), float(ci.high))


def sign_trend_test(records: pd.DataFrame, by: str, value: str, direction: str = "increasing",
                    alpha: float = 0.05) -> TrendTest:
    """Test whether `value` moves in `direction` as `by` grows.

    Records are paired by trial index (and every other grid parameter)
    across consecutive values of `by`. Ties are dropped. The sign test is
    one-sided: "greater" for increasing, "less" for decreasing.

    Raises:
        ValueError: If direction is not "increasing" or "decreasing".
    """
    if direction not in ("increasing", "decreasing"):
        raise ValueError(f"direction must be 'increasing' or 'decreasing', got {direction!r}")
    excluded = _LINKED.get(by, {by})
    keys = [c for c in ("n1", "n2", "n3", "r", "rho") if c in records.columns and c not in excluded]
    table = records.pivot_table(index=keys + ["trial"], columns=by, values=value, aggfunc="first")
    grid = sorted(table.columns)

    diffs = []
    for lower, upper in zip(grid, grid[1:]):
        diffs.append((table[upper] - table[lower]).to_numpy(dtype=float))
    d = np.concatenate(diffs) if diffs else np.array([])
    d = d[np.isfinite(d) & (d != 0)]

    pairs = int(d.size)
    ups = int(np.count_nonzero(d > 0))
    if pairs == 0:
        logger.info("Trend test %s vs %s has no untied pairs", value, by)
        return TrendTest(by, value, direction, 0, 0, 1.0, False)
    alternative = "greater" if direction == "increasing" else "less"
    pvalue = float(binomtest(ups, pairs, 0.5, alternative=alternative).pvalue)
    agreeing = ups if direction == "increasing" else pairs - ups
    return TrendTest(by, value, direction, pairs, agreeing, pvalue, pvalue < alpha)


def trend_verdict(result: TrendTest, alarm: bool = False) -> str:
    """Read a trend test as "holds", "violated" or "inconclusive".

    An expected trend holds only when significant. An alarm trend is one that
    must not appear, so significance means the property is violated.
    """
    if alarm:
        return "violated" if result.significant else "holds"
    return "holds" if result.significant else "inconclusive"


def _measurement_columns(records: pd.DataFrame) -> list[str]:
    numeric = records.select_dtypes(include="number").columns
    return [c for c in numeric if c not in _NON_MEASUREMENTS]


def summarize(records: pd.DataFrame, kind: str) -> dict[str, pd.DataFrame]:
    """Summary tables for one experiment's records.

    Returns:
        Mapping of table name to DataFrame: "means", "quantiles" (median and
        95th percentile of the primary value), "pass_rates" (per point, for
        each flag column present) and "trends" (default trend tests whose
        grid has at least two values, with "alarm" and "verdict" columns).
    """
    grouped = records.groupby(POINT_COLUMNS, sort=True)
    tables = {"means": grouped[_measurement_columns(records)].mean().reset_index()}

    primary = PRIMARY_VALUE[kind]
    quantiles = grouped[primary].quantile([0.5, 0.95]).unstack()
    quantiles.columns = [f"{primary}_q{round(q * 100)}" for q in quantiles.columns]
    tables["quantiles"] = quantiles.reset_index()

    rows = []
    for point, group in grouped:
        for flag in FLAG_COLUMNS:
            if flag in group.columns:
                rate = pass_rate(group, flag)
                rows.append({**dict(zip(POINT_COLUMNS, point)), "flag": flag, **rate._asdict()})
    if rows:
        tables["pass_rates"] = pd.DataFrame(rows)

    trends = []
    for check in DEFAULT_TRENDS.get(kind, []):
        if records[check.by].nunique() < 2:
            continue
        result = sign_trend_test(records, check.by, check.value, check.direction)
        trends.append({**result._asdict(), "alarm": check.alarm,
                       "verdict": trend_verdict(result, check.alarm)})
    if trends:
        tables["trends"] = pd.DataFrame(trends)
    return tables
