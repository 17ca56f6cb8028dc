"""Summary statistics, the lognormality test battery, two-sample KS and
boxplot outlier screening."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy import stats
from statsmodels.stats.diagnostic import lilliefors

ALPHA = 0.05


@dataclass(frozen=True)
class SummaryStats:
    n: int
    min: float
    max: float
    mean: float
    std_dev: float
    kurtosis: float
    skewness: float
    p50: float
    p90: float


def summary_statistics(samples) -> SummaryStats:
    """Table-style statistics of a sample.

    The standard deviation uses ``n - 1``; kurtosis (non-excess, 3 for a
    Gaussian) and skewness are the plain moment ratios; percentiles are
    linearly interpolated.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("summary statistics need at least 2 samples")
    if np.ptp(x) == 0:
        raise ValueError("zero variance: kurtosis and skewness are undefined")
    p50, p90 = np.percentile(x, [50, 90])
    return SummaryStats(
        n=int(x.size),
        min=float(x.min()),
        max=float(x.max()),
        mean=float(x.mean()),
        std_dev=float(x.std(ddof=1)),
        kurtosis=float(stats.kurtosis(x, fisher=False, bias=True)),
        skewness=float(stats.skew(x, bias=True)),
        p50=float(p50),
        p90=float(p90),
    )


@dataclass(frozen=True)
class TestReport:
    test_name: str
    statistic: float
    p_value: float
    reject_at_5pct: bool | None

    __test__ = False  # not a pytest class

    @property
    def applicable(self) -> bool:
        return self.reject_at_5pct is not None

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("statistic", "p_value"):
            if isinstance(d[k], float) and math.isnan(d[k]):
                d[k] = None
        return d


def _not_applicable(name):
    return TestReport(name, float("nan"), float("nan"), None)


# -- individual normality tests on (already log-transformed) data -------------
# Each returns (statistic, p_value) and is location/scale invariant, which is
# what makes Monte Carlo calibration against standard normal draws valid.

def _jarque_bera(x):
    r = stats.jarque_bera(x)
    return float(r.statistic), float(r.pvalue)


def _shapiro_wilk(x):
    r = stats.shapiro(x)
    return float(r.statistic), float(r.pvalue)


def _shapiro_francia(x):
    # Royston (1993) normalizing transform, valid for 5 <= n <= 5000
    n = x.size
    xs = np.sort(x)
    m = stats.norm.ppf((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    w = float(np.corrcoef(xs, m)[0, 1] ** 2)
    u = math.log(n)
    v = math.log(u)
    mu = -1.2725 + 1.0521 * (v - u)
    sigma = 1.0308 - 0.26758 * (v + 2.0 / u)
    z = (math.log1p(-min(w, 1.0 - 1e-16)) - mu) / sigma
    return w, float(stats.norm.sf(z))


def _shapiro_selected(x):
    # Wilk for platykurtic samples, Francia for leptokurtic ones
    if stats.kurtosis(x, fisher=False) > 3.0:
        return "shapiro-francia", _shapiro_francia(x)
    return "shapiro-wilk", _shapiro_wilk(x)


def _lilliefors(x):
    d, p = lilliefors(x, dist="norm", pvalmethod="approx")
    return float(d), float(p)


def _anderson_darling(x):
    a2 = float(stats.anderson(x, dist="norm").statistic)
    n = x.size
    a = a2 * (1.0 + 0.75 / n + 2.25 / n**2)
    # D'Agostino & Stephens (1986) p-value for the case-3 statistic
    if a >= 0.6:
        p = math.exp(1.2937 - 5.709 * a + 0.0186 * a * a)
    elif a >= 0.34:
        p = math.exp(0.9177 - 4.279 * a - 1.38 * a * a)
    elif a >= 0.2:
        p = 1.0 - math.exp(-8.318 + 42.796 * a - 59.938 * a * a)
    else:
        p = 1.0 - math.exp(-13.436 + 101.14 * a - 223.73 * a * a)
    return a2, min(max(p, 0.0), 1.0)


def _chi_square(x):
    n = x.size
    k = math.ceil(math.sqrt(n))
    mu, sd = x.mean(), x.std()
    edges = stats.norm.ppf(np.arange(1, k) / k, loc=mu, scale=sd)
    observed = np.bincount(np.searchsorted(edges, x), minlength=k)
    expected = n / k
    chi2 = float(np.sum((observed - expected) ** 2) / expected)
    return chi2, float(stats.chi2.sf(chi2, k - 3))


_TESTS = {
    "jarque-bera": (_jarque_bera, 3),
    "shapiro": (None, 5),
    "lilliefors": (_lilliefors, 5),
    "anderson-darling": (_anderson_darling, 8),
    "chi-square": (_chi_square, 10),  # ceil(sqrt(n)) - 3 >= 1 degree of freedom
}

MC_TRIALS = 4000
_MC_SEED = 20110128


def _raw_pvalue(test, x):
    if test == "shapiro":
        return _shapiro_selected(x)[1][1]
    return _TESTS[test][0](x)[1]


@lru_cache(maxsize=256)
def _null_pvalues(test: str, n: int, trials: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(_MC_SEED, spawn_key=(n,))))
    draws = rng.standard_normal((trials, n))
    return np.sort([_raw_pvalue(test, row) for row in draws])


def _calibrated(test, n, p_raw, trials):
    null = _null_pvalues(test, n, trials)
    return (1.0 + np.searchsorted(null, p_raw, side="right")) / (trials + 1.0)


def lognormality_battery(samples, calibration: str = "auto",
                         mc_trials: int = MC_TRIALS) -> list[TestReport]:
    """Test ``ln(samples)`` for normality with five tests at the 5% level.

    Tests: Jarque-Bera (asymptotic chi-square), Shapiro-Wilk or
    Shapiro-Francia (chosen by sample kurtosis), Lilliefors
    (Dallal-Wilkinson approximation), Anderson-Darling (D'Agostino-Stephens)
    and a chi-square goodness of fit on ``ceil(sqrt(n))`` equiprobable bins.

    ``calibration``:
        ``"asymptotic"``  every p-value from its closed-form approximation.
        ``"auto"``        as above, except the kurtosis-selected Shapiro
                          procedure, whose p-value is calibrated by simulation
                          because selecting on the data inflates its size.
        ``"monte-carlo"`` every p-value calibrated against ``mc_trials``
                          simulated normal samples of the same size.
    """
    if calibration not in ("auto", "asymptotic", "monte-carlo"):
        raise ValueError(f"unknown calibration {calibration!r}")
    x = np.asarray(samples, dtype=float).ravel()
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("lognormality tests need strictly positive samples")
    if x.size < 3:
        raise ValueError("lognormality tests need at least 3 samples")
    y = np.log(x)
    if np.ptp(y) == 0:
        raise ValueError("zero variance: all samples are identical")
    n = y.size

    reports = []
    for test, (fn, n_min) in _TESTS.items():
        if test == "shapiro":
            name = "shapiro-francia" if stats.kurtosis(y, fisher=False) > 3.0 else "shapiro-wilk"
        else:
            name = test
        if n < n_min:
            reports.append(_not_applicable(name))
            continue
        if test == "shapiro":
            name, (stat, p) = _shapiro_selected(y)
        else:
            stat, p = fn(y)
        if calibration == "monte-carlo" or (calibration == "auto" and test == "shapiro"):
            p = float(_calibrated(test, n, p, mc_trials))
        reports.append(TestReport(name, stat, p, bool(p < ALPHA)))
    return reports


def battery_rejects(reports, alpha: float = ALPHA) -> bool:
    """Family-level verdict: reject if any applicable test has ``p < alpha / m``.

    Bonferroni keeps the family-wise false rejection rate at or below ``alpha``;
    the per-test decisions stay in each report.
    """
    ps = [r.p_value for r in reports if r.applicable]
    if not ps:
        raise ValueError("no applicable tests in the battery")
    return min(ps) < alpha / len(ps)


def ks_two_sample(a, b, standardize: bool = True) -> TestReport:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.

    With ``standardize`` both samples are z-scored first, so the test compares
    distribution shapes rather than locations and scales.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("KS test needs two non-empty samples")
    if standardize:
        a, b = (_zscore(a), _zscore(b))
    r = stats.ks_2samp(a, b, method="asymp")
    return TestReport("kolmogorov-smirnov", float(r.statistic), float(r.pvalue),
                      bool(r.pvalue < ALPHA))


def _zscore(x):
    if x.size < 2 or np.ptp(x) == 0:
        raise ValueError("zero variance: cannot standardize sample")
    return (x - x.mean()) / x.std(ddof=1)


def boxplot_outliers(samples) -> tuple[np.ndarray, np.ndarray]:
    """Split samples into (kept, removed) using the 1.5 IQR fences."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 4:
        raise ValueError("boxplot screening needs at least 4 samples")
    q1, q3 = np.percentile(x, [25, 75])
    iqr = q3 - q1
    out = (x < q1 - 1.5 * iqr) | (x > q3 + 1.5 * iqr)
    return x[~out], x[out]


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ValueError("correlation needs two equal-length samples of size >= 2")
    with np.errstate(all="ignore"):
        r = float(np.corrcoef(x, y)[0, 1]) if np.ptp(x) > 0 and np.ptp(y) > 0 else math.nan
    if not math.isfinite(r):
        raise ValueError("zero variance: correlation is undefined")
    return r
