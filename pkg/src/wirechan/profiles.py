"""Scenario profiles: attenuation statistics and gain/RMS-DS regression lines.

Built-in constants are the published in-home PLC, MV PLC, coax, phone-line
and DSL statistics. Profiles can be overridden from INI-style text::

    [ih-plc-urban]
    atten_mu_db = 50

    [my-site]
    base = mv-plc
    atten_sigma_db = 8.5
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace

import numpy as np


class ProfileConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FitDiagnostics:
    weights: tuple
    iterations: int
    converged: bool
    scale: float


@dataclass(frozen=True)
class RegressionLine:
    """``sigma_us = slope * G_dB + intercept`` (linear) or
    ``ln(sigma_us) = slope * G_dB + intercept`` (log)."""

    slope: float
    intercept: float
    form: str = "linear"
    correlation: float = float("nan")
    diagnostics: FitDiagnostics | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.form not in ("linear", "log"):
            raise ValueError(f"form must be 'linear' or 'log', got {self.form!r}")

    def rmsds_us(self, gain_db):
        """Evaluate the line, returning RMS-DS in microseconds."""
        v = self.slope * np.asarray(gain_db, dtype=float) + self.intercept
        if self.form == "log":
            v = np.exp(v)
        return v if np.ndim(v) else float(v)


@dataclass(frozen=True)
class ConditionalRmsDs:
    """RMS-DS moments (µs) conditioned on attenuation above a threshold."""

    threshold_db: float
    mean_us: float
    std_us: float


@dataclass(frozen=True)
class ScenarioProfile:
    name: str
    atten_mu_db: float
    atten_sigma_db: float
    linear_line: RegressionLine
    rmsds_kurtosis: float
    log_line: RegressionLine | None = None
    atten_min_db: float | None = None
    atten_max_db: float | None = None
    conditional_branch: ConditionalRmsDs | None = None
    line_form: str = "linear"

    def __post_init__(self):
        if not self.atten_sigma_db > 0:
            raise ValueError(f"{self.name}: atten_sigma_db must be positive")
        lo, hi = self.atten_min_db, self.atten_max_db
        if lo is not None and hi is not None and not lo < hi:
            raise ValueError(f"{self.name}: atten_min_db must be below atten_max_db")
        if self.line_form not in ("linear", "log"):
            raise ValueError(f"{self.name}: line_form must be 'linear' or 'log'")
        if self.line_form == "log" and self.log_line is None:
            raise ValueError(f"{self.name}: line_form 'log' needs a log_line")

    def line(self, form: str | None = None) -> RegressionLine:
        form = form or self.line_form
        if form == "linear":
            return self.linear_line
        if self.log_line is None:
            raise ValueError(f"profile {self.name} has no log-form regression line")
        return self.log_line


def _lin(a, b, r=float("nan")):
    return RegressionLine(a, b, "linear", r)


def _log(t, z, r=float("nan")):
    return RegressionLine(t, z, "log", r)


# DSL log lines: the printed (theta, zeta) are swapped relative to the
# table moments; stored here in the orientation that reproduces them.
_BUILTIN = (
    ScenarioProfile(
        "ih-plc-suburban", 48.9, 9.8, _lin(-0.094, 0.02, -0.4), 7.60,
        log_line=_log(-0.027, -2.12, -0.5), atten_min_db=19.7, atten_max_db=68.1,
        conditional_branch=ConditionalRmsDs(45.0, 0.6, 0.3), line_form="log"),
    ScenarioProfile(
        "ih-plc-urban", 41.5, 13.4, _lin(-0.0028, 0.089, -0.5), 3.82,
        log_line=_log(-0.0167, -2.26, -0.6), atten_min_db=14.5, atten_max_db=65.1),
    ScenarioProfile(
        "mv-plc", 45.2, 13.2, _lin(-0.0075, 0.183, -0.65), 2.79,
        atten_min_db=10.2, atten_max_db=82.5),
    ScenarioProfile(
        "ih-cx", 40.3, 3.9, _lin(-0.0016, -0.044, -0.4), 1.92,
        atten_min_db=33.0, atten_max_db=45.2),
    ScenarioProfile(
        "ih-ph", 14.4, 4.8, _lin(-0.005, 0.054, -0.2), 3.4,
        log_line=_log(-0.007, -2.27, -0.6), atten_min_db=1.8, atten_max_db=25.6,
        line_form="log"),
    ScenarioProfile(
        "dsl-ansi", 60.1, 2.0, _lin(-2.1, -109.0, -0.97), 3.0,
        log_line=_log(-0.11, -3.81, -0.95), atten_min_db=58.6, atten_max_db=65.2,
        line_form="log"),
    ScenarioProfile(
        "dsl-csa", 53.1, 1.8, _lin(-0.833, -37.0, -0.95), 5.9,
        log_line=_log(-0.109, -3.85, -0.95), atten_min_db=50.8, atten_max_db=57.0,
        line_form="log"),
)

_REGISTRY = {p.name: p for p in _BUILTIN}


def builtin_profiles() -> dict[str, ScenarioProfile]:
    return dict(_REGISTRY)


def _canon(name: str) -> str:
    return re.sub(r"[\s_]+", "-", name.strip().lower())


def get_profile(name: str) -> ScenarioProfile:
    try:
        return _REGISTRY[_canon(name)]
    except KeyError:
        raise KeyError(f"unknown profile {name!r}; built-ins: {', '.join(_REGISTRY)}") from None


# -- configuration text -------------------------------------------------------

_FLOAT_KEYS = {
    "atten_mu_db", "atten_sigma_db", "atten_min_db", "atten_max_db",
    "alpha", "beta", "linear_corr", "theta", "zeta", "log_corr",
    "rmsds_kurtosis", "cond_threshold_db", "cond_mean_us", "cond_std_us",
}
PROFILE_KEYS = frozenset(_FLOAT_KEYS | {"base", "line_form"})


def _key_line(text: str, section: str, key: str) -> int | None:
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", s):
            return lineno
    return None


def _where(text, section, key):
    ln = _key_line(text, section, key)
    return f"line {ln}" if ln else f"section [{section}]"


def _apply_overrides(base: ScenarioProfile, name: str, items: dict, text: str,
                     section: str) -> ScenarioProfile:
    vals = {}
    for key, raw in items.items():
        if key == "base":
            continue
        if key not in PROFILE_KEYS:
            raise ProfileConfigError(
                f"{_where(text, section, key)}: unknown key {key!r} in [{section}]")
        if key in _FLOAT_KEYS:
            if raw.strip().lower() in ("", "none"):
                vals[key] = None
                continue
            try:
                vals[key] = float(raw)
            except ValueError:
                raise ProfileConfigError(
                    f"{_where(text, section, key)}: {key} = {raw!r} is not a number") from None
        else:
            vals[key] = raw.strip()

    lin, log = base.linear_line, base.log_line
    if any(k in vals for k in ("alpha", "beta", "linear_corr")):
        lin = replace(lin, slope=vals.get("alpha", lin.slope),
                      intercept=vals.get("beta", lin.intercept),
                      correlation=vals.get("linear_corr", lin.correlation))
    if any(k in vals for k in ("theta", "zeta", "log_corr")):
        if log is None and not ("theta" in vals and "zeta" in vals):
            raise ProfileConfigError(
                f"[{section}]: base has no log line; set both theta and zeta")
        log = log or RegressionLine(0.0, 0.0, "log")
        log = replace(log, slope=vals.get("theta", log.slope),
                      intercept=vals.get("zeta", log.intercept),
                      correlation=vals.get("log_corr", log.correlation))

    cond = base.conditional_branch
    cond_keys = ("cond_threshold_db", "cond_mean_us", "cond_std_us")
    if any(k in vals for k in cond_keys):
        if cond is None and not all(vals.get(k) is not None for k in cond_keys):
            raise ProfileConfigError(
                f"[{section}]: conditional branch needs cond_threshold_db, "
                "cond_mean_us and cond_std_us")
        if all(k in vals and vals[k] is None for k in cond_keys):
            cond = None
        else:
            cond = ConditionalRmsDs(
                vals.get("cond_threshold_db", cond.threshold_db if cond else None),
                vals.get("cond_mean_us", cond.mean_us if cond else None),
                vals.get("cond_std_us", cond.std_us if cond else None))

    changes = {k: vals[k] for k in ("atten_mu_db", "atten_sigma_db", "atten_min_db",
                                    "atten_max_db", "rmsds_kurtosis", "line_form")
               if k in vals}
    for k in ("atten_mu_db", "atten_sigma_db", "rmsds_kurtosis"):
        if k in changes and changes[k] is None:
            raise ProfileConfigError(f"{_where(text, section, k)}: {k} cannot be empty")
    try:
        return replace(base, name=name, linear_line=lin, log_line=log,
                       conditional_branch=cond, **changes)
    except ValueError as exc:
        raise ProfileConfigError(f"[{section}]: {exc}") from None


def parse_profiles(text: str, sections_to_skip=("generator",)) -> dict[str, ScenarioProfile]:
    """Parse override text into profiles keyed by canonical name."""
    cp = configparser.ConfigParser(interpolation=None, default_section="\0defaults")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ProfileConfigError(f"malformed profile config: {exc}") from None
    out = {}
    for section in cp.sections():
        if section in sections_to_skip:
            continue
        items = dict(cp.items(section))
        name = _canon(section)
        base_name = _canon(items.get("base", name))
        if base_name not in _REGISTRY:
            raise ProfileConfigError(
                f"[{section}]: no built-in base profile {base_name!r}; "
                f"built-ins: {', '.join(_REGISTRY)}")
        out[name] = _apply_overrides(_REGISTRY[base_name], name, items, text, section)
    return out


def load_profile_config(path, name: str | None = None) -> ScenarioProfile:
    """Load one profile from a config file.

    With several profile sections in the file, ``name`` selects one.
    """
    with open(path) as fh:
        text = fh.read()
    profiles = parse_profiles(text)
    if name is not None:
        try:
            return profiles[_canon(name)]
        except KeyError:
            raise ProfileConfigError(f"{path}: no section for profile {name!r}") from None
    if len(profiles) != 1:
        raise ProfileConfigError(
            f"{path}: expected exactly one profile section, found {len(profiles)}")
    return next(iter(profiles.values()))


def profile_to_config(profile: ScenarioProfile) -> str:
    """Render a profile as standalone override text (round-trips through
    :func:`parse_profiles`)."""

    def fmt(v):
        return "none" if v is None else repr(float(v))

    # mv-plc carries neither a log line nor a conditional branch, so every
    # optional part below is set explicitly rather than inherited
    lines = [f"[{profile.name}]", "base = mv-plc"]
    lines += [
        f"atten_mu_db = {fmt(profile.atten_mu_db)}",
        f"atten_sigma_db = {fmt(profile.atten_sigma_db)}",
        f"atten_min_db = {fmt(profile.atten_min_db)}",
        f"atten_max_db = {fmt(profile.atten_max_db)}",
        f"alpha = {fmt(profile.linear_line.slope)}",
        f"beta = {fmt(profile.linear_line.intercept)}",
        f"linear_corr = {fmt(profile.linear_line.correlation)}",
    ]
    if profile.log_line is not None:
        lines += [f"theta = {fmt(profile.log_line.slope)}",
                  f"zeta = {fmt(profile.log_line.intercept)}",
                  f"log_corr = {fmt(profile.log_line.correlation)}"]
    lines.append(f"rmsds_kurtosis = {fmt(profile.rmsds_kurtosis)}")
    c = profile.conditional_branch
    if c is not None:
        lines += [f"cond_threshold_db = {fmt(c.threshold_db)}",
                  f"cond_mean_us = {fmt(c.mean_us)}",
                  f"cond_std_us = {fmt(c.std_us)}"]
    lines.append(f"line_form = {profile.line_form}")
    return "\n".join(lines) + "\n"


def profile_to_dict(profile: ScenarioProfile) -> dict:
    def line(l):
        if l is None:
            return None
        return {"slope": l.slope, "intercept": l.intercept, "form": l.form,
                "correlation": None if math.isnan(l.correlation) else l.correlation}

    c = profile.conditional_branch
    return {
        "name": profile.name,
        "atten_mu_db": profile.atten_mu_db,
        "atten_sigma_db": profile.atten_sigma_db,
        "atten_min_db": profile.atten_min_db,
        "atten_max_db": profile.atten_max_db,
        "linear_line": line(profile.linear_line),
        "log_line": line(profile.log_line),
        "rmsds_kurtosis": profile.rmsds_kurtosis,
        "conditional_branch": None if c is None else {
            "threshold_db": c.threshold_db, "mean_us": c.mean_us, "std_us": c.std_us},
        "line_form": profile.line_form,
    }
