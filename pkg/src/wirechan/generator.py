"""Statistical channel synthesis.

A realization is built in five steps: pick a power-delay profile shape, draw
the attenuation from the scenario's lognormal law, map it to a target RMS
delay spread, scale the taps to the target gain, and stretch the tap spacing
until the RMS delay spread matches. Gain and delay spread therefore come out
correlated exactly as the scenario's regression line dictates.

Randomness comes from counter-based Philox streams. A realization's stream is
keyed by ``(master_seed, index)`` so ensembles reproduce bit-for-bit on any
platform and in any evaluation order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from wirechan.channel import ImpulseResponse, channel_power_gain, rms_delay_spread
from wirechan.profiles import ScenarioProfile

PDP_FAMILIES = ("gaussian-random", "exponential", "equi-power", "two-tap")
KURTOSIS_THRESHOLD = 3.0
RMSDS_FLOOR_S = 1e-9
MAX_REDRAWS = 10_000
MAX_RESYNTH = 100


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Philox stream for ``seed`` and an optional integer key path."""
    if seed < 0:
        raise ValueError("seeds must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class GeneratorConfig:
    profile: ScenarioProfile
    pdp_family: str = "gaussian-random"
    L: int = 50
    exponential_decay: float = 10.0
    seed: int = 0
    truncate_to_table_bounds: bool = False
    complex_taps: bool = False
    line_form: str | None = None
    rmsds_floor_s: float | None = RMSDS_FLOOR_S

    def __post_init__(self):
        if self.pdp_family not in PDP_FAMILIES:
            raise ValueError(f"pdp_family must be one of {PDP_FAMILIES}")
        if self.pdp_family == "two-tap":
            object.__setattr__(self, "L", 2)
        elif self.L < 2:
            raise ValueError("multi-tap families need L >= 2")
        if not self.exponential_decay > 0:
            raise ValueError("exponential_decay must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit non-negative integer")


@dataclass(frozen=True)
class Realization:
    channel: ImpulseResponse
    target_gain_db: float
    target_rmsds_s: float
    achieved_gain_db: float
    achieved_rmsds_s: float
    seed_path: str = ""


def draw_attenuation(profile: ScenarioProfile, rng: np.random.Generator,
                     truncate: bool = False) -> float:
    """Attenuation in dB: normal in dB, i.e. lognormal linear gain.

    With ``truncate`` draws outside the profile's table bounds are redrawn.
    The result is never negative (no channel amplifies).
    """
    lo = profile.atten_min_db if truncate else None
    hi = profile.atten_max_db if truncate else None
    for _ in range(MAX_REDRAWS):
        a = float(rng.normal(profile.atten_mu_db, profile.atten_sigma_db))
        if (lo is None or a >= lo) and (hi is None or a <= hi):
            return max(a, 0.0)
    raise RuntimeError(
        f"{profile.name}: no attenuation inside [{lo}, {hi}] dB after {MAX_REDRAWS} draws")


def _lognormal_params(mean, std):
    # moment matching in the linear domain
    s2 = math.log1p((std / mean) ** 2)
    return math.log(mean) - 0.5 * s2, math.sqrt(s2)


def target_rms_ds(profile: ScenarioProfile, atten_db: float, rng: np.random.Generator,
                  form: str | None = None, floor_s: float | None = RMSDS_FLOOR_S) -> float:
    """Target RMS delay spread in seconds for a drawn attenuation.

    Leptokurtic profiles (kurtosis above 3) that carry a conditional branch
    draw from the conditional lognormal when the attenuation exceeds the
    branch threshold; every other case evaluates the regression line at
    ``G_dB = -atten_db``.
    """
    if atten_db < 0:
        raise ValueError("attenuation must be non-negative")
    cond = profile.conditional_branch
    if (cond is not None and profile.rmsds_kurtosis > KURTOSIS_THRESHOLD
            and atten_db > cond.threshold_db):
        mu, sigma = _lognormal_params(cond.mean_us, cond.std_us)
        return float(rng.lognormal(mu, sigma)) * 1e-6
    sigma_s = profile.line(form).rmsds_us(-atten_db) * 1e-6
    if floor_s is None:
        if sigma_s <= 0:
            raise ValueError(
                f"{profile.name}: regression line gives non-positive RMS-DS "
                f"at {atten_db:.2f} dB and no floor is set")
        return sigma_s
    return max(sigma_s, floor_s)


def _random_signs(rng, L, complex_taps):
    if complex_taps:
        return np.exp(2j * np.pi * rng.random(L))
    return rng.choice(np.array([-1.0, 1.0]), size=L)


def synthesize_pdp(config: GeneratorConfig, rng: np.random.Generator) -> ImpulseResponse:
    """Unnormalized tap amplitudes on a unit grid."""
    L = config.L
    fam = config.pdp_family
    if fam == "two-tap":
        taps = np.ones(2)
    elif fam == "gaussian-random":
        if config.complex_taps:
            taps = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / math.sqrt(2)
        else:
            taps = rng.standard_normal(L)
    elif fam == "exponential":
        taps = np.exp(-np.arange(L) / config.exponential_decay) * _random_signs(rng, L, config.complex_taps)
    else:
        taps = _random_signs(rng, L, config.complex_taps)
    return ImpulseResponse(taps, 1.0)


def shape_channel(pdp: ImpulseResponse, gain_db: float, rmsds_s: float) -> ImpulseResponse:
    """Scale a PDP to ``gain_db`` and set its tap spacing for ``rmsds_s``."""
    g, _ = channel_power_gain(pdp)
    taps = pdp.taps * math.sqrt(10.0 ** (gain_db / 10.0) / g)
    sigma_unit = rms_delay_spread(pdp.with_spacing(1.0))
    if sigma_unit == 0:
        raise ValueError("PDP has zero delay spread (single effective tap)")
    return ImpulseResponse(taps, rmsds_s / sigma_unit)


def _finish(channel, gain_db, rmsds_s, seed_path):
    _, achieved_db = channel_power_gain(channel)
    return Realization(channel, gain_db, rmsds_s, achieved_db,
                       rms_delay_spread(channel), seed_path)


def generate(config: GeneratorConfig, rng: np.random.Generator | None = None,
             gain_db: float | None = None, rmsds_s: float | None = None,
             seed_path: str = "") -> Realization:
    """Run the five synthesis steps.

    ``gain_db`` / ``rmsds_s`` pin the targets instead of drawing them.
    """
    if rng is None:
        rng = make_rng(config.seed)
        seed_path = seed_path or str(config.seed)
    profile = config.profile
    for _ in range(MAX_RESYNTH):
        pdp = synthesize_pdp(config, rng)
        if rms_delay_spread(pdp) > 0:
            break
    else:
        raise RuntimeError(f"no dispersive PDP after {MAX_RESYNTH} attempts")
    if gain_db is None:
        gain_db = -draw_attenuation(profile, rng, config.truncate_to_table_bounds)
    if rmsds_s is None:
        rmsds_s = target_rms_ds(profile, -gain_db, rng, config.line_form, config.rmsds_floor_s)
    return _finish(shape_channel(pdp, gain_db, rmsds_s), gain_db, rmsds_s, seed_path)


def generate_two_tap(profile: ScenarioProfile, rng: np.random.Generator,
                     truncate: bool = False, form: str | None = None,
                     floor_s: float | None = RMSDS_FLOOR_S,
                     gain_db: float | None = None, rmsds_s: float | None = None,
                     seed_path: str = "") -> Realization:
    """Closed-form equi-power two-tap channel: ``|h|^2 = G/2``, ``tau = 2 sigma``."""
    if gain_db is None:
        gain_db = -draw_attenuation(profile, rng, truncate)
    if rmsds_s is None:
        rmsds_s = target_rms_ds(profile, -gain_db, rng, form, floor_s)
    amp = math.sqrt(10.0 ** (gain_db / 10.0) / 2.0)
    channel = ImpulseResponse(np.array([amp, amp]), 2.0 * rmsds_s)
    return _finish(channel, gain_db, rmsds_s, seed_path)


@dataclass(frozen=True, eq=False)
class Ensemble:
    config: GeneratorConfig
    master_seed: int
    realizations: tuple = field(repr=False)

    def __len__(self):
        return len(self.realizations)

    def __iter__(self):
        return iter(self.realizations)

    @property
    def channels(self) -> list[ImpulseResponse]:
        return [r.channel for r in self.realizations]

    @property
    def gain_db(self) -> np.ndarray:
        return np.array([r.achieved_gain_db for r in self.realizations])

    @property
    def rmsds_s(self) -> np.ndarray:
        return np.array([r.achieved_rmsds_s for r in self.realizations])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "gain_db", "rmsds_us", "tap_spacing_s", "L"])
        for i, r in enumerate(self.realizations):
            w.writerow([i, repr(float(r.achieved_gain_db)), repr(float(r.achieved_rmsds_s) * 1e6),
                        repr(float(r.channel.tap_spacing)), r.channel.L])
        return buf.getvalue()


def generate_ensemble(config: GeneratorConfig, count: int,
                      master_seed: int | None = None) -> Ensemble:
    """``count`` independent realizations, realization ``i`` drawn from the
    stream keyed by ``(master_seed, i)``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    seed = config.seed if master_seed is None else master_seed
    reals = []
    for i in range(count):
        rng = make_rng(seed, i)
        reals.append(generate(config, rng, seed_path=f"{seed}/{i}"))
    return Ensemble(config, seed, tuple(reals))


def read_ensemble_csv(text: str) -> dict[str, np.ndarray]:
    """Columns of an ensemble CSV as float arrays."""
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ValueError("ensemble CSV has no rows")
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}
