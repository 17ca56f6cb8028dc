"""Link-level evaluation: OFDM with an insufficient guard interval, gap-based
capacity, and coverage statistics over ensembles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from wirechan.channel import ImpulseResponse, channel_power_gain, frequency_response
from wirechan.stats import pearson

DEFAULT_M_GRID = (256, 512, 1024, 2048, 4096)
DEFAULT_SAMPLE_PERIOD = 1.0 / 60e6  # real baseband sampling of a 30 MHz band


def db_to_lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


@dataclass(frozen=True)
class OfdmConfig:
    M: int
    nu: int = 0
    sample_period: float = DEFAULT_SAMPLE_PERIOD
    pt_dbm_hz: float = -55.0
    n0_dbm_hz: float = -120.0

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("M must be at least 2")
        if not 0 <= self.nu < self.M:
            raise ValueError("guard length must satisfy 0 <= nu < M")
        if not self.sample_period > 0:
            raise ValueError("sample_period must be positive")

    @property
    def efficiency(self) -> float:
        return self.M / (self.M + self.nu)


@dataclass(frozen=True)
class CapacityConfig:
    W_hz: float = 28e6
    gamma_db: float = 7.0
    efficiency_cap: float = 12.0
    band_start_hz: float = 2e6
    band_end_hz: float = 30e6
    n_subcarriers: int = 1024
    pt_dbm_hz: float = -55.0
    n0_dbm_hz: float = -120.0
    gamma_c_db: float | None = None
    gamma_m_db: float | None = None

    def __post_init__(self):
        if not self.W_hz > 0:
            raise ValueError("W_hz must be positive")
        if not self.efficiency_cap > 0:
            raise ValueError("efficiency_cap must be positive")

    @classmethod
    def from_gap_components(cls, coding_gain_db: float, margin_db: float, **kw):
        """Gap from its parts: ``9.8 + margin - coding gain`` dB."""
        return cls(gamma_db=9.8 + margin_db - coding_gain_db,
                   gamma_c_db=coding_gain_db, gamma_m_db=margin_db, **kw)

    def subcarrier_centers(self) -> np.ndarray:
        lo, hi, K = self.band_start_hz, self.band_end_hz, self.n_subcarriers
        if K < 1 or not hi > lo:
            raise ValueError("empty subcarrier set")
        return lo + (np.arange(K) + 0.5) * (hi - lo) / K


# -- guard interval -----------------------------------------------------------

def power_partition(h: ImpulseResponse, M: int, nu: int) -> tuple[float, float]:
    """Split channel energy into useful and interference power.

    A tap ``d`` samples after the first one escapes the guard by
    ``e = max(0, d - nu)`` samples; only ``M - e`` samples of the current
    symbol reach the DFT window, so its useful amplitude weight is
    ``(M - e) / M`` and the rest of its energy becomes ISI plus ICI.
    """
    if h.L > M + nu:
        raise ValueError(f"channel longer than one symbol plus guard: L={h.L} exceeds M + nu = {M + nu}")
    p = h.power
    excess = np.maximum(0, np.arange(h.L) - nu)
    w2 = ((M - excess) / M) ** 2
    pu = float(np.dot(p, w2))
    pi = float(np.dot(p, 1.0 - w2))
    return pu, pi


def _check_grid(h, ofdm):
    if not math.isclose(h.tap_spacing, ofdm.sample_period, rel_tol=1e-9):
        raise ValueError(
            f"channel tap spacing {h.tap_spacing:g} s differs from the OFDM sample period "
            f"{ofdm.sample_period:g} s; resample it with equivalent_response first")


def snir_linear(h: ImpulseResponse, ofdm: OfdmConfig) -> float:
    _check_grid(h, ofdm)
    g, _ = channel_power_gain(h)
    pu, _ = power_partition(h, ofdm.M, ofdm.nu)
    pt = ofdm.efficiency * float(db_to_lin(ofdm.pt_dbm_hz))
    n0 = float(db_to_lin(ofdm.n0_dbm_hz))
    return pt * pu / (pt * (g - pu) + n0)


def snir(h: ImpulseResponse, ofdm: OfdmConfig) -> float:
    """Signal to noise plus interference ratio in dB."""
    s = snir_linear(h, ofdm)
    return 10.0 * math.log10(s) if s > 0 else -math.inf


def achievable_rate_mc(h: ImpulseResponse, ofdm: OfdmConfig,
                       cap: CapacityConfig = CapacityConfig()) -> float:
    """Bit rate of the partially equalized multicarrier link, bits/s."""
    s = snir_linear(h, ofdm)
    eff = min(math.log2(1.0 + s / float(db_to_lin(cap.gamma_db))), cap.efficiency_cap)
    return ofdm.efficiency * cap.W_hz * eff


def default_nu_grid(M: int) -> list[int]:
    grid = [0]
    v = 1
    while v <= M // 4:
        grid.append(v)
        v *= 2
    return grid


def sweep_cp(h: ImpulseResponse, cap: CapacityConfig = CapacityConfig(),
             M_grid=DEFAULT_M_GRID, nu_grid=None) -> list[tuple[int, int, float]]:
    """Rate for every valid ``(M, nu)`` pair; invalid pairs are skipped."""
    rows = []
    for M in M_grid:
        for nu in (default_nu_grid(M) if nu_grid is None else nu_grid):
            if nu >= M or h.L > M + nu:
                continue
            ofdm = OfdmConfig(M, nu, h.tap_spacing, cap.pt_dbm_hz, cap.n0_dbm_hz)
            rows.append((M, nu, achievable_rate_mc(h, ofdm, cap)))
    return rows


def best_row(rows) -> tuple[int, int, float]:
    """Highest rate; ties go to the smaller guard, then the smaller M."""
    if not rows:
        raise ValueError("no valid (M, nu) point on the grid")
    return min(rows, key=lambda r: (-r[2], r[1], r[0]))


def optimize_cp(h: ImpulseResponse, cap: CapacityConfig = CapacityConfig(),
                M_grid=DEFAULT_M_GRID, nu_grid=None) -> tuple[int, int, float]:
    """Exhaustive search for the rate-maximizing ``(M, nu)``."""
    return best_row(sweep_cp(h, cap, M_grid, nu_grid))


# -- capacity and coverage ----------------------------------------------------

def subcarrier_efficiency(h: ImpulseResponse, cap: CapacityConfig) -> np.ndarray:
    H = frequency_response(h, cap.subcarrier_centers())
    snr = float(db_to_lin(cap.pt_dbm_hz - cap.n0_dbm_hz)) * np.abs(H) ** 2
    return np.minimum(np.log2(1.0 + snr / float(db_to_lin(cap.gamma_db))), cap.efficiency_cap)


def capacity(h: ImpulseResponse, cap: CapacityConfig = CapacityConfig()) -> float:
    """Gap-approximation capacity in bits/s: bandwidth times the mean capped
    spectral efficiency over the in-band subcarriers."""
    return cap.W_hz * float(np.mean(subcarrier_efficiency(h, cap)))


def ensemble_capacities(ensemble, cap: CapacityConfig = CapacityConfig()) -> np.ndarray:
    return np.array([capacity(ch, cap) for ch in ensemble.channels])


def empirical_cdf(values) -> tuple[np.ndarray, np.ndarray]:
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("empirical CDF of an empty sample")
    return v, np.arange(1, v.size + 1) / v.size


def coverage_cdf(ensemble, cap: CapacityConfig = CapacityConfig(),
                 capacities=None) -> tuple[np.ndarray, np.ndarray]:
    """Sorted capacities and their cumulative probabilities ``i / n``."""
    if len(ensemble) == 0:
        raise ValueError("empty ensemble")
    if capacities is None:
        capacities = ensemble_capacities(ensemble, cap)
    return empirical_cdf(capacities)


def capacity_gain_correlation(ensemble, cap: CapacityConfig = CapacityConfig(),
                              capacities=None) -> tuple[float, float]:
    """Pearson correlation of capacity with gain (dB) and with RMS-DS."""
    if len(ensemble) < 3:
        raise ValueError("need at least 3 realizations")
    if capacities is None:
        capacities = ensemble_capacities(ensemble, cap)
    return pearson(capacities, ensemble.gain_db), pearson(capacities, ensemble.rmsds_s)


def cdf_to_csv(rates, probs) -> str:
    lines = ["rate_bps,cdf"]
    lines += [f"{r!r},{p!r}" for r, p in zip(rates.tolist(), probs.tolist())]
    return "\n".join(lines) + "\n"


def sweep_to_csv(rows) -> str:
    best = best_row(rows)
    lines = ["M,nu,rate_bps,is_optimal"]
    lines += [f"{M},{nu},{r!r},{int((M, nu) == best[:2])}" for M, nu, r in rows]
    return "\n".join(lines) + "\n"


def capacity_report(h: ImpulseResponse, cap: CapacityConfig = CapacityConfig()) -> dict:
    return {"W_hz": cap.W_hz, "gamma_db": cap.gamma_db,
            "band_hz": [cap.band_start_hz, cap.band_end_hz],
            "capacity_bps": capacity(h, cap)}
