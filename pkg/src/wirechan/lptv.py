"""Linear periodically time-varying channels as banks of LTI harmonic responses.

``h(t, tau) = sum_m h_m(tau) exp(j 2 pi m t / T0)``: each harmonic response is
an ordinary :class:`ImpulseResponse`, so LTI realizations from the generator
can be stacked into an LPTV channel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from wirechan.channel import ImpulseResponse, channel_power_gain
from wirechan.generator import GeneratorConfig, generate, make_rng, synthesize_pdp


def _commensurate(period, ts):
    ratio = period / ts
    n = round(ratio)
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"period {period:g} s is not an integer multiple of the "
                         f"sample period {ts:g} s")
    return n


@dataclass(frozen=True, eq=False)
class LptvChannel:
    harmonics: dict
    period: float

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")
        if not self.harmonics:
            raise ValueError("harmonic bank is empty")
        bank = dict(sorted((int(m), h) for m, h in self.harmonics.items()))
        spacing = next(iter(bank.values())).tap_spacing
        for m, h in bank.items():
            if not math.isclose(h.tap_spacing, spacing, rel_tol=1e-12):
                raise ValueError(f"harmonic {m} has tap spacing {h.tap_spacing:g}, "
                                 f"expected {spacing:g}")
        if 0 not in bank:
            bank[0] = ImpulseResponse(np.zeros(1), spacing)
            bank = dict(sorted(bank.items()))
        object.__setattr__(self, "harmonics", bank)
        object.__setattr__(self, "period", float(self.period))

    @property
    def tap_spacing(self) -> float:
        return self.harmonics[0].tap_spacing

    @property
    def orders(self) -> np.ndarray:
        return np.array(list(self.harmonics))

    def matrix(self) -> tuple[np.ndarray, int]:
        """Harmonic taps aligned on a common grid: ``(H[m_idx, k], offset)``."""
        lo = min(h.offset for h in self.harmonics.values())
        hi = max(h.offset + h.L for h in self.harmonics.values())
        H = np.zeros((len(self.harmonics), hi - lo), dtype=complex)
        for i, h in enumerate(self.harmonics.values()):
            H[i, h.offset - lo:h.offset - lo + h.L] = h.taps
        return H, lo

    @property
    def n_taps(self) -> int:
        return self.matrix()[0].shape[1]

    def to_dict(self) -> dict:
        return {"T0_s": self.period,
                "harmonics": {str(m): h.to_dict() for m, h in self.harmonics.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, obj) -> "LptvChannel":
        return cls({int(m): ImpulseResponse.from_dict(h) for m, h in obj["harmonics"].items()},
                   obj["T0_s"])


def zadeh_compose(bank: dict, period: float, real: bool = False) -> LptvChannel:
    """Wrap a harmonic bank; with ``real`` missing negative orders are filled
    with conjugates so that ``h(t, tau)`` is real."""
    if not bank:
        raise ValueError("harmonic bank is empty")
    bank = {int(m): h for m, h in bank.items()}
    if real:
        h0 = bank.get(0)
        if h0 is not None and np.any(np.abs(np.imag(h0.taps)) > 0):
            raise ValueError("a real channel needs a real-valued harmonic 0")
        for m in [m for m in bank if m > 0]:
            conj = ImpulseResponse(np.conj(bank[m].taps), bank[m].tap_spacing, bank[m].offset)
            if -m in bank:
                other = bank[-m]
                if (other.offset != conj.offset or other.L != conj.L
                        or not np.allclose(other.taps, conj.taps, rtol=0, atol=1e-12)):
                    raise ValueError(f"harmonics {m} and {-m} are not conjugate")
            else:
                bank[-m] = conj
    return LptvChannel(bank, period)


def response_at(ch: LptvChannel, t, k: int):
    """``sum_m h_m[k] exp(j 2 pi m t / T0)`` for tap index ``k`` of the aligned grid."""
    H, _ = ch.matrix()
    if not 0 <= k < H.shape[1]:
        raise IndexError(f"tap index {k} outside [0, {H.shape[1]})")
    t = np.asarray(t, dtype=float)
    phases = np.exp(2j * np.pi * np.multiply.outer(t, ch.orders) / ch.period)
    out = phases @ H[:, k]
    return out if out.ndim else complex(out)


def sample_period_grid(ch: LptvChannel, n_samples: int) -> np.ndarray:
    """``h[n, k]`` at ``t = n T0 / n_samples`` over one period."""
    H, _ = ch.matrix()
    t = np.arange(n_samples) * ch.period / n_samples
    return np.exp(2j * np.pi * np.outer(t, ch.orders) / ch.period) @ H


def apply_lptv(ch: LptvChannel, signal, sample_period: float | None = None) -> np.ndarray:
    """Filter ``signal`` by each harmonic, modulate, and sum (full convolution).

    Output sample ``n`` sits at time ``(n + offset) * Ts``; the modulation
    uses that time so the result is exactly ``T0``-periodic on the grid.
    """
    ts = ch.tap_spacing if sample_period is None else float(sample_period)
    if not math.isclose(ts, ch.tap_spacing, rel_tol=1e-9):
        raise ValueError("signal sample period must equal the harmonic tap spacing")
    P = _commensurate(ch.period, ts)
    x = np.asarray(signal)
    H, off = ch.matrix()
    n = np.arange(x.size + H.shape[1] - 1) + off
    out = np.zeros(n.size, dtype=complex)
    for m, hm in zip(ch.orders, H):
        out += np.exp(2j * np.pi * m * (n % P) / P) * np.convolve(hm, x)
    return out


def harmonic_extract(samples, tap_spacing: float, period: float,
                     max_harmonic: int | None = None) -> LptvChannel:
    """Harmonic responses from one period of ``h[n, k]`` (DFT along ``n``)."""
    h = np.atleast_2d(np.asarray(samples))
    N = h.shape[0]
    if max_harmonic is None:
        max_harmonic = (N - 1) // 2
    if N < 2 * max_harmonic + 1:
        raise ValueError(f"aliased harmonics: {N} samples per period cannot resolve "
                         f"|m| <= {max_harmonic}")
    F = np.fft.fft(h, axis=0) / N
    bank = {m: ImpulseResponse(F[m % N], tap_spacing)
            for m in range(-max_harmonic, max_harmonic + 1)}
    return LptvChannel(bank, period)


# -- filtering --------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteKernel:
    """Kernel defined only on the grid ``(start + i) * spacing``.

    As the receive filter its weights stand in for ``p''(xi) d xi``; as a
    transmit kernel it returns the weight on grid points and 0 elsewhere, so
    ``DiscreteKernel((1.0,), Ts)`` is a discrete delta.
    """

    weights: tuple
    spacing: float
    start: int = 0

    @classmethod
    def from_function(cls, fn, spacing: float, half_span: int) -> "DiscreteKernel":
        t = np.arange(-half_span, half_span + 1) * spacing
        return cls(tuple(float(v) for v in np.asarray(fn(t)) * spacing), spacing, -half_span)

    @property
    def points(self) -> np.ndarray:
        return (self.start + np.arange(len(self.weights))) * self.spacing

    def support(self) -> tuple[float, float]:
        p = self.points
        return float(p[0]), float(p[-1])

    def __call__(self, t):
        u = np.asarray(t, dtype=float) / self.spacing - self.start
        i = np.rint(u)
        on = (np.abs(u - i) < 1e-9) & (i >= 0) & (i < len(self.weights))
        w = np.asarray(self.weights, dtype=float)
        return np.where(on, w[np.clip(i, 0, len(w) - 1).astype(int)], 0.0)


def _support(kernel):
    if hasattr(kernel, "support"):
        return kernel.support()
    return -kernel.half_width, kernel.half_width


@dataclass(frozen=True, eq=False)
class TimeVaryingResponse:
    """``values[k, l - offset]``: response at time ``k Ts`` to an input at lag ``l``."""

    values: np.ndarray
    sample_period: float
    offset: int


def lptv_equivalent_response(ch: LptvChannel, tx_kernel, rx_kernel: DiscreteKernel,
                             sample_period: float, n_times: int | None = None
                             ) -> TimeVaryingResponse:
    """Sampled response of transmit filter, LPTV channel and receive filter.

    ``h_eq[k, l] = sum_i w_i sum_j h(k Ts - xi_i, j) p'(l Ts - tau_j - xi_i)``
    with ``(xi_i, w_i)`` the receive-kernel grid and weights. ``n_times``
    defaults to one channel period when it is commensurate with ``Ts``.
    """
    ts = float(sample_period)
    if n_times is None:
        try:
            n_times = _commensurate(ch.period, ts)
        except ValueError:
            n_times = 1
    H, off = ch.matrix()
    tau = (off + np.arange(H.shape[1])) * ch.tap_spacing
    xi = rx_kernel.points
    w = np.asarray(rx_kernel.weights, dtype=float)
    a_lo, a_hi = _support(tx_kernel)
    l_lo = int(math.floor((tau[0] + xi[0] + a_lo) / ts))
    l_hi = int(math.ceil((tau[-1] + xi[-1] + a_hi) / ts))
    ls = np.arange(l_lo, l_hi + 1)
    ks = np.arange(n_times)

    # h(k Ts - xi_i, j) for all k, i, j
    t = ks[:, None] * ts - xi[None, :]
    mod = np.exp(2j * np.pi * t[..., None] * ch.orders / ch.period)  # (k, i, m)
    h_t = mod @ H  # (k, i, j)
    # p'(l Ts - tau_j - xi_i) weighted by w_i
    arg = ls[None, None, :] * ts - tau[None, :, None] - xi[:, None, None]  # (i, j, l)
    P = np.asarray(tx_kernel(arg)) * w[:, None, None]
    values = np.einsum("kij,ijl->kl", h_t, P)
    return TimeVaryingResponse(values, ts, l_lo)


# -- generation ---------------------------------------------------------------

def generate_bank(config: GeneratorConfig, max_harmonic: int = 3, step_db: float = 10.0,
                  rng: np.random.Generator | None = None, period: float = 1.0 / 120.0
                  ) -> LptvChannel:
    """Real LPTV channel built from generated LTI realizations.

    Harmonic 0 is a full realization. Harmonic ``m > 0`` reuses its tap
    spacing with a fresh PDP of the same family, a random common phase, and
    ``step_db * m`` dB less energy; negative orders are conjugates.
    """
    if rng is None:
        rng = make_rng(config.seed)
    base = generate(config, rng).channel
    g0, _ = channel_power_gain(base)
    bank = {0: base}
    for m in range(1, max_harmonic + 1):
        pdp = synthesize_pdp(config, rng)
        gm = g0 * 10.0 ** (-step_db * m / 10.0)
        taps = pdp.taps * math.sqrt(gm / channel_power_gain(pdp)[0])
        taps = taps * np.exp(2j * np.pi * rng.random())
        bank[m] = ImpulseResponse(taps, base.tap_spacing)
    return zadeh_compose(bank, period, real=True)
