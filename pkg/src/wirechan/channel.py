"""Impulse responses and the channel metrics built on them.

An :class:`ImpulseResponse` is a tap train on a uniform delay grid. Tap ``k``
of the array sits at delay ``(offset + k) * tap_spacing``; ``offset`` is only
non-zero for responses that start before the time origin (e.g. after
filtering with an acausal Nyquist kernel).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from io import StringIO

import numpy as np


class DegenerateChannelError(ValueError):
    """Raised when a metric is asked of an all-zero impulse response."""


@dataclass(frozen=True, eq=False)
class ImpulseResponse:
    taps: np.ndarray
    tap_spacing: float
    offset: int = 0

    def __post_init__(self):
        taps = np.atleast_1d(np.asarray(self.taps))
        if taps.ndim != 1 or taps.size < 1:
            raise ValueError("taps must be a non-empty 1-D sequence")
        if np.iscomplexobj(taps):
            taps = taps.astype(complex)
        else:
            taps = taps.astype(float)
        taps.setflags(write=False)
        if not (self.tap_spacing > 0 and math.isfinite(self.tap_spacing)):
            raise ValueError(f"tap_spacing must be positive, got {self.tap_spacing}")
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "tap_spacing", float(self.tap_spacing))
        object.__setattr__(self, "offset", int(self.offset))

    @property
    def L(self) -> int:
        return self.taps.size

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.taps)

    @property
    def delays(self) -> np.ndarray:
        return (self.offset + np.arange(self.L)) * self.tap_spacing

    @property
    def power(self) -> np.ndarray:
        """Power-delay profile ``|h_k|^2``."""
        return np.abs(self.taps) ** 2

    def scaled(self, factor) -> "ImpulseResponse":
        return ImpulseResponse(self.taps * factor, self.tap_spacing, self.offset)

    def with_spacing(self, tap_spacing: float) -> "ImpulseResponse":
        return ImpulseResponse(self.taps, tap_spacing, self.offset)

    def __repr__(self):
        return (f"ImpulseResponse(L={self.L}, tap_spacing={self.tap_spacing!r}, "
                f"offset={self.offset}, complex={self.is_complex})")

    # -- serialization -------------------------------------------------

    def to_csv(self) -> str:
        buf = StringIO()
        buf.write("index,delay_s,re,im\n")
        taps = self.taps.astype(complex)
        for k, (d, re, im) in enumerate(zip(self.delays.tolist(), taps.real.tolist(),
                                            taps.imag.tolist())):
            buf.write(f"{self.offset + k},{d!r},{re!r},{im!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, tap_spacing: float | None = None) -> "ImpulseResponse":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0].replace(" ", "") != "index,delay_s,re,im":
            raise ValueError("expected CSV header 'index,delay_s,re,im'")
        rows = []
        for lineno, ln in enumerate(lines[1:], start=2):
            parts = ln.split(",")
            if len(parts) != 4:
                raise ValueError(f"line {lineno}: expected 4 fields, got {len(parts)}")
            rows.append((int(parts[0]), float(parts[1]), float(parts[2]), float(parts[3])))
        if not rows:
            raise ValueError("CSV contains no taps")
        idx = np.array([r[0] for r in rows])
        if np.any(np.diff(idx) != 1):
            raise ValueError("tap indices must be consecutive")
        if tap_spacing is None:
            if len(rows) > 1:
                tap_spacing = (rows[-1][1] - rows[0][1]) / (idx[-1] - idx[0])
            elif idx[0] != 0:
                tap_spacing = rows[0][1] / idx[0]
            else:
                raise ValueError("cannot infer tap spacing from a single tap at index 0")
        re = np.array([r[2] for r in rows])
        im = np.array([r[3] for r in rows])
        taps = re + 1j * im if np.any(im != 0) else re
        return cls(taps, tap_spacing, int(idx[0]))

    def to_dict(self) -> dict:
        taps = self.taps.astype(complex)
        out = {"tap_spacing_s": self.tap_spacing,
               "taps": [[float(h.real), float(h.imag)] for h in taps]}
        if self.offset:
            out["offset"] = self.offset
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "ImpulseResponse":
        pairs = np.asarray(obj["taps"], dtype=float).reshape(-1, 2)
        taps = pairs[:, 0] + 1j * pairs[:, 1] if np.any(pairs[:, 1] != 0) else pairs[:, 0]
        return cls(taps, obj["tap_spacing_s"], obj.get("offset", 0))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ImpulseResponse":
        return cls.from_dict(json.loads(text))


def load_impulse_response(path, tap_spacing: float | None = None) -> ImpulseResponse:
    """Read a channel from a ``.csv`` or ``.json`` file."""
    with open(path) as fh:
        text = fh.read()
    if str(path).lower().endswith(".json"):
        return ImpulseResponse.from_json(text)
    return ImpulseResponse.from_csv(text, tap_spacing=tap_spacing)


@dataclass(frozen=True, eq=False)
class TransferFunction:
    bins: np.ndarray
    bin_spacing: float

    @property
    def N(self) -> int:
        return self.bins.size

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.N) * self.bin_spacing

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.bins)

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.bins)


# -- metrics -----------------------------------------------------------------

def _total_power(h: ImpulseResponse) -> float:
    g = float(np.sum(h.power))
    if g == 0.0:
        raise DegenerateChannelError("degenerate channel: all taps are zero")
    return g


def channel_power_gain(h: ImpulseResponse) -> tuple[float, float]:
    """Return the channel power gain ``sum |h_n|^2`` as ``(linear, dB)``."""
    g = _total_power(h)
    return g, 10.0 * math.log10(g)


def gain_db(h: ImpulseResponse) -> float:
    return channel_power_gain(h)[1]


def rms_delay_spread(h: ImpulseResponse) -> float:
    """RMS delay spread in seconds.

    Moments of the normalized power-delay profile are taken on tap indices,
    about the energy centroid, and scaled by the tap spacing. The central
    form avoids the cancellation in ``mu2 - mu^2`` for long responses.
    """
    p = h.power
    total = _total_power(h)
    k = np.arange(h.L, dtype=float)
    mean = float(np.dot(k, p)) / total
    var = float(np.dot((k - mean) ** 2, p)) / total
    return h.tap_spacing * math.sqrt(max(var, 0.0))


def default_dft_size(L: int) -> int:
    return 1 << max(0, (4 * L - 1).bit_length())


def transfer_function(h: ImpulseResponse, N: int | None = None) -> TransferFunction:
    """N-point DFT of the zero-padded taps (time origin at the first tap)."""
    if N is None:
        N = default_dft_size(h.L)
    if N < h.L:
        raise ValueError(f"DFT size N={N} is shorter than the channel (L={h.L})")
    bins = np.fft.fft(h.taps, N)
    return TransferFunction(bins, 1.0 / (N * h.tap_spacing))


def frequency_response(h: ImpulseResponse, freqs) -> np.ndarray:
    """Continuous-frequency response ``sum_k h_k exp(-j 2 pi f tau_k)``."""
    freqs = np.asarray(freqs, dtype=float)
    z = np.exp(-2j * np.pi * freqs * h.tap_spacing)
    # Horner in z: sum_k h_k z^k
    acc = np.zeros_like(z)
    for tap in h.taps[::-1]:
        acc = acc * z + tap
    if h.offset:
        acc = acc * np.exp(-2j * np.pi * freqs * h.offset * h.tap_spacing)
    return acc


# -- Nyquist filtering ---------------------------------------------------------

@dataclass(frozen=True)
class NyquistKernel:
    """Raised-cosine cascade of transmit and receive filters.

    ``span`` is the total support in symbol periods; the kernel is zero for
    ``|t| > span / 2 * sample_period``.
    """

    sample_period: float
    roll_off: float = 0.2
    span: int = 16
    family: str = "raised-cosine"

    def __post_init__(self):
        if self.family != "raised-cosine":
            raise ValueError(f"unsupported kernel family {self.family!r}")
        if not 0.0 <= self.roll_off <= 1.0:
            raise ValueError("roll_off must lie in [0, 1]")
        if self.span < 2:
            raise ValueError("span must be at least 2 symbol periods")
        if not self.sample_period > 0:
            raise ValueError("sample_period must be positive")

    @property
    def half_width(self) -> float:
        return 0.5 * self.span * self.sample_period

    def __call__(self, t) -> np.ndarray:
        x = np.asarray(t, dtype=float) / self.sample_period
        b = self.roll_off
        den = 1.0 - (2.0 * b * x) ** 2
        singular = np.abs(den) < 1e-10
        safe = np.where(singular, 1.0, den)
        val = np.sinc(x) * np.cos(np.pi * b * x) / safe
        if b > 0:
            val = np.where(singular, np.pi / 4 * np.sinc(1.0 / (2.0 * b)), val)
        return np.where(np.abs(x) <= 0.5 * self.span, val, 0.0)


def equivalent_response(h: ImpulseResponse, kernel: NyquistKernel,
                        output_period: float | None = None) -> ImpulseResponse:
    """Sample ``h(t) * p(t)`` on the receiver grid.

    ``h_eq[k] = sum_j h[j] p(k T - tau_j)`` for every ``k`` reached by the
    kernel support; the result's ``offset`` records the first sample index.
    """
    T = kernel.sample_period if output_period is None else float(output_period)
    if not T > 0:
        raise ValueError("output_period must be positive")
    tau = h.delays
    half = kernel.half_width
    k_lo = int(math.floor((tau[0] - half) / T))
    k_hi = int(math.ceil((tau[-1] + half) / T))
    n_out = k_hi - k_lo + 1
    # each tap touches only the samples inside the kernel support
    reach = int(math.ceil(half / T)) + 1
    base = np.floor(tau / T).astype(np.int64)
    cols = base[:, None] + np.arange(-reach, reach + 2)[None, :]
    vals = kernel(cols * T - tau[:, None]) * h.taps[:, None]
    pos = cols - k_lo
    ok = (pos >= 0) & (pos < n_out)
    out = np.zeros(n_out, dtype=vals.dtype)
    np.add.at(out, pos[ok], vals[ok])
    return ImpulseResponse(out, T, k_lo)
