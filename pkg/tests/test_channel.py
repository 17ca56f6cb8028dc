import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wirechan.channel import (
    DegenerateChannelError,
    ImpulseResponse,
    NyquistKernel,
    channel_power_gain,
    default_dft_size,
    equivalent_response,
    frequency_response,
    load_impulse_response,
    rms_delay_spread,
    transfer_function,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
nonzero_taps = arrays(np.float64, st.integers(1, 40), elements=finite).filter(
    lambda a: np.sum(a * a) > 1e-6)


def direct_rms_ds(taps, spacing):
    """Textbook raw-moment formulas in exact rational arithmetic."""
    p = [Fraction(float(t)) ** 2 for t in taps]
    g = sum(p)
    m1 = sum(k * pk for k, pk in enumerate(p)) / g
    m2 = sum(k * k * pk for k, pk in enumerate(p)) / g
    return spacing * math.sqrt(m2 - m1 * m1)


# -- construction and I/O --------------------------------------------------

def test_taps_are_read_only():
    h = ImpulseResponse(np.array([1.0, 2.0]), 1e-6)
    with pytest.raises(ValueError):
        h.taps[0] = 3.0


@pytest.mark.parametrize("spacing", [0.0, -1e-9, float("nan")])
def test_rejects_bad_spacing(spacing):
    with pytest.raises(ValueError):
        ImpulseResponse(np.ones(2), spacing)


def test_csv_round_trip_complex():
    h = ImpulseResponse(np.array([1 + 2j, -0.5j, 3e-7]), 2.5e-8)
    back = ImpulseResponse.from_csv(h.to_csv())
    np.testing.assert_array_equal(back.taps, h.taps)
    assert back.tap_spacing == pytest.approx(h.tap_spacing, rel=1e-12)


def test_json_round_trip(tmp_path):
    h = ImpulseResponse(np.array([0.3, -0.1, 0.05]), 1e-7, offset=-2)
    path = tmp_path / "h.json"
    path.write_text(h.to_json())
    back = load_impulse_response(path)
    np.testing.assert_array_equal(back.taps, h.taps)
    assert back.offset == -2 and back.tap_spacing == h.tap_spacing
    assert json.loads(h.to_json())["tap_spacing_s"] == 1e-7


def test_csv_file_loads(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text(ImpulseResponse(np.array([1.0, 0.5]), 1e-6).to_csv())
    assert load_impulse_response(path).L == 2


# -- gain ---------------------------------------------------------------------

@pytest.mark.parametrize("taps, db", [([1.0], 0.0), ([math.sqrt(0.5)] * 2, 0.0),
                                      ([math.sqrt(0.5e-5)] * 2, -50.0)])
def test_gain_examples(taps, db):
    lin, gdb = channel_power_gain(ImpulseResponse(np.array(taps), 1e-6))
    assert gdb == pytest.approx(db, abs=1e-9)
    assert lin == pytest.approx(10 ** (db / 10))


def test_degenerate_channel():
    h = ImpulseResponse(np.zeros(3), 1e-6)
    with pytest.raises(DegenerateChannelError, match="degenerate channel"):
        channel_power_gain(h)
    with pytest.raises(DegenerateChannelError):
        rms_delay_spread(h)


# -- RMS delay spread -----------------------------------------------------------

def test_rms_ds_examples():
    assert rms_delay_spread(ImpulseResponse(np.array([1.0]), 1e-6)) == 0.0
    two = ImpulseResponse(np.array([1.0, 1.0]), 1e-6)
    assert rms_delay_spread(two) == pytest.approx(0.5e-6, rel=1e-12)
    skew = ImpulseResponse(np.sqrt([0.9, 0.1]), 1e-6)
    assert rms_delay_spread(skew) == pytest.approx(0.3e-6, rel=1e-12)


@given(nonzero_taps, st.floats(1e-9, 1e-5))
def test_rms_ds_matches_direct_oracle(taps, spacing):
    got = rms_delay_spread(ImpulseResponse(taps, spacing))
    assert got == pytest.approx(direct_rms_ds(taps, spacing), rel=1e-9, abs=1e-12 * spacing)


@given(nonzero_taps, st.integers(1, 30))
def test_rms_ds_shift_invariant(taps, k):
    a = rms_delay_spread(ImpulseResponse(taps, 1e-7))
    b = rms_delay_spread(ImpulseResponse(np.concatenate([np.zeros(k), taps]), 1e-7))
    assert b == pytest.approx(a, rel=1e-12, abs=1e-12 * 1e-7)


@given(nonzero_taps, st.floats(1e-3, 1e3))
def test_rms_ds_scale_law(taps, c):
    a = rms_delay_spread(ImpulseResponse(taps, 1e-7))
    b = rms_delay_spread(ImpulseResponse(taps, c * 1e-7))
    assert b == pytest.approx(c * a, rel=1e-12, abs=1e-30)


@given(nonzero_taps, st.floats(1e-3, 1e3), st.sampled_from([1, -1, 1j]))
def test_rms_ds_amplitude_invariant(taps, c, phase):
    a = rms_delay_spread(ImpulseResponse(taps, 1e-7))
    b = rms_delay_spread(ImpulseResponse(taps * c * phase, 1e-7))
    assert b == pytest.approx(a, rel=1e-12, abs=1e-20)


@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3),
       st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3),
       st.integers(1, 50))
def test_two_tap_closed_form(h1, h2, gap):
    taps = np.zeros(gap + 1, dtype=complex)
    taps[0], taps[gap] = h1, h2
    tau = gap * 1e-8
    expect = abs(h1 * h2) / (abs(h1) ** 2 + abs(h2) ** 2) * tau
    assert rms_delay_spread(ImpulseResponse(taps, 1e-8)) == pytest.approx(expect, rel=1e-9)


# -- transfer function ---------------------------------------------------------------

def test_transfer_function_examples():
    np.testing.assert_allclose(transfer_function(ImpulseResponse(np.array([1.0]), 1e-6), 4).bins,
                               np.ones(4))
    np.testing.assert_allclose(transfer_function(ImpulseResponse(np.array([0.5, 0.5]), 1e-6), 2).bins,
                               [1.0, 0.0], atol=1e-15)
    with pytest.raises(ValueError):
        transfer_function(ImpulseResponse(np.ones(5), 1e-6), 4)


def test_two_tap_notch():
    tau = 0.4e-6
    h = ImpulseResponse(np.array([1.0, 1.0]), tau)
    assert abs(frequency_response(h, [0.5 / tau])[0]) < 1e-12
    assert abs(frequency_response(h, [1.0 / tau])[0]) == pytest.approx(2.0)


def test_default_dft_size():
    assert default_dft_size(1) == 4
    assert default_dft_size(50) == 256
    assert default_dft_size(64) == 256


@given(arrays(np.complex128, st.integers(1, 64),
              elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)),
       st.integers(0, 200))
def test_parseval(taps, extra):
    h = ImpulseResponse(taps, 1e-7)
    tf = transfer_function(h, h.L + extra)
    lhs = np.sum(np.abs(tf.bins) ** 2) / tf.N
    assert lhs == pytest.approx(np.sum(np.abs(taps) ** 2), rel=1e-9, abs=1e-12)


def test_frequency_response_matches_dft_bins():
    rng = np.random.default_rng(3)
    h = ImpulseResponse(rng.standard_normal(20), 1e-7)
    tf = transfer_function(h, 64)
    np.testing.assert_allclose(frequency_response(h, tf.frequencies), tf.bins, atol=1e-12)


# -- Nyquist kernel and equivalent response -------------------------------------------

@pytest.mark.parametrize("beta", [0.0, 0.2, 0.25, 0.5, 1.0])
def test_kernel_nyquist_zeros(beta):
    k = NyquistKernel(1e-7, beta)
    assert k(0.0) == pytest.approx(1.0)
    ints = np.array([i for i in range(-8, 9) if i]) * 1e-7
    assert np.max(np.abs(k(ints))) < 1e-12
    assert k(9e-7) == 0.0


def test_kernel_continuous_at_singularity():
    k = NyquistKernel(1.0, 0.25)  # singular at t = 2
    assert k(2.0) == pytest.approx(k(2.0 + 1e-7), abs=1e-6)


def test_equivalent_response_of_delta_is_kernel_samples():
    T = 1e-7
    eq = equivalent_response(ImpulseResponse(np.array([1.0]), T), NyquistKernel(T))
    k0 = -eq.offset
    assert eq.taps[k0] == pytest.approx(1.0)
    assert np.max(np.abs(np.delete(eq.taps, k0))) < 1e-12


def test_equivalent_response_aligned_grid_is_identity():
    rng = np.random.default_rng(5)
    T = 1e-7
    h = ImpulseResponse(rng.standard_normal(30), T)
    eq = equivalent_response(h, NyquistKernel(T, 0.2))
    start = -eq.offset
    np.testing.assert_allclose(eq.taps[start:start + 30], h.taps, atol=1e-6)


def rc_spectrum(f, T, beta):
    """Raised-cosine spectrum scaled so the impulse response has p(0) = 1."""
    a = np.abs(f) * T
    lo, hi = (1 - beta) / 2, (1 + beta) / 2
    mid = 0.5 * (1 + np.cos(np.pi / beta * (a - lo))) if beta > 0 else 0.0
    return T * np.where(a <= lo, 1.0, np.where(a <= hi, mid, 0.0))


def quadrature_equivalent(h, T, beta, ks, n=20001):
    """h_eq[k] = int P(f) H(f) exp(j 2 pi f k T) df over the occupied band."""
    f = np.linspace(-(1 + beta) / (2 * T), (1 + beta) / (2 * T), n)
    integrand = rc_spectrum(f, T, beta) * frequency_response(h, f)
    kern = np.exp(2j * np.pi * np.outer(ks, f) * T)
    return np.trapezoid(kern * integrand, f, axis=1)


def test_equivalent_response_matches_frequency_domain_oracle():
    T = 1e-7
    h = ImpulseResponse(np.array([1.0, 1.0]), 1.5 * T)  # taps at 0 and 1.5 T
    eq = equivalent_response(h, NyquistKernel(T, 0.2, span=64))
    ks = eq.offset + np.arange(eq.L)
    ref = quadrature_equivalent(h, T, 0.2, ks)
    np.testing.assert_allclose(eq.taps, ref.real, atol=2e-4)
    # the cascade is Nyquist but not energy-preserving off-grid
    e_eq = np.sum(eq.taps ** 2)
    e_ref = np.sum(np.abs(ref) ** 2)
    assert e_eq == pytest.approx(e_ref, rel=1e-3)
    assert e_eq < 0.8 * channel_power_gain(h)[0]


def test_equivalent_response_resamples_to_other_period():
    T = 1e-7
    h = ImpulseResponse(np.array([1.0, -0.5, 0.25]), 0.37 * T)
    eq = equivalent_response(h, NyquistKernel(T, 0.2, span=64))
    ks = eq.offset + np.arange(eq.L)
    np.testing.assert_allclose(eq.taps, quadrature_equivalent(h, T, 0.2, ks).real, atol=2e-4)
