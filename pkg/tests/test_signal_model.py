import cmath
import math

import pytest
from hypothesis import given, strategies as st

from mixcal.errors import DomainError
from mixcal.signal_model import (
    DacCorrection,
    MixerImperfection,
    SquarePulse,
    carrier_cancellation,
    image_cancellation,
    residual_power_db,
    synthesize_spectrum,
)

F_LO = 100e6
F_IF = 20e6

defects = st.complex_numbers(max_magnitude=0.9, allow_nan=False, allow_infinity=False)
offsets = st.floats(-0.5, 0.5, allow_nan=False)


def corr(i=0.0, q=0.0, c=0j, amp=1.0):
    return DacCorrection(
        if_frequency=F_IF,
        i_offset=i,
        q_offset=q,
        sideband_correction=c,
        envelope=SquarePulse(amplitude=amp, duration=10e-6),
    )


def test_ideal_mixer_no_correction():
    spec = synthesize_spectrum(MixerImperfection(), corr(), F_LO)
    assert spec.carrier.amplitude == 0
    assert spec.image.amplitude == 0
    assert spec.target.amplitude == 1


def test_tone_frequencies():
    spec = synthesize_spectrum(MixerImperfection(), corr(), F_LO)
    assert spec.target.frequency == F_LO + F_IF
    assert spec.image.frequency == F_LO - F_IF
    assert spec.carrier.frequency == F_LO


def test_exact_carrier_cancellation():
    leak = 0.03 - 0.04j
    imp = MixerImperfection(carrier_leakage=leak)
    i0, q0 = carrier_cancellation(imp)
    spec = synthesize_spectrum(imp, corr(i=i0, q=q0), F_LO)
    assert spec.carrier.amplitude == 0


def test_exact_image_cancellation():
    imp = MixerImperfection(image_gain=0.05 * cmath.exp(1.2j))
    spec = synthesize_spectrum(imp, corr(c=image_cancellation(imp)), F_LO)
    assert spec.image.amplitude == 0


@given(defects, offsets, offsets, defects, st.floats(0.1, 3.0))
def test_amplitude_model(leak, i0, q0, c, attenuation):
    imp = MixerImperfection(carrier_leakage=leak, attenuation=attenuation)
    spec = synthesize_spectrum(imp, corr(i=i0, q=q0, c=c), F_LO)
    assert spec.carrier.amplitude == pytest.approx(attenuation * (leak + complex(i0, q0)))
    assert spec.image.amplitude == pytest.approx(attenuation * c)
    assert spec.target.amplitude == pytest.approx(attenuation)


@given(defects, offsets, offsets, st.floats(-0.2, 0.2), st.floats(0.0, 2.0))
def test_carrier_affine_with_unit_slope(leak, i0, q0, step, amp):
    """Carrier amplitude is affine in the offsets; envelope has no effect on it."""
    imp = MixerImperfection(carrier_leakage=leak)
    base = synthesize_spectrum(imp, corr(i=i0, q=q0, amp=amp), F_LO).carrier.amplitude
    bumped_i = synthesize_spectrum(imp, corr(i=i0 + step, q=q0, amp=amp), F_LO).carrier.amplitude
    bumped_q = synthesize_spectrum(imp, corr(i=i0, q=q0 + step, amp=amp), F_LO).carrier.amplitude
    assert bumped_i - base == pytest.approx(step, abs=1e-15)
    assert bumped_q - base == pytest.approx(1j * step, abs=1e-15)


@given(defects, defects, st.floats(0.1, 2.0))
def test_image_affine_in_correction(gain, c, amp):
    imp = MixerImperfection(image_gain=gain)
    spec = synthesize_spectrum(imp, corr(c=c, amp=amp), F_LO)
    assert spec.image.amplitude == pytest.approx(amp * (gain + c))


@given(defects, defects)
def test_cancellation_uniqueness(leak, gain):
    """The zeroing offsets and correction are unique because the maps are
    affine with unit slope."""
    imp = MixerImperfection(carrier_leakage=leak, image_gain=gain)
    i0, q0 = carrier_cancellation(imp)
    assert synthesize_spectrum(imp, corr(i=i0, q=q0), F_LO).carrier.amplitude == 0
    nudged = synthesize_spectrum(imp, corr(i=i0 + 1e-6, q=q0), F_LO).carrier.amplitude
    assert abs(nudged) == pytest.approx(1e-6)
    c = image_cancellation(imp)
    assert synthesize_spectrum(imp, corr(c=c), F_LO).image.amplitude == 0


@given(defects, offsets, offsets, defects, st.floats(0.0, 2.0))
def test_frequencies_independent_of_amplitudes(leak, i0, q0, c, amp):
    imp = MixerImperfection(carrier_leakage=leak)
    spec = synthesize_spectrum(imp, corr(i=i0, q=q0, c=c, amp=amp), F_LO)
    assert (spec.target.frequency, spec.image.frequency, spec.carrier.frequency) == (
        F_LO + F_IF,
        F_LO - F_IF,
        F_LO,
    )


def test_residual_power_db_values():
    imp = MixerImperfection(carrier_leakage=0.5 + 0j)
    spec = synthesize_spectrum(imp, corr(i=0.5), F_LO)  # carrier amp = 1 = target
    assert residual_power_db(spec, "carrier") == pytest.approx(0.0)
    exact = synthesize_spectrum(imp, corr(i=-0.5), F_LO)
    assert residual_power_db(exact, "carrier") == -math.inf
    one_percent = synthesize_spectrum(
        MixerImperfection(carrier_leakage=0.01 + 0j), corr(), F_LO
    )
    assert residual_power_db(one_percent, "carrier") == pytest.approx(-40.0)


def test_residual_power_db_zero_target():
    spec = synthesize_spectrum(MixerImperfection(), corr(amp=0.0), F_LO)
    with pytest.raises(DomainError):
        residual_power_db(spec, "carrier")


def test_residual_power_db_unknown_tone():
    spec = synthesize_spectrum(MixerImperfection(), corr(), F_LO)
    with pytest.raises(DomainError):
        residual_power_db(spec, "target")


def test_frequency_ordering_enforced():
    with pytest.raises(DomainError):
        synthesize_spectrum(MixerImperfection(), corr(), f_lo=F_IF / 2)
    with pytest.raises(DomainError):
        DacCorrection(if_frequency=0.0)
    with pytest.raises(DomainError):
        DacCorrection(if_frequency=-1e6)


def test_imperfection_invariants():
    with pytest.raises(DomainError):
        MixerImperfection(carrier_leakage=1.0 + 0j)
    with pytest.raises(DomainError):
        MixerImperfection(image_gain=2j)
    with pytest.raises(DomainError):
        MixerImperfection(attenuation=0.0)
    with pytest.raises(DomainError):
        SquarePulse(amplitude=-0.1)
    with pytest.raises(DomainError):
        SquarePulse(duration=-1e-6)
