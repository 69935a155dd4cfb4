"""Three-tone model of an imperfect IQ mixer's output spectrum.

An up-converting IQ mixer fed with an IF tone at ``f_if`` and a carrier at
``f_lo`` ideally emits a single tone at ``f_lo + f_if``.  Hardware defects add
two spurious tones: carrier (LO) leakage at ``f_lo`` and a mirror-image tone
at ``f_lo - f_if``.  DC offsets on the I/Q ports and a complex correction
added to the IF waveform cancel them; this module computes the resulting
complex amplitudes of all three tones.

Complex amplitude convention: a real tone ``Re[z * exp(i*2*pi*f*t)]`` has
complex amplitude ``z``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError

__all__ = [
    "MixerImperfection",
    "SquarePulse",
    "DacCorrection",
    "Tone",
    "RfSpectrum",
    "synthesize_spectrum",
    "residual_power_db",
]


@dataclass(frozen=True)
class MixerImperfection:
    """Hidden hardware defects of one IQ mixer.

    carrier_leakage: complex amplitude of the LO feed-through, relative to
        full-scale DAC volts; cancelled by DC offsets.
    image_gain: complex image-tone amplitude per unit intended IF amplitude;
        cancelled by the complex sideband correction.
    attenuation: overall real gain factor of the output line.
    """

    carrier_leakage: complex = 0j
    image_gain: complex = 0j
    attenuation: float = 1.0

    def __post_init__(self):
        if abs(self.carrier_leakage) >= 1.0:
            raise DomainError("carrier_leakage magnitude must be < 1")
        if abs(self.image_gain) >= 1.0:
            raise DomainError("image_gain magnitude must be < 1")
        if not self.attenuation > 0:
            raise DomainError("attenuation must be > 0")


@dataclass(frozen=True)
class SquarePulse:
    """Constant-amplitude envelope of the IF drive."""

    amplitude: float = 1.0
    duration: float = 10e-6

    def __post_init__(self):
        if self.amplitude < 0:
            raise DomainError("pulse amplitude must be >= 0")
        if self.duration < 0:
            raise DomainError("pulse duration must be >= 0")


@dataclass(frozen=True)
class DacCorrection:
    """Calibration knobs applied to the DAC waveforms.

    i_offset / q_offset are DC offsets (volts) on the I and Q ports;
    sideband_correction is the complex coefficient of the counter-rotating
    IF component that cancels the image tone.
    """

    if_frequency: float
    i_offset: float = 0.0
    q_offset: float = 0.0
    sideband_correction: complex = 0j
    envelope: SquarePulse = field(default_factory=SquarePulse)

    def __post_init__(self):
        if not self.if_frequency > 0:
            raise DomainError("if_frequency must be > 0")


@dataclass(frozen=True)
class Tone:
    frequency: float
    amplitude: complex


@dataclass(frozen=True)
class RfSpectrum:
    """The mixer output decomposed into target, image and carrier tones."""

    target: Tone
    image: Tone
    carrier: Tone


def synthesize_spectrum(
    imp: MixerImperfection, corr: DacCorrection, f_lo: float
) -> RfSpectrum:
    """Complex amplitudes of the three output tones.

    The hardware defect and the applied correction add linearly: the carrier
    amplitude is ``a*(carrier_leakage + I0 + i*Q0)``, the image amplitude is
    ``a*A*(image_gain + c)``, and the target amplitude is ``a*A``, with ``a``
    the attenuation and ``A`` the envelope amplitude.  Second-order terms
    (the mixer's own imbalance acting on the correction tone) are neglected.
    """
    if not f_lo > corr.if_frequency:
        raise DomainError("f_lo must exceed the IF frequency")
    a = imp.attenuation
    amp = corr.envelope.amplitude
    carrier_amp = a * (imp.carrier_leakage + complex(corr.i_offset, corr.q_offset))
    image_amp = a * amp * (imp.image_gain + corr.sideband_correction)
    return RfSpectrum(
        target=Tone(f_lo + corr.if_frequency, complex(a * amp)),
        image=Tone(f_lo - corr.if_frequency, image_amp),
        carrier=Tone(f_lo, carrier_amp),
    )


def residual_power_db(spectrum: RfSpectrum, tone: str) -> float:
    """Power of a spurious tone in dB relative to the target tone.

    Returns ``-inf`` for an exactly zero residual.  ``tone`` is ``"carrier"``
    or ``"image"``.
    """
    if tone == "carrier":
        residual = spectrum.carrier.amplitude
    elif tone == "image":
        residual = spectrum.image.amplitude
    else:
        raise DomainError(f"unknown tone {tone!r}; expected 'carrier' or 'image'")
    target = abs(spectrum.target.amplitude)
    if target == 0:
        raise DomainError("target amplitude is zero; residual power is undefined")
    mag = abs(residual)
    if mag == 0:
        return -math.inf
    return 20.0 * math.log10(mag / target)


def carrier_cancellation(imp: MixerImperfection) -> tuple[float, float]:
    """The unique (I0, Q0) pair that zeroes the carrier tone."""
    return (-imp.carrier_leakage.real, -imp.carrier_leakage.imag)


def image_cancellation(imp: MixerImperfection) -> complex:
    """The unique sideband correction that zeroes the image tone."""
    return -imp.image_gain
