"""Deterministic response of the mechanical mode to a resonant or detuned
RF drive: steady-state Lorentzian, transient ringing, and the empirical
absorption-heating law.

The coherent amplitude beta evolves in the frame rotating at the drive as

    dbeta/dt = (i*2*pi*delta - pi*gamma_m) * beta + i*Omega

with delta = f_drive - f_m in Hz and Omega an abstract, coupling-scaled
drive rate (1/s).  Calibration of Omega to RF watts goes through the
end-to-end phonons-per-RF-photon number, see drive_rate_for_pulse.
"""

from dataclasses import dataclass

import numpy as np
from scipy.constants import h as PLANCK_H

from .params import DeviceParams, RFPulse, _require


@dataclass(frozen=True)
class DriveResponse:
    """Coherent amplitude trace on a time grid under one drive setting."""

    times: np.ndarray            # s, strictly increasing
    beta_t: np.ndarray           # complex amplitude per time point
    detuning: float              # f_drive - f_m, Hz

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        b = np.asarray(self.beta_t, dtype=complex)
        _require(t.ndim == 1 and t.size == b.size,
                 "times and beta_t must be 1-d and equally long")
        _require(np.all(np.diff(t) > 0), "time grid must be strictly increasing")
        _require(np.all(np.isfinite(b)), "beta_t must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "beta_t", b)

    @property
    def occupation_t(self):
        return np.abs(self.beta_t) ** 2


def steady_state_amplitude(drive_rate, detuning, device: DeviceParams):
    """Steady-state amplitude of the driven, damped mode.

    |beta_ss|^2 is a Lorentzian in the detuning with FWHM gamma_m and
    on-resonance value |Omega|^2 / (pi*gamma_m)^2.
    """
    a = np.pi * device.gamma_m - 2j * np.pi * np.asarray(detuning, dtype=float)
    return 1j * drive_rate / a


def transient_response(pulse: RFPulse, device: DeviceParams, times,
                       drive_rate, beta0=0j) -> DriveResponse:
    """Analytic amplitude trace for a rectangular RF pulse starting at t=0.

    During the pulse the occupation rings at |delta|; after the pulse end
    it decays as exp(-2*pi*gamma_m*(t - t_end)).
    """
    if pulse.shape != "rectangular":
        raise ValueError(f"unsupported RF pulse shape {pulse.shape!r}")
    times = np.asarray(times, dtype=float)
    _require(times.size > 0 and times.min() >= 0, "times must be >= 0")
    delta = pulse.freq - device.omega_m
    pole = 2j * np.pi * delta - np.pi * device.gamma_m
    beta_ss = 1j * drive_rate / (-pole)

    on = np.minimum(times, pulse.duration)
    beta = beta_ss + (complex(beta0) - beta_ss) * np.exp(pole * on)
    after = times > pulse.duration
    beta[after] *= np.exp(pole * (times[after] - pulse.duration))
    return DriveResponse(times=times, beta_t=beta, detuning=delta)


def rf_pulse_energy(pulse: RFPulse, rf_atten_db) -> float:
    """Pulse energy at the device input in J, after the line attenuation."""
    p_watts = 10 ** ((pulse.power_dbm - rf_atten_db) / 10) * 1e-3
    return p_watts * pulse.duration


def drive_rate_for_pulse(pulse: RFPulse, device: DeviceParams, rf_atten_db,
                         rf_phonon_eff) -> float:
    """Drive rate Omega (1/s) for an RF pulse of given source power.

    Omega scales as sqrt(P at the device); the proportionality is fixed so
    that the standard calibration pulse (-14 dBm, 1 us, resonant) ends with
    n_coh = N_photons * rf_phonon_eff phonons.
    """
    cal = RFPulse(power_dbm=-14.0, freq=device.omega_m, duration=1e-6)
    n_photons = rf_pulse_energy(cal, rf_atten_db) / (PLANCK_H * cal.freq)
    n_coh_cal = n_photons * rf_phonon_eff
    # resonant ramp-up over the calibration pulse: beta(T) = (Omega/(pi*g)) (1 - e^{-pi g T})
    ramp = (1 - np.exp(-np.pi * device.gamma_m * cal.duration)) / (np.pi * device.gamma_m)
    omega_cal = np.sqrt(n_coh_cal) / ramp
    p_cal = 10 ** ((cal.power_dbm - rf_atten_db) / 10) * 1e-3
    p_dev = 10 ** ((pulse.power_dbm - rf_atten_db) / 10) * 1e-3
    return omega_cal * np.sqrt(p_dev / p_cal)


@dataclass(frozen=True)
class PowerLaw:
    """Empirical heating law n_th = A * P^b, P in W."""

    A: float
    b: float

    def __post_init__(self):
        _require(self.A >= 0, "A must be >= 0")


# Default heating model: cube-root scaling anchored so that the 107 nW
# readout pulse heats the mode to n_th = 0.90.
DEFAULT_HEATING = PowerLaw(A=0.90 / 107e-9 ** (1 / 3), b=1 / 3)


def absorption_heating(peak_power, model: PowerLaw) -> float:
    """Thermal occupation produced by one readout pulse of given peak power.

    Heating is effectively instantaneous on the pulse timescale, so the
    returned value replaces (never accumulates onto) the state's n_th.  The
    coherent amplitude is unaffected.
    """
    if peak_power < 0:
        raise ValueError("peak_power must be >= 0")
    if peak_power == 0:
        return 0.0
    return model.A * peak_power ** model.b


def calibrate_power_law(anchors, b_max=3.0) -> PowerLaw:
    """Fit n_th = A*P^b exactly through one or two anchor points.

    A single anchor with a fixed exponent is resolved by the caller passing
    [(P, n, b)]; two (P, n) anchors determine both parameters.  Refuses
    anchor pairs that would need an implausibly steep exponent (|b| >
    b_max): the 0.90@107nW and 0.36@0.1uW occupations are such a pair
    (implied b ~ 13.5) and must be selected as presets instead.
    """
    anchors = list(anchors)
    if len(anchors) == 1:
        if len(anchors[0]) != 3:
            raise ValueError("single anchor needs an explicit exponent (P, n, b)")
        p, n, b = anchors[0]
        _require(p > 0 and n > 0, "anchor power and occupation must be > 0")
        return PowerLaw(A=n / p ** b, b=b)
    if len(anchors) != 2:
        raise ValueError("calibrate_power_law takes one or two anchors")
    (p1, n1), (p2, n2) = anchors
    _require(min(p1, p2, n1, n2) > 0, "anchor values must be > 0")
    _require(p1 != p2, "anchor powers must differ")
    b = np.log(n2 / n1) / np.log(p2 / p1)
    if abs(b) > b_max:
        raise ValueError(
            f"anchors imply exponent b = {b:.2f}, outside |b| <= {b_max:g}; "
            "these occupations are not one power law - select a state preset "
            "(readout_107nw or readout_100nw) instead")
    return PowerLaw(A=n1 / p1 ** b, b=b)


def idt_passband(freq, device: DeviceParams):
    """Lorentzian IDT passband weight, 1 at the IDT resonance."""
    half = device.idt_bw / 2
    return half ** 2 / ((np.asarray(freq, dtype=float) - device.idt_center) ** 2 + half ** 2)


def linescan_occupation(detunings, device: DeviceParams, n_th, peak_n_coh,
                        idt_envelope=False):
    """Expected total occupation vs RF drive detuning for a CW linescan.

    peak_n_coh is the coherent occupation at zero detuning.  With
    idt_envelope the drive power is additionally weighted by the IDT
    passband at the absolute drive frequency (off by default; whether the
    measured linescan contains this factor is not established).
    """
    detunings = np.asarray(detunings, dtype=float)
    _require(n_th >= 0 and peak_n_coh >= 0, "occupations must be >= 0")
    half = device.gamma_m / 2
    lor = half ** 2 / (detunings ** 2 + half ** 2)
    if idt_envelope:
        f_drive = device.omega_m + detunings
        lor = lor * idt_passband(f_drive, device) / idt_passband(device.omega_m, device)
    return n_th + peak_n_coh * lor
