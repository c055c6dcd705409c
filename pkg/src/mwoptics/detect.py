"""Monte Carlo click-stream generation for pulsed and CW experiments.

Sampling scheme: per-pulse (or per-time-step) Poisson means are computed
from an exact draw of the mechanical amplitude, and the clicks of a whole
chunk are then drawn at once as K ~ Poisson(sum(lambda)) positions placed
by inverse CDF over the cumulative intensity.  This is identical in law to
drawing Poisson(lambda_i) per pulse and is what makes 1e9-pulse runs cheap.

Determinism: work is cut into fixed-size chunks and every chunk gets its
own Philox generator keyed on (seed, chunk_index), so the output is
byte-identical for any worker count.  CW runs are sequential because the
thermal amplitude threads through time; they ignore the workers argument.
"""

import multiprocessing
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import h as PLANCK_H
from scipy.signal import lfilter

from . import dynamics
from .clicks import ClickStream
from .config import digest_mapping
from .params import (RF_PHONON_EFFICIENCY, DeviceParams, EfficiencyChain,
                     MechanicalState, OpticalPulse, RFPulse, _require)

PULSE_CHUNK = 1 << 21      # pulses per deterministic chunk
STEP_CHUNK = 1 << 22       # CW grid points per chunk


@dataclass(frozen=True)
class PulseSequence:
    """One repeated RF-drive + optical-readout cycle.

    readout_time is the moment (relative to the RF pulse start) at which
    the coherent amplitude is read out; it defaults to the RF pulse end.
    The default repetition period of 50 us is an assumption: it is much
    longer than the ~1.5 us mechanical lifetime, which is what justifies
    redrawing the thermal amplitude independently every repetition.
    """

    repetitions: int
    readout: OpticalPulse
    rf: RFPulse = None
    rep_period: float = 50e-6
    readout_time: float = None

    def __post_init__(self):
        _require(self.repetitions >= 1, "repetitions must be >= 1")
        _require(self.rep_period > self.readout.duration,
                 "rep_period must exceed the readout duration")
        if self.readout_time is None and self.rf is not None:
            object.__setattr__(self, "readout_time", self.rf.duration)
        _require(self.readout_time is None or self.readout_time >= 0,
                 "readout_time must be >= 0")


def _chunk_rng(seed, chunk_index):
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([int(seed), int(chunk_index)])))


def sample_amplitude(state: MechanicalState, rng) -> complex:
    """One exact draw of the mode amplitude alpha = beta + thermal noise.

    The noise is complex Gaussian with variance n_th/2 per quadrature, so
    E[|alpha|^2] = n_coh + n_th.
    """
    s = np.sqrt(state.n_th / 2.0)
    return state.beta + s * complex(rng.standard_normal(), rng.standard_normal())


def sample_amplitudes(state: MechanicalState, n, rng):
    """Vector of n independent amplitude draws (re then im, fixed order)."""
    s = np.sqrt(state.n_th / 2.0)
    re = state.beta.real + s * rng.standard_normal(n)
    im = state.beta.imag + s * rng.standard_normal(n)
    return re + 1j * im


def _draw_clicks(rng, lam, n_items):
    """K ~ Poisson(sum lam) click positions over the intensity vector lam.

    Returns (item_index, detector, frac) with frac a U[0,1) within-item
    offset.  Identical in law to independent Poisson draws per item.
    """
    cum = np.cumsum(lam)
    total = cum[-1] if n_items else 0.0
    k = int(rng.poisson(total)) if total > 0 else 0
    if k == 0:
        return (np.empty(0, np.int64), np.empty(0, np.uint8),
                np.empty(0, float))
    u = rng.random(k) * total
    idx = np.minimum(np.searchsorted(cum, u, side="right"), n_items - 1)
    det = rng.integers(0, 2, size=k, dtype=np.uint8)
    frac = rng.random(k)
    return idx.astype(np.int64), det, frac


def _pulsed_chunk(args):
    (seed, chunk, start, count, beta_re, beta_im, n_th, per_phonon, floor,
     rep_ns, gate_ns) = args
    rng = _chunk_rng(seed, chunk)
    s = np.sqrt(n_th / 2.0)
    re = beta_re + s * rng.standard_normal(count)
    im = beta_im + s * rng.standard_normal(count)
    lam = per_phonon * (re * re + im * im) + floor
    idx, det, frac = _draw_clicks(rng, lam, count)
    pulse = start + idx
    ts = pulse.astype(np.uint64) * np.uint64(rep_ns) \
        + np.floor(frac * gate_ns).astype(np.uint64)
    order = np.lexsort((ts, pulse))
    return chunk, det[order], pulse[order], ts[order]


def _apply_dead_time(stream_arrays, dead_ns):
    det, pulse, ts = stream_arrays
    keep = np.ones(det.size, dtype=bool)
    for d in (0, 1):
        sel = np.flatnonzero(det == d)
        last = -np.inf
        for j in sel:
            t = float(ts[j])
            if t - last < dead_ns:
                keep[j] = False
            else:
                last = t
    return det[keep], pulse[keep], ts[keep]


def simulate_pulsed(seq: PulseSequence, state0: MechanicalState,
                    chain: EfficiencyChain, device: DeviceParams, seed,
                    workers=1, rf_phonon_eff=RF_PHONON_EFFICIENCY) -> ClickStream:
    """Click stream of a pulsed readout experiment.

    Per repetition: a fresh thermal draw (memoryless between pulses), the
    coherent amplitude left by the RF pulse at the readout time, a Poisson
    photon count with mean |alpha|^2 * p_r * eta_det (red detuning; (|alpha|^2+1)
    for blue), and a 50/50 split onto the two detectors.
    """
    _require(seed is not None, "seed is mandatory")
    if seq.rf is not None:
        omega = dynamics.drive_rate_for_pulse(seq.rf, device,
                                              chain.rf_atten_db, rf_phonon_eff)
        resp = dynamics.transient_response(seq.rf, device,
                                           [seq.readout_time], omega,
                                           beta0=state0.beta)
        beta = complex(resp.beta_t[-1])
    else:
        beta = state0.beta

    c = chain.click_prob_per_phonon
    gate = seq.readout.duration
    floor = 2.0 * chain.dark_rate * gate
    if seq.readout.detuning == "blue":
        floor += c                      # spontaneous Stokes term, <n>+1
    rep_ns = int(round(seq.rep_period * 1e9))
    gate_ns = max(int(round(gate * 1e9)), 1)

    n = int(seq.repetitions)
    starts = range(0, n, PULSE_CHUNK)
    jobs = [(seed, ci, s0, min(PULSE_CHUNK, n - s0), beta.real, beta.imag,
             state0.n_th, c, floor, rep_ns, gate_ns)
            for ci, s0 in enumerate(starts)]

    if workers > 1 and len(jobs) > 1:
        with multiprocessing.Pool(workers) as pool:
            parts = pool.map(_pulsed_chunk, jobs, chunksize=1)
    else:
        parts = [_pulsed_chunk(j) for j in jobs]
    parts.sort(key=lambda p: p[0])
    det = np.concatenate([p[1] for p in parts]) if parts else np.empty(0, np.uint8)
    pulse = np.concatenate([p[2] for p in parts]) if parts else np.empty(0, np.int64)
    ts = np.concatenate([p[3] for p in parts]) if parts else np.empty(0, np.uint64)

    if chain.dead_time > 0:
        det, pulse, ts = _apply_dead_time((det, pulse, ts),
                                          chain.dead_time * 1e9)

    meta = {
        "mode": "pulsed",
        "seed": int(seed),
        "n_pulses": n,
        "rep_period_ns": rep_ns,
        "detuning": seq.readout.detuning,
        "config_sha256": digest_mapping(_pulsed_config(seq, state0, chain,
                                                       device, rf_phonon_eff)),
    }
    return ClickStream(det, pulse, ts, meta=meta)


def _pulsed_config(seq, state0, chain, device, rf_phonon_eff):
    return {
        "kind": "pulsed",
        "repetitions": int(seq.repetitions),
        "rep_period": seq.rep_period,
        "readout_time": seq.readout_time,
        "readout": vars(seq.readout).copy(),
        "rf": None if seq.rf is None else vars(seq.rf).copy(),
        "state": {"n_th": state0.n_th,
                  "beta": [state0.beta.real, state0.beta.imag]},
        "chain": {k: v for k, v in vars(chain).items()},
        "device": vars(device).copy(),
        "rf_phonon_eff": rf_phonon_eff,
    }


def simulate_cw(duration, state: MechanicalState, device: DeviceParams,
                chain: EfficiencyChain, seed, rate_per_phonon,
                step=None, workers=1) -> ClickStream:
    """Click stream of a CW red-sideband readout.

    The thermal amplitude follows an exact AR(1) discretization of the
    mean-reverting complex Gaussian process (relaxation pi*gamma_m,
    stationary variance n_th); clicks are an inhomogeneous Poisson process
    with intensity rate_per_phonon * |beta + g(t)|^2 split over the two
    detectors.  workers is accepted for interface symmetry and ignored:
    the process state threads sequentially through time.
    """
    _require(seed is not None, "seed is mandatory")
    _require(duration > 0, "duration must be > 0")
    _require(rate_per_phonon >= 0, "rate_per_phonon must be >= 0")
    if step is None:
        step = 1.0 / (50.0 * device.gamma_m)
    _require(0 < step <= 1.0 / (50.0 * device.gamma_m),
             "step must resolve the mechanical decay (<= 1/(50*gamma_m))")

    n_steps = max(int(round(duration / step)), 1)
    short = duration < 20.0 / device.gamma_m
    if short:
        warnings.warn("CW duration is short relative to the mechanical "
                      "lifetime; correlation estimates will be poor",
                      RuntimeWarning, stacklevel=2)

    a = np.exp(-np.pi * device.gamma_m * step)
    sig = np.sqrt(state.n_th * (1.0 - a * a) / 2.0)   # per quadrature
    floor = 2.0 * chain.dark_rate * step

    rng0 = _chunk_rng(seed, 0)
    s0 = np.sqrt(state.n_th / 2.0)
    g_prev = s0 * complex(rng0.standard_normal(), rng0.standard_normal())

    det_parts, ts_parts = [], []
    step_ns = step * 1e9
    for chunk, start in enumerate(range(0, n_steps, STEP_CHUNK), 1):
        count = min(STEP_CHUNK, n_steps - start)
        rng = _chunk_rng(seed, chunk)
        w = sig * (rng.standard_normal(count) + 1j * rng.standard_normal(count))
        g, _ = lfilter([1.0], [1.0, -a], w, zi=np.array([a * g_prev]))
        g_prev = g[-1]
        alpha2 = np.abs(state.beta + g) ** 2
        lam = rate_per_phonon * alpha2 * step + floor
        idx, det, frac = _draw_clicks(rng, lam, count)
        ts = np.floor((start + idx + frac) * step_ns).astype(np.uint64)
        order = np.argsort(ts, kind="stable")
        det_parts.append(det[order])
        ts_parts.append(ts[order])

    det = np.concatenate(det_parts) if det_parts else np.empty(0, np.uint8)
    ts = np.concatenate(ts_parts) if ts_parts else np.empty(0, np.uint64)
    pulse = np.full(det.size, -1, dtype=np.int64)

    if chain.dead_time > 0:
        det, pulse, ts = _apply_dead_time((det, pulse, ts),
                                          chain.dead_time * 1e9)

    meta = {
        "mode": "cw",
        "seed": int(seed),
        "duration_s": n_steps * step,
        "step_s": step,
        "rate_per_phonon": rate_per_phonon,
        "config_sha256": digest_mapping({
            "kind": "cw", "duration": duration, "step": step,
            "rate_per_phonon": rate_per_phonon,
            "state": {"n_th": state.n_th,
                      "beta": [state.beta.real, state.beta.imag]},
            "chain": {k: v for k, v in vars(chain).items()},
            "device": vars(device).copy(),
        }),
    }
    if short:
        meta["warnings"] = "short_duration"
    return ClickStream(det, pulse, ts, meta=meta)


def rf_photons_per_pulse(pulse: RFPulse, chain: EfficiencyChain) -> float:
    """RF photons reaching the device input during one drive pulse."""
    if pulse.freq <= 0:
        raise ValueError("pulse frequency must be > 0")
    p_watts = 10 ** ((pulse.power_dbm - chain.rf_atten_db) / 10) * 1e-3
    return p_watts * pulse.duration / (PLANCK_H * pulse.freq)


def simulate_fringe(n_coh, n_th, v_max, phases, mean_counts, seed):
    """Poisson photon counts of an interferometer phase sweep.

    Expected counts are mean_counts*(1 + V cos(phase)) with V the
    displaced-thermal visibility model.
    """
    from .photostats import visibility_model
    v = visibility_model(n_coh, n_th, v_max)
    phases = np.asarray(phases, dtype=float)
    rng = _chunk_rng(seed, 0)
    expected = mean_counts * (1.0 + v * np.cos(phases))
    return rng.poisson(expected).astype(np.int64), expected


def simulate_linescan(detunings, device: DeviceParams, n_th, peak_n_coh,
                      counts_per_phonon, seed, idt_envelope=False):
    """Poisson-noised RF-frequency linescan (counts vs drive detuning)."""
    occ = dynamics.linescan_occupation(detunings, device, n_th, peak_n_coh,
                                       idt_envelope=idt_envelope)
    expected = counts_per_phonon * occ
    rng = _chunk_rng(seed, 0)
    return rng.poisson(expected).astype(np.int64), expected
