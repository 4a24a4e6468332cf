"""Decaying-sinusoid least-squares fitting for Rabi records.

Model: y(t) = c0 + c1 * exp(-t/tau_bg) + A * exp(-(t/tau)^beta) * cos(2 pi f t + phi)

The stretched-exponential envelope covers both pumping-limited decay
(beta ~ 1) and inhomogeneous dephasing (beta > 1); its 1/e time is tau
for any beta.  The exponential background absorbs the optical-pumping
drift of the record.  Initial guesses come from an FFT peak (or an
explicit frequency hint) and a Hilbert envelope.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.optimize import OptimizeWarning, curve_fit
from scipy.signal import hilbert

from .errors import FitFailureError

__all__ = ["SinusoidFit", "fit_decaying_sinusoid"]


@dataclass(frozen=True)
class SinusoidFit:
    freq_kHz: float
    tau_ms: float  # 1/e time of the oscillation envelope
    beta: float
    amplitude: float
    phase_rad: float
    residual_rms: float


def _model(t, c0, c1, tau_bg, amp, tau, beta, f, phi):
    bg = c0 + c1 * np.exp(-t / abs(tau_bg))
    with np.errstate(over="ignore"):
        z = np.clip((t / abs(tau)) ** abs(beta), 0.0, 700.0)
    return bg + amp * np.exp(-z) * np.cos(2.0 * np.pi * f * t + phi)


def _background(t, c0, c1, tau_bg):
    return c0 + c1 * np.exp(-t / abs(tau_bg))


def _fit_background(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    p0 = [float(y[-1]), float(y[0] - y[-1]), float(t[-1]) / 2.0]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(_background, t, y, p0=p0, maxfev=5000)
        return np.asarray(popt, dtype=float)
    except RuntimeError:
        return np.array(p0)


def _spectral_guess(t: np.ndarray, y: np.ndarray) -> float:
    dt = t[1] - t[0]
    yd = y - np.polyval(np.polyfit(t, y, 2), t)
    spec = np.abs(np.fft.rfft(yd * np.hanning(len(yd))))
    freqs = np.fft.rfftfreq(len(yd), dt)
    spec[0] = 0.0
    return float(freqs[int(np.argmax(spec))])


def fit_decaying_sinusoid(t_ms: np.ndarray, y: np.ndarray,
                          min_amp_over_residual: float = 5.0,
                          freq_hint_kHz: float | None = None) -> SinusoidFit:
    """Fit a decaying sinusoid; frequency returned in kHz for t in ms.

    ``freq_hint_kHz`` seeds the frequency instead of the FFT peak, which
    is needed when a small oscillation rides on a large pumping drift.
    Raises :class:`FitFailureError` when no oscillation is resolvable or
    the fitted amplitude is below ``min_amp_over_residual`` times the fit
    residual.
    """
    t = np.asarray(t_ms, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(t) < 16:
        raise FitFailureError("record too short to fit")
    f0 = freq_hint_kHz if freq_hint_kHz is not None else _spectral_guess(t, y)
    if f0 <= 0:
        raise FitFailureError("no spectral peak found")
    if f0 * (t[-1] - t[0]) < 3.0:
        raise FitFailureError(
            f"record holds < 3 oscillation periods at {f0:g} kHz"
        )
    dt = t[1] - t[0]
    nyquist = 0.5 / dt
    # background from a one-period moving average so the oscillation
    # itself cannot contaminate the drift estimate
    window = int(np.clip(round(1.0 / (f0 * dt)), 1, len(t) // 4))
    bg = _fit_background(t, uniform_filter1d(y, window, mode="nearest"))
    yd = y - _background(t, *bg)

    env = np.abs(hilbert(yd))
    amp0 = float(np.percentile(env, 90))
    # crude envelope time from the first drop below amp0/e, else span
    below = np.nonzero(env < amp0 / np.e)[0]
    tau0 = float(t[below[0]]) if len(below) and below[0] > 0 else float(t[-1])
    p0 = [bg[0], bg[1], max(abs(bg[2]), t[-1] / 4.0), amp0, tau0, 1.0, f0, 0.0]
    try:
        with warnings.catch_warnings():
            # undamped records leave the envelope parameters unconstrained
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(_model, t, y, p0=p0, maxfev=20000)
        if not 0.0 < abs(popt[6]) < nyquist:
            raise RuntimeError(
                f"fitted frequency {popt[6]:g} kHz outside (0, Nyquist)"
            )
        resid = y - _model(t, *popt)
        fit = SinusoidFit(
            freq_kHz=abs(popt[6]),
            tau_ms=abs(popt[4]),
            beta=abs(popt[5]),
            amplitude=abs(popt[3]),
            phase_rad=popt[7],
            residual_rms=float(np.sqrt(np.mean(resid**2))),
        )
    except RuntimeError as exc:
        # fallback: spectral peak with a coarse envelope time
        resid_rms = float(np.std(yd)) * 0.5
        fit = SinusoidFit(freq_kHz=f0, tau_ms=tau0, beta=1.0, amplitude=amp0,
                          phase_rad=0.0, residual_rms=resid_rms)
        if amp0 < min_amp_over_residual * resid_rms:
            raise FitFailureError(f"decaying-sinusoid fit failed: {exc}") from exc
    if fit.amplitude < min_amp_over_residual * fit.residual_rms:
        raise FitFailureError(
            f"oscillation amplitude {fit.amplitude:g} below "
            f"{min_amp_over_residual}x residual {fit.residual_rms:g}"
        )
    return fit
