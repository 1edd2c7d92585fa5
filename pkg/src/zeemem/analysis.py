"""Extraction of summary quantities from retrieved traces.

Peak intensities per storage time, envelope decay fits (exponential vs
Gaussian, chosen by goodness of fit), dominant oscillation frequencies
of the peak series, and straight-line frequency-versus-field fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit
from scipy.signal import find_peaks

from .dynamics import RetrievedTrace

ENVELOPE_MODELS = ("exponential", "gaussian")

# local maxima of the peak series must protrude by this fraction of the
# series range to count as envelope points
_PROMINENCE_FRACTION = 0.02

# spectral peaks below 1.5 cycles per span are indistinguishable from
# residual trend and are ignored
_MIN_CYCLES = 1.5


class AnalysisError(ValueError):
    pass


@dataclass(eq=False)
class PeakSeries:
    """Per-storage-time maximum of the retrieved intensity."""

    storage_times: np.ndarray
    peak_intensity: np.ndarray
    peak_time: np.ndarray

    def __post_init__(self) -> None:
        self.storage_times = np.asarray(self.storage_times, dtype=float)
        self.peak_intensity = np.asarray(self.peak_intensity, dtype=float)
        self.peak_time = np.asarray(self.peak_time, dtype=float)
        n = self.storage_times.size
        if self.peak_intensity.size != n or self.peak_time.size != n:
            raise AnalysisError("peak series arrays must have equal length")
        if n == 0:
            raise AnalysisError("peak series must be nonempty")
        if not (
            np.isfinite(self.storage_times).all()
            and np.isfinite(self.peak_intensity).all()
            and np.isfinite(self.peak_time).all()
        ):
            raise AnalysisError("peak series must be finite")
        if (self.peak_intensity < 0).any():
            raise AnalysisError("peak intensities must be >= 0")


@dataclass(frozen=True)
class FitReport:
    """Envelope decay fit: model(t) = amplitude * decay(t / tau) + offset."""

    model: str
    tau: float
    amplitude: float
    offset: float
    r_squared: float

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.model == "exponential":
            return self.amplitude * np.exp(-t / self.tau) + self.offset
        return self.amplitude * np.exp(-((t / self.tau) ** 2)) + self.offset


@dataclass(eq=False)
class SpectrumReport:
    """Strongest spectral peaks of the peak series, strongest first."""

    frequencies: np.ndarray  # Hz
    amplitudes: np.ndarray
    nyquist_hz: float

    def __post_init__(self) -> None:
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.amplitudes = np.asarray(self.amplitudes, dtype=float)
        if self.frequencies.size != self.amplitudes.size:
            raise AnalysisError("spectrum arrays must have equal length")
        if self.frequencies.size > 8:
            raise AnalysisError("at most eight spectral peaks are reported")
        if (self.frequencies < 0).any() or (self.frequencies > self.nyquist_hz).any():
            raise AnalysisError("spectral peaks must lie within the Nyquist range")


def extract_peaks(traces: list[RetrievedTrace]) -> PeakSeries:
    """Maximum intensity per trace; ties resolve to the earliest instant."""
    if not traces:
        raise AnalysisError("no traces given")
    storage, peaks, times = [], [], []
    for trace in traces:
        if trace.intensity.size == 0:
            raise AnalysisError("empty trace")
        idx = int(np.argmax(trace.intensity))
        storage.append(trace.storage_time)
        peaks.append(float(trace.intensity[idx]))
        times.append(float(trace.times[idx]))
    return PeakSeries(np.array(storage), np.array(peaks), np.array(times))


def _exponential(t, a, tau, c):
    return a * np.exp(-t / tau) + c


def _gaussian(t, a, tau, c):
    return a * np.exp(-((t / tau) ** 2)) + c


def _r_squared(y, fit):
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    scale = max(float(np.max(np.abs(y))), 1e-300)
    if ss_tot <= (1e-12 * scale) ** 2 * y.size:
        # constant series: count the fit as perfect when its residual
        # sits at optimizer rounding level
        return 1.0 if ss_res <= (1e-8 * scale) ** 2 * y.size else 0.0
    return max(0.0, min(1.0, 1.0 - ss_res / ss_tot))


def _fit_single_model(name, t, y):
    func = _exponential if name == "exponential" else _gaussian
    span = float(t[-1] - t[0]) if t[-1] > t[0] else float(max(t[-1], 1.0))
    a0 = float(y.max() - y.min())
    c0 = float(y.min())
    target = c0 + a0 / math.e
    below = np.nonzero(y <= target)[0]
    tau0 = float(t[below[0]] - t[0]) if below.size and below[0] > 0 else span / 3.0
    lo, hi = span * 1e-3, span * 1e3
    tau0 = min(max(tau0, lo * 1.01), hi * 0.99)
    try:
        params, _ = curve_fit(
            func,
            t,
            y,
            p0=(a0 if a0 > 0 else 1.0, tau0, c0),
            bounds=([0.0, lo, -np.inf], [np.inf, hi, np.inf]),
            maxfev=20000,
            method="trf",
        )
    except (RuntimeError, ValueError) as exc:
        raise AnalysisError(f"{name} envelope fit did not converge: {exc}") from exc
    a, tau, c = (float(p) for p in params)
    return FitReport(name, tau, a, c, _r_squared(y, func(t, a, tau, c)))


def _envelope_points(series: PeakSeries):
    y = series.peak_intensity
    spread = float(y.max() - y.min())
    if spread == 0.0:
        return np.arange(y.size)
    idx, _ = find_peaks(y, prominence=_PROMINENCE_FRACTION * spread)
    idx = list(idx)
    if y.size >= 2 and y[0] >= y[1]:
        idx.insert(0, 0)
    if y.size >= 2 and y[-1] >= y[-2]:
        idx.append(y.size - 1)
    idx = sorted(set(idx))
    if len(idx) < 4:
        return np.arange(y.size)
    return np.array(idx)


def fit_envelope(series: PeakSeries) -> FitReport:
    """Fit decaying models through the series' upper envelope.

    When the series oscillates, only its local maxima (plus qualifying
    endpoints) are fitted; otherwise all points are used. The model
    with the higher r_squared wins.
    """
    if series.storage_times.size < 4:
        raise AnalysisError("envelope fit needs at least 4 points")
    order = np.argsort(series.storage_times)
    t = series.storage_times[order]
    y = series.peak_intensity[order]
    keep = _envelope_points(PeakSeries(t, y, series.peak_time[order]))
    t_env, y_env = t[keep], y[keep]

    reports, failures = [], []
    for name in ENVELOPE_MODELS:
        try:
            reports.append(_fit_single_model(name, t_env, y_env))
        except AnalysisError as exc:
            failures.append(str(exc))
    if not reports:
        raise AnalysisError("; ".join(failures))
    return max(reports, key=lambda rep: rep.r_squared)


def _detrended(series: PeakSeries):
    t, y = series.storage_times, series.peak_intensity
    try:
        reports = [_fit_single_model(name, t, y) for name in ENVELOPE_MODELS]
        trend = max(reports, key=lambda rep: rep.r_squared).evaluate(t)
    except AnalysisError:
        trend = np.full_like(y, y.mean())
    return y - trend


def dominant_frequencies(series: PeakSeries, max_peaks: int = 3) -> SpectrumReport:
    """Strongest oscillation frequencies of the peak series.

    The series is detrended by its best-fitting decay model, Hann
    windowed, zero padded eightfold, and the spectrum's top local
    maxima are refined by quadratic interpolation.
    """
    n = series.storage_times.size
    if n < 8:
        raise AnalysisError("frequency extraction needs at least 8 points")
    order = np.argsort(series.storage_times)
    t = series.storage_times[order]
    steps = np.diff(t)
    dt = float(steps.mean())
    if dt <= 0 or (np.abs(steps - dt) > 1e-6 * dt).any():
        raise AnalysisError("storage times must form a uniform grid")
    resid = _detrended(PeakSeries(t, series.peak_intensity[order], series.peak_time[order]))

    padded = 8 * (1 << int(math.ceil(math.log2(n))))
    # Hann taper: leakage from the residual's truncation edges otherwise
    # biases heavily damped lines by several percent.
    spectrum = np.abs(np.fft.rfft(resid * np.hanning(n), padded))
    freqs = np.fft.rfftfreq(padded, d=dt)
    nyquist = 0.5 / dt

    idx, _ = find_peaks(spectrum)
    f_min = _MIN_CYCLES / (t[-1] - t[0])
    idx = idx[freqs[idx] >= f_min]
    idx = idx[np.argsort(spectrum[idx])[::-1][:max_peaks]]

    out_f, out_a = [], []
    bin_width = freqs[1] - freqs[0]
    for k in idx:
        left, mid, right = spectrum[k - 1], spectrum[k], spectrum[k + 1]
        denom = left - 2.0 * mid + right
        delta = 0.5 * (left - right) / denom if denom != 0.0 else 0.0
        out_f.append(min(freqs[k] + delta * bin_width, nyquist))
        out_a.append(mid - 0.25 * (left - right) * delta)
    return SpectrumReport(np.array(out_f), np.array(out_a), nyquist)


def fundamental_frequency(report: SpectrumReport, rel_tol: float = 0.08,
                          min_amplitude_ratio: float = 0.05) -> tuple[float, float]:
    """Fundamental line of a spectrum whose strongest peak may be an overtone.

    A peak-intensity series built from a squared signal beats at twice
    the underlying precession frequency, so the strongest spectral line
    is often the second harmonic while the fundamental sits below it.
    Returns ``(fundamental_hz, companion_hz)``: if a line near half the
    dominant frequency exists with sufficient amplitude it is reported
    as the fundamental with the dominant as companion, otherwise the
    dominant itself is returned with the next-strongest line (0.0 when
    the report holds a single line).
    """
    freqs = np.asarray(report.frequencies, dtype=float)
    amps = np.asarray(report.amplitudes, dtype=float)
    if freqs.size == 0:
        raise AnalysisError("spectrum report holds no lines")
    dominant = freqs[0]
    half = 0.5 * dominant
    for f, a in zip(freqs[1:], amps[1:]):
        if half > 0.0 and abs(f / half - 1.0) <= rel_tol and a >= min_amplitude_ratio * amps[0]:
            return float(f), float(dominant)
    companion = float(freqs[1]) if freqs.size > 1 else 0.0
    return float(dominant), companion


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r_squared: float


def linear_fit(x, y) -> LineFit:
    """Ordinary least squares line through (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise AnalysisError("x and y must be 1-d arrays of equal length")
    if x.size < 2:
        raise AnalysisError("linear fit needs at least 2 points")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise AnalysisError("linear fit requires finite data")
    if np.ptp(x) == 0.0:
        raise AnalysisError("x values are degenerate")
    slope, intercept = np.polyfit(x, y, 1)
    return LineFit(float(slope), float(intercept), _r_squared(y, slope * x + intercept))
