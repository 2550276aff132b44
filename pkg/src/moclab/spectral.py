"""Spectral diagnostics of the numerical error."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFit, InsufficientSamples, NonPositiveNorm, StencilOverflow


@dataclass
class SpectrumSeries:
    """Fourier amplitudes of the error at a sequence of times.

    ``amplitudes[j]`` has shape ``(M, ncomp)`` with bin ``q`` at wavenumber
    ``q * dk``, ``dk = 2 pi / L``.
    """

    times: np.ndarray
    k: np.ndarray
    amplitudes: list
    h: float
    windowed: bool
    meta: dict = field(default_factory=dict)

    def norms(self, j):
        return np.linalg.norm(self.amplitudes[j], axis=1)


def window(grid):
    """Super-Gaussian window of order 8 and width ``L/3`` about the midpoint."""
    return np.exp(-(((grid.x - grid.x_mid) / (grid.L / 3)) ** 8))


def window_error(err, grid):
    """Multiply each error component by :func:`window`."""
    w = window(grid)
    return err * (w[:, None] if err.ndim == 2 else w)


def dft(err):
    """Forward DFT over nodes ``0..M-1`` with ``1/M`` normalization."""
    vals = np.asarray(err)[:-1]
    return np.fft.fft(vals, axis=0) / vals.shape[0]


def spectrum(err, grid, windowed=True):
    """Amplitudes of ``err`` (shape ``(M+1, ncomp)``) on the grid ``k = q dk``."""
    e = window_error(err, grid) if windowed else err
    amp = dft(e)
    k = 2 * np.pi / grid.L * np.arange(grid.M)
    return k, amp


def spectrum_series(series, grid, windowed=True):
    amps = []
    k = None
    for err in series.errors:
        k, a = spectrum(err, grid, windowed)
        amps.append(a)
    return SpectrumSeries(np.asarray(series.times), k, amps, grid.h, windowed,
                          {"normalization": "1/M", "window": "exp(-((x-xc)/(L/3))^8)"})


def center_bin(kh, M):
    """Bin nearest ``kh`` (in ``[0, 2 pi)``) on an ``M``-point grid."""
    return int(round(kh * M / (2 * np.pi)))


def averaged_norm(amp, k_bin, m_ave):
    """RMS of the per-bin Euclidean norms over ``k_bin - m_ave .. k_bin + m_ave``.

    ``amp`` is an ``(M, ncomp)`` amplitude array or a 1-D array of norms.
    """
    amp = np.asarray(amp)
    M = amp.shape[0]
    m_ave = int(m_ave)
    if m_ave < 0 or k_bin - m_ave < 0 or k_bin + m_ave >= M:
        raise StencilOverflow(f"bins {k_bin}+-{m_ave} outside 0..{M - 1}")
    sl = amp[k_bin - m_ave:k_bin + m_ave + 1]
    nrm = np.abs(sl) if sl.ndim == 1 else np.linalg.norm(sl, axis=1)
    return float(np.sqrt(np.mean(nrm**2)))


def mid_norms(spec, m_ave, kh=np.pi / 2):
    """Averaged norm at ``kh`` for every time of a :class:`SpectrumSeries`."""
    M = len(spec.k)
    q = center_bin(kh, M)
    return np.array([averaged_norm(a, q, m_ave) for a in spec.amplitudes])


def staircase_lambda(times, norms, L, h):
    """``|lambda|`` from a log-linear fit of norms sampled every ``L``.

    Fits ``log10 norm = c + r t`` and returns ``10 ** (h r)``.
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if len(times) < 4:
        raise InsufficientSamples(f"need at least 4 samples, got {len(times)}")
    if np.any(~(norms > 0)):
        raise NonPositiveNorm("norms must be positive")
    r = np.polyfit(times, np.log10(norms), 1)[0]
    return float(10 ** (h * r))


def loglog_slope(hs, values):
    """Least-squares slope of ``ln values`` against ``ln h``."""
    hs = np.asarray(hs, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(hs) < 3 or len(np.unique(hs)) < len(hs):
        raise DegenerateFit("need at least 3 distinct h values")
    if np.any(~(values > 0)):
        raise DegenerateFit("values must be positive")
    return float(np.polyfit(np.log(hs), np.log(values), 1)[0])


def dip_ratio(amps, m_near, m_away, kh_near=np.pi / 2, kh_away=np.pi / 2):
    """Ratios of log-decrements near ``pi/2`` to those of the wider box.

    ``amps`` holds amplitude arrays at three or more equally spaced times.
    Returns one ratio per consecutive pair.
    """
    M = np.asarray(amps[0]).shape[0]
    qn = center_bin(kh_near, M)
    qa = center_bin(kh_away, M)
    yn = np.log([averaged_norm(a, qn, m_near) for a in amps])
    ya = np.log([averaged_norm(a, qa, m_away) for a in amps])
    return tuple(float(v) for v in np.diff(yn) / np.diff(ya))
