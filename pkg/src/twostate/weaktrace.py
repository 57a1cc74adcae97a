"""Pointer model of the weak trace written by vibrating mirrors.

Each source-to-detector path contributes a transversely displaced copy of
the beam's Gaussian profile. The displacement is the sum of the
instantaneous offsets of the vibrating mirrors along that path. A
quad-cell detector reads the upper-minus-lower intensity, and its time
series is Fourier analysed.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import simpson
from scipy.signal import get_window

from .circuit import Circuit, Detector, Mirror, VibrationSpec, detector_vector, forward_amplitudes
from .errors import ComplexityError, ConfigError
from .tsvf import OVERLAP_FLOOR, wire_weak_values

MAX_COMPONENTS = 4096
SIGMA = 1.0


@dataclass(frozen=True, eq=False)
class DisplacedGaussianSum:
    """``psi(y) = sum_k amp_k G(y - shift_k)`` with ``G`` the unit-norm Gaussian."""

    amps: np.ndarray
    shifts: np.ndarray
    sigma: float = SIGMA

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        shifts = np.asarray(self.shifts, dtype=float).reshape(-1)
        if amps.shape != shifts.shape:
            raise ValueError("need one shift per component")
        if len(amps) > MAX_COMPONENTS:
            raise ComplexityError(f"{len(amps)} components exceed the limit of {MAX_COMPONENTS}")
        if not np.all(np.isfinite(shifts)):
            raise ValueError("shifts must be finite")
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "shifts", shifts)

    @property
    def components(self) -> list[tuple[complex, float]]:
        return [(complex(a), float(s)) for a, s in zip(self.amps, self.shifts)]


@dataclass(frozen=True)
class SpectrumConfig:
    sample_rate: float = 1000.0
    duration: float = 10.0
    noise_std: float = 0.0
    seed: int = 0
    grid_halfwidth: float = 8.0
    grid_points: int = 2048

    def check(self, freqs) -> None:
        if self.sample_rate <= 0 or self.duration <= 0:
            raise ConfigError("sample_rate and duration must be positive")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be non-negative")
        if self.grid_points < 4 or self.grid_points % 4:
            raise ConfigError("grid_points must be a positive multiple of 4")
        if self.grid_halfwidth <= 0:
            raise ConfigError("grid_halfwidth must be positive")
        for f in freqs:
            if self.sample_rate <= 2 * f:
                raise ConfigError(f"sample rate {self.sample_rate} Hz aliases the {f} Hz vibration")
            if self.duration * f < 10:
                raise ConfigError(f"duration covers fewer than 10 periods of the {f} Hz vibration")


@dataclass(frozen=True)
class Peak:
    freq: float
    power: float
    relative_power: float


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    freqs: np.ndarray
    powers: np.ndarray
    peaks: dict[str, Peak]
    config: SpectrumConfig = field(default_factory=SpectrumConfig)


# -- paths ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Path:
    amp: complex
    mirrors: tuple[VibrationSpec, ...]


def _paths(c: Circuit, detector: str, limit: int = MAX_COMPONENTS) -> list[_Path]:
    """Every source-to-detector path with its amplitude and vibrating mirrors.

    The amplitude is the element-matrix product along the path applied to
    the source amplitude and projected on the detector's postselection
    vector. Paths fed by a zero source amplitude are dropped.
    """
    det = c.detector(detector)
    phi = detector_vector(c, detector, forward_amplitudes(c))
    dim = c.dim
    local = {id(e): m for e, m in zip(c.order, c._matrices)}
    found: list[_Path] = []

    def walk(wire: str, vec: np.ndarray, mirrors: tuple) -> None:
        if wire == det.wire:
            if len(found) >= limit:
                raise ComplexityError(f"more than {limit} source-to-detector paths")
            found.append(_Path(complex(np.vdot(phi, vec)), mirrors))
            return
        e = c.consumer(wire)
        if isinstance(e, Detector) or not e.outputs:
            return
        m = local[id(e)]
        k = e.inputs.index(wire)
        if isinstance(e, Mirror) and e.vibration is not None:
            mirrors = mirrors + (e.vibration,)
        for j, out in enumerate(e.outputs):
            walk(out, m[j * dim : (j + 1) * dim, k * dim : (k + 1) * dim] @ vec, mirrors)

    for w, vec in c.source.items():
        if np.any(vec != 0):
            walk(w, vec, ())
    return found


def trace_components(c: Circuit, detector: str, t: float) -> DisplacedGaussianSum:
    paths = _paths(c, detector)
    amps = np.array([p.amp for p in paths], dtype=complex)
    shifts = np.array([sum(float(v.displacement(t)) for v in p.mirrors) for p in paths], dtype=float)
    return DisplacedGaussianSum(amps, shifts)


# -- quad cell -------------------------------------------------------------


def _half_grid(halfwidth: float, points: int) -> np.ndarray:
    return np.linspace(0.0, halfwidth, points // 2 + 1)


def _gauss(y: np.ndarray, sigma: float) -> np.ndarray:
    return (2 * np.pi * sigma**2) ** -0.25 * np.exp(-(y**2) / (4 * sigma**2))


def _quad_cell(amps: np.ndarray, shifts: np.ndarray, sigma: float, y: np.ndarray) -> np.ndarray:
    """Upper-minus-lower intensity for a batch: shifts has shape (components, times)."""
    up = np.einsum("k,ktg->tg", amps, _gauss(y[None, None, :] - shifts[:, :, None], sigma))
    down = np.einsum("k,ktg->tg", amps, _gauss(-y[None, None, :] - shifts[:, :, None], sigma))
    return simpson(np.abs(up) ** 2, x=y, axis=-1) - simpson(np.abs(down) ** 2, x=y, axis=-1)


def quad_cell_signal(g: DisplacedGaussianSum, grid_halfwidth: float = 8.0, grid_points: int = 2048) -> float:
    """``S = integral sign(y) |psi(y)|^2 dy`` by Simpson quadrature on each half-plane.

    Not normalized by the total detected power.
    """
    y = _half_grid(grid_halfwidth, grid_points)
    return float(_quad_cell(g.amps, g.shifts[:, None], g.sigma, y)[0])


# -- spectrum --------------------------------------------------------------


def vibrating_mirrors(c: Circuit) -> list[Mirror]:
    return [m for m in c.mirrors() if m.vibration is not None]


def scale_vibrations(c: Circuit, factor: float) -> Circuit:
    """Copy of ``c`` with every vibration amplitude multiplied by ``factor``."""
    elements = [
        replace(e, vibration=replace(e.vibration, amp=e.vibration.amp * factor))
        if isinstance(e, Mirror) and e.vibration is not None
        else e
        for e in c.elements
    ]
    return c.with_elements(elements)


def simulate_spectrum(
    c: Circuit, detector: str, cfg: SpectrumConfig = SpectrumConfig(), chunk: int = 500
) -> SpectrumReport:
    """Hann-windowed power spectrum of the quad-cell signal.

    ``powers`` are single-sided and scaled by the window's coherent gain,
    so a sinusoid of amplitude ``a`` on a bin centre reads ``a**2 / 2``.
    """
    mirrors = vibrating_mirrors(c)
    if not mirrors:
        raise ConfigError("the scene has no vibrating mirror")
    cfg.check([m.vibration.freq for m in mirrors])

    paths = _paths(c, detector)
    amps = np.array([p.amp for p in paths], dtype=complex)
    n = int(round(cfg.sample_rate * cfg.duration))
    t = np.arange(n) / cfg.sample_rate
    shifts = np.zeros((len(paths), n))
    for k, p in enumerate(paths):
        for v in p.mirrors:
            shifts[k] += v.displacement(t)

    y = _half_grid(cfg.grid_halfwidth, cfg.grid_points)
    signal = np.empty(n)
    # ordered chunked reduction keeps results bit-reproducible
    for lo in range(0, n, chunk):
        signal[lo : lo + chunk] = _quad_cell(amps, shifts[:, lo : lo + chunk], SIGMA, y)
    if cfg.noise_std > 0:
        signal = signal + np.random.default_rng(cfg.seed).normal(0.0, cfg.noise_std, n)

    window = get_window("hann", n)
    spec = np.fft.rfft(signal * window)
    gain = window.sum()
    powers = 2.0 * np.abs(spec) ** 2 / gain**2
    powers[0] /= 2.0
    if n % 2 == 0:
        powers[-1] /= 2.0
    freqs = np.fft.rfftfreq(n, 1.0 / cfg.sample_rate)

    raw = {}
    for m in mirrors:
        k = int(np.argmin(np.abs(freqs - m.vibration.freq)))
        raw[m.name] = (m.vibration.freq, float(powers[k]))
    top = max(p for _, p in raw.values())
    peaks = {
        name: Peak(freq, power, power / top if top > 0 else 0.0) for name, (freq, power) in raw.items()
    }
    return SpectrumReport(freqs, powers, peaks, cfg)


def first_order_prediction(
    c: Circuit, detector: str, overlap_floor: float = OVERLAP_FLOOR
) -> dict[str, float]:
    """Relative peak amplitude per vibrating mirror, ``|Re (P_j)_w| * amp_j``, max-normalized."""
    wv = wire_weak_values(c, detector, overlap_floor)
    raw = {m.name: abs(wv[m.outputs[0]].real) * m.vibration.amp for m in vibrating_mirrors(c)}
    top = max(raw.values(), default=0.0)
    return {k: (v / top if top > 0 else 0.0) for k, v in raw.items()}


def peak_amplitudes(report: SpectrumReport) -> dict[str, float]:
    """Sinusoid amplitudes implied by the reported peak powers."""
    return {k: math.sqrt(2 * p.power) for k, p in report.peaks.items()}


def declared_frequencies(c: Circuit) -> Mapping[str, float]:
    return {m.name: m.vibration.freq for m in vibrating_mirrors(c)}
