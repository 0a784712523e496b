"""Periodized time line: grids, signals, and Fourier-symbol operators.

All fractional-calculus operators in this package act on a uniform,
periodized time window.  Symbols are exact on the torus; experiments are
responsible for keeping their data supported well inside the window
(default guard band: data in the middle 50%).

Conventions, fixed once and for all:
  * frequencies are tau_k = 2*pi*k/period for k = -n/2 .. n/2-1,
  * the half derivative has symbol |tau|**alpha with the zero mode mapped
    to 0 (calculus modulo constants on the torus),
  * the Hilbert transform has symbol i*sgn(tau).  The coercivity identity
    of the space-time solver depends on this sign; do not flip it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GridError(ValueError):
    """Incompatible or malformed time grid."""


class SignalError(ValueError):
    """Malformed signal data (non-finite samples, shape mismatch...)."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid with n_points samples on [t_start, t_end), periodized."""

    t_start: float
    t_end: float
    n_points: int

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise GridError(f"need t_end > t_start, got [{self.t_start}, {self.t_end}]")
        if self.n_points < 8 or not _is_pow2(self.n_points):
            raise GridError(f"n_points must be a power of two >= 8, got {self.n_points}")

    @property
    def period(self) -> float:
        return self.t_end - self.t_start

    @property
    def dt(self) -> float:
        return self.period / self.n_points

    @property
    def points(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_points)

    @property
    def frequencies(self) -> np.ndarray:
        """Angular frequencies 2*pi*k/period in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dt)

    def compatible(self, other: "TimeGrid") -> bool:
        return (
            self.n_points == other.n_points
            and np.isclose(self.t_start, other.t_start)
            and np.isclose(self.t_end, other.t_end)
        )

    def index_of(self, t: float) -> int:
        """Index of the grid point closest to t (must lie on the grid)."""
        j = int(round((t - self.t_start) / self.dt))
        if not (0 <= j < self.n_points) or abs(self.t_start + j * self.dt - t) > 1e-9 * max(1.0, self.period):
            raise GridError(f"t={t} is not a grid point of {self}")
        return j

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t_start, self.t_end, self.n_points * factor)


@dataclass(frozen=True)
class FracOrder:
    """Fractional differentiation order, alpha in (0, 1]."""

    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"fractional order must lie in (0, 1], got {self.alpha}")


@dataclass
class TimeSignal:
    """Samples of a (possibly vector/matrix valued) function of time.

    values has shape (n_points, ...); the leading axis is time.
    """

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape[0] != self.grid.n_points:
            raise SignalError(
                f"values leading axis {self.values.shape[0]} != n_points {self.grid.n_points}"
            )

    @property
    def n(self) -> int:
        return self.grid.n_points

    def copy(self) -> "TimeSignal":
        return TimeSignal(self.grid, self.values.copy())

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise SignalError("signal contains non-finite samples")

    def resampled(self, n_points: int) -> "TimeSignal":
        """Trigonometric resampling onto a power-of-two grid (never truncation)."""
        new_grid = TimeGrid(self.grid.t_start, self.grid.t_end, n_points)
        coeff = np.fft.fft(self.values, axis=0) / self.n
        out = np.zeros((n_points,) + self.values.shape[1:], dtype=complex)
        half = min(self.n, n_points) // 2
        out[:half] = coeff[:half]
        out[-half:] = coeff[-half:]
        vals = np.fft.ifft(out * n_points, axis=0)
        if np.isrealobj(self.values):
            vals = vals.real
        return TimeSignal(new_grid, vals)


def signal_from_samples(grid_window: tuple[float, float], samples: np.ndarray) -> TimeSignal:
    """Build a TimeSignal, resampling to the next power of two if needed."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    if _is_pow2(n) and n >= 8:
        return TimeSignal(TimeGrid(*grid_window, n), samples)
    n2 = max(8, 1 << int(np.ceil(np.log2(n))))
    # interpolate linearly onto the power-of-two grid, then wrap in a signal
    t_old = grid_window[0] + (grid_window[1] - grid_window[0]) / n * np.arange(n)
    g = TimeGrid(grid_window[0], grid_window[1], n2)
    flat = samples.reshape(n, -1)
    out = np.empty((n2, flat.shape[1]), dtype=flat.dtype)
    for j in range(flat.shape[1]):
        out[:, j] = np.interp(g.points, t_old, flat[:, j].real)
        if np.iscomplexobj(flat):
            out[:, j] = out[:, j] + 1j * np.interp(g.points, t_old, flat[:, j].imag)
    return TimeSignal(g, out.reshape((n2,) + samples.shape[1:]))


def _apply_symbol(u: TimeSignal, symbol: np.ndarray) -> TimeSignal:
    u.check_finite()
    shape = (u.n,) + (1,) * (u.values.ndim - 1)
    uhat = np.fft.fft(u.values, axis=0)
    vals = np.fft.ifft(symbol.reshape(shape) * uhat, axis=0)
    return TimeSignal(u.grid, vals)


def frac_derivative(u: TimeSignal, a: FracOrder | float) -> TimeSignal:
    """D_t^alpha: Fourier multiplier |tau|^alpha, zero mode annihilated."""
    alpha = a.alpha if isinstance(a, FracOrder) else FracOrder(a).alpha
    tau = u.grid.frequencies
    return _apply_symbol(u, np.abs(tau) ** alpha)


def hilbert_transform(u: TimeSignal) -> TimeSignal:
    """H_t: Fourier multiplier i*sgn(tau), zero mode annihilated."""
    tau = u.grid.frequencies
    return _apply_symbol(u, 1j * np.sign(tau))


def twist_operator(u: TimeSignal, delta: float) -> TimeSignal:
    """(1 + delta*H_t)u.  Requires 0 < delta < 1 so the twist is invertible."""
    if not (0.0 < delta < 1.0):
        raise ValueError(f"twist parameter must lie in (0, 1), got {delta}")
    tau = u.grid.frequencies
    return _apply_symbol(u, 1.0 + delta * 1j * np.sign(tau))


def twist_inverse(u: TimeSignal, delta: float) -> TimeSignal:
    """Inverse of (1 + delta*H_t) by symbol division."""
    if not (0.0 < delta < 1.0):
        raise ValueError(f"twist parameter must lie in (0, 1), got {delta}")
    tau = u.grid.frequencies
    return _apply_symbol(u, 1.0 / (1.0 + delta * 1j * np.sign(tau)))


def time_inner_product(u: TimeSignal, v: TimeSignal) -> complex:
    """Quadrature-exact inner product dt * sum u * conj(v), conjugate-linear
    in the second slot.  Vector values are contracted over all trailing axes."""
    if not u.grid.compatible(v.grid):
        raise GridError("inner product requires matching grids")
    if u.values.shape != v.values.shape:
        raise SignalError("inner product requires matching value shapes")
    return complex(np.sum(u.values * np.conj(v.values)) * u.grid.dt)


def time_norm(u: TimeSignal) -> float:
    return float(np.sqrt(max(time_inner_product(u, u).real, 0.0)))


def mean_value(u: TimeSignal) -> np.ndarray:
    return np.mean(u.values, axis=0)


def save_signal(u: TimeSignal, path: str, format: str = "csv") -> str:
    """Serialize a scalar signal.

    csv: header "t,re,im", one row per sample.
    binary: flat little-endian float64 records (t, re, im), n rows, no header;
    the grid is reconstructed on load from the uniform t column.
    """
    if u.values.ndim != 1:
        raise SignalError("serialization is defined for scalar signals")
    cols = np.column_stack([u.grid.points, u.values.real, u.values.imag])
    if format == "csv":
        np.savetxt(path, cols, delimiter=",", header="t,re,im", comments="")
    elif format == "binary":
        cols.astype("<f8").tofile(path)
    else:
        raise ValueError(f"unknown signal format {format!r}")
    return path


def load_signal(path: str, format: str = "csv") -> TimeSignal:
    if format == "csv":
        cols = np.loadtxt(path, delimiter=",", skiprows=1)
    elif format == "binary":
        cols = np.fromfile(path, dtype="<f8").reshape(-1, 3)
    else:
        raise ValueError(f"unknown signal format {format!r}")
    t, re, im = cols[:, 0], cols[:, 1], cols[:, 2]
    n = len(t)
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=0, atol=1e-9 * max(abs(dt), 1.0)):
        raise SignalError("serialized signal is not on a uniform grid")
    grid = TimeGrid(float(t[0]), float(t[0] + n * dt), n)
    return TimeSignal(grid, re + 1j * im)
