"""Time-regularity functionals for coefficients.

Implements the comparison ladder: BMO seminorm, the scale-invariant
half-Sobolev functional (the solvability condition of the toolkit),
plain fractional L2-Sobolev seminorms, Hoelder constants, and Dini
integrals, plus divergence detection under grid refinement.

Matrix-valued inputs are reduced pointwise with the maximum over entries.
Double integrals omit the diagonal cell; for Lipschitz samples the omitted
mass is O(dt).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .timefourier import FracOrder, TimeGrid, TimeSignal


class FamilyError(ValueError):
    """Empty or malformed interval family."""


@dataclass(frozen=True)
class IntervalFamily:
    """Family of subintervals of the grid window, stored as index pairs.

    Each interval is [start, end) in sample indices and contains >= 2 points.
    """

    grid: TimeGrid
    intervals: tuple[tuple[int, int], ...]
    style: str = "dyadic"

    def __post_init__(self):
        if len(self.intervals) == 0:
            raise FamilyError("interval family is empty")
        for a, b in self.intervals:
            if b - a < 2 or a < 0 or b > self.grid.n_points:
                raise FamilyError(f"bad interval indices ({a}, {b})")

    def __len__(self) -> int:
        return len(self.intervals)

    def seconds(self, iv: tuple[int, int]) -> tuple[float, float]:
        a, b = iv
        return (self.grid.t_start + a * self.grid.dt, self.grid.t_start + b * self.grid.dt)


def dyadic_family(grid: TimeGrid, shifted: bool = True, min_len: int = 2) -> IntervalFamily:
    """Dyadic intervals at all scales from min_len points to the full window,
    plus (by default) the half-shifted dyadic copies.

    The true supremum over all intervals is infeasible; dyadic + half shift
    approximates the sliding supremum to within a factor <= 2 in interval
    length, hence is the standard surrogate for sup-type seminorms.
    """
    n = grid.n_points
    intervals: list[tuple[int, int]] = []
    size = n
    while size >= min_len:
        for a in range(0, n - size + 1, size):
            intervals.append((a, a + size))
        if shifted and size < n:
            for a in range(size // 2, n - size + 1, size):
                intervals.append((a, a + size))
        size //= 2
    return IntervalFamily(grid, tuple(intervals), "dyadic")


def sliding_family(grid: TimeGrid, lengths: list[int] | None = None) -> IntervalFamily:
    """All offsets of a set of interval lengths (defaults to dyadic lengths)."""
    n = grid.n_points
    if lengths is None:
        lengths = []
        size = 2
        while size <= n:
            lengths.append(size)
            size *= 2
    intervals = [(a, a + m) for m in lengths for a in range(0, n - m + 1)]
    return IntervalFamily(grid, tuple(intervals), "sliding")


@dataclass
class SeminormValue:
    """A measured seminorm plus provenance."""

    value: float
    family_size: int = 1
    achieving_interval: tuple[float, float] | None = None
    resolution: int | None = None
    extra: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value


def _entry_flat(f: TimeSignal) -> np.ndarray:
    """Samples flattened to (n, n_entries) for entrywise reductions."""
    v = np.asarray(f.values)
    return v.reshape(v.shape[0], -1)


def bmo_seminorm(f: TimeSignal, fam: IntervalFamily) -> SeminormValue:
    """sup over the family of the mean of |f - f_I| on I.

    Matrix values: per-entry mean oscillation, then max over entries.
    """
    if not f.grid.compatible(fam.grid):
        raise FamilyError("family grid does not match signal grid")
    g = _entry_flat(f)
    best, best_iv = 0.0, None
    for a, b in fam.intervals:
        seg = g[a:b]
        osc = np.abs(seg - seg.mean(axis=0)).mean(axis=0).max()
        if osc > best:
            best, best_iv = float(osc), (a, b)
    return SeminormValue(
        best,
        family_size=len(fam),
        achieving_interval=fam.seconds(best_iv) if best_iv else None,
        resolution=f.n,
    )


def _pairwise_ratio_matrix(f: TimeSignal, exponent: float) -> np.ndarray:
    """R[i, j] = max_entries |f_i - f_j|^2 / |t_i - t_j|^exponent, diag 0."""
    g = _entry_flat(f)
    t = f.grid.points
    dt_gap = np.abs(t[:, None] - t[None, :])
    np.fill_diagonal(dt_gap, 1.0)
    num = np.zeros((f.n, f.n))
    for k in range(g.shape[1]):
        col = g[:, k]
        np.maximum(num, np.abs(col[:, None] - col[None, :]) ** 2, out=num)
    R = num / dt_gap**exponent
    np.fill_diagonal(R, 0.0)
    return R


def scale_invariant_half_sobolev(f: TimeSignal, fam: IntervalFamily) -> SeminormValue:
    """sup_I (1/len(I)) * iint_{IxI} |f(t)-f(s)|^2 / |t-s|^2 ds dt.

    The double quadrature excludes the diagonal cell.  Interval sums are
    O(1) lookups into a 2-D prefix sum of the pairwise ratio matrix.
    """
    if not f.grid.compatible(fam.grid):
        raise FamilyError("family grid does not match signal grid")
    R = _pairwise_ratio_matrix(f, 2.0)
    S = R.cumsum(axis=0).cumsum(axis=1)
    dt = f.grid.dt

    def box(a, b):  # sum of R over [a:b) x [a:b)
        tot = S[b - 1, b - 1]
        if a > 0:
            tot -= S[a - 1, b - 1] + S[b - 1, a - 1] - S[a - 1, a - 1]
        return tot

    best, best_iv = 0.0, None
    for a, b in fam.intervals:
        ell = (b - a) * dt
        val = box(a, b) * dt * dt / ell
        if val > best:
            best, best_iv = float(val), (a, b)
    return SeminormValue(
        best,
        family_size=len(fam),
        achieving_interval=fam.seconds(best_iv) if best_iv else None,
        resolution=f.n,
    )


def frac_sobolev_seminorm(
    f: TimeSignal, a: FracOrder | float, window: tuple[float, float] | None = None
) -> SeminormValue:
    """iint |f(t)-f(s)|^2/|t-s|^(2a+1) over window x window (no sup, no 1/l)."""
    alpha = a.alpha if isinstance(a, FracOrder) else FracOrder(a).alpha
    if not (alpha < 1.0):
        raise ValueError("fractional Sobolev seminorm needs alpha in (0, 1)")
    if window is None:
        i0, i1 = 0, f.n
    else:
        i0 = f.grid.index_of(window[0])
        i1 = f.grid.index_of(window[1]) if window[1] < f.grid.t_end else f.n
        if i1 - i0 < 2:
            raise FamilyError("degenerate window")
    R = _pairwise_ratio_matrix(f, 2.0 * alpha + 1.0)
    dt = f.grid.dt
    val = float(R[i0:i1, i0:i1].sum() * dt * dt)
    w0 = f.grid.t_start + i0 * dt
    w1 = f.grid.t_start + i1 * dt
    return SeminormValue(val, family_size=1, achieving_interval=(w0, w1), resolution=f.n)


def holder_constant(f: TimeSignal, a: FracOrder | float) -> SeminormValue:
    """max over grid pairs of |f(t)-f(s)| / |t-s|^alpha."""
    alpha = a.alpha if isinstance(a, FracOrder) else FracOrder(a).alpha
    if f.n < 2:
        raise FamilyError("degenerate grid")
    R = _pairwise_ratio_matrix(f, 2.0 * alpha)
    i, j = np.unravel_index(int(np.argmax(R)), R.shape)
    t = f.grid.points
    iv = (min(t[i], t[j]), max(t[i], t[j]))
    return SeminormValue(float(np.sqrt(R[i, j])), family_size=1,
                         achieving_interval=iv, resolution=f.n)


def dini_integral(
    f: TimeSignal, q: float, horizon: float | None = None
) -> SeminormValue:
    """int_0^T sup_s |f(t+s)-f(s)|^q dt / t^(1+q/2), truncated below at one cell.

    The per-octave increments of the lag sum are stored in extra["octave_increments"]
    (finest lag octave first); they drive the divergence detector.
    """
    if not (1.0 <= q <= 2.0):
        raise ValueError(f"Dini exponent must lie in [1, 2], got {q}")
    g = _entry_flat(f)
    n, dt = f.n, f.grid.dt
    if horizon is None:
        horizon = f.grid.period
    m_max = min(n - 1, int(round(horizon / dt)))
    lags = np.arange(1, m_max + 1)
    sup = np.empty(m_max)
    for m in lags:
        sup[m - 1] = np.abs(g[m:] - g[:-m]).max() if m < n else 0.0
    weights = dt / ((lags * dt) ** (1.0 + q / 2.0))
    terms = sup**q * weights
    value = float(terms.sum())
    # octave increments: contribution of lags in [2^j, 2^(j+1)) cells
    incs = []
    j = 0
    while (1 << j) <= m_max:
        lo, hi = (1 << j) - 1, min((1 << (j + 1)) - 1, m_max)
        incs.append(float(terms[lo:hi].sum()))
        j += 1
    best = int(np.argmax(terms)) if m_max else 0
    return SeminormValue(
        value,
        family_size=m_max,
        achieving_interval=(0.0, float((best + 1) * dt)),
        resolution=n,
        extra={"octave_increments": incs, "q": q},
    )


# ---------------------------------------------------------------------------
# divergence detection


@dataclass
class DivergenceVerdict:
    divergent: bool
    growth_factors: list[float]
    rule: str


def refinement_verdict(values: list[float], threshold: float = 1.25) -> DivergenceVerdict:
    """Declare a functional infinite when it grows by >= (threshold-1) per
    dyadic refinement across at least three consecutive resolutions."""
    if len(values) < 3:
        raise ValueError("need values at >= 3 consecutive dyadic resolutions")
    vals = [float(v) for v in values]
    factors = [b / a if a > 0 else np.inf for a, b in zip(vals, vals[1:])]
    return DivergenceVerdict(all(f >= threshold for f in factors), factors, f"ratio>={threshold}")


def increment_slope_verdict(
    increments: list[float], min_octaves: int = 4, slope_threshold: float = 0.05
) -> DivergenceVerdict:
    """Divergence test for singular integrals computed as sums of per-octave
    increments on a single fine grid (used for Dini integrals).

    Increments are ordered finest octave first.  Refining the grid extends the
    sum at the fine end, so the integral converges under refinement iff the
    increments decay toward the fine end, i.e. iff log2(increment) grows in the
    octave index.  Logarithmic divergence shows up as a flat profile.  We fit
    log2(increment) against octave index over the finest octaves — skipping
    the two finest, which carry the one-cell quadrature-truncation spike —
    and flag divergence when the slope is <= slope_threshold.
    """
    inc = np.asarray([max(v, 0.0) for v in increments], dtype=float)
    skip = 2
    if len(inc) < min_octaves + skip or not np.all(inc[: min_octaves + skip] > 0):
        return DivergenceVerdict(False, [], "increment-slope (insufficient octaves)")
    k = max(min_octaves + skip, (len(inc) * 2) // 3)  # finest two thirds; coarse lags saturate
    head = inc[skip:k]
    head = head[head > 0]
    x = np.arange(len(head), dtype=float)
    y = np.log2(head)
    slope = float(np.polyfit(x, y, 1)[0])
    return DivergenceVerdict(slope <= slope_threshold, [slope], f"increment-slope<={slope_threshold}")


def dini_verdict(sem: SeminormValue) -> DivergenceVerdict:
    """Divergence verdict for a dini_integral result via its octave increments.

    Octave j covers lags in [2^j, 2^(j+1)) grid cells, finest first; grid
    refinement extends the list at the fine end.
    """
    return increment_slope_verdict(sem.extra.get("octave_increments", []))
