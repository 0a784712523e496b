"""
Extending a coefficient beyond its time interval
================================================

The Fourier machinery works on all of the line, but the problem lives on
[0, T].  The coefficient is therefore extended: first by even reflection
to [-T, 2T], then glued to its boundary values outside.  The point of the
construction is quantitative: the half-Sobolev functional M of the
extension is controlled by the functional on [0, T] with explicit
constants (3M on [-T, T], 9M on [-T, 2T], and an affine bound for the
full extension).  This script measures all of them for every built-in
family and checks the inequalities hold with room to spare.
"""
import numpy as np

from maxreg import SpaceMesh, TimeGrid, generate_family
from maxreg.bmo import dyadic_family, scale_invariant_half_sobolev
from maxreg.coefficients import extend_full, extend_reflect
from maxreg.timefourier import TimeSignal

mesh = SpaceMesh(0.0, 1.0, 8)
T = 1.0
grid = TimeGrid(0.0, T, 512)

header = f"{'family':13s} {'M':>8s} {'[-T,T]':>8s} {'3M':>8s} " \
         f"{'[-T,2T]':>8s} {'9M':>8s} {'full':>8s} {'bound':>8s}"
print(header)
print("-" * len(header))

for kind in ("constant", "sqrt_product", "holder", "lipschitz", "step"):
    A = generate_family(kind, grid, mesh, seed=7)
    a = A.column(0)
    M = scale_invariant_half_sobolev(a, dyadic_family(grid)).value

    flat = extend_reflect(A).column(0)          # lives on [-T, 2T)
    n = grid.n_points
    two = TimeGrid(-T, T, 2 * n)
    v2 = scale_invariant_half_sobolev(
        TimeSignal(two, flat.values[:2 * n]), dyadic_family(two)).value
    v3 = scale_invariant_half_sobolev(flat, dyadic_family(flat.grid)).value

    full = extend_full(A).column(0)             # cut off to the 4T window
    m_nat = scale_invariant_half_sobolev(full, dyadic_family(full.grid)).value
    bound = 9 * M + 8 * A.Lam ** 2 / T + 6 * (A.Lam ** 2 + A.lam ** 2) / T

    assert v2 <= 3 * M + 1e-12
    assert v3 <= 9 * M + 1e-12
    assert m_nat <= bound + 1e-12
    print(f"{kind:13s} {M:8.4f} {v2:8.4f} {3 * M:8.4f} "
          f"{v3:8.4f} {9 * M:8.4f} {m_nat:8.4f} {bound:8.2f}")

print()
print("all inequalities satisfied; the reflection never inflates the")
print("roughness by more than the proven constants, and in practice the")
print("margins are large.")
