"""
Measuring the time regularity of a coefficient
==============================================

Whether the solver delivers full maximal regularity depends on how rough
the coefficient A(t, x) is in time.  The library measures that roughness
with a ladder of functionals: a BMO seminorm of D^{1/2}A, a
scale-invariant half-Sobolev functional, Holder constants, and Dini
integrals.  The interesting regime is coefficients that fail every Dini
condition yet keep the half-Sobolev functional finite: the square-root
singularity 1 + |t - 1/2|^{1/2} a(x) is exactly such an example.
"""
import numpy as np

from maxreg import SpaceMesh, TimeGrid, generate_family
from maxreg.bmo import (
    bmo_seminorm,
    dini_integral,
    dini_verdict,
    dyadic_family,
    holder_constant,
    refinement_verdict,
    scale_invariant_half_sobolev,
)
from maxreg.timefourier import frac_derivative

mesh = SpaceMesh(0.0, 1.0, 8)

print("square-root coefficient: Dini fails, half-Sobolev survives")
print("-" * 60)
values = []
for n in (256, 512, 1024):
    grid = TimeGrid(0.0, 1.0, n)
    a = generate_family("sqrt_product", grid, mesh, seed=7).column(0)
    hs = scale_invariant_half_sobolev(a, dyadic_family(grid))
    values.append(hs.value)
    print(f"  n = {n:4d}: half-Sobolev = {hs.value:.4f}")
print("  refinement-divergent?", refinement_verdict(values).divergent)

grid = TimeGrid(0.0, 1.0, 1024)
a = generate_family("sqrt_product", grid, mesh, seed=7).column(0)
for q in (1.0, 2.0):
    d = dini_integral(a, q=q)
    print(f"  Dini(q={q}): value {d.value:.3f}, "
          f"divergent = {dini_verdict(d).divergent}")

print()
print("the same ladder separates the built-in families")
print("-" * 60)
for kind, kw in (("lipschitz", {}), ("sqrt_product", {}),
                 ("holder", {"alpha": 0.45}), ("holder", {"alpha": 0.3})):
    a = generate_family(kind, grid, mesh, seed=7, **kw).column(0)
    da = frac_derivative(a, 0.5)
    bmo = bmo_seminorm(da, dyadic_family(grid)).value
    hold = holder_constant(a, 0.5).value
    label = kind + (f"({kw['alpha']})" if kw else "")
    print(f"  {label:14s} ||D^1/2 a||_BMO = {bmo:.4f}   "
          f"1/2-Holder constant = {hold:.4f}")

print()
print("a barely-Holder sample is flagged: the half-Sobolev ladder grows")
print("-" * 60)
values = []
for n in (2048, 4096, 8192):
    g = TimeGrid(0.0, 1.0, n)
    a = generate_family("holder", g, mesh, seed=7, alpha=0.3).column(0)
    values.append(scale_invariant_half_sobolev(a, dyadic_family(g)).value)
    print(f"  n = {n:5d}: half-Sobolev = {values[-1]:.4f}")
growth = [b / a for a, b in zip(values, values[1:])]
print("  growth per doubling:", [f"{g:.3f}" for g in growth],
      "-> divergent =", refinement_verdict(values).divergent)
