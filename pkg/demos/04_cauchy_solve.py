"""
Solving the Cauchy problem and measuring maximal regularity
===========================================================

u' - div(A(t,x) grad u) = f on (0,T) x (0,1),  u(0) = 0, Dirichlet walls.

The solver works in the Fourier domain over an enlarged window: the
forcing is weighted, zero-extended, fed to a coercive line solve, and the
solution is unweighted and restricted back to [0, T].  Three independent
cross-checks make the answer trustworthy:

  * for a constant coefficient, an exact eigenfunction-expansion oracle;
  * for rough coefficients, a Crank-Nicolson time-stepper;
  * the initial value u(0), which the theory says vanishes.

Afterwards the maximal-regularity ratio
(||u||_{H^1(H)} + ||u||_{H^{1/2}(V)}) / ||f||_{L^2(H)} is measured across
time resolutions: for the square-root coefficient it barely moves.
"""
import numpy as np

from maxreg import SpaceMesh, TimeGrid, generate_family
from maxreg.norms import SpaceTimeField, l2h_norm, maxreg_ratio
from maxreg.solver import autonomous_oracle, cauchy_solve, timestep_reference

mesh = SpaceMesh(0.0, 1.0, 64)
T = 1.0


def sine_forcing(grid, time_profile=None):
    prof = np.sin(np.pi * mesh.nodes[mesh.free_mask])
    vals = np.broadcast_to(prof, (grid.n_points, mesh.n_dofs)).astype(complex).copy()
    if time_profile is not None:
        vals *= time_profile(grid.points)[:, None]
    return SpaceTimeField(grid, mesh, vals)


print("cross-check 1: constant coefficient vs the eigen-oracle")
for n in (128, 256, 512):
    grid = TimeGrid(0.0, T, n)
    A = generate_family("constant", grid, mesh)
    f = sine_forcing(grid)
    res = cauchy_solve(A, f)
    ref = autonomous_oracle(np.ones(mesh.n_cells), f)
    err = np.linalg.norm(res.u.values - ref.values) / np.linalg.norm(ref.values)
    print(f"  n_t = {n:4d}: relative L2 error {err:.2e} "
          f"({res.diagnostics.iterations} Krylov iterations)")

print()
print("cross-check 2: rough coefficients vs Crank-Nicolson")
grid = TimeGrid(0.0, T, 256)
f = sine_forcing(grid)
for kind in ("sqrt_product", "lipschitz", "step"):
    A = generate_family(kind, grid, mesh, seed=3)
    res = cauchy_solve(A, f)
    cn = timestep_reference(A, f)
    err = np.linalg.norm(res.u.values - cn.values) / np.linalg.norm(cn.values)
    print(f"  {kind:13s}: deviation {err:.2e}")

print()
print("cross-check 3: the initial value vanishes, at second order once")
print("the forcing extends continuously by zero")
for n in (256, 512):
    grid = TimeGrid(0.0, T, n)
    A = generate_family("constant", grid, mesh)
    f = sine_forcing(grid, time_profile=lambda t: np.sin(np.pi * t))
    res = cauchy_solve(A, f)
    print(f"  n_t = {n:4d}: ||v(0)|| / ||v|| = "
          f"{res.v0_norm / l2h_norm(res.line_solution):.2e}")

print()
print("maximal regularity for the square-root coefficient: the ratio is")
print("flat under time refinement, which is the empirical face of the")
print("a-priori estimate")
for n in (64, 128, 256):
    grid = TimeGrid(0.0, T, n)
    A = generate_family("sqrt_product", grid, mesh, seed=7)
    f = sine_forcing(grid)
    res = cauchy_solve(A, f)
    print(f"  n_t = {n:4d}: ratio = {maxreg_ratio(res.u, f, 0.5):.4f}")
