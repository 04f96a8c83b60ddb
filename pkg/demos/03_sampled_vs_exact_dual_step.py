#!/usr/bin/env python3
"""Compare one Monte Carlo dual step against the quadrature oracle.

The solver updates density weights at random index points; the oracle does
the same update on a dense trapezoid grid.  Interpolating the oracle's
density to the sample locations shows how close a single sampled step is.
"""

import numpy as np

from sipsolve import (
    AlgoParams,
    SampledMeasure,
    catalog_test_problem,
    derive_constants,
    dual_update,
    exact_dual_update_grid,
    sample_index_points,
    uniform_density_grid,
)

problem = catalog_test_problem()
c = derive_constants(problem, AlgoParams(K=60000))
x = np.array([0.8, 0.05])

grid = uniform_density_grid(problem.xi_box, 2049, level=c.m_u)
exact = exact_dual_update_grid(grid, x, problem, c)

for n in (100, 1000, 10_000):
    pts = sample_index_points(n, problem.xi_box, seed=1)
    mc = dual_update(SampledMeasure(pts, np.zeros(n)), x, problem, c)
    at_samples = np.interp(pts[:, 0], grid.nodes[:, 0], exact.values / c.m_u)
    rel = np.abs(np.exp(mc.log_weights) - at_samples) / at_samples
    print(
        f"N = {n:6d}: max pointwise relative error {rel.max():.3e}, "
        f"sampled mass {mc.implied_mass(c):.6f} vs exact {exact.mass:.6f}"
    )
