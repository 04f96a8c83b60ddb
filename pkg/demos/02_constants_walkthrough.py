#!/usr/bin/env python3
"""Walk the constant pipeline for the bundled benchmark problem.

Every step size and cap used by the solver is derived from problem data:
the Slater margin bounds the dual mass, the mass bound sizes the prox
diameter, and the diameter sets the step sizes.  The same machinery gives
the worst-case Monte Carlo sample size, which is astronomically pessimistic
for the benchmark; practical runs just pick N directly.
"""

import warnings

from sipsolve import (
    AlgoParams,
    catalog_test_problem,
    compute_sample_size,
    derive_constants,
    eta_bisect,
)

problem = catalog_test_problem()
params = AlgoParams(K=60000)
c = derive_constants(problem, params)

print(f"problem: {problem.name}, K = {params.K}")
print(f"  slater margin        alpha   = {c.alpha:.6g}")
print(f"  dual mass cap        rho_bar = {c.rho_bar:.6g}")
print(f"  inscribed ball ratio r       = {c.ratio_r:.6g}")
print(f"  mass term bound      h_max   = {c.h_max:.6g}")
print(f"  prox diameter        c_bar   = {c.c_bar:.6g}")
print(f"  regularization       kappa   = {c.kappa_bar:.6g}")
print(f"  adjusted diameter    c_max   = {c.c_max:.6g}")
print(f"  primal step          gamma   = {c.gamma:.6g}")
print(f"  rate constant        mu      = {c.mu:.6g}")
print(f"  dual damping         l       = {c.l_exp:.12g}")
print(f"  log density cap              = {c.log_density_cap:.6g}")
print()

# worst-case N for a friendlier synthetic setting: small Lipschitz constant,
# mild density cap
eta = eta_bisect(0.05, 10, 0.75)
print(f"error budget eta(0.05, K=10, l=0.75) = {eta:.6g}")
n = compute_sample_size(
    eps_mc=0.05, delta=0.1, K=10, l_g_x=0.1, rho0=1.0,
    density_cap=2.0, l_exp=0.75,
)
print(f"worst-case sample size               = {n}")

# the benchmark's density cap overflows float, so the bound saturates
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    n_bench = compute_sample_size(
        eps_mc=0.05, delta=0.1, K=params.K, l_g_x=problem.L_g_x,
        rho0=1.0, density_cap=c.density_cap, l_exp=c.l_exp,
    )
print(f"benchmark worst-case sample size     = {n_bench:.3g}  (capped)")
if caught:
    print(f"  note: {caught[0].message}")
