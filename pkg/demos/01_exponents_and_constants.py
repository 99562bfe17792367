#!/usr/bin/env python3
"""Tour of the parameter layer: admissible ranges and derived exponents.

Every computation in the package starts from a validated triple (d, gamma, p)
with d >= 3, 0 <= gamma < 2 and 1 < p < (d - gamma)/(d - 2).  This script
walks the derived exponents at a few points, checks the interpolation
exponent identity, and evaluates the dilation constant kappa by its closed
form and by direct 1-D minimization.
"""

from cknlab import derive, kappa, kappa_numeric, validate
from cknlab.errors import ParameterError
from cknlab.minimizer import critical_constant, hs_upper_bound

print("== admissible range ==")
for d, g, p in [(3, 0.5, 2.0), (3, 1.2, 2.0), (2, 0.1, 1.5)]:
    try:
        validate(d, g, p)
        print(f"  (d={d}, gamma={g}, p={p}) accepted")
    except ParameterError as exc:
        print(f"  (d={d}, gamma={g}, p={p}) rejected: {exc}")

print("\n== derived exponents ==")
for d, g, p in [(3, 0.0, 2.0), (3, 0.5, 2.0), (4, 0.25, 1.5)]:
    ex = derive(validate(d, g, p))
    print(f"  (d={d}, gamma={g}, p={p}):")
    print(f"    critical exponent 2*_gamma = {ex.two_star_gamma:.6f}")
    print(f"    vartheta = {ex.vartheta:.6f}, theta = {ex.theta_gamma:.6f}")
    print(f"    eta = {ex.eta:.6f}, a = {ex.a_gamma:.6f}, b = {ex.b_gamma:.6f}")
    print(f"    effective radial dimension = {ex.d_gamma:.6f}")
    print(f"    diffusion exponent m = {ex.m_diff:.6f} "
          f"(admissible above {ex.m_one:.6f})")
    lhs = 1 / (2 * p)
    rhs = ex.vartheta / ex.two_star_gamma + (1 - ex.vartheta) / (p + 1)
    print(f"    interpolation identity residual = {abs(lhs - rhs):.2e}")

print("\n== the dilation constant kappa, two independent routes ==")
for d, g, p in [(3, 0.0, 2.0), (3, 0.5, 2.0), (5, 0.3, 1.4)]:
    pp = validate(d, g, p)
    closed = kappa(pp)
    numeric = kappa_numeric(pp, x=1.7, y=0.4)
    print(f"  (d={d}, gamma={g}, p={p}): closed {closed:.12f}, "
          f"1-D minimization {numeric:.12f}, "
          f"rel diff {abs(closed - numeric) / closed:.1e}")

print("\n== endpoint bound on the best constant ==")
for d, g, p in [(3, 0.0, 2.0), (3, 0.5, 2.0)]:
    pp = validate(d, g, p)
    print(f"  (d={d}, gamma={g}, p={p}): bound {hs_upper_bound(pp):.6f}")
print(f"  Hardy endpoint at gamma=2, d=3: {critical_constant(3, 2.0):.6f}")
