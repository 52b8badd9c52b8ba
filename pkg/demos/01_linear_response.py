"""Warm-up: the exactly solvable linear system.

With a linear restoring force the response has a one-line closed form
per Fourier mode, the zero-mode shift vanishes identically, and the
response amplitude scales linearly with the dissipation parameter.
A good first check that all the wiring is sound.
"""

import math

from qpresponse import (
    SeparableSystem,
    cosine,
    propagator_denominator,
    recentre,
    solve_response,
)

PHI = (1 + math.sqrt(5)) / 2
OMEGA = (1.0, PHI)

forcing = cosine(2, 0).add(cosine(2, 1))
system = recentre(SeparableSystem(OMEGA, forcing, {1: 1.0}), 0.0)

print("linear system: g(x) = x, forcing cos(psi1) + cos(psi2), omega =",
      OMEGA)
print()
print(f"{'eps':>8}  {'zeta':>6}  {'|u|':>12}  {'max gap to closed form':>24}")
for eps in (0.2, 0.1, 0.05, 0.025, 0.0125):
    sol = solve_response(eps, system, 4, 8, probe=False)
    gap = 0.0
    for nu, c in forcing.items_sorted():
        s = nu[0] * OMEGA[0] + nu[1] * OMEGA[1]
        exact = eps * c / propagator_denominator(eps, s, system.a)
        gap = max(gap, abs(sol.u.coeff(nu) - exact))
    norm = sol.u.without_zero_mode().weighted_norm(0.0)
    print(f"{eps:8.4f}  {sol.zeta:6.1f}  {norm:12.5e}  {gap:24.3e}")

print()
print("the amplitude column is proportional to eps: halving eps halves |u|")
