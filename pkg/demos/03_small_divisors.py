"""Small-divisor diagnostics: how close is omega to a resonance, and how
much dissipation does the constructive estimate ask for in return?

The golden-mean pair is as far from rationals as a planar frequency
vector gets; the second vector hides a ladder of excellent rational
approximations (1e-1 + 1e-2 + 1e-6 + ...), so its ball minima collapse in
bursts and the admissible dissipation range shrinks accordingly.
"""

import math

from qpresponse import (
    SeparableSystem,
    certify_envelope,
    cosine,
    estimate_epsilon_bar,
    profile,
    recentre,
)

PHI = (1 + math.sqrt(5)) / 2
GOLDEN = (1.0, PHI)
LIOUVILLE = (1.0, 1e-1 + 1e-2 + 1e-6 + 1e-24)

for name, omega in (("golden", GOLDEN), ("liouville-type", LIOUVILLE)):
    prof = profile(omega, 8)
    print(f"omega ({name}) = {omega}")
    print(f"  {'n':>2} {'alpha_n':>12} {'eps_n':>10} {'partial sum':>12}")
    for n in range(9):
        print(f"  {n:2d} {prof.alpha[n]:12.6g} {prof.eps[n]:10.4f} "
              f"{prof.bryuno_partial[n]:12.4f}")
    print(f"  classification: {prof.classification}")
    print()

forcing = cosine(2, 0).add(cosine(2, 1))
system = recentre(SeparableSystem(GOLDEN, forcing, {1: 1.0, 3: 1.0}), 0.0)
envelope = certify_envelope(system, xi=0.5, rho=0.5)
print("identical analyticity envelope, two frequency vectors:")
for name, omega in (("golden", GOLDEN), ("liouville-type", LIOUVILLE)):
    bounds = estimate_epsilon_bar(envelope, system.a, omega, guard=256)
    print(f"  {name:15s} n0 = {bounds.n0}, alpha_n0 = {bounds.alpha_n0:.5g}, "
          f"eps_bar = {bounds.eps_bar:.5g}")
print("\nthe closer omega sits to a resonance, the smaller the admissible")
print("dissipation parameter: stronger damping is the price of bad arithmetic")
