"""Frequency-vector arithmetic: small-divisor minima over dyadic balls,
their log-averaged decay profile, and the constructive admissibility
estimates for the dissipation parameter.

All mode balls are l1 balls.  Enumeration walks the canonical half-space
(first nonzero component positive, which covers every +-nu pair once) in
lexicographic order with a deterministic strictly-smaller min-reduction,
so reported argmins are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GuardExceededError, ResonanceError

# Default enumeration guards (maximum l1 radius) per torus dimension.
# Cost grows like radius**d; the d=2 default walks ~3e7 modes.
DEFAULT_GUARDS = {1: 2**62, 2: 4096, 3: 64}
_FALLBACK_GUARD = 16

DEFAULT_A_FRACTION = 0.5


def guard_radius(dimension: int, guard: int | None = None) -> int:
    if guard is not None:
        return int(guard)
    return DEFAULT_GUARDS.get(dimension, _FALLBACK_GUARD)


def min_small_divisor(omega, radius: int):
    """Exhaustive min of |omega . nu| over 0 < |nu| <= radius.

    Returns ``(value, argmin)`` with the argmin reported as the canonical
    representative of the +-nu pair (first nonzero component positive),
    lexicographically first among exact ties.
    """
    omega = [float(w) for w in omega]
    d = len(omega)
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if d == 1:
        return abs(omega[0]), (1,)

    best = math.inf
    arg = None
    w_last = omega[-1]

    def scan(prefix, prefix_dot, budget, leading_zero):
        nonlocal best, arg
        depth = len(prefix)
        if depth == d - 1:
            if leading_zero:
                lo = 1
            else:
                lo = -budget
            ks = np.arange(lo, budget + 1)
            if ks.size == 0:
                return
            vals = np.abs(prefix_dot + ks * w_last)
            i = int(np.argmin(vals))
            if vals[i] < best:
                best = float(vals[i])
                arg = prefix + (int(ks[i]),)
            return
        w = omega[depth]
        start = 0 if leading_zero else -budget
        for x in range(start, budget + 1):
            scan(prefix + (x,), prefix_dot + x * w, budget - abs(x),
                 leading_zero and x == 0)

    scan((), 0.0, int(radius), True)
    return best, arg


def alpha_n(omega, n: int, guard: int | None = None):
    """min |omega . nu| over the dyadic ball 0 < |nu| <= 2**n, with argmin.

    Raises :class:`GuardExceededError` when 2**n exceeds the enumeration
    guard and :class:`ResonanceError` on an exact zero.
    """
    radius = 2 ** int(n)
    limit = guard_radius(len(omega), guard)
    if radius > limit:
        raise GuardExceededError(
            f"ball radius 2^{n} = {radius} exceeds the enumeration guard "
            f"{limit} for d={len(omega)}; raise the guard explicitly if the "
            f"cost (~radius^d modes) is acceptable"
        )
    value, arg = min_small_divisor(omega, radius)
    if value == 0.0:
        raise ResonanceError(
            f"omega . nu = 0 at nu = {arg}: frequency vector is resonant",
            nu=arg, value=value,
        )
    return value, arg


def epsilon_n(alpha: float, n: int) -> float:
    """Scaled divisor logarithm 2**-n * log(1/alpha_n)."""
    return math.log(1.0 / alpha) / 2 ** int(n)


_SPIKE_RATIO = 1.02


@dataclass
class DiophantineProfile:
    """Small-divisor decay profile of a frequency vector.

    ``alpha[n]`` is the ball minimum at radius 2**n, ``eps[n]`` its scaled
    logarithm, ``bryuno_partial`` the running partial sums of ``eps``, and
    ``r_table`` ball minima at the extra radii requested.
    """

    omega: tuple
    n_max: int
    alpha: list = field(default_factory=list)
    eps: list = field(default_factory=list)
    argmins: list = field(default_factory=list)
    bryuno_partial: list = field(default_factory=list)
    r_table: dict = field(default_factory=dict)
    classification: str = "unclassified"

    @property
    def bryuno_sum(self) -> float:
        return self.bryuno_partial[-1] if self.bryuno_partial else 0.0


def classify_eps_sequence(eps: list) -> str:
    """Rough decay class of the scaled-divisor sequence: spikes mark
    near-resonances entering the ball (liouville-suspect), clear decay is
    diophantine-like, a plateau of partial sums is bryuno-like."""
    if len(eps) < 3:
        return "unclassified"
    spikes = [
        n for n in range(1, len(eps) - 1)
        if eps[n] > 0 and eps[n + 1] > eps[n] * _SPIKE_RATIO
    ]
    if spikes:
        return "liouville-suspect"
    positive = [e for e in eps[1:] if e > 0]
    if not positive:
        return "diophantine-like"
    head = max(positive[: max(1, len(positive) // 2)])
    if eps[-1] <= 0.5 * head:
        return "diophantine-like"
    return "bryuno-like"


def profile(omega, n_max: int, N_list=(), guard: int | None = None) -> DiophantineProfile:
    """Fill alpha_n, eps_n and Bryuno partial sums for n = 0..n_max.

    For d = 1 the profile is degenerate (the minimum is |omega| at every
    radius) and collapses to the single row n = 0.
    """
    omega = tuple(float(w) for w in omega)
    if len(omega) == 1:
        n_max = 0
    prof = DiophantineProfile(omega=omega, n_max=int(n_max))
    running = 0.0
    for n in range(int(n_max) + 1):
        a, arg = alpha_n(omega, n, guard=guard)
        e = epsilon_n(a, n)
        running += e
        prof.alpha.append(a)
        prof.argmins.append(arg)
        prof.eps.append(e)
        prof.bryuno_partial.append(running)
    for N in N_list:
        limit = guard_radius(len(omega), guard)
        if N > limit:
            raise GuardExceededError(f"radius {N} exceeds guard {limit}")
        value, arg = min_small_divisor(omega, int(N))
        if value == 0.0:
            raise ResonanceError(
                f"omega . nu = 0 at nu = {arg}", nu=arg, value=value
            )
        prof.r_table[int(N)] = value
    prof.classification = classify_eps_sequence(prof.eps)
    return prof


@dataclass
class EpsilonBounds:
    """Constructive admissibility constants.

    ``eps_bar`` and ``zeta_bar`` are sized so that the defining inequalities
    of the convergence estimates hold verbatim when re-checked:

    theorem 1:  C0^2 delta/|a| <= A^2,  C0^2 eps_bar/alpha_n0 <= A^2,
                C0^2 zeta_bar < A^2
    theorem 2:  C0^4 max{zeta_bar, delta/|a|, eps_bar/alpha_n0, beta} < A^4
                with beta = max{delta, 2|eps_bar a|/alpha_n0}
    """

    theorem: int
    A: float
    n0: int
    delta: float
    C0: float
    alpha_n0: float
    eps_bar: float
    zeta_bar: float
    beta: float | None = None
    guard_limited: bool = False

    def to_json_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "A": self.A,
            "n0": self.n0,
            "delta": self.delta,
            "C0": self.C0,
            "alpha_n0": self.alpha_n0,
            "eps_bar": self.eps_bar,
            "zeta_bar": self.zeta_bar,
            "beta": self.beta,
            "guard_limited": self.guard_limited,
        }


def propagator_floor_constant(envelope, a: float, theorem: int) -> float:
    """The constant C0 entering every admissibility inequality."""
    if theorem == 1:
        top = max(envelope.Gamma / abs(a), envelope.Phi, 1.0)
    elif theorem == 2:
        top = max(envelope.Gamma / abs(a), 1.0)
    else:
        raise ValueError("theorem must be 1 or 2")
    return top / envelope.rho


# Margin keeping strict inequalities strict after floating-point round-trips.
_STRICT_MARGIN = 1.0 - 1e-12


def estimate_epsilon_bar(
    envelope,
    a: float,
    omega,
    A_fraction: float = DEFAULT_A_FRACTION,
    theorem: int = 1,
    *,
    A: float | None = None,
    n0: int | None = None,
    guard: int | None = None,
) -> EpsilonBounds:
    """Size the admissible dissipation range from the analyticity envelope.

    ``A`` defaults to ``A_fraction * C0`` (the free constant must sit in
    (0, C0)).  ``n0`` is normally chosen as the smallest level at which the
    large-mode branch of the inequalities holds; pass it explicitly to pin
    scaling experiments.  If the required ball exceeds the enumeration
    guard, the guard-ball minimum is used as an upper bound for alpha_n0
    and the result is flagged ``guard_limited``.
    """
    omega = tuple(float(w) for w in omega)
    C0 = propagator_floor_constant(envelope, a, theorem)
    if A is None:
        if not 0.0 < A_fraction < 1.0:
            raise ValueError("A_fraction must lie in (0, 1)")
        A = A_fraction * C0
    if not 0.0 < A < C0:
        raise ValueError("A must lie in (0, C0)")
    xi = envelope.xi

    def delta_of(level: int) -> float:
        return math.exp(-xi * 2**level / 4.0)

    if theorem == 1:
        target = (A / C0) ** 2 * abs(a)
        need = lambda level: delta_of(level) <= target
    else:
        target = 0.5 * (A / C0) ** 4 * min(abs(a), 1.0)
        need = lambda level: delta_of(level) <= target

    if n0 is None:
        n0 = 0
        while not need(n0):
            n0 += 1
            if n0 > 60:
                raise ValueError("no admissible n0 below 2^60: envelope too tight")

    limit = guard_radius(len(omega), guard)
    guard_limited = 2**n0 > limit
    if guard_limited:
        ball = limit
    else:
        ball = 2**n0
    alpha, arg = min_small_divisor(omega, ball)
    if alpha == 0.0:
        raise ResonanceError(
            f"omega . nu = 0 at nu = {arg}", nu=arg, value=alpha
        )
    delta = delta_of(n0)

    if theorem == 1:
        eps_bar = (A / C0) ** 2 * alpha * _STRICT_MARGIN
        zeta_bar = 0.5 * (A / C0) ** 2
        beta = None
    else:
        # Largest eps_bar keeping the combined strict inequality satisfied,
        # with a definite margin so the verbatim re-check stays strict.
        margin_budget = (A / C0) ** 4 * _STRICT_MARGIN
        zeta_bar = 0.5 * margin_budget

        def admissible(eps: float) -> bool:
            b = max(delta, 2.0 * abs(eps * a) / alpha)
            worst = max(zeta_bar, delta / abs(a), eps / alpha, b)
            return worst <= margin_budget

        hi = alpha * margin_budget  # eps/alpha <= margin_budget is necessary
        while not admissible(hi):
            hi *= 0.5
            if hi < 1e-300:
                raise ValueError("no admissible eps_bar found (envelope too tight)")
        lo = hi
        grow = hi * 2.0
        for _ in range(200):
            if admissible(grow):
                lo = grow
                grow *= 2.0
            else:
                break
        hi = grow
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if admissible(mid):
                lo = mid
            else:
                hi = mid
        eps_bar = lo
        beta = max(delta, 2.0 * abs(eps_bar * a) / alpha)

    return EpsilonBounds(
        theorem=theorem,
        A=A,
        n0=int(n0),
        delta=delta,
        C0=C0,
        alpha_n0=alpha,
        eps_bar=eps_bar,
        zeta_bar=zeta_bar,
        beta=beta,
        guard_limited=guard_limited,
    )


def recheck_bounds(bounds: EpsilonBounds, a: float) -> dict:
    """Re-evaluate the defining inequalities verbatim; True means satisfied."""
    A2 = bounds.A**2
    C2 = bounds.C0**2
    if bounds.theorem == 1:
        return {
            "delta": C2 * bounds.delta / abs(a) <= A2,
            "eps_bar": C2 * bounds.eps_bar / bounds.alpha_n0 <= A2,
            "zeta_bar": C2 * bounds.zeta_bar < A2,
        }
    A4 = bounds.A**4
    C4 = bounds.C0**4
    beta = max(bounds.delta, 2.0 * abs(bounds.eps_bar * a) / bounds.alpha_n0)
    worst = max(
        bounds.zeta_bar,
        bounds.delta / abs(a),
        bounds.eps_bar / bounds.alpha_n0,
        beta,
    )
    return {"combined": C4 * worst < A4, "beta_consistent": beta == bounds.beta}
