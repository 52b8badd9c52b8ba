"""The zero-mode (bifurcation) balance and its solution zeta(eps).

The range expansion leaves the average of the solution free; this module
fixes it by a derivative-free root solve of the balance

    a zeta + [nonlinear part](zero mode) = 0

over a bracket inside the analyticity disk.  For general systems the
balance is implemented in its dissipation-homogeneous form; the literal
scaled variant (the linear angle-coupling term not carrying the
dissipation factor) is available behind ``literal=True`` for comparison.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    BifurcationSolveError,
    LadderDivergenceError,
    SymmetryError,
)
from .fourier import FourierSeries
from .ladder import (
    assemble,
    build_ladder,
    convergence_ratio,
    nonlinearity_series,
    range_residual,
)
from .systems import SeparableSystem

_IMAG_TOL = 1e-12
DEFAULT_BRACKET = (-0.25, 0.25)
DEFAULT_SCAN_POINTS = 7


def _real_part(value: complex, what: str) -> float:
    if abs(value.imag) > _IMAG_TOL:
        raise SymmetryError(
            f"{what} has imaginary part {value.imag:.3e} beyond tolerance"
        )
    return value.real


def bifurcation_balance(sys, w: FourierSeries, eps: float,
                        literal: bool = False) -> float:
    """Evaluate the zero-mode balance at an assembled solution ``w``
    (whose zero mode is the free parameter zeta).

    ``literal`` switches general systems to the alternative scaling in
    which only the linear angle-coupling average enters undamped; it is a
    no-op for separable systems.
    """
    zeta = _real_part(w.zero_mode(), "the assembled zero mode")
    a = sys.a
    if isinstance(sys, SeparableSystem) or not literal:
        nl0 = nonlinearity_series(sys, w).zero_mode()
        return a * zeta + _real_part(nl0, "the zero-mode balance")
    # literal scaled form, general systems only
    lin0 = 0j
    if len(sys.alpha1_series) and len(w):
        lin0 = sys.alpha1_series.convolve(w).zero_mode()
    nl0 = 0j
    w_pow = w
    current = 1
    for p in sys.nonlinear_powers():
        while current < p:
            w_pow = w_pow.convolve(w)
            current += 1
        nl0 += sys.alpha_series(p).convolve(w_pow).zero_mode()
    return eps * a * zeta + _real_part(lin0 + eps * nl0,
                                       "the zero-mode balance")


def _ladder_and_sum(sys, eps, zeta, K, N):
    ladder = build_ladder(sys, eps, zeta, K, N)
    ratios, estimate = convergence_ratio(ladder)
    if not np.isfinite(estimate) or estimate >= 1.0:
        raise LadderDivergenceError(
            f"expansion does not contract at eps={eps!r}, zeta={zeta!r} "
            f"(ratio estimate {estimate:.3g})"
        )
    return ladder, ratios, estimate, assemble(ladder, 1.0)


def H(zeta: float, eps: float, sys, K: int, N: int,
      literal: bool = False) -> float:
    """Zero-mode balance evaluated through a fresh K-order expansion."""
    sys.require_certified()
    _, _, _, w = _ladder_and_sum(sys, eps, zeta, K, N)
    return bifurcation_balance(sys, w, eps, literal=literal)


def solve_zeta(eps: float, sys, K: int, N: int, bracket=None, *,
               tol: float | None = None, literal: bool = False,
               scan_points: int = DEFAULT_SCAN_POINTS) -> float:
    """Solve the balance for zeta on a bracket.

    The bracket is scanned first: a point already below tolerance is
    returned as is (zeta = 0 is probed up front, so linear systems return
    exactly 0.0), the sign change must be unique, and the root is then
    polished by a safeguarded secant/bisection iteration to
    |H| <= 1e-12 max(1, |a|).
    """
    sys.require_certified()
    a = sys.a
    if tol is None:
        tol = 1e-12 * max(1.0, abs(a))
    lo, hi = DEFAULT_BRACKET if bracket is None else (bracket[0], bracket[1])
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")

    def h(z: float) -> float:
        return H(z, eps, sys, K, N, literal=literal)

    if lo <= 0.0 <= hi:
        h0 = h(0.0)
        if abs(h0) <= tol:
            return 0.0

    xs = list(np.linspace(lo, hi, max(3, scan_points)))
    vals = []
    for x in xs:
        v = h(x)
        if abs(v) <= tol:
            return float(x)
        vals.append(v)

    changes = [
        i for i in range(len(xs) - 1) if vals[i] * vals[i + 1] < 0.0
    ]
    if not changes:
        raise BifurcationSolveError(
            f"no sign change of the balance on [{lo}, {hi}]: widen the "
            "bracket or check the hypothesis"
        )
    if len(changes) > 1:
        raise BifurcationSolveError(
            f"{len(changes)} sign changes on [{lo}, {hi}]: bracket exceeds "
            "the uniqueness neighbourhood, shrink it"
        )
    i = changes[0]
    root = brentq(h, xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15, maxiter=200)
    value = h(root)
    if abs(value) <= tol:
        return float(root)
    # secant polish from the brentq endpoint pair
    x0, x1 = root, root + max(1e-13, 1e-10 * abs(root))
    f0, f1 = value, h(x1)
    for _ in range(10):
        if abs(f1) <= tol:
            return float(x1)
        if f1 == f0:
            break
        x0, x1, f0 = x1, x1 - f1 * (x1 - x0) / (f1 - f0), f1
        f1 = h(x1)
    if abs(f1) <= tol:
        return float(x1)
    raise BifurcationSolveError(
        f"balance residual {abs(f1):.3e} stayed above tolerance {tol:.3e}"
    )


@dataclass
class ResponseSolution:
    """Assembled quasi-periodic response with residual diagnostics."""

    c0: float
    zeta: float
    u: FourierSeries  # zero mode equals zeta
    epsilon: float
    residual_range: float
    residual_bifurcation: float
    K: int
    N: int
    ratios: list = field(default_factory=list)
    ratio_estimate: float = 0.0
    continuity_checked: bool = False
    probe_norms: list = field(default_factory=list)
    literal_balance: bool = False

    def response_norm(self) -> float:
        """|zeta| + sum of nonzero-mode amplitudes (sup-norm majorant)."""
        return abs(self.zeta) + self.u.without_zero_mode().weighted_norm(0.0)

    def x_at_angles(self, psi) -> float:
        value = self.u.evaluate(psi)
        return self.c0 + _real_part(value, "the response evaluation")

    def x_at_times(self, times, omega) -> np.ndarray:
        angles = np.outer(np.asarray(times, dtype=float), omega)
        values = self.u.evaluate_many(angles)
        worst = float(np.max(np.abs(values.imag))) if values.size else 0.0
        if worst > 1e-9 * max(1.0, float(np.max(np.abs(values.real)))):
            raise SymmetryError("response evaluation is not real-valued")
        return self.c0 + values.real

    def velocity_at_times(self, times, omega) -> np.ndarray:
        du = self.u.time_derivative(omega)
        angles = np.outer(np.asarray(times, dtype=float), omega)
        return du.evaluate_many(angles).real

    def to_json_dict(self) -> dict:
        return {
            "c0": self.c0,
            "zeta": self.zeta,
            "epsilon": self.epsilon,
            "residuals": {
                "range": self.residual_range,
                "bifurcation": self.residual_bifurcation,
            },
            "u": self.u.to_json_dict(),
            "ladder_meta": {
                "K": self.K,
                "N": self.N,
                "ratios": list(self.ratios),
                "ratio_estimate": self.ratio_estimate,
                "continuity_checked": self.continuity_checked,
                "probe_norms": list(self.probe_norms),
                "literal_balance": self.literal_balance,
            },
        }


@dataclass
class BifurcationProblem:
    """A solve request: certified system, dissipation, expansion sizes and
    solver knobs."""

    sys: object
    eps: float
    K: int
    N: int
    bracket: tuple = DEFAULT_BRACKET
    tol: float | None = None
    literal: bool = False

    def solve(self, **kwargs) -> ResponseSolution:
        return solve_response(
            self.eps, self.sys, self.K, self.N, bracket=self.bracket,
            tol=self.tol, literal=self.literal, **kwargs
        )


def solve_response(eps: float, sys, K: int, N: int, *, envelope=None,
                   bounds=None, bracket=None, tol: float | None = None,
                   literal: bool = False, probe: bool = True,
                   scan_points: int = DEFAULT_SCAN_POINTS) -> ResponseSolution:
    """Solve the balance, rebuild the expansion at the solved zeta and
    package the response with residuals.

    When ``bounds`` (an EpsilonBounds) is supplied and eps exceeds its
    admissible estimate, a warning is issued but the solve proceeds.  With
    ``probe=True`` the solve is repeated at eps/2 and eps/4 and
    ``continuity_checked`` records whether the response norm decreases
    towards zero dissipation.
    """
    sys.require_certified()
    if bounds is not None and abs(eps) > bounds.eps_bar:
        warnings.warn(
            f"eps = {eps!r} exceeds the constructive estimate "
            f"eps_bar = {bounds.eps_bar:.3e}; the expansion may diverge",
            stacklevel=2,
        )
    if bracket is None and envelope is not None:
        bracket = (-envelope.rho / 4.0, envelope.rho / 4.0)

    zeta = solve_zeta(eps, sys, K, N, bracket, tol=tol, literal=literal,
                      scan_points=scan_points)
    ladder, ratios, estimate, w = _ladder_and_sum(sys, eps, zeta, K, N)
    solution = ResponseSolution(
        c0=sys.c0,
        zeta=zeta,
        u=w,
        epsilon=eps,
        residual_range=range_residual(sys, eps, w, N),
        residual_bifurcation=abs(bifurcation_balance(sys, w, eps,
                                                     literal=literal)),
        K=K,
        N=N,
        ratios=ratios,
        ratio_estimate=estimate,
        literal_balance=literal,
    )
    if probe and eps != 0.0:
        norms = [solution.response_norm()]
        for frac in (0.5, 0.25):
            sub = solve_response(
                eps * frac, sys, K, N, envelope=envelope, bracket=bracket,
                tol=tol, literal=literal, probe=False,
                scan_points=scan_points,
            )
            norms.append(sub.response_norm())
        solution.probe_norms = norms
        solution.continuity_checked = norms[0] > norms[1] > norms[2]
        if not solution.continuity_checked:
            warnings.warn(
                f"response norms {norms} do not decrease towards eps -> 0",
                stacklevel=2,
            )
    return solution
