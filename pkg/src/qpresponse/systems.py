"""Problem instances: separable systems (autonomous nonlinearity plus
additive quasi-periodic forcing) and general systems (angle-dependent
nonlinearity given as a coefficient grid), hypothesis certification at a
simple zero, and analyticity-envelope majorants.

Nonlinearities are supplied as finite Taylor data so re-expansions are
exact binomial shifts rather than quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from numpy.polynomial import Polynomial

from .diophantine import min_small_divisor
from .errors import HypothesisError, SymmetryError
from .fourier import FourierSeries, MultiIndex, mode_norm

ROOT_RESIDUAL_TOL = 1e-13
SIMPLE_ZERO_TOL = 1e-9
_GRID_REALITY_TOL = 1e-14


class Root(NamedTuple):
    """A zero of the averaged equation with its derivative."""

    c0: float
    slope: float
    simple: bool


def _poly_from_taylor(coeffs) -> Polynomial:
    """Build a polynomial from {power: coefficient} or a dense sequence."""
    if isinstance(coeffs, dict):
        if not coeffs:
            return Polynomial([0.0])
        top = max(coeffs)
        dense = [0.0] * (top + 1)
        for p, c in coeffs.items():
            if p < 0:
                raise ValueError("negative Taylor power")
            dense[int(p)] = float(c)
        return Polynomial(dense)
    return Polynomial([float(c) for c in coeffs])


def shift_taylor(coeffs, old_center: float, new_center: float) -> dict:
    """Re-expand sum_p c_p (x - old)^p about ``new_center`` (exact binomials)."""
    poly = _poly_from_taylor(coeffs)
    shifted = poly(Polynomial([new_center - old_center, 1.0]))
    return {p: float(c) for p, c in enumerate(shifted.coef)}


def find_c0(g_coeffs, f0: float, search_interval, *,
            center: float = 0.0, grid_points: int = 601) -> list[Root]:
    """Locate zeros of g(x) - f0 on an interval by sign-change bisection
    refined with Newton steps.

    ``g_coeffs`` is finite Taylor data about ``center``.  Every root is
    polished to |g(c0) - f0| <= 1e-13 and paired with g'(c0); roots whose
    derivative magnitude is <= 1e-9 are flagged non-simple.
    """
    lo, hi = float(search_interval[0]), float(search_interval[1])
    if not lo < hi:
        raise ValueError("search interval must satisfy lo < hi")
    poly = _poly_from_taylor(g_coeffs)
    resid = poly - Polynomial([float(f0)])
    dresid = resid.deriv()

    def r(x):
        return float(resid(x - center))

    def dr(x):
        return float(dresid(x - center))

    xs = np.linspace(lo, hi, int(grid_points))
    vals = np.array([r(x) for x in xs])

    candidates = []
    for i in range(len(xs) - 1):
        if abs(vals[i]) <= ROOT_RESIDUAL_TOL:
            candidates.append(xs[i])
        elif vals[i] * vals[i + 1] < 0:
            a, b, fa = xs[i], xs[i + 1], vals[i]
            for _ in range(80):
                m = 0.5 * (a + b)
                fm = r(m)
                if fm == 0.0 or b - a < 1e-15 * max(1.0, abs(m)):
                    a = b = m
                    break
                if fa * fm < 0:
                    b = m
                else:
                    a, fa = m, fm
            candidates.append(0.5 * (a + b))
    if abs(vals[-1]) <= ROOT_RESIDUAL_TOL:
        candidates.append(xs[-1])

    roots: list[Root] = []
    for x in candidates:
        for _ in range(60):
            fx = r(x)
            if abs(fx) <= ROOT_RESIDUAL_TOL:
                break
            dfx = dr(x)
            if abs(dfx) < 1e-14:
                break
            step = fx / dfx
            x -= step
            if abs(step) < 1e-16 * max(1.0, abs(x)):
                break
        if abs(r(x)) > ROOT_RESIDUAL_TOL or not lo - 1e-12 <= x <= hi + 1e-12:
            continue
        if any(abs(x - found.c0) <= 1e-8 * max(1.0, abs(x)) for found in roots):
            continue
        slope = dr(x)
        roots.append(Root(float(x), float(slope), abs(slope) > SIMPLE_ZERO_TOL))
    roots.sort(key=lambda root: root.c0)
    return roots


@dataclass(frozen=True)
class AnalyticityEnvelope:
    """Certified majorants: strip half-width xi, disk radius rho, forcing
    majorant Phi and nonlinearity majorant Gamma."""

    xi: float
    rho: float
    Phi: float
    Gamma: float

    def __post_init__(self):
        if not (self.xi > 0 and self.rho > 0):
            raise ValueError("xi and rho must be strictly positive")


class SeparableSystem:
    """Autonomous nonlinearity g plus additive quasi-periodic forcing f.

    ``g_taylor`` holds Taylor coefficients of g about ``center``; once
    :func:`recentre` has certified a simple zero, ``center == c0``, the
    constant term equals the forcing average, and ``a = g'(c0) != 0``.
    """

    theorem = 1

    def __init__(self, omega, forcing: FourierSeries, g_taylor, *,
                 center: float = 0.0, c0: float | None = None):
        self.omega = tuple(float(w) for w in omega)
        self.dimension = len(self.omega)
        if forcing.dimension != self.dimension:
            raise ValueError("forcing dimension does not match omega")
        if not forcing.real_valued:
            forcing = FourierSeries(
                forcing.dimension, dict(forcing.items_sorted()), real_valued=True
            )
        self.forcing = forcing
        self.g_taylor = {int(p): float(c) for p, c in dict(g_taylor).items()}
        self.center = float(center)
        self.c0 = None if c0 is None else float(c0)

    @property
    def certified(self) -> bool:
        return self.c0 is not None

    @property
    def a(self) -> float:
        """Linear coefficient g'(c0); only meaningful once certified."""
        return self.g_taylor.get(1, 0.0)

    @property
    def g_const(self) -> float:
        return self.g_taylor.get(0, 0.0)

    @cached_property
    def nonlinear_taylor(self) -> dict[int, float]:
        """Coefficients of the nonlinear remainder (powers p >= 2)."""
        return {p: c for p, c in sorted(self.g_taylor.items())
                if p >= 2 and c != 0.0}

    @property
    def f0(self) -> float:
        return self.forcing.zero_mode().real

    def g_value(self, x: float) -> float:
        t = x - self.center
        return float(sum(c * t**p for p, c in sorted(self.g_taylor.items())))

    def g_slope(self, x: float) -> float:
        t = x - self.center
        return float(sum(p * c * t ** (p - 1)
                         for p, c in sorted(self.g_taylor.items()) if p >= 1))

    def require_certified(self):
        if not self.certified:
            raise HypothesisError("system is not certified at a simple zero")
        if abs(self.a) <= SIMPLE_ZERO_TOL:
            raise HypothesisError("linear coefficient a = g'(c0) vanishes")


class GeneralSystem:
    """Angle-dependent nonlinearity given by its coefficient grid
    a[nu, p] about ``center``.

    The grid may be complex; conjugate symmetry a[-nu, p] == conj(a[nu, p])
    is enforced so the nonlinearity is real-valued.  Once certified,
    ``center == c0``, the averaged constant a[0, 0] vanishes and
    ``a = a[0, 1] != 0``.
    """

    theorem = 2

    def __init__(self, omega, grid, *, center: float = 0.0, c0: float | None = None):
        self.omega = tuple(float(w) for w in omega)
        self.dimension = len(self.omega)
        table: dict[tuple[MultiIndex, int], complex] = {}
        for (nu, p), c in dict(grid).items():
            mode = tuple(int(x) for x in nu)
            if len(mode) != self.dimension:
                raise ValueError(f"grid mode {nu!r} has wrong length")
            if p < 0:
                raise ValueError("negative Taylor power in grid")
            c = complex(c)
            if c != 0j:
                table[(mode, int(p))] = c
        self.grid = table
        self.center = float(center)
        self.c0 = None if c0 is None else float(c0)
        self._check_reality()

    def _check_reality(self):
        for (nu, p), c in self.grid.items():
            neg = tuple(-x for x in nu)
            mirror = self.grid.get((neg, p), 0j)
            if abs(mirror - c.conjugate()) > _GRID_REALITY_TOL:
                raise SymmetryError(
                    f"grid entry ({nu}, {p}) breaks conjugate symmetry"
                )

    @property
    def certified(self) -> bool:
        return self.c0 is not None

    @property
    def a(self) -> float:
        zero = (0,) * self.dimension
        return self.grid.get((zero, 1), 0j).real

    @property
    def p_max(self) -> int:
        return max((p for (_, p) in self.grid), default=0)

    def averaged_taylor(self) -> dict[int, float]:
        """Taylor coefficients of the averaged nonlinearity h_0(x)."""
        zero = (0,) * self.dimension
        return {p: c.real for (nu, p), c in self.grid.items() if nu == zero}

    @cached_property
    def forcing_series(self) -> FourierSeries:
        """Constant-in-x layer at nonzero modes: h_nu(c0) for nu != 0."""
        return FourierSeries(
            self.dimension,
            {nu: c for (nu, p), c in self.grid.items() if p == 0 and any(nu)},
            real_valued=True,
        )

    @cached_property
    def alpha1_series(self) -> FourierSeries:
        """Linear-in-x layer at nonzero modes."""
        return FourierSeries(
            self.dimension,
            {nu: c for (nu, p), c in self.grid.items() if p == 1 and any(nu)},
            real_valued=True,
        )

    def alpha_series(self, p: int) -> FourierSeries:
        """Full angle series of the coefficient of (x - c0)^p."""
        return FourierSeries(
            self.dimension,
            {nu: c for (nu, q), c in self.grid.items() if q == p},
            real_valued=True,
        )

    def nonlinear_powers(self) -> list[int]:
        return sorted({p for (_, p) in self.grid if p >= 2})

    def h_value(self, x: float, psi) -> float:
        """Evaluate h(x, psi) directly from the grid."""
        t = x - self.center
        total = 0j
        for p in sorted({q for (_, q) in self.grid}):
            total += self.alpha_series(p).evaluate(psi) * t**p
        if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
            raise SymmetryError("h evaluated to a non-real value")
        return total.real

    def require_certified(self):
        if not self.certified:
            raise HypothesisError("system is not certified at a simple zero")
        if abs(self.a) <= SIMPLE_ZERO_TOL:
            raise HypothesisError("linear coefficient a = a[0, 1] vanishes")


def recentre(system, c0: float):
    """Re-expand the Taylor data about a certified simple zero.

    For separable systems the zero condition is g(c0) = f0 (the forcing
    average); for general systems it is h_0(c0) = 0.  Raises
    :class:`HypothesisError` if the residual exceeds 1e-13 or the
    derivative is within 1e-9 of zero.
    """
    c0 = float(c0)
    if isinstance(system, SeparableSystem):
        shifted = shift_taylor(system.g_taylor, system.center, c0)
        residual = shifted.get(0, 0.0) - system.f0
        if abs(residual) > ROOT_RESIDUAL_TOL:
            raise HypothesisError(
                f"g(c0) - f0 = {residual:.3e} exceeds the certification tolerance"
            )
        if abs(shifted.get(1, 0.0)) <= SIMPLE_ZERO_TOL:
            raise HypothesisError("zero is not simple: g'(c0) vanishes")
        return SeparableSystem(
            system.omega, system.forcing, shifted, center=c0, c0=c0
        )
    if isinstance(system, GeneralSystem):
        by_mode: dict[MultiIndex, dict[int, complex]] = {}
        for (nu, p), c in system.grid.items():
            by_mode.setdefault(nu, {})[p] = c
        zero = (0,) * system.dimension
        new_grid: dict[tuple[MultiIndex, int], complex] = {}
        for nu, coeffs in by_mode.items():
            re = shift_taylor({p: c.real for p, c in coeffs.items()},
                              system.center, c0)
            im = shift_taylor({p: c.imag for p, c in coeffs.items()},
                              system.center, c0)
            for p in set(re) | set(im):
                val = complex(re.get(p, 0.0), im.get(p, 0.0))
                if val != 0j:
                    new_grid[(nu, p)] = val
        residual = new_grid.get((zero, 0), 0j)
        if abs(residual) > ROOT_RESIDUAL_TOL:
            raise HypothesisError(
                f"h_0(c0) = {abs(residual):.3e} exceeds the certification tolerance"
            )
        new_grid.pop((zero, 0), None)
        if abs(new_grid.get((zero, 1), 0j)) <= SIMPLE_ZERO_TOL:
            raise HypothesisError("zero is not simple: the averaged slope vanishes")
        return GeneralSystem(system.omega, new_grid, center=c0, c0=c0)
    raise TypeError(f"unsupported system type {type(system)!r}")


def certify_envelope(system, xi: float, rho: float) -> AnalyticityEnvelope:
    """Weighted-l1 majorants making the decay inequalities hold by
    construction: |f_nu| <= Phi e^{-xi |nu|} and
    |a_{nu,p}| <= Gamma rho^{-p} e^{-xi |nu|}."""
    if isinstance(system, SeparableSystem):
        system.require_certified()
        phi = system.forcing.weighted_norm(xi)
        gamma = max(
            (abs(c) * rho**p for p, c in system.g_taylor.items() if p >= 1),
            default=0.0,
        )
        return AnalyticityEnvelope(xi=xi, rho=rho, Phi=phi, Gamma=gamma)
    if isinstance(system, GeneralSystem):
        system.require_certified()
        weighted: dict[int, float] = {}
        for (nu, p), c in system.grid.items():
            weighted[p] = weighted.get(p, 0.0) + abs(c) * math.exp(xi * mode_norm(nu))
        gamma = max((w * rho**p for p, w in weighted.items()), default=0.0)
        phi = system.forcing_series.weighted_norm(xi)
        return AnalyticityEnvelope(xi=xi, rho=rho, Phi=phi, Gamma=gamma)
    raise TypeError(f"unsupported system type {type(system)!r}")


class NonresonanceReport(NamedTuple):
    min_value: float
    argmin: MultiIndex | None
    threshold: float
    resonant: bool


def check_nonresonance(omega, N: int) -> NonresonanceReport:
    """Exhaustive min of |omega . nu| over 0 < |nu| <= N.

    A minimum at or below 1e-15 |omega|_1 N signals rational dependence up
    to N (``resonant`` flag).
    """
    omega = tuple(float(w) for w in omega)
    value, arg = min_small_divisor(omega, int(N))
    threshold = 1e-15 * sum(abs(w) for w in omega) * N
    return NonresonanceReport(value, arg, threshold, value <= threshold)
