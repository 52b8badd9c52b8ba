"""Exact-support arithmetic on truncated multi-dimensional Fourier series.

A series is a finite map from integer mode vectors ``nu`` (tuples of length
``d``) to complex coefficients; absent modes are zero.  All mode norms are
l1 throughout the package (truncation balls, decay weights, small-divisor
balls), and every coefficient accumulation runs in lexicographic mode order
so results are bit-reproducible run to run.
"""

from __future__ import annotations

import cmath
import math
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionMismatchError, SymmetryError

MultiIndex = tuple[int, ...]

# Coefficients with |c| below this are dropped after an operation; the default
# only removes exact zeros (cancellations and untouched box cells).
DROP_THRESHOLD = 1e-300

# Above this dense-box cell count, convolution falls back to dict accumulation.
_DENSE_CELL_LIMIT = 4_000_000

_REALITY_TOL = 1e-14


def mode_norm(nu) -> int:
    """l1 norm of a mode vector."""
    return int(sum(abs(int(x)) for x in nu))


def _as_mode(nu, d) -> MultiIndex:
    mode = tuple(int(x) for x in nu)
    if len(mode) != d:
        raise DimensionMismatchError(f"mode {nu!r} has length {len(mode)}, expected {d}")
    if any(x != y for x, y in zip(mode, nu)):
        raise ValueError(f"mode {nu!r} has non-integer entries")
    return mode


class FourierSeries:
    """Finitely supported Fourier series on the d-torus.

    Parameters
    ----------
    dimension : int
        Number of angles d >= 1.
    coeffs : mapping or iterable of (mode, coefficient) pairs
        Finite support; modes are integer tuples of length ``dimension``.
    real_valued : bool
        Declares conjugate symmetry ``coeff(-nu) == conj(coeff(nu))``; the
        symmetry is validated (to 1e-14) at construction and the flag is
        preserved by convolve/power/truncate.

    Instances are treated as immutable values: every operation returns a new
    series.
    """

    __slots__ = ("dimension", "_coeffs", "real_valued", "_sorted")

    def __init__(self, dimension: int, coeffs=(), real_valued: bool = False,
                 validate: bool = True):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = int(dimension)
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        table: dict[MultiIndex, complex] = {}
        for nu, c in items:
            mode = _as_mode(nu, self.dimension)
            c = complex(c)
            if abs(c) >= DROP_THRESHOLD:
                table[mode] = table.get(mode, 0j) + c
        self._coeffs = table
        self.real_valued = bool(real_valued)
        self._sorted = None
        # derived series propagate the flag without re-validating; symmetry
        # of operation outputs is asserted by the property tests instead
        if self.real_valued and validate:
            self._check_reality()

    # -- basics ---------------------------------------------------------

    def _check_reality(self):
        for nu, c in self._coeffs.items():
            neg = tuple(-x for x in nu)
            mirror = self._coeffs.get(neg, 0j)
            if abs(mirror - c.conjugate()) > _REALITY_TOL * max(1.0, abs(c)):
                raise SymmetryError(
                    f"coefficient at {nu} breaks conjugate symmetry: "
                    f"{c!r} vs {mirror!r} at {neg}"
                )

    def support(self) -> list[MultiIndex]:
        """Stored modes in lexicographic order."""
        if self._sorted is None:
            self._sorted = sorted(self._coeffs)
        return list(self._sorted)

    def items_sorted(self):
        if self._sorted is None:
            self._sorted = sorted(self._coeffs)
        for nu in self._sorted:
            yield nu, self._coeffs[nu]

    def coeff(self, nu) -> complex:
        return self._coeffs.get(_as_mode(nu, self.dimension), 0j)

    def zero_mode(self) -> complex:
        """Coefficient of the constant mode (0, ..., 0); zero if absent."""
        return self._coeffs.get((0,) * self.dimension, 0j)

    def max_norm(self) -> int:
        """Largest l1 mode norm in the support (0 for the empty series)."""
        return max((mode_norm(nu) for nu in self._coeffs), default=0)

    def __len__(self):
        return len(self._coeffs)

    def __repr__(self):
        return f"FourierSeries(d={self.dimension}, modes={len(self._coeffs)})"

    # -- algebra ---------------------------------------------------------

    def _require_same_dim(self, other: "FourierSeries"):
        if self.dimension != other.dimension:
            raise DimensionMismatchError(
                f"dimension mismatch: {self.dimension} vs {other.dimension}"
            )

    def add(self, other: "FourierSeries") -> "FourierSeries":
        """Mode-wise sum."""
        self._require_same_dim(other)
        out = dict(self._coeffs)
        for nu in sorted(other._coeffs):
            out[nu] = out.get(nu, 0j) + other._coeffs[nu]
        return FourierSeries(
            self.dimension,
            out,
            real_valued=self.real_valued and other.real_valued,
            validate=False,
        )

    def __add__(self, other):
        return self.add(other)

    def scaled(self, factor) -> "FourierSeries":
        """Series with every coefficient multiplied by ``factor``."""
        factor = complex(factor)
        real = self.real_valued and abs(factor.imag) == 0.0
        return FourierSeries(
            self.dimension,
            {nu: factor * c for nu, c in self._coeffs.items()},
            real_valued=real,
            validate=False,
        )

    def convolve(self, other: "FourierSeries", drop_below: float = DROP_THRESHOLD) -> "FourierSeries":
        """Coefficient-wise product series: out(nu) = sum a(nu1) b(nu - nu1).

        Per-output sums accumulate in lexicographic order of the left
        factor's mode nu1; the support is the Minkowski sum of the supports
        (minus exact cancellations below ``drop_below``).
        """
        self._require_same_dim(other)
        real = self.real_valued and other.real_valued
        if not self._coeffs or not other._coeffs:
            return FourierSeries(self.dimension, {}, real_valued=real)


        d = self.dimension
        a_keys = self.support()
        b_keys = other.support()
        a_lo = [min(k[i] for k in a_keys) for i in range(d)]
        a_hi = [max(k[i] for k in a_keys) for i in range(d)]
        b_lo = [min(k[i] for k in b_keys) for i in range(d)]
        b_hi = [max(k[i] for k in b_keys) for i in range(d)]
        out_lo = [a_lo[i] + b_lo[i] for i in range(d)]
        b_shape = tuple(b_hi[i] - b_lo[i] + 1 for i in range(d))
        out_shape = tuple(a_hi[i] - a_lo[i] + b_shape[i] for i in range(d))
        cells = math.prod(out_shape)

        table: dict[MultiIndex, complex] = {}
        if cells <= _DENSE_CELL_LIMIT:
            b_arr = np.zeros(b_shape, dtype=complex)
            for nu in b_keys:
                b_arr[tuple(nu[i] - b_lo[i] for i in range(d))] = other._coeffs[nu]
            out = np.zeros(out_shape, dtype=complex)
            for nu in a_keys:
                sl = tuple(
                    slice(nu[i] - a_lo[i], nu[i] - a_lo[i] + b_shape[i]) for i in range(d)
                )
                out[sl] += self._coeffs[nu] * b_arr
            flat = np.flatnonzero(np.abs(out.ravel()) >= drop_below)
            for idx in flat:
                pos = np.unravel_index(idx, out_shape)
                table[tuple(int(pos[i]) + out_lo[i] for i in range(d))] = complex(out[pos])
        else:
            for nu1 in a_keys:
                c1 = self._coeffs[nu1]
                for nu2 in b_keys:
                    key = tuple(nu1[i] + nu2[i] for i in range(d))
                    table[key] = table.get(key, 0j) + c1 * other._coeffs[nu2]
            table = {k: v for k, v in table.items() if abs(v) >= drop_below}
        return FourierSeries(self.dimension, table, real_valued=real,
                             validate=False)

    def power(self, p: int) -> "FourierSeries":
        """Repeated convolution; power(s, 1) is s itself."""
        if p < 1:
            raise ValueError("power requires p >= 1 (handle constants explicitly)")
        result = self
        for _ in range(p - 1):
            result = result.convolve(self)
        return result

    def truncate(self, cutoff: int) -> "FourierSeries":
        """Drop every mode with l1 norm > cutoff; coefficients are untouched."""
        if cutoff < 1:
            raise ValueError("truncation cutoff must be >= 1")
        kept = {nu: c for nu, c in self._coeffs.items() if mode_norm(nu) <= cutoff}
        return FourierSeries(self.dimension, kept, real_valued=self.real_valued,
                             validate=False)

    def without_zero_mode(self) -> "FourierSeries":
        kept = {nu: c for nu, c in self._coeffs.items() if any(nu)}
        return FourierSeries(self.dimension, kept, real_valued=self.real_valued,
                             validate=False)

    # -- analysis ---------------------------------------------------------

    def evaluate(self, psi) -> complex:
        """Sum of coeff(nu) * exp(i nu . psi), in lexicographic nu order."""
        if len(psi) != self.dimension:
            raise DimensionMismatchError(
                f"angle vector has length {len(psi)}, expected {self.dimension}"
            )
        total = 0j
        for nu, c in self.items_sorted():
            phase = 0.0
            for x, p in zip(nu, psi):
                phase += x * p
            total += c * cmath.exp(1j * phase)
        return total

    def evaluate_many(self, angles) -> np.ndarray:
        """Vectorised :meth:`evaluate` over rows of ``angles`` (m, d).

        Matches the scalar path up to floating-point reassociation.
        """
        angles = np.atleast_2d(np.asarray(angles, dtype=float))
        if angles.shape[1] != self.dimension:
            raise DimensionMismatchError(
                f"angle rows have length {angles.shape[1]}, expected {self.dimension}"
            )
        if not self._coeffs:
            return np.zeros(angles.shape[0], dtype=complex)
        keys = np.array(self.support(), dtype=float)
        vals = np.array([self._coeffs[nu] for nu in self.support()])
        return np.exp(1j * angles @ keys.T) @ vals

    def weighted_norm(self, xi_prime: float = 0.0) -> float:
        """Majorant sum_nu |coeff(nu)| exp(xi' |nu|) of the sup on a strip."""
        if xi_prime < 0:
            raise ValueError("strip half-width must be >= 0")
        total = 0.0
        for nu, c in self.items_sorted():
            total += abs(c) * math.exp(xi_prime * mode_norm(nu))
        return total

    def time_derivative(self, omega) -> "FourierSeries":
        """Derivative of t -> series(omega t): multiply each mode by i omega . nu."""
        if len(omega) != self.dimension:
            raise DimensionMismatchError("omega length does not match dimension")
        out = {}
        for nu, c in self._coeffs.items():
            s = 0.0
            for x, w in zip(nu, omega):
                s += x * w
            out[nu] = 1j * s * c
        return FourierSeries(self.dimension, out, real_valued=self.real_valued,
                             validate=False)

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        """JSON form {"d": int, "modes": [{"nu": [...], "re": ., "im": .}, ...]}."""
        return {
            "d": self.dimension,
            "modes": [
                {"nu": list(nu), "re": c.real, "im": c.imag}
                for nu, c in self.items_sorted()
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict, real_valued: bool = False) -> "FourierSeries":
        coeffs = [
            (tuple(m["nu"]), complex(m["re"], m.get("im", 0.0))) for m in data["modes"]
        ]
        return cls(int(data["d"]), coeffs, real_valued=real_valued)


def zero_series(dimension: int, real_valued: bool = True) -> FourierSeries:
    return FourierSeries(dimension, {}, real_valued=real_valued)


def unit_series(dimension: int) -> FourierSeries:
    """Multiplicative identity: the constant 1."""
    return FourierSeries(dimension, {(0,) * dimension: 1.0}, real_valued=True)


def delta(nu: Iterable[int], coefficient=1.0) -> FourierSeries:
    """Series with a single mode."""
    mode = tuple(int(x) for x in nu)
    return FourierSeries(len(mode), {mode: complex(coefficient)})


def cosine(dimension: int, axis: int, amplitude: float = 1.0) -> FourierSeries:
    """cos(psi_axis) scaled by ``amplitude`` as a real series."""
    plus = tuple(1 if i == axis else 0 for i in range(dimension))
    minus = tuple(-x for x in plus)
    half = 0.5 * amplitude
    return FourierSeries(dimension, {plus: half, minus: half}, real_valued=True)


def sine(dimension: int, axis: int, amplitude: float = 1.0) -> FourierSeries:
    """sin(psi_axis) scaled by ``amplitude`` as a real series."""
    plus = tuple(1 if i == axis else 0 for i in range(dimension))
    minus = tuple(-x for x in plus)
    half = 0.5 * amplitude
    return FourierSeries(
        dimension, {plus: -1j * half, minus: 1j * half}, real_valued=True
    )
