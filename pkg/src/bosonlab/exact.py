"""Exact rational complex arithmetic for polynomial-identity work.

Gate entries read from float64 are dyadic rationals, so circuits built from
them can be evaluated with :class:`fractions.Fraction` pairs without any
rounding.  That makes polynomial facts (degree bounds, interpolation from
exact node values) checkable as exact statements rather than floating-point
approximations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class QC:
    """A complex number with exact rational real and imaginary parts."""

    re: Fraction = ZERO
    im: Fraction = ZERO

    def __add__(self, other: "QC") -> "QC":
        return QC(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "QC") -> "QC":
        return QC(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "QC":
        return QC(-self.re, -self.im)

    def __mul__(self, other: "QC") -> "QC":
        return QC(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def scaled(self, factor: Fraction) -> "QC":
        return QC(self.re * factor, self.im * factor)

    def conj(self) -> "QC":
        return QC(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def reciprocal(self) -> "QC":
        d = self.abs2()
        if d == 0:
            raise ZeroDivisionError("reciprocal of exact zero")
        return QC(self.re / d, -self.im / d)

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    @staticmethod
    def from_complex(z: complex) -> "QC":
        return QC(Fraction(float(z.real)), Fraction(float(z.imag)))


QC_ZERO = QC()
QC_ONE = QC(ONE, ZERO)

Matrix = tuple[tuple[QC, ...], ...]


def mat_from_complex(a: np.ndarray) -> Matrix:
    return tuple(tuple(QC.from_complex(z) for z in row) for row in np.asarray(a))


def mat_eye(n: int) -> Matrix:
    return tuple(tuple(QC_ONE if i == j else QC_ZERO for j in range(n)) for i in range(n))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    rows, inner, cols = len(a), len(b), len(b[0])
    return tuple(
        tuple(
            sum((a[i][k] * b[k][j] for k in range(inner)), QC_ZERO) for j in range(cols)
        )
        for i in range(rows)
    )


def apply_two_mode_gate(u: list[list[QC]], gate: Matrix, a: int, b: int) -> None:
    """In place: rows ``a`` and ``b`` of ``u`` become ``gate @ [row_a; row_b]`` (0-based)."""
    row_a, row_b = u[a], u[b]
    (g00, g01), (g10, g11) = gate
    u[a] = [g00 * x + g01 * y for x, y in zip(row_a, row_b)]
    u[b] = [g10 * x + g11 * y for x, y in zip(row_a, row_b)]


def cayley_gate_exact(h: np.ndarray, theta: Fraction) -> tuple[Matrix, QC]:
    """Exact 2x2 Cayley transform and its denominator factor.

    Returns (H(theta), q(theta)) with
    H(theta) = ((2-theta) H + theta I)(theta H + (2-theta) I)^(-1) and
    q(theta) = det(theta H + (2-theta) I) / 4, evaluated in exact rationals
    from the dyadic float entries of ``h``.
    """
    hq = mat_from_complex(h)
    th = QC(theta, ZERO)
    co = QC(2 - theta, ZERO)
    num = tuple(
        tuple(
            hq[i][j] * co + (th if i == j else QC_ZERO) for j in range(2)
        )
        for i in range(2)
    )
    den = tuple(
        tuple(
            hq[i][j] * th + (co if i == j else QC_ZERO) for j in range(2)
        )
        for i in range(2)
    )
    det = den[0][0] * den[1][1] - den[0][1] * den[1][0]
    inv_det = det.reciprocal()
    adj = ((den[1][1], -den[0][1]), (-den[1][0], den[0][0]))
    den_inv = tuple(tuple(entry * inv_det for entry in row) for row in adj)
    return mat_mul(num, den_inv), det.scaled(Fraction(1, 4))


def permanent_exact(a: Matrix) -> QC:
    """Permutation-sum permanent over exact complex entries (small n only)."""
    n = len(a)
    if n == 0:
        return QC_ONE
    total = QC_ZERO
    for sigma in itertools.permutations(range(n)):
        term = QC_ONE
        for i, j in enumerate(sigma):
            term = term * a[i][j]
        total = total + term
    return total


def lagrange_extrapolate_exact(
    nodes: list[Fraction], values: list[Fraction], x: Fraction
) -> Fraction:
    """Exact Lagrange evaluation at ``x`` of the interpolant through the points."""
    total = ZERO
    for i, (xi, yi) in enumerate(zip(nodes, values)):
        weight = ONE
        for j, xj in enumerate(nodes):
            if j != i:
                weight *= (x - xj) / (xi - xj)
        total += yi * weight
    return total


def finite_difference(values: list[Fraction], order: int) -> Fraction:
    """Forward difference of ``order`` at the left end of unit-spaced samples."""
    if order >= len(values):
        raise ValueError(f"need {order + 1} samples for order {order}")
    out = ZERO
    coeff = 1
    for k in range(order + 1):
        sign = -1 if (order - k) % 2 else 1
        out += sign * coeff * values[k]
        coeff = coeff * (order - k) // (k + 1)
    return out
