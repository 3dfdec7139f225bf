"""Exact output probabilities: permanents, hafnians, and full distributions.

Occupation vectors are plain tuples of non-negative ints summing to the
photon number.  Probabilities follow the permanent formula with factorial
normalization on both the input and output sides, so distributions stay
normalized even for collision inputs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError

#: State-space guard for full enumeration.
MAX_OUTCOMES = 100_000


def as_occupation(values, modes: int | None = None) -> tuple[int, ...]:
    occ = tuple(int(v) for v in values)
    if any(v < 0 for v in occ):
        raise ValueError(f"occupations must be non-negative: {occ}")
    if modes is not None and len(occ) != modes:
        raise ValueError(f"expected {modes} modes, got {len(occ)}")
    return occ


def is_collision_free(occupation) -> bool:
    return all(v in (0, 1) for v in occupation)


def occupation_vectors(modes: int, photons: int):
    """All occupation vectors of ``photons`` over ``modes``, ascending lex order."""
    if modes == 1:
        yield (photons,)
        return
    for first in range(photons + 1):
        for rest in occupation_vectors(modes - 1, photons - first):
            yield (first, *rest)


def permanent(a: np.ndarray) -> complex:
    """Permanent by Ryser's formula with Gray-code subset updates, n <= 20."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"permanent needs a square matrix, got {a.shape}")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n > 20:
        raise ValueError(f"permanent limited to n <= 20, got {n}")
    sums = np.zeros(n, dtype=np.complex128)
    total = 0.0 + 0.0j
    sign = 1.0
    gray = 0
    for k in range(1, 1 << n):
        bit = k & -k
        j = bit.bit_length() - 1
        if gray & bit:
            sums -= a[:, j]
        else:
            sums += a[:, j]
        gray ^= bit
        sign = -sign  # parity of |S| flips with every Gray step
        total += sign * np.prod(sums)
    return complex(total if n % 2 == 0 else -total)


def permanent_naive(a: np.ndarray) -> complex:
    """Permutation-sum definition, vectorized over all n! terms; oracle for n <= 8."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"permanent needs a square matrix, got {a.shape}")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n > 8:
        raise ValueError(f"naive permanent limited to n <= 8, got {n}")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    terms = a[np.arange(n)[None, :], perms]
    return complex(terms.prod(axis=1).sum())


def sub_permanents(b: np.ndarray) -> np.ndarray:
    """Permanents of ``b`` with each row deleted, for a (k, k-1) matrix.

    Vectorized Ryser over all column subsets with prefix/suffix row products,
    so one call costs O(2^k * k) numpy work.  Used by the sequential sampler's
    Laplace expansion.
    """
    b = np.asarray(b, dtype=np.complex128)
    k, cols = b.shape
    if cols != k - 1:
        raise DimensionError(f"sub_permanents expects shape (k, k-1), got {b.shape}")
    if k == 1:
        return np.ones(1, dtype=np.complex128)
    n = k - 1
    masks = np.arange(1 << n)
    bits = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(np.float64)
    row_sums = bits @ b.T  # (2^n, k)
    ones = np.ones((1 << n, 1), dtype=np.complex128)
    prefix = np.concatenate([ones, np.cumprod(row_sums, axis=1)], axis=1)
    suffix = np.concatenate([np.cumprod(row_sums[:, ::-1], axis=1)[:, ::-1], ones], axis=1)
    excl = prefix[:, :k] * suffix[:, 1:]  # product over rows != r
    signs = np.where((n - bits.sum(axis=1)) % 2 == 0, 1.0, -1.0)
    return signs @ excl


def submatrix_repeat(c: np.ndarray, s, t) -> np.ndarray:
    """Rows of ``c`` repeated per ``s`` and columns per ``t`` (ascending index order)."""
    c = np.asarray(c, dtype=np.complex128)
    s = as_occupation(s, c.shape[0])
    t = as_occupation(t, c.shape[1])
    if sum(s) != sum(t):
        raise ValueError(f"row total {sum(s)} != column total {sum(t)}")
    rows = [i for i, cnt in enumerate(s) for _ in range(cnt)]
    cols = [j for j, cnt in enumerate(t) for _ in range(cnt)]
    return c[np.ix_(rows, cols)]


def _occupation_factorial(occ) -> float:
    out = 1.0
    for v in occ:
        out *= math.factorial(v)
    return out


def transition_amplitude(u: np.ndarray, s, t) -> complex:
    """Fock transition amplitude <s| U |t> = Per(U_{s,t}) / sqrt(prod s_i! t_j!)."""
    sub = submatrix_repeat(u, s, t)
    return permanent(sub) / math.sqrt(_occupation_factorial(s) * _occupation_factorial(t))


def output_probability(u: np.ndarray, s, t) -> float:
    """Probability of outcome ``s`` from Fock input ``t`` through circuit matrix ``u``.

    Equals |Per(U_{s,t})|^2 / (prod s_i! prod t_j!); the input-side factorial
    is 1 for the collision-free inputs used throughout, and keeps the
    distribution normalized for general inputs.
    """
    s = as_occupation(s)
    t = as_occupation(t)
    n = sum(t)
    if n > 16:
        raise ValueError(f"exact probabilities limited to N <= 16, got {n}")
    amp = transition_amplitude(u, s, t)
    return float(abs(amp) ** 2)


def full_distribution(u: np.ndarray, t, photons: int | None = None) -> dict[tuple[int, ...], float]:
    """Every outcome probability, keyed by occupation vector in lex order."""
    u = np.asarray(u, dtype=np.complex128)
    m = u.shape[0]
    t = as_occupation(t, m)
    n = sum(t) if photons is None else int(photons)
    if n != sum(t):
        raise ValueError(f"input occupation sums to {sum(t)}, not {n}")
    size = math.comb(m + n - 1, n)
    if size > MAX_OUTCOMES:
        raise ValueError(f"state space {size} exceeds {MAX_OUTCOMES}")
    return {s: output_probability(u, s, t) for s in occupation_vectors(m, n)}


def hafnian(s: np.ndarray) -> complex:
    """Hafnian of an even-dimensional symmetric matrix by recursive expansion."""
    s = np.asarray(s, dtype=np.complex128)
    n = s.shape[0]
    if s.ndim != 2 or s.shape[1] != n:
        raise DimensionError(f"hafnian needs a square matrix, got {s.shape}")
    if n % 2:
        raise DimensionError(f"hafnian needs even dimension, got {n}")
    if n > 12:
        raise ValueError(f"hafnian limited to dimension <= 12, got {n}")
    if n and np.max(np.abs(s - s.T)) > 1e-10:
        raise ValueError("hafnian input must be symmetric within 1e-10")
    return _hafnian_rec(s)


def _hafnian_rec(s: np.ndarray) -> complex:
    n = s.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    keep = np.arange(1, n)
    total = 0.0 + 0.0j
    for j in range(1, n):
        rest = keep[keep != j]
        total += s[0, j] * _hafnian_rec(s[np.ix_(rest, rest)])
    return total


def perfect_matchings(indices: tuple[int, ...]):
    """All partitions of ``indices`` into unordered pairs."""
    if not indices:
        yield ()
        return
    first, rest = indices[0], indices[1:]
    for pos, second in enumerate(rest):
        remaining = rest[:pos] + rest[pos + 1 :]
        for tail in perfect_matchings(remaining):
            yield ((first, second), *tail)


def hafnian_by_matchings(s: np.ndarray) -> complex:
    """Independent oracle: explicit sum over perfect matchings."""
    s = np.asarray(s, dtype=np.complex128)
    n = s.shape[0]
    if n % 2:
        raise DimensionError(f"hafnian needs even dimension, got {n}")
    total = 0.0 + 0.0j
    for matching in perfect_matchings(tuple(range(n))):
        term = 1.0 + 0.0j
        for i, j in matching:
            term *= s[i, j]
        total += term
    return complex(total)


@dataclass(frozen=True)
class GbsParams:
    """Equal squeezing on every mode of a Gaussian sampler."""

    squeezing: float
    modes: int

    def __post_init__(self) -> None:
        if self.squeezing <= 0.0:
            raise ValueError(f"squeezing must be positive, got {self.squeezing}")

    @property
    def mean_photons(self) -> float:
        return self.modes * math.sinh(self.squeezing) ** 2


def gbs_probability(u: np.ndarray, s, params: GbsParams) -> float:
    """Collision-free Gaussian sampling probability.

    q_s = tanh(r)^N / cosh(r)^M * |Haf((U U^T)_s)|^2 for an even-photon,
    collision-free outcome ``s``; the formula is only stated for that case,
    so anything else is rejected.
    """
    u = np.asarray(u, dtype=np.complex128)
    s = as_occupation(s, params.modes)
    if not is_collision_free(s):
        raise ValueError(f"outcome carries a collision: {s}")
    n = sum(s)
    if n % 2:
        raise ValueError(f"squeezed-vacuum outcomes need even photon number, got {n}")
    if n > 12:
        raise ValueError(f"gbs probabilities limited to N <= 12, got {n}")
    r = params.squeezing
    prefactor = math.tanh(r) ** n / math.cosh(r) ** params.modes
    if n == 0:
        return prefactor
    gram = u @ u.T
    sub = submatrix_repeat(gram, s, s)
    return float(prefactor * abs(hafnian(sub)) ** 2)
