"""Dense complex linear algebra primitives shared by every other module.

Matrices are plain ``numpy.ndarray`` objects with ``complex128`` entries.
``assert_unitary`` is the single validation gate: anything that promises a
unitary runs through it, so the tolerance conventions live in one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Maximum entrywise deviation of U†U from the identity accepted at construction.
UNITARY_TOL = 1e-10

#: Maximum entrywise deviation allowed when rebuilding a matrix from its eigenform.
RECON_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when matrix shapes do not match an operation's contract."""


class UnitarityError(ValueError):
    """Raised when a matrix fails the unitarity tolerance."""


def max_abs(a: np.ndarray) -> float:
    """Largest entrywise modulus, as a plain float."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def assert_unitary(matrix: np.ndarray, *, tol: float = UNITARY_TOL, name: str = "matrix") -> np.ndarray:
    """Validate and return ``matrix`` as a square complex unitary.

    Args:
        matrix: Square array-like.
        tol: Entrywise tolerance on U†U - I.
        name: Label used in error messages.

    Returns:
        The input as a ``complex128`` array.

    Raises:
        DimensionError: If the input is not square.
        UnitarityError: If U†U deviates from the identity by more than ``tol``.
    """
    u = np.asarray(matrix, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {u.shape}")
    defect = max_abs(u.conj().T @ u - np.eye(u.shape[0]))
    if defect > tol:
        raise UnitarityError(f"{name} is not unitary: max |U†U - I| = {defect:.3e} > {tol:.1e}")
    return u


@dataclass(frozen=True)
class RngHandle:
    """Seedable, platform-stable random stream identified by seed + algorithm id.

    The Philox generator is counter based, so distinct keys give independent
    streams; ``split`` derives a child key by XOR-ing the seed with a task
    index.  A handle denotes the *start* of a stream: ``generator()`` always
    returns a fresh generator positioned at the beginning.
    """

    seed: int
    algorithm: str = "philox"

    def __post_init__(self) -> None:
        if self.algorithm != "philox":
            raise ValueError(f"unknown rng algorithm {self.algorithm!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.seed))

    def split(self, task_index: int) -> "RngHandle":
        """Derive an independent child handle (seed XOR task index).

        Pass ``task_index >= 1`` whenever the parent handle is itself consumed.
        """
        return RngHandle(self.seed ^ task_index, self.algorithm)


def as_generator(rng: "RngHandle | np.random.Generator") -> np.random.Generator:
    """Accept either a handle or a live generator; handles start a fresh stream."""
    if isinstance(rng, RngHandle):
        return rng.generator()
    return rng


def _ginibre_qr(n: int, gen: np.random.Generator) -> np.ndarray:
    """Haar-distributed U(n) via a complex Ginibre draw + QR with phase-fixed R diagonal."""
    z = (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_unitary(n: int, rng: "RngHandle | np.random.Generator") -> np.ndarray:
    """Draw a Haar-random local unitary of dimension 1 or 2.

    Raises:
        DimensionError: For any other dimension; larger Haar matrices are the
            sampling module's business.
    """
    if n not in (1, 2):
        raise DimensionError(f"local gates are 1- or 2-mode, got n={n}")
    return _ginibre_qr(n, as_generator(rng))


@dataclass(frozen=True)
class Eigen2:
    """Eigendecomposition of a 2x2 unitary: U = L diag(exp(i*phases)) L†."""

    basis: np.ndarray
    phases: tuple[float, float]

    def reconstruct(self) -> np.ndarray:
        d = np.exp(1j * np.asarray(self.phases))
        return self.basis @ np.diag(d) @ self.basis.conj().T


def eig_unitary2(u: np.ndarray, *, tol: float = UNITARY_TOL) -> Eigen2:
    """Closed-form eigendecomposition of a 2x2 unitary.

    Phases are returned in (-pi, pi].  A (numerically) scalar matrix gets the
    identity basis, since any basis diagonalizes it.

    Raises:
        UnitarityError: If the input is not unitary within ``tol``.
        DimensionError: If the input is not 2x2.
    """
    u = assert_unitary(u, tol=tol, name="eig input")
    if u.shape != (2, 2):
        raise DimensionError(f"eig_unitary2 expects a 2x2 matrix, got {u.shape}")
    tr = u[0, 0] + u[1, 1]
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    disc = np.sqrt(tr * tr - 4.0 * det)
    lam1 = (tr + disc) / 2.0
    lam2 = (tr - disc) / 2.0
    if abs(lam1 - lam2) < 1e-14 or (abs(u[0, 1]) < 1e-15 and abs(u[1, 0]) < 1e-15):
        # Scalar or already diagonal: identity basis, phases off the diagonal.
        phases = (float(np.angle(u[0, 0])), float(np.angle(u[1, 1])))
        return Eigen2(np.eye(2, dtype=np.complex128), phases)
    # Eigenvector columns of (U - lam2 I) span ker(U - lam1 I) for normal U.
    cand_a = np.array([u[0, 1], lam1 - u[0, 0]])
    cand_b = np.array([lam1 - u[1, 1], u[1, 0]])
    v1 = cand_a if np.linalg.norm(cand_a) >= np.linalg.norm(cand_b) else cand_b
    v1 = v1 / np.linalg.norm(v1)
    v2 = np.array([-np.conj(v1[1]), np.conj(v1[0])])
    basis = np.column_stack([v1, v2])
    result = Eigen2(basis, (float(np.angle(lam1)), float(np.angle(lam2))))
    defect = max_abs(result.reconstruct() - u)
    if defect > RECON_TOL:
        raise UnitarityError(f"2x2 eigendecomposition failed to reconstruct: {defect:.3e}")
    return result


def compose(a: np.ndarray, b: np.ndarray, *, tol: float = UNITARY_TOL) -> np.ndarray:
    """Matrix product AB of two equal-dimension unitaries, re-checked for unitarity."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise DimensionError(f"cannot compose shapes {a.shape} and {b.shape}")
    return assert_unitary(a @ b, tol=tol, name="product")
