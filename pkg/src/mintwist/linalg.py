"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` complex arrays. Antilinear operators are never
materialised: an :class:`AntiUnitary` stores the unitary part ``M`` of
``J = M o conj`` and exposes the adjoint action ``X -> J X J^-1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: relative tolerance for identities that should hold to rounding
IDENTITY_TOL = 1e-10
#: tolerance for membership in computed subspaces
SUBSPACE_TOL = 1e-8
#: absolute floor below which a matrix is treated as zero in rank decisions
ZERO_FLOOR = 1e-14

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_1, SIGMA_2, SIGMA_3)


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class NotAProductOperator(ValueError):
    """An operator is not (close to) a Kronecker product of the requested shape."""


def as_matrix(a, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def _same_square(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = as_matrix(a, square=True, name="A")
    b = as_matrix(b, square=True, name="B")
    if a.shape != b.shape:
        raise DimensionError(f"incompatible operands {a.shape} and {b.shape}")
    return a, b


def commutator(a, b) -> np.ndarray:
    a, b = _same_square(a, b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    a, b = _same_square(a, b)
    return a @ b + b @ a


def dagger(a) -> np.ndarray:
    return np.conjugate(np.asarray(a)).T


def operator_norm(a) -> float:
    """Largest singular value."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0.0
    if np.any(~np.isfinite(a)):
        raise ValueError("operator_norm of a matrix with non-finite entries")
    return float(np.linalg.norm(a, 2))


def hermitian_residual(a) -> float:
    a = as_matrix(a, square=True)
    return operator_norm(a - dagger(a))


def involution_residual(a) -> float:
    a = as_matrix(a, square=True)
    return operator_norm(a @ a - np.eye(a.shape[0]))


@dataclass(frozen=True)
class AntiUnitary:
    """Antiunitary ``J = M o conj`` with ``J^2 = epsilon``.

    ``v -> M conj(v)``; the unitarity of ``M`` and ``M conj(M) = epsilon I``
    are checked at construction.
    """

    matrix: np.ndarray
    epsilon: int = field(default=1)
    tol: float = field(default=IDENTITY_TOL, repr=False, compare=False)

    def __post_init__(self):
        m = as_matrix(self.matrix, square=True, name="M")
        object.__setattr__(self, "matrix", m)
        if self.epsilon not in (-1, 1):
            raise ValueError(f"epsilon must be +1 or -1, got {self.epsilon!r}")
        n = m.shape[0]
        unit = operator_norm(dagger(m) @ m - np.eye(n))
        if unit > self.tol:
            raise ValueError(f"M is not unitary (residual {unit:.3e})")
        sq = operator_norm(m @ np.conjugate(m) - self.epsilon * np.eye(n))
        if sq > self.tol:
            raise ValueError(
                f"M conj(M) != {self.epsilon:+d} I (residual {sq:.3e})"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, v) -> np.ndarray:
        return self.matrix @ np.conjugate(np.asarray(v, dtype=complex))

    def adjoint_action(self, x) -> np.ndarray:
        return adjoint_action(self, x)


def adjoint_action(j: AntiUnitary, x) -> np.ndarray:
    """``J X J^-1 = M conj(X) M^dagger``."""
    x = as_matrix(x, square=True, name="X")
    if x.shape[0] != j.dim:
        raise DimensionError(f"X has shape {x.shape}, J acts on dimension {j.dim}")
    m = j.matrix
    return m @ np.conjugate(x) @ dagger(m)


def nullspace(a, tol: float = SUBSPACE_TOL) -> list[np.ndarray]:
    """Orthonormal basis of the right nullspace, as column vectors.

    Singular values below ``tol * max(s)`` (and below the absolute floor for
    the zero matrix) count as zero.
    """
    a = np.asarray(a)
    if not np.iscomplexobj(a):
        a = a.astype(float)
    if a.ndim != 2:
        raise DimensionError("nullspace expects a 2-dimensional array")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = a.shape[1]
    if a.shape[0] == 0:
        return [np.eye(n, dtype=a.dtype)[:, [i]] for i in range(n)]
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    cut = max(tol * (s[0] if s.size else 0.0), ZERO_FLOOR)
    rank = int(np.sum(s > cut))
    return [np.conjugate(vh[i])[:, None] for i in range(rank, n)]


def _commutator_map(g: np.ndarray) -> np.ndarray:
    # row-major vec(A X B) = (A kron B^T) vec(X)
    n = g.shape[0]
    eye = np.eye(n)
    return np.kron(g, eye) - np.kron(eye, g.T)


def commutant_basis(generators: Sequence, dim: int, tol: float = SUBSPACE_TOL) -> list[np.ndarray]:
    """Basis of ``{X : [X, g] = 0 for all generators g}``.

    The result is a complex-linear basis; a real span of generators has the
    same commutant as its complex span, so real algebras are covered.
    """
    gens = [as_matrix(g, square=True, name="generator") for g in generators]
    for g in gens:
        if g.shape[0] != dim:
            raise DimensionError(f"generator of shape {g.shape} on dimension {dim}")
    if not gens:
        basis = []
        for i in range(dim * dim):
            e = np.zeros(dim * dim, dtype=complex)
            e[i] = 1
            basis.append(e.reshape(dim, dim))
        return basis
    stacked = np.vstack([_commutator_map(g) for g in gens])
    return [v.reshape(dim, dim) for v in nullspace(stacked, tol)]


def span_residual(x, basis: Sequence, real: bool = False) -> float:
    """Frobenius distance from ``x`` to the (real or complex) span of ``basis``,
    relative to ``max(1, |x|)``."""
    x = np.asarray(x, dtype=complex).ravel()
    if not basis:
        return float(np.linalg.norm(x)) / max(1.0, float(np.linalg.norm(x)))
    b = np.column_stack([np.asarray(v, dtype=complex).ravel() for v in basis])
    if real:
        b = np.vstack([b.real, b.imag])
        rhs = np.concatenate([x.real, x.imag])
    else:
        rhs = x
    coef, *_ = np.linalg.lstsq(b, rhs, rcond=None)
    r = float(np.linalg.norm(b @ coef - rhs))
    return r / max(1.0, float(np.linalg.norm(x)))


def nearest_kronecker_factorization(t, d1: int, d2: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Best Frobenius approximation ``T ~ A kron B`` (Van Loan-Pitsianis).

    Returns ``(A, B, residual)`` with ``residual = |T - A kron B|_F``.
    """
    t = as_matrix(t, square=True, name="T")
    if d1 < 1 or d2 < 1 or t.shape[0] != d1 * d2:
        raise DimensionError(f"T of shape {t.shape} does not factor as {d1} x {d2}")
    # R[(i, j), (k, l)] = T[i*d2 + k, j*d2 + l]
    r = t.reshape(d1, d2, d1, d2).transpose(0, 2, 1, 3).reshape(d1 * d1, d2 * d2)
    u, s, vh = np.linalg.svd(r)
    root = np.sqrt(s[0])
    a = (root * u[:, 0]).reshape(d1, d1)
    b = (root * vh[0]).reshape(d2, d2)
    residual = float(np.sqrt(np.sum(s[1:] ** 2)))
    return a, b, residual


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
