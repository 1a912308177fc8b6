"""Shared (triple, T) corpus for the equivalence checks."""
import numpy as np

from mintwist.catalog import sm_one_generation, sm_representation, two_point, two_qubit_restricted
from mintwist.linalg import SIGMA_0, SIGMA_1, SIGMA_2, SIGMA_3, random_unitary
from mintwist.triple import subalgebra_restriction

I2 = SIGMA_0


def scalar_restricted_two_point():
    return subalgebra_restriction(two_point(1.0), [np.eye(2)], name="two-point-scalars")


def _random_unit_pauli(seed):
    v = np.random.default_rng(seed).standard_normal(3)
    v /= np.linalg.norm(v)
    return v[0] * SIGMA_1 + v[1] * SIGMA_2 + v[2] * SIGMA_3


def equivalence_corpus():
    """List of (label, triple, T).

    Every triple here satisfies its own order-zero and first-order conditions,
    which the reduced conditions presuppose.
    """
    tp = two_point()
    scal = scalar_restricted_two_point()
    tqs = two_qubit_restricted()
    sm = sm_one_generation()
    out = [
        ("two-point/+grading", tp, tp.grading),
        ("two-point/-grading", tp, -tp.grading),
        ("scalars/sigma3", scal, SIGMA_3),
        ("scalars/-sigma3", scal, -SIGMA_3),
        ("scalars/sigma2", scal, SIGMA_2),
        ("scalars/sigma1 (first-order violator)", scal, SIGMA_1),
        ("scalars/(sigma1+sigma3)/sqrt2 (order-zero violator)", scal, (SIGMA_1 + SIGMA_3) / np.sqrt(2)),
    ]
    out += [(f"scalars/random-axis-{s}", scal, _random_unit_pauli(s)) for s in range(3)]
    out += [
        ("two-qubit-sub/sigma3 x 1", tqs, np.kron(SIGMA_3, I2)),
        ("two-qubit-sub/-sigma3 x 1", tqs, -np.kron(SIGMA_3, I2)),
        ("two-qubit-sub/1 x sigma3 (first-order violator)", tqs, np.kron(I2, SIGMA_3)),
        ("two-qubit-sub/sigma1 x 1 (order-zero violator)", tqs, np.kron(SIGMA_1, I2)),
        ("two-qubit-sub/diag(1,1,1,-1)", tqs, np.diag([1.0, 1, 1, -1])),
        ("two-qubit-sub/+grading", tqs, tqs.grading),
        ("two-qubit-sub/-grading", tqs, -tqs.grading),
        ("sm1g/+grading", sm, sm.grading),
        ("sm1g/-grading", sm, -sm.grading),
    ]
    for lam, q, c in [(1, 1, -1), (1, -1, 1), (-1, 1, 1), (1, -1, -1)]:
        t = sm_representation(lam, q * I2, c * np.eye(3))
        out.append((f"sm1g/central({lam:+d},{q:+d},{c:+d})", sm, t))
    return out


def random_hermitian_involution(rng: np.random.Generator, n: int, allow_scalar: bool = True) -> np.ndarray:
    """``U diag(+-1) U^dagger`` with a Haar-random ``U``."""
    while True:
        signs = rng.choice([-1.0, 1.0], size=n)
        if allow_scalar or abs(signs.sum()) < n:
            break
    u = random_unitary(n, rng)
    return (u * signs) @ u.conj().T


def random_factored_product(rng: np.random.Generator, d1: int, d2: int):
    """Hermitian involutions ``A``, ``B``, the non-selfadjoint factors ``c A``, ``B / c``
    for a random complex ``c``, and their product ``T``."""
    a = random_hermitian_involution(rng, d1)
    b = random_hermitian_involution(rng, d2)
    c = rng.uniform(0.1, 10.0) * np.exp(2j * np.pi * rng.uniform(0.05, 0.45))
    return a, b, (c * a, b / c), np.kron(c * a, b / c)
