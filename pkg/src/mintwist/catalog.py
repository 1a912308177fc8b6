"""Built-in finite triples.

``two_point``      C + C diagonal on C^2 (KO 6).
``irreducible_m2`` M_2(C) acting irreducibly on C^2, no grading.
``sm_one_generation``  C + H + M_3(C) on the 32 one-generation fermion states (KO 6).
``two_qubit``      diagonal C^4 on C^2 (x) C^2 with the swap real structure (KO 0).
``two_qubit_restricted``  its restriction to span{1, 1 (x) sigma_3}.
"""
from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

from .linalg import SIGMA_0, SIGMA_1, SIGMA_3, AntiUnitary
from .triple import COMPLEX, REAL, FiniteSpectralTriple, RealStructure, subalgebra_restriction


def _unit(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1
    return e


def two_point(coupling: float = 0.0) -> FiniteSpectralTriple:
    """C + C on C^2 with J = conj o swap and D = coupling * sigma_1.

    The first-order condition only holds for ``coupling == 0``: the opposite
    algebra fills the diagonal, so [D, a] must be diagonal too.
    """
    basis = (_unit(2, 0, 0), _unit(2, 1, 1))
    j = AntiUnitary(SIGMA_1, 1)
    return FiniteSpectralTriple(
        algebra_basis=basis,
        dirac=float(coupling) * SIGMA_1,
        real_structure=RealStructure(j, eps_prime=1, eps_second=-1),
        grading=SIGMA_3.copy(),
        scalar_field=COMPLEX,
        name="two-point" if coupling == 0 else f"two-point(d={coupling:g})",
        metadata={"coupling": float(coupling)},
    )


def irreducible_m2() -> FiniteSpectralTriple:
    """M_2(C) on C^2. Its commutant is the scalars, so no nondegenerate grading exists,
    and no real structure can satisfy order zero."""
    basis = tuple(_unit(2, i, j) for i in range(2) for j in range(2))
    j = AntiUnitary(SIGMA_1, 1)
    return FiniteSpectralTriple(
        algebra_basis=basis,
        dirac=SIGMA_1.copy(),
        real_structure=RealStructure(j, eps_prime=1),
        grading=None,
        scalar_field=COMPLEX,
        name="m2",
    )


SWAP = np.eye(4, dtype=complex)[[0, 2, 1, 3]]


def two_qubit() -> FiniteSpectralTriple:
    """Diagonal C^4 on C^2 (x) C^2, J = conj o swap, D = s1 (x) 1 + 1 (x) s1,
    grading s3 (x) s3. Order zero holds, the first-order condition does not."""
    basis = tuple(_unit(4, i, i) for i in range(4))
    dirac = np.kron(SIGMA_1, SIGMA_0) + np.kron(SIGMA_0, SIGMA_1)
    return FiniteSpectralTriple(
        algebra_basis=basis,
        dirac=dirac,
        real_structure=RealStructure(AntiUnitary(SWAP, 1), eps_prime=1, eps_second=1),
        grading=np.kron(SIGMA_3, SIGMA_3),
        scalar_field=COMPLEX,
        name="two-qubit",
    )


def two_qubit_restricted() -> FiniteSpectralTriple:
    """``two_qubit`` cut down to span{1, 1 (x) s3}: a full real spectral triple
    admitting the twisting operator s3 (x) 1, which does not anticommute with D."""
    parent = two_qubit()
    sub = [np.eye(4, dtype=complex), np.kron(SIGMA_0, SIGMA_3)]
    return subalgebra_restriction(parent, sub, name="two-qubit-sub")


# --- one generation of the Standard Model -------------------------------------

SM_PARAM_NAMES = ("y_nu", "y_e", "y_u", "y_d", "m_R")
SM_DEFAULT_PARAMS = {"y_nu": 0.3, "y_e": 0.5 + 0.1j, "y_u": 0.8, "y_d": 0.6 - 0.2j, "m_R": 1.7}

# flavour order inside a lepton or quark block: (up_R, down_R, up_L, down_L)
_FLAVOUR_CHIRALITY = np.diag([-1.0, -1.0, 1.0, 1.0]).astype(complex)

_QUATERNION_UNITS = (
    SIGMA_0,
    np.array([[1j, 0], [0, -1j]]),
    np.array([[0, 1], [-1, 0]], dtype=complex),
    np.array([[0, 1j], [1j, 0]]),
)


def sm_representation(lam: complex, quat: np.ndarray, m3: np.ndarray) -> np.ndarray:
    """Matrix of ``(lam, q, m)`` in C + H + M_3(C) on the 32-dimensional space."""
    flavour = np.zeros((4, 4), dtype=complex)
    flavour[0, 0] = lam
    flavour[1, 1] = np.conj(lam)
    flavour[2:, 2:] = quat
    i3 = np.eye(3)
    blocks = [flavour, np.kron(flavour, i3), lam * np.eye(4), np.kron(np.eye(4), m3)]
    out = np.zeros((32, 32), dtype=complex)
    k = 0
    for b in blocks:
        s = b.shape[0]
        out[k:k + s, k:k + s] = b
        k += s
    return out


def sm_algebra_basis() -> tuple:
    zq, zm = np.zeros((2, 2), dtype=complex), np.zeros((3, 3), dtype=complex)
    basis = [sm_representation(1.0, zq, zm), sm_representation(1j, zq, zm)]
    basis += [sm_representation(0.0, u, zm) for u in _QUATERNION_UNITS]
    for a in range(3):
        for b in range(3):
            e = _unit(3, a, b)
            basis.append(sm_representation(0.0, zq, e))
            basis.append(sm_representation(0.0, zq, 1j * e))
    return tuple(basis)


def sm_one_generation(params: Mapping[str, complex] | None = None) -> FiniteSpectralTriple:
    """One generation with right-handed neutrino: 16 particle and 16 antiparticle states.

    ``params``: Yukawa couplings ``y_nu, y_e, y_u, y_d`` and Majorana mass ``m_R``.
    Particles precede antiparticles; within each half leptons come first, then
    quarks as (flavour) (x) (colour).
    """
    if params is None:
        params = SM_DEFAULT_PARAMS
    missing = [k for k in SM_PARAM_NAMES if k not in params]
    if missing:
        raise ValueError(f"missing couplings: {', '.join(missing)}")
    p = {k: complex(params[k]) for k in SM_PARAM_NAMES}
    if not all(np.isfinite(v) for v in p.values()):
        raise ValueError("couplings must be finite")

    def yukawa(up: complex, down: complex) -> np.ndarray:
        y = np.zeros((4, 4), dtype=complex)
        y[0, 2], y[1, 3] = up, down
        return y + y.conj().T

    y_particle = np.zeros((16, 16), dtype=complex)
    y_particle[:4, :4] = yukawa(p["y_nu"], p["y_e"])
    y_particle[4:, 4:] = np.kron(yukawa(p["y_u"], p["y_d"]), np.eye(3))
    majorana = np.zeros((16, 16), dtype=complex)
    majorana[0, 0] = p["m_R"]  # nu_R -> anti nu_R

    dirac = np.block([[y_particle, majorana.conj().T], [majorana, y_particle.conj()]])
    swap = np.block([[np.zeros((16, 16)), np.eye(16)], [np.eye(16), np.zeros((16, 16))]]).astype(complex)
    chirality = np.zeros((16, 16), dtype=complex)
    chirality[:4, :4] = _FLAVOUR_CHIRALITY
    chirality[4:, 4:] = np.kron(_FLAVOUR_CHIRALITY, np.eye(3))
    grading = np.block([[chirality, np.zeros((16, 16))], [np.zeros((16, 16)), -chirality]])

    return FiniteSpectralTriple(
        algebra_basis=sm_algebra_basis(),
        dirac=dirac,
        real_structure=RealStructure(AntiUnitary(swap, 1), eps_prime=1, eps_second=-1),
        grading=grading,
        scalar_field=REAL,
        name="sm1g",
        metadata={"params": {k: [v.real, v.imag] for k, v in p.items()}},
    )


BUILTINS: dict[str, Callable[[], FiniteSpectralTriple]] = {
    "two-point": two_point,
    "m2": irreducible_m2,
    "sm1g": sm_one_generation,
    "two-qubit": two_qubit,
    "two-qubit-sub": two_qubit_restricted,
}


def builtin(tag: str) -> FiniteSpectralTriple:
    try:
        return BUILTINS[tag]()
    except KeyError:
        raise KeyError(f"unknown builtin triple {tag!r}; choose from {', '.join(BUILTINS)}") from None
