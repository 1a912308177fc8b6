"""Finite real spectral triples, their axiom checks and KO-dimension signs."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .linalg import (
    IDENTITY_TOL,
    SUBSPACE_TOL,
    AntiUnitary,
    DimensionError,
    adjoint_action,
    anticommutator,
    as_matrix,
    commutator,
    dagger,
    hermitian_residual,
    involution_residual,
    operator_norm,
    span_residual,
)

REAL = "real"
COMPLEX = "complex"

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "n/a"


@dataclass
class ReportEntry:
    name: str
    residual: float
    threshold: float
    status: str
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    def to_dict(self) -> dict[str, Any]:
        # n/a entries carry NaN placeholders, which JSON cannot represent
        d = {
            "name": self.name,
            "residual": None if self.status == NOT_APPLICABLE else self.residual,
            "threshold": None if self.status == NOT_APPLICABLE else self.threshold,
            "status": self.status,
        }
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class ConstraintReport:
    """Named residuals with pass/fail verdicts; ``overall_pass`` ignores n/a entries."""

    entries: list[ReportEntry] = field(default_factory=list)

    def check(self, name: str, residual: float, threshold: float, note: str = "") -> ReportEntry:
        residual = float(residual)
        status = PASS if residual < threshold else FAIL
        entry = ReportEntry(name, residual, float(threshold), status, note)
        self.entries.append(entry)
        return entry

    def skip(self, name: str, note: str) -> ReportEntry:
        entry = ReportEntry(name, float("nan"), float("nan"), NOT_APPLICABLE, note)
        self.entries.append(entry)
        return entry

    def flag(self, name: str, ok: bool, note: str = "") -> ReportEntry:
        entry = ReportEntry(name, 0.0 if ok else 1.0, 0.5, PASS if ok else FAIL, note)
        self.entries.append(entry)
        return entry

    def extend(self, other: "ConstraintReport", prefix: str = "") -> "ConstraintReport":
        for e in other.entries:
            self.entries.append(replace(e, name=prefix + e.name))
        return self

    @property
    def overall_pass(self) -> bool:
        return all(e.passed for e in self.entries)

    def __getitem__(self, name: str) -> ReportEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(e.name == name for e in self.entries)

    def failures(self) -> list[str]:
        return [e.name for e in self.entries if e.status == FAIL]

    def to_dict(self) -> dict[str, Any]:
        return {
            "overall_pass": self.overall_pass,
            "entries": [e.to_dict() for e in self.entries],
        }

    def summary(self) -> str:
        lines = []
        for e in self.entries:
            if e.status == NOT_APPLICABLE:
                lines.append(f"  [n/a ] {e.name}: {e.note}")
            else:
                tag = "pass" if e.status == PASS else "FAIL"
                lines.append(f"  [{tag}] {e.name}: residual={e.residual:.3e} threshold={e.threshold:.1e}")
        lines.append(f"  overall: {'PASS' if self.overall_pass else 'FAIL'}")
        return "\n".join(lines)


@dataclass(frozen=True)
class RealStructure:
    """``J`` with ``J^2 = eps``, ``J D = eps' D J`` and (graded) ``J Gamma = eps'' Gamma J``."""

    j: AntiUnitary
    eps_prime: int
    eps_second: Optional[int] = None

    def __post_init__(self):
        if self.eps_prime not in (-1, 1):
            raise ValueError("eps_prime must be +1 or -1")
        if self.eps_second not in (-1, 1, None):
            raise ValueError("eps_second must be +1, -1 or None")

    @property
    def eps(self) -> int:
        return self.j.epsilon

    @property
    def signs(self) -> tuple[int, int, Optional[int]]:
        return self.eps, self.eps_prime, self.eps_second

    def hat(self, x) -> np.ndarray:
        return adjoint_action(self.j, x)


@dataclass(frozen=True)
class FiniteSpectralTriple:
    """Represented algebra (as a spanning set), Dirac operator, optional J and grading.

    Only structural checks run here; the axioms are left to :func:`verify_axioms`
    so that defective triples can be loaded and diagnosed.
    """

    algebra_basis: tuple
    dirac: np.ndarray
    real_structure: Optional[RealStructure] = None
    grading: Optional[np.ndarray] = None
    scalar_field: str = COMPLEX
    name: str = ""
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        d = as_matrix(self.dirac, square=True, name="dirac")
        n = d.shape[0]
        object.__setattr__(self, "dirac", d)
        basis = tuple(as_matrix(b, square=True, name="algebra element") for b in self.algebra_basis)
        if not basis:
            raise ValueError("algebra_basis must not be empty")
        for b in basis:
            if b.shape[0] != n:
                raise DimensionError(f"algebra element of shape {b.shape} on a {n}-dimensional space")
        object.__setattr__(self, "algebra_basis", basis)
        if self.grading is not None:
            g = as_matrix(self.grading, square=True, name="grading")
            if g.shape[0] != n:
                raise DimensionError("grading dimension does not match dirac")
            object.__setattr__(self, "grading", g)
        if self.real_structure is not None and self.real_structure.j.dim != n:
            raise DimensionError("real structure dimension does not match dirac")
        if self.scalar_field not in (REAL, COMPLEX):
            raise ValueError(f"scalar_field must be 'real' or 'complex', got {self.scalar_field!r}")

    @property
    def hilbert_dim(self) -> int:
        return self.dirac.shape[0]

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.hilbert_dim, dtype=complex)

    def hat(self, x) -> np.ndarray:
        if self.real_structure is None:
            raise MissingRealStructure(self.name or "triple")
        return self.real_structure.hat(x)

    def in_algebra(self, x, tol: float = SUBSPACE_TOL) -> bool:
        return span_residual(x, self.algebra_basis, real=self.scalar_field == REAL) < tol

    def with_dirac(self, dirac) -> "FiniteSpectralTriple":
        return replace(self, dirac=np.asarray(dirac, dtype=complex))


class MissingRealStructure(ValueError):
    def __init__(self, what: str = "triple"):
        super().__init__(f"{what} has no real structure")


class SubalgebraError(ValueError):
    pass


def _pairwise_max(left: Iterable[np.ndarray], right: Sequence[np.ndarray], op) -> float:
    worst = 0.0
    for x in left:
        for y in right:
            worst = max(worst, operator_norm(op(x, y)))
    return worst


def verify_axioms(t: FiniteSpectralTriple, tol: float = IDENTITY_TOL) -> ConstraintReport:
    """Check every relation of ``t`` independently; never stops at the first failure."""
    rep = ConstraintReport()
    d = t.dirac
    dn = max(1.0, operator_norm(d))
    real = t.scalar_field == REAL

    rep.check("dirac_hermitian", hermitian_residual(d), tol * dn)
    closure = max(span_residual(dagger(b), t.algebra_basis, real=real) for b in t.algebra_basis)
    rep.check("algebra_adjoint_closed", closure, SUBSPACE_TOL)
    rep.check("algebra_unital", span_residual(t.identity, t.algebra_basis, real=real), SUBSPACE_TOL)

    g = t.grading
    if g is None:
        for name in ("grading_hermitian", "grading_involution", "grading_anticommutes_dirac",
                     "grading_commutes_algebra"):
            rep.skip(name, "no grading")
    else:
        rep.check("grading_hermitian", hermitian_residual(g), tol)
        rep.check("grading_involution", involution_residual(g), tol)
        rep.check("grading_anticommutes_dirac", operator_norm(anticommutator(g, d)), tol * dn)
        rep.check("grading_commutes_algebra",
                  max(operator_norm(commutator(g, b)) for b in t.algebra_basis), tol)

    rs = t.real_structure
    if rs is None:
        for name in ("j_squared_eps", "j_dirac_eps_prime", "j_grading_eps_second", "order_zero", "first_order"):
            rep.skip(name, "no real structure")
        return rep

    m = rs.j.matrix
    rep.check("j_squared_eps", operator_norm(m @ np.conjugate(m) - rs.eps * t.identity), tol)
    rep.check("j_dirac_eps_prime", operator_norm(rs.hat(d) - rs.eps_prime * d), tol * dn)
    if g is None:
        rep.skip("j_grading_eps_second", "no grading")
    elif rs.eps_second is None:
        rep.flag("j_grading_eps_second", False, "graded triple without eps''")
    else:
        rep.check("j_grading_eps_second", operator_norm(rs.hat(g) - rs.eps_second * g), tol)

    opposite = [rs.hat(dagger(b)) for b in t.algebra_basis]
    rep.check("order_zero", _pairwise_max(t.algebra_basis, opposite, commutator), tol)
    derivations = [commutator(d, b) for b in t.algebra_basis]
    rep.check("first_order", _pairwise_max(derivations, opposite, commutator), tol * dn)
    return rep


# Sign table (eps, eps', eps'') per KO-dimension mod 8, as tabulated in
# Connes' "Gravity coupled with matter and the foundation of non-commutative
# geometry" (1996); odd dimensions carry no grading sign.
KO_SIGN_TABLE: dict[int, tuple[int, int, Optional[int]]] = {
    0: (1, 1, 1),
    1: (1, -1, None),
    2: (-1, 1, -1),
    3: (-1, 1, None),
    4: (-1, 1, 1),
    5: (-1, -1, None),
    6: (1, 1, -1),
    7: (1, 1, None),
}

INCONSISTENT = "inconsistent"


def ko_dimension(eps: int, eps_prime: int, eps_second: Optional[int] = None):
    """KO-dimension mod 8 for the sign triple, or ``"inconsistent"``."""
    for n, row in KO_SIGN_TABLE.items():
        if row == (eps, eps_prime, eps_second):
            return n
    return INCONSISTENT


def random_element(t: FiniteSpectralTriple, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    k = len(t.algebra_basis)
    if t.scalar_field == REAL:
        c = rng.standard_normal(k).astype(complex)
    else:
        c = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2)
    return np.tensordot(c, np.stack(t.algebra_basis), axes=1)


def subalgebra_restriction(t: FiniteSpectralTriple, sub_basis: Sequence, name: str = "") -> FiniteSpectralTriple:
    """Same Hilbert space, Dirac, J and grading; algebra cut down to ``sub_basis``."""
    sub = [as_matrix(b, square=True, name="subalgebra element") for b in sub_basis]
    if not sub:
        raise SubalgebraError("empty subalgebra basis")
    real = t.scalar_field == REAL
    for b in sub:
        if b.shape != t.dirac.shape:
            raise SubalgebraError(f"element of shape {b.shape} on a {t.hilbert_dim}-dimensional space")
        if span_residual(b, t.algebra_basis, real=real) >= SUBSPACE_TOL:
            raise SubalgebraError("element outside the span of the original algebra")
    for b in sub:
        if span_residual(dagger(b), sub, real=real) >= SUBSPACE_TOL:
            raise SubalgebraError("subalgebra basis is not closed under adjoint")
    meta = dict(t.metadata)
    meta["restricted_from"] = t.name
    return replace(t, algebra_basis=tuple(sub), name=name or f"{t.name}|sub", metadata=meta)
