"""Classification of admissible finite twisting operators.

Every condition quantified over the algebra is linear in ``T_F``; those are
solved first as a real-linear nullspace over hermitian matrices. The remaining
conditions (``T_F^2 = 1``, ``[T_F, J T_F J^-1] = 0`` and
``{{D_F, T_F}, J T_F J^-1} = 0``) are quadratic in the coefficients and are
solved by seeded multistart Levenberg-Marquardt followed by Gauss-Newton
polishing. :func:`brute_force_enumerate` is an independent exhaustive route
for small Hilbert spaces.
"""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import least_squares

from .linalg import SUBSPACE_TOL, ZERO_FLOOR, anticommutator, commutator, nullspace, operator_norm
from .triple import FAIL, ConstraintReport, FiniteSpectralTriple, MissingRealStructure, verify_axioms
from .twist import (
    direct_twisted_first_order,
    direct_twisted_order_zero,
    equivalence_crosscheck,
    finite_first_order_conditions,
    finite_order_zero_conditions,
    validate_twisting_operator,
)

log = logging.getLogger(__name__)


@dataclass
class SearchOptions:
    starts: int = 64
    seed: int = 0
    include_first_order: bool = True
    tol: float = SUBSPACE_TOL
    residual_target: float = 1e-10
    max_iter: int = 200
    dedup_tol: float = 1e-6
    warm_start: bool = True
    structured_starts: bool = True
    max_starts: int = 4096
    patience: int = 2
    num_samples: int = 8
    grid_resolution: int = 4
    max_grid_dim: int = 6
    workers: int = 1

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class Solution:
    matrix: np.ndarray
    report: ConstraintReport
    tangent_dim: int = 0
    sign_partner: Optional[int] = None

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def to_dict(self) -> dict[str, Any]:
        return {"matrix": self.matrix, "trace": self.trace, "tangent_dim": self.tangent_dim,
                "isolated": self.tangent_dim == 0, "sign_partner": self.sign_partner,
                "report": self.report.to_dict()}


@dataclass
class SolutionSpace:
    linear_basis: list
    solutions: list = field(default_factory=list)
    product_only: list = field(default_factory=list)
    search_log: dict = field(default_factory=dict)

    @property
    def matrices(self) -> list[np.ndarray]:
        return [s.matrix for s in self.solutions]

    def to_dict(self) -> dict[str, Any]:
        log_ = self.search_log
        starts = log_.get("starts", [])
        summary = {k: v for k, v in log_.items() if k not in ("starts", "options")}
        summary["converged_starts"] = sum(1 for e in starts if e["converged"])
        summary["total_starts"] = len(starts)
        return {
            "linear_space_dim": len(self.linear_basis),
            "num_solutions": len(self.solutions),
            "solutions": [s.to_dict() for s in self.solutions],
            "product_only_candidates": [{"matrix": m, "trace": float(np.trace(m).real)} for m in self.product_only],
            "search": summary,
            "options": log_.get("options", {}),
        }


# --- linear constraints ------------------------------------------------------

def hermitian_basis(n: int) -> np.ndarray:
    """Frobenius-orthonormal real basis of n x n hermitian matrices, shape (n^2, n, n)."""
    out = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1
        out.append(e)
    r = 1 / np.sqrt(2)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = e[j, i] = r
            out.append(e)
            f = np.zeros((n, n), dtype=complex)
            f[i, j], f[j, i] = -1j * r, 1j * r
            out.append(f)
    return np.array(out)


def _linear_maps(t: FiniteSpectralTriple, include_first_order: bool) -> list:
    rs = t.real_structure
    d = t.dirac
    maps = []
    for b in t.algebra_basis:
        maps.append(("commutes_algebra", lambda x, b=b: x @ b - b @ x))
    for b in t.algebra_basis:
        jb = rs.hat(b)
        maps.append(("commutes_Jalgebra", lambda x, jb=jb: x @ jb - jb @ x))
    if include_first_order:
        for b in t.algebra_basis:
            jb = rs.hat(b)

            def fo(x, jb=jb):
                k = d @ x + x @ d
                return k @ jb - jb @ k
            maps.append(("DT_commutes_Jalgebra", fo))
    return maps


def linear_solution_space(t: FiniteSpectralTriple, include_first_order: bool = True,
                          tol: float = SUBSPACE_TOL) -> list[np.ndarray]:
    """Real-linear basis of hermitian ``X`` commuting with the algebra and its
    opposite (and, optionally, with ``[{D, X}, J b J^-1] = 0``)."""
    if t.real_structure is None:
        raise MissingRealStructure(t.name or "triple")
    n = t.hilbert_dim
    herm = hermitian_basis(n)
    coeffs = np.eye(n * n)
    for _, f in _linear_maps(t, include_first_order):
        if coeffs.shape[1] == 0:
            break
        mats = np.tensordot(coeffs.T, herm, axes=1)
        images = f(mats).reshape(coeffs.shape[1], n * n)
        rows = np.concatenate([images.real, images.imag], axis=1).T
        if np.max(np.abs(rows), initial=0.0) <= ZERO_FLOOR:
            continue
        null = nullspace(rows, tol)
        coeffs = coeffs @ np.hstack(null) if null else coeffs[:, :0]
    basis = [m for m in np.tensordot(coeffs.T, herm, axes=1)]
    for name, f in _linear_maps(t, include_first_order):
        for m in basis:
            r = operator_norm(f(m))
            if r >= tol:
                raise RuntimeError(f"linear basis element violates {name} ({r:.2e})")
    return basis


# --- quadratic system ----------------------------------------------------------

class _System:
    """Residual map c -> (X^2 - 1, [X, X^], {{D, X}, X^}) on the coefficient space."""

    def __init__(self, space: Sequence[np.ndarray], t: FiniteSpectralTriple, include_first_order: bool):
        self.b = np.array(space)
        self.bh = np.array([t.real_structure.hat(m) for m in space])
        self.d = t.dirac
        self.n = t.hilbert_dim
        self.k = len(space)
        self.fo = include_first_order
        self.db = np.array([self.d @ m + m @ self.d for m in space]) if self.k else np.zeros((0, self.n, self.n))

    def matrix(self, c: np.ndarray) -> np.ndarray:
        return np.tensordot(c, self.b, axes=1)

    def _blocks(self, c):
        x = self.matrix(c)
        xh = np.tensordot(c, self.bh, axes=1)
        out = [x @ x - np.eye(self.n), x @ xh - xh @ x]
        if self.fo:
            k = self.d @ x + x @ self.d
            out.append(k @ xh + xh @ k)
        return out

    def residual(self, c) -> np.ndarray:
        blocks = np.array(self._blocks(c)).ravel()
        return np.concatenate([blocks.real, blocks.imag])

    def jacobian(self, c) -> np.ndarray:
        x = self.matrix(c)
        xh = np.tensordot(c, self.bh, axes=1)
        cols = [self.b @ x + x @ self.b, self.b @ xh - xh @ self.b + x @ self.bh - self.bh @ x]
        if self.fo:
            k = self.d @ x + x @ self.d
            cols.append(self.db @ xh + xh @ self.db + k @ self.bh + self.bh @ k)
        j = np.concatenate([blk.reshape(self.k, -1) for blk in cols], axis=1)
        return np.concatenate([j.real, j.imag], axis=1).T

    def tangent_dim(self, c, tol: float = 1e-7) -> int:
        if self.k == 0:
            return 0
        s = np.linalg.svd(self.jacobian(c), compute_uv=False)
        return int(self.k - np.sum(s > tol * max(s[0], 1.0)))


def _polish(system: _System, c: np.ndarray, max_iter: int, target: float) -> tuple[np.ndarray, int]:
    it = 0
    for it in range(1, max_iter + 1):
        r = system.residual(c)
        if np.linalg.norm(r) < target * 1e-3:
            break
        step, *_ = np.linalg.lstsq(system.jacobian(c), -r, rcond=None)
        c = c + step
        if np.linalg.norm(step) < 1e-16:
            break
    return c, it


def _solve_from(system: _System, c0: np.ndarray, opts: SearchOptions) -> dict[str, Any]:
    fit = least_squares(system.residual, c0, jac=system.jacobian, method="lm",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=opts.max_iter * (system.k + 1))
    c, polish_iters = _polish(system, fit.x, opts.max_iter, opts.residual_target)
    res = float(np.linalg.norm(system.residual(c)))
    return {"c": c, "residual": res, "nfev": int(fit.nfev), "lm_cost": float(fit.cost),
            "polish_iters": polish_iters, "converged": res < opts.residual_target}


def _sign_projection(c: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Coefficients of the orthogonal projection of sign(X) back onto the space."""
    x = np.tensordot(c, basis, axes=1)
    w, v = np.linalg.eigh(0.5 * (x + x.conj().T))
    s = (v * np.where(w >= 0, 1.0, -1.0)) @ v.conj().T
    return np.real(np.einsum("kij,ij->k", basis.conj(), s))


def _canonical_key(m: np.ndarray):
    flat = np.round(m.ravel(), 8)
    return (round(float(np.trace(m).real), 6),) + tuple(v for z in flat for v in (float(z.real), float(z.imag)))


def _dedup(mats: list[np.ndarray], tol: float) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for m in mats:
        if all(operator_norm(m - k) >= tol for k in kept):
            kept.append(m)
    return sorted(kept, key=_canonical_key)


def _pair_signs(solutions: list[Solution], tol: float) -> None:
    for i, s in enumerate(solutions):
        for j, o in enumerate(solutions):
            if i != j and operator_norm(s.matrix + o.matrix) < tol:
                s.sign_partner = j


def finite_report(x: np.ndarray, t: FiniteSpectralTriple, opts: SearchOptions) -> ConstraintReport:
    rep = ConstraintReport()
    rep.extend(validate_twisting_operator(x, t, opts.tol))
    rep.extend(finite_order_zero_conditions(x, t, opts.tol))
    if opts.include_first_order:
        rep.extend(finite_first_order_conditions(x, t, opts.tol))
    return rep


def full_report(x: np.ndarray, t: FiniteSpectralTriple, opts: SearchOptions,
                axioms: Optional[ConstraintReport] = None) -> ConstraintReport:
    """Reduced conditions, direct evaluation of the twisted order-zero (and
    first-order) condition, and the equivalence cross-check."""
    rep = finite_report(x, t, opts)
    direct = {"order_zero": direct_twisted_order_zero(x, t, opts.num_samples, opts.seed)}
    rep.check("direct_order_zero", direct["order_zero"], opts.tol)
    if opts.include_first_order:
        scale = max(1.0, operator_norm(t.dirac))
        direct["first_order"] = direct_twisted_first_order(x, t, opts.num_samples, opts.seed)
        rep.check("direct_first_order", direct["first_order"], opts.tol * scale)
    cross = equivalence_crosscheck(x, t, opts.num_samples, opts.seed, opts.tol, axioms=axioms, direct=direct)
    if not opts.include_first_order:
        cross.entries = [e for e in cross.entries if e.name != "first_order_agreement"]
    rep.extend(cross, prefix="crosscheck_")
    return rep


def _is_degenerate(x: np.ndarray) -> bool:
    n = x.shape[0]
    return abs(abs(np.trace(x).real) - n) < 0.5


def involution_search(space: Sequence[np.ndarray], t: FiniteSpectralTriple,
                      opts: Optional[SearchOptions] = None) -> SolutionSpace:
    """Multistart search for hermitian involutions in ``space`` meeting the
    quadratic conditions; verified, deduplicated and canonically sorted."""
    opts = opts or SearchOptions()
    if t.real_structure is None:
        raise MissingRealStructure(t.name or "triple")
    out = SolutionSpace(linear_basis=list(space))
    out.search_log = {"options": opts.to_dict(), "starts": [], "random_starts": 0, "batches": 0}
    if not space:
        return out
    system = _System(space, t, opts.include_first_order)
    n, k = system.n, system.k

    starts: list[tuple[str, np.ndarray]] = []
    if opts.warm_start and t.grading is not None:
        g = np.array([np.vdot(b, t.grading).real for b in space])
        if np.linalg.norm(system.matrix(g) - t.grading) < opts.tol:
            starts += [("warm:+grading", g), ("warm:-grading", -g)]
    basis = np.array(space)
    if opts.structured_starts:
        for i, j in itertools.combinations_with_replacement(range(k), 2):
            for sgn in ((1.0,) if i == j else (1.0, -1.0)):
                c0 = np.zeros(k)
                c0[i] += 1.0
                c0[j] += sgn
                starts.append((f"sign:{i}{'+-'[sgn < 0]}{j}", _sign_projection(c0, basis)))

    def random_start(i):
        rng = np.random.default_rng([opts.seed, i])
        c0 = rng.standard_normal(k)
        if i % 2:
            return f"random-sign:{i}", _sign_projection(c0, basis)
        return f"random:{i}", c0 * np.sqrt(n) / np.linalg.norm(c0)

    def run(item):
        label, c0 = item
        return label, _solve_from(system, c0, opts)

    candidates, degenerate = [], []

    def absorb(batch) -> int:
        # returns the number of new isolated candidates (up to sign)
        if opts.workers > 1:
            with ThreadPoolExecutor(opts.workers) as pool:
                results = list(pool.map(run, batch))
        else:
            results = [run(item) for item in batch]
        fresh = 0
        for label, r in results:
            out.search_log["starts"].append({"start": label, "residual": r["residual"], "nfev": r["nfev"],
                                             "polish_iters": r["polish_iters"], "converged": r["converged"]})
            if not r["converged"]:
                log.debug("start %s did not converge (residual %.2e)", label, r["residual"])
                continue
            x = system.matrix(r["c"])
            x = 0.5 * (x + x.conj().T)
            if _is_degenerate(x):
                degenerate.append(x)
            elif all(min(operator_norm(x - y), operator_norm(x + y)) >= opts.dedup_tol for y in candidates):
                candidates.append(x)
                fresh += system.tangent_dim(r["c"]) == 0
        return fresh

    # keep drawing batches of random starts until `patience` consecutive
    # batches add no new isolated solution
    absorb(starts + [random_start(i) for i in range(opts.starts)])
    drawn, batches, idle = opts.starts, 1, 0
    while drawn < opts.max_starts and idle < opts.patience:
        batch = [random_start(i) for i in range(drawn, min(drawn + opts.starts, opts.max_starts))]
        drawn += len(batch)
        batches += 1
        idle = 0 if absorb(batch) else idle + 1
    out.search_log["random_starts"] = drawn
    out.search_log["batches"] = batches

    # every condition is invariant under X -> -X
    candidates += [-x for x in candidates]
    for x in _dedup(candidates, opts.dedup_tol):
        rep = finite_report(x, t, opts)
        if rep.overall_pass:
            c = np.array([np.vdot(b, x).real for b in space])
            out.solutions.append(Solution(x, rep, tangent_dim=system.tangent_dim(c)))
        else:
            out.search_log.setdefault("rejected", []).append(rep.failures())
    _pair_signs(out.solutions, opts.dedup_tol)
    out.product_only = _product_only(space, t, opts, degenerate)
    return out


def _product_only(space, t, opts, found) -> list[np.ndarray]:
    """+-1 on the finite space: degenerate there, but gamma_M (x) (+-1) is a
    nondegenerate twisting operator on an almost-commutative product."""
    eye = t.identity
    coeffs = np.array([np.vdot(b, eye).real for b in space])
    in_space = np.linalg.norm(np.tensordot(coeffs, np.array(space), axes=1) - eye) < opts.tol
    cands = ([eye, -eye] if in_space else []) + list(found)
    out = []
    for x in _dedup(cands, opts.dedup_tol):
        rep = finite_report(x, t, opts)
        if all(e.passed for e in rep.entries if e.name != "nondegenerate"):
            out.append(x)
    return out


def classify(t: FiniteSpectralTriple, opts: Optional[SearchOptions] = None) -> SolutionSpace:
    """Linear space, multistart search, then full verification of every solution
    including direct evaluation of the twisted conditions."""
    opts = opts or SearchOptions()
    if t.real_structure is None:
        raise MissingRealStructure(t.name or "triple")
    space = linear_solution_space(t, opts.include_first_order, opts.tol)
    found = involution_search(space, t, opts)
    # The reduced conditions are only equivalent to the twisted ones when the
    # untwisted triple itself satisfies them; direct evaluation below decides.
    axioms = verify_axioms(t, opts.tol)
    gate = ["order_zero"] + (["first_order"] if opts.include_first_order else [])
    found.search_log["reduction_valid"] = all(axioms[g].status != FAIL for g in gate if g in axioms)
    kept = []
    for s in found.solutions:
        rep = full_report(s.matrix, t, opts, axioms)
        if rep.overall_pass:
            kept.append(Solution(s.matrix, rep, s.tangent_dim))
        else:
            found.search_log.setdefault("rejected_direct", []).append(rep.failures())
    _pair_signs(kept, opts.dedup_tol)
    found.solutions = kept
    return found


# --- exhaustive oracle ------------------------------------------------------------

class DimensionTooLarge(ValueError):
    pass


def _oracle_linear_space(t: FiniteSpectralTriple, include_first_order: bool, tol: float) -> list[np.ndarray]:
    # unknowns: (Re X, Im X) row-major, 2 n^2 reals; hermiticity as explicit rows
    n = t.hilbert_dim
    eye = np.eye(n)
    rs = t.real_structure

    def realify(op: np.ndarray) -> np.ndarray:
        return np.block([[op.real, -op.imag], [op.imag, op.real]])

    def transpose_perm() -> np.ndarray:
        p = np.zeros((n * n, n * n))
        for i in range(n):
            for j in range(n):
                p[i * n + j, j * n + i] = 1
        return p

    p = transpose_perm()
    herm = np.block([[np.eye(n * n) - p, np.zeros((n * n, n * n))], [np.zeros((n * n, n * n)), np.eye(n * n) + p]])
    rows = [herm]
    gens = list(t.algebra_basis) + [rs.hat(b) for b in t.algebra_basis]
    for g in gens:
        rows.append(realify(np.kron(eye, g.T) - np.kron(g, eye)))
    if include_first_order:
        anti = np.kron(t.dirac, eye) + np.kron(eye, t.dirac.T)
        for b in t.algebra_basis:
            jb = rs.hat(b)
            rows.append(realify((np.kron(eye, jb.T) - np.kron(jb, eye)) @ anti))
    big = np.vstack(rows)
    null = scipy.linalg.null_space(big, rcond=tol)
    return [(v[: n * n] + 1j * v[n * n:]).reshape(n, n) for v in null.T]


def _oracle_accepts(x: np.ndarray, t: FiniteSpectralTriple, include_first_order: bool, tol: float) -> bool:
    n = t.hilbert_dim
    if np.linalg.norm(x @ x - np.eye(n), 2) >= tol:
        return False
    tr = np.trace(x).real
    if abs(abs(tr) - n) < 0.5:
        return False
    xh = t.real_structure.hat(x)
    if np.linalg.norm(x @ xh - xh @ x, 2) >= tol:
        return False
    if include_first_order:
        k = t.dirac @ x + x @ t.dirac
        if np.linalg.norm(k @ xh + xh @ k, 2) >= tol * max(1.0, np.linalg.norm(t.dirac, 2)):
            return False
    return True


def _oracle_direct(x: np.ndarray, t: FiniteSpectralTriple, include_first_order: bool, tol: float) -> bool:
    # Both twisted conditions are (anti)linear in each pair, so basis pairs suffice.
    n = t.hilbert_dim
    p, q = 0.5 * (np.eye(n) + x), 0.5 * (np.eye(n) - x)
    zero = np.zeros((n, n))
    pairs = [(b, zero) for b in t.algebra_basis] + [(zero, b) for b in t.algebra_basis]

    def pi(a, a2):
        return p @ a + q @ a2

    hat = t.real_structure.hat
    opp = [(hat(pi(b.conj().T, b2.conj().T)), hat(pi(b2.conj().T, b.conj().T))) for b, b2 in pairs]
    d = t.dirac
    scale = max(1.0, np.linalg.norm(d, 2))
    for a, a2 in pairs:
        u = pi(a, a2)
        w = d @ u - pi(a2, a) @ d
        for c, cf in opp:
            if np.linalg.norm(u @ c - c @ u, 2) >= tol:
                return False
            if include_first_order and np.linalg.norm(w @ c - cf @ w, 2) >= tol * scale:
                return False
    return True


def _commutative(space: Sequence[np.ndarray], tol: float) -> bool:
    return all(np.linalg.norm(a @ b - b @ a) < tol for a, b in itertools.combinations(space, 2))


def _sign_enumeration(space, n, seed) -> Optional[list[np.ndarray]]:
    rng = np.random.default_rng(seed)
    z = sum(rng.standard_normal() * b for b in space)
    _, u = np.linalg.eigh(z)
    mus = []
    for b in space:
        m = u.conj().T @ b @ u
        if np.linalg.norm(m - np.diag(np.diag(m))) > 1e-9:
            return None
        mus.append(np.diag(m).real)
    mu = np.array(mus).T  # n x k
    # X is constant on each joint eigenspace, so only distinct rows of mu matter
    groups = np.unique(np.round(mu, 8), axis=0, return_inverse=True)[1].ravel()
    r = groups.max() + 1
    if r > 20:
        return None
    reps = np.array([np.flatnonzero(groups == g)[0] for g in range(r)])
    out = []
    for signs in itertools.product((1.0, -1.0), repeat=r):
        s = np.array(signs)
        c, *_ = np.linalg.lstsq(mu[reps], s, rcond=None)
        if np.linalg.norm(mu @ c - s[groups]) < 1e-9:
            out.append(sum(ci * b for ci, b in zip(c, space)))
    return out


def _sphere_grid(k: int, resolution: int) -> np.ndarray:
    ticks = np.linspace(-1.0, 1.0, resolution + 1)
    pts = np.array(list(itertools.product(ticks, repeat=k)))
    norms = np.linalg.norm(pts, axis=1)
    pts = pts[norms > 1e-12]
    return pts / np.linalg.norm(pts, axis=1)[:, None]


def brute_force_enumerate(t: FiniteSpectralTriple, max_dim: int = 4,
                          opts: Optional[SearchOptions] = None) -> SolutionSpace:
    """Exhaustive oracle for small triples.

    A commutative linear space is jointly diagonalised and every sign pattern
    tried exactly; otherwise the coefficient sphere is gridded and each grid
    point polished. Solutions on positive-dimensional families are marked
    through ``tangent_dim``.
    """
    opts = opts or SearchOptions()
    if t.real_structure is None:
        raise MissingRealStructure(t.name or "triple")
    n = t.hilbert_dim
    if n > max_dim:
        raise DimensionTooLarge(f"hilbert_dim {n} exceeds max_dim {max_dim}")
    space = _oracle_linear_space(t, opts.include_first_order, opts.tol)
    out = SolutionSpace(linear_basis=space, search_log={"method": None})
    if not space:
        out.search_log["method"] = "empty"
        return out
    system = _System(space, t, opts.include_first_order)
    cands = None
    if _commutative(space, 1e-10):
        cands = _sign_enumeration(space, n, opts.seed)
    if cands is not None:
        out.search_log["method"] = "sign-enumeration"
    else:
        k = len(space)
        if k > opts.max_grid_dim:
            raise DimensionTooLarge(f"noncommutative linear space of dimension {k} exceeds max_grid_dim")
        out.search_log["method"] = f"grid(resolution={opts.grid_resolution})"
        cands = []
        for p in _sphere_grid(k, opts.grid_resolution):
            c, _ = _polish(system, p * np.sqrt(n), opts.max_iter, opts.residual_target)
            cands.append(system.matrix(c))
    good = [0.5 * (x + x.conj().T) for x in cands
            if _oracle_accepts(x, t, opts.include_first_order, opts.tol)
            and _oracle_direct(x, t, opts.include_first_order, opts.tol)]
    for x in _dedup(good, opts.dedup_tol):
        c, *_ = np.linalg.lstsq(np.array([b.ravel() for b in space]).T, x.ravel(), rcond=None)
        out.solutions.append(Solution(x, finite_report(x, t, opts), tangent_dim=system.tangent_dim(c.real)))
    _pair_signs(out.solutions, opts.dedup_tol)
    return out


def same_solutions(a: SolutionSpace, b: SolutionSpace, tol: float = 1e-6) -> bool:
    """Bijective match of isolated solutions within ``tol``; solutions on
    continuous families are compared through (trace, tangent dimension)."""
    iso_a = [s.matrix for s in a.solutions if s.tangent_dim == 0]
    iso_b = [s.matrix for s in b.solutions if s.tangent_dim == 0]
    if len(iso_a) != len(iso_b):
        return False
    used = set()
    for x in iso_a:
        match = next((j for j, y in enumerate(iso_b) if j not in used and operator_norm(x - y) < tol), None)
        if match is None:
            return False
        used.add(match)
    fam_a = {(round(s.trace), s.tangent_dim) for s in a.solutions if s.tangent_dim > 0}
    fam_b = {(round(s.trace), s.tangent_dim) for s in b.solutions if s.tangent_dim > 0}
    return fam_a == fam_b
