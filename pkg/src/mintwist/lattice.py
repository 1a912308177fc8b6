"""Almost-commutative products on a momentum-space 2-torus.

The manifold factor is truncated to momentum modes ``k in {-N..N}^2``. The
Dirac operator is diagonal in that basis, plane waves act as shift operators,
and everything is stored sparse because ``N = 32`` already gives thousands of
modes. Index ordering throughout is (mode, spinor, finite).
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .linalg import SIGMA_0, SIGMA_1, SIGMA_2, SIGMA_3, DimensionError, as_matrix, commutator, anticommutator, operator_norm
from .triple import ConstraintReport, FiniteSpectralTriple, MissingRealStructure

GAMMA_M = SIGMA_3
SPINOR_DIM = 2


@dataclass(frozen=True)
class LatticeDiracConfig:
    cutoff_N: int
    torus_length: float = 2 * np.pi

    def __post_init__(self):
        if int(self.cutoff_N) != self.cutoff_N or self.cutoff_N < 0:
            raise ValueError(f"cutoff_N must be a non-negative integer, got {self.cutoff_N}")
        if not self.torus_length > 0:
            raise ValueError(f"torus_length must be positive, got {self.torus_length}")

    @property
    def side(self) -> int:
        return 2 * self.cutoff_N + 1

    @property
    def num_modes(self) -> int:
        return self.side ** 2

    @property
    def unit(self) -> float:
        return 2 * np.pi / self.torus_length

    def modes(self) -> np.ndarray:
        """(num_modes, 2) integer momenta, first component slowest."""
        r = np.arange(-self.cutoff_N, self.cutoff_N + 1)
        k1, k2 = np.meshgrid(r, r, indexing="ij")
        return np.stack([k1.ravel(), k2.ravel()], axis=1)

    def index(self, k1, k2):
        n = self.cutoff_N
        return (np.asarray(k1) + n) * self.side + (np.asarray(k2) + n)


def lattice_dirac(cfg: LatticeDiracConfig) -> sp.csr_matrix:
    """``sum_k |k><k| (x) (k_1 sigma_1 + k_2 sigma_2) 2 pi / L`` on modes (x) spinors."""
    k = cfg.modes().astype(float) * cfg.unit
    return (sp.kron(sp.diags(k[:, 0]), SIGMA_1) + sp.kron(sp.diags(k[:, 1]), SIGMA_2)).tocsr()


def shift_operator(cfg: LatticeDiracConfig, n) -> sp.csr_matrix:
    """Mode shift ``|k> -> |k + n>``; targets outside the grid are dropped."""
    n1, n2 = (int(v) for v in n)
    if max(abs(n1), abs(n2)) > 2 * cfg.cutoff_N:
        raise DimensionError(f"shift {n} leaves no mode on a grid of cutoff {cfg.cutoff_N}")
    k = cfg.modes()
    t1, t2 = k[:, 0] + n1, k[:, 1] + n2
    keep = (np.abs(t1) <= cfg.cutoff_N) & (np.abs(t2) <= cfg.cutoff_N)
    rows = cfg.index(t1[keep], t2[keep])
    cols = np.flatnonzero(keep)
    return sp.csr_matrix((np.ones(len(cols)), (rows, cols)), shape=(cfg.num_modes, cfg.num_modes))


def plane_wave_element(cfg: LatticeDiracConfig, n, m) -> sp.csr_matrix:
    """Multiplication by ``exp(i n.x 2 pi / L)`` tensored with ``1_2 (x) m``."""
    m = as_matrix(m, square=True, name="m")
    return sp.kron(sp.kron(shift_operator(cfg, n), sp.identity(SPINOR_DIM)), m).tocsr()


def mode_reflection(cfg: LatticeDiracConfig) -> sp.csr_matrix:
    """Permutation ``|k> -> |-k>``."""
    idx = np.arange(cfg.num_modes)
    # the grid is symmetric, so -k sits at the mirrored row-major index
    return sp.csr_matrix((np.ones(cfg.num_modes), (idx[::-1], idx)), shape=(cfg.num_modes, cfg.num_modes))


# Charge conjugation on the lattice: |k> -> |-k> tensored with sigma_2, composed
# with complex conjugation. Signs (eps, eps', eps'') = (-1, +1, -1), KO-dimension 2.
# The sigma_3 variant keeps eps'' = +1 and is only used to check sign independence.
LATTICE_J_SPINOR = {-1: SIGMA_2, 1: SIGMA_3}


@dataclass
class ProductTriple:
    lattice: LatticeDiracConfig
    finite: FiniteSpectralTriple

    @property
    def dim(self) -> int:
        return self.lattice.num_modes * SPINOR_DIM * self.finite.hilbert_dim

    @property
    def dirac(self) -> sp.csr_matrix:
        d_m = lattice_dirac(self.lattice)
        eye_f = sp.identity(self.finite.hilbert_dim)
        gamma = sp.kron(sp.identity(self.lattice.num_modes), GAMMA_M)
        return (sp.kron(d_m, eye_f) + sp.kron(gamma, sp.csr_matrix(self.finite.dirac))).tocsr()

    def grading_m(self) -> sp.csr_matrix:
        return sp.kron(sp.kron(sp.identity(self.lattice.num_modes), GAMMA_M),
                       sp.identity(self.finite.hilbert_dim)).tocsr()

    def twisting_operator(self, tcal, t_f) -> sp.csr_matrix:
        """``1_modes (x) tcal (x) T_F``."""
        return sp.kron(sp.kron(sp.identity(self.lattice.num_modes), tcal), sp.csr_matrix(t_f)).tocsr()

    def real_structure_matrix(self, eps_second_m: int = -1) -> sp.csr_matrix:
        if self.finite.real_structure is None:
            raise MissingRealStructure(self.finite.name or "finite triple")
        r = mode_reflection(self.lattice)
        return sp.kron(sp.kron(r, LATTICE_J_SPINOR[eps_second_m]),
                       sp.csr_matrix(self.finite.real_structure.j.matrix)).tocsr()

    def invariant_residuals(self) -> dict[str, float]:
        d = self.dirac
        g = self.grading_m()
        d_m = sp.kron(lattice_dirac(self.lattice), sp.identity(self.finite.hilbert_dim))
        return {
            "dirac_hermitian": _sparse_max_abs(d - d.conj().T),
            "gamma_anticommutes_dirac_m": _sparse_max_abs(g @ d_m + d_m @ g),
        }


def _sparse_max_abs(a) -> float:
    a = sp.csr_matrix(a)
    return float(np.max(np.abs(a.data))) if a.nnz else 0.0


def sparse_operator_norm(a, seed: int = 0) -> float:
    """Largest singular value; dense for small matrices, ARPACK otherwise."""
    a = sp.csr_matrix(a)
    if a.nnz == 0:
        return 0.0
    if min(a.shape) <= 400:
        return operator_norm(a.toarray())
    # largest eigenvalue of a^H a; operating on the smaller side keeps it cheap
    g = (a.conj().T @ a) if a.shape[1] <= a.shape[0] else (a @ a.conj().T)
    v0 = np.random.default_rng(seed).standard_normal(g.shape[0])
    w = eigsh(g, k=1, which="LA", v0=v0, ncv=min(g.shape[0], 32), tol=1e-13, maxiter=50000,
              return_eigenvectors=False)
    return float(np.sqrt(max(w[0], 0.0)))


TCAL_CHOICES = ("gamma_M", "identity", "custom")


def resolve_tcal(choice: Union[str, np.ndarray]) -> np.ndarray:
    if isinstance(choice, str):
        key = {"gamma": "gamma_M", "gamma_m": "gamma_M"}.get(choice.lower(), choice)
        if key == "gamma_M":
            return GAMMA_M
        if key == "identity":
            return SIGMA_0
        raise ValueError(f"unknown spinor twist {choice!r}; expected one of {TCAL_CHOICES[:2]} or a matrix")
    m = as_matrix(choice, square=True, name="tcal")
    if m.shape != (2, 2):
        raise DimensionError("spinor twist must be 2x2")
    if operator_norm(m - m.conj().T) > 1e-10 or operator_norm(m @ m - SIGMA_0) > 1e-10:
        raise ValueError("spinor twist must be a hermitian involution")
    return m


def default_scan_pair(finite: FiniteSpectralTriple, m: Optional[np.ndarray] = None, n=(1, 0)) -> dict:
    """``a = 1 (x) m + f_n (x) m``, ``a' = f_n (x) m`` so that ``a - a' = 1 (x) m``."""
    m = finite.identity if m is None else as_matrix(m, square=True, name="m")
    return {"a": [((0, 0), m), (tuple(n), m)], "a_prime": [(tuple(n), m)], "m": m, "shift": tuple(n)}


def _assemble(cfg, terms) -> sp.csr_matrix:
    return sum((plane_wave_element(cfg, n, m) for n, m in terms), start=sp.csr_matrix(
        (cfg.num_modes * SPINOR_DIM * terms[0][1].shape[0],) * 2))


def _window_columns(cfg: LatticeDiracConfig, margin: int, dim_f: int) -> np.ndarray:
    k = cfg.modes()
    inside = np.flatnonzero(np.max(np.abs(k), axis=1) <= cfg.cutoff_N - margin)
    block = SPINOR_DIM * dim_f
    return (inside[:, None] * block + np.arange(block)[None, :]).ravel()


@dataclass
class ScanRow:
    N: int
    norm: float
    tcal: str


def boundedness_scan(tcal, t_f, finite: FiniteSpectralTriple, Ns: Sequence[int],
                     pair: Optional[dict] = None, torus_length: float = 2 * np.pi, seed: int = 0) -> list[ScanRow]:
    """Norm of the twisted commutator ``[D, pi(a, a')]_rho`` for ``T = tcal (x) T_F``,
    restricted to modes at distance at least the shift from the cutoff."""
    label = tcal if isinstance(tcal, str) else "custom"
    tc = resolve_tcal(tcal)
    t_f = as_matrix(t_f, square=True, name="T_F")
    if t_f.shape[0] != finite.hilbert_dim:
        raise DimensionError("T_F does not match the finite Hilbert space")
    if operator_norm(t_f - t_f.conj().T) > 1e-10 or operator_norm(t_f @ t_f - finite.identity) > 1e-10:
        raise ValueError("T_F must be a hermitian involution")
    pair = pair or default_scan_pair(finite)
    margin = max(max(abs(v) for v in n) for n, _ in pair["a"] + pair["a_prime"])
    rows = []
    for n_cut in Ns:
        cfg = LatticeDiracConfig(int(n_cut), torus_length)
        if cfg.cutoff_N - margin < 0:
            raise DimensionError(f"cutoff {n_cut} leaves no interior window for shifts of size {margin}")
        prod = ProductTriple(cfg, finite)
        d = prod.dirac
        t = prod.twisting_operator(tc, t_f)
        eye = sp.identity(prod.dim, format="csr")
        p, q = 0.5 * (eye + t), 0.5 * (eye - t)
        a = _assemble(cfg, pair["a"])
        a2 = _assemble(cfg, pair["a_prime"])
        pi = p @ a + q @ a2
        pi_flip = p @ a2 + q @ a
        x = (d @ pi - pi_flip @ d)[:, _window_columns(cfg, margin, finite.hilbert_dim)]
        rows.append(ScanRow(cfg.cutoff_N, sparse_operator_norm(x, seed), label))
    return rows


def fit_slope(rows: Sequence[ScanRow]) -> tuple[float, float]:
    """Least-squares slope and intercept of norm versus N."""
    n = np.array([r.N for r in rows], dtype=float)
    y = np.array([r.norm for r in rows])
    slope, intercept = np.polyfit(n, y, 1)
    return float(slope), float(intercept)


def relative_variation(rows: Sequence[ScanRow]) -> float:
    y = np.array([r.norm for r in rows])
    return float((y.max() - y.min()) / y.mean())


def analytic_slope(t_f, m, torus_length: float = 2 * np.pi) -> float:
    return 2 * np.pi * np.sqrt(2) / torus_length * operator_norm(np.asarray(t_f) @ np.asarray(m))


def scan_to_csv(rows: Sequence[ScanRow], torus_length: Optional[float] = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "norm", "tcal"])
    for r in rows:
        w.writerow([r.N, repr(r.norm), r.tcal])
    if len(rows) > 1:
        slope, intercept = fit_slope(rows)
        buf.write(f"# fit: slope={slope!r} intercept={intercept!r} relative_variation={relative_variation(rows)!r}")
        if torus_length is not None:
            buf.write(f" slope_unit=2*pi*sqrt(2)/L={float(2 * np.pi * np.sqrt(2) / torus_length)!r}")
        buf.write("\n")
    return buf.getvalue()


def scan_to_json(rows: Sequence[ScanRow]) -> str:
    out = {"rows": [{"N": r.N, "norm": r.norm, "tcal": r.tcal} for r in rows]}
    if len(rows) > 1:
        slope, intercept = fit_slope(rows)
        out["fit"] = {"slope": slope, "intercept": intercept, "relative_variation": relative_variation(rows)}
    return json.dumps(out, indent=2, sort_keys=True)


# --- reduction of the product conditions to the finite space -----------------

_REDUCTION_SHIFTS = ((0, 0), (1, 0), (0, 1))


def _product_setup(t_f, finite, cfg, eps_second_m):
    if finite.real_structure is None:
        raise MissingRealStructure(finite.name or "finite triple")
    t_f = as_matrix(t_f, square=True, name="T_F")
    prod = ProductTriple(cfg, finite)
    t = prod.twisting_operator(GAMMA_M, t_f)
    j = prod.real_structure_matrix(eps_second_m)
    t_hat = j @ t.conj() @ j.conj().T
    return prod, t_f, t, j, t_hat


def _hat_sparse(j, x):
    return j @ x.conj() @ j.conj().T


def _paired(rep: ConstraintReport, name: str, full: float, finite: float, tol: float):
    rep.check(f"full_{name}", full, tol)
    rep.check(f"finite_{name}", finite, tol)
    rep.flag(f"agree_{name}", (full < tol) == (finite < tol), f"full={full:.3e} finite={finite:.3e}")
    rep.check(f"residual_match_{name}", abs(full - finite), tol * max(1.0, finite))


def product_order_zero_reduction(t_f, finite: FiniteSpectralTriple, cfg: Optional[LatticeDiracConfig] = None,
                                 tol: float = 1e-8, eps_second_m: int = -1) -> ConstraintReport:
    """Order-zero conditions for ``T = gamma_M (x) T_F`` on the product, side by
    side with the finite-space conditions they reduce to."""
    cfg = cfg or LatticeDiracConfig(1)
    prod, t_f, t, j, t_hat = _product_setup(t_f, finite, cfg, eps_second_m)
    fhat = finite.hat(t_f)
    rep = ConstraintReport()
    _paired(rep, "T_commutes_JTJ", sparse_operator_norm(t @ t_hat - t_hat @ t), operator_norm(commutator(t_f, fhat)), tol)
    full = max(sparse_operator_norm(plane_wave_element(cfg, n, b) @ t_hat - t_hat @ plane_wave_element(cfg, n, b))
               for n in _REDUCTION_SHIFTS for b in finite.algebra_basis)
    fin = max(operator_norm(commutator(b, fhat)) for b in finite.algebra_basis)
    _paired(rep, "algebra_commutes_JTJ", full, fin, tol)
    return rep


def product_first_order_reduction(t_f, finite: FiniteSpectralTriple, cfg: Optional[LatticeDiracConfig] = None,
                                  tol: float = 1e-8, eps_second_m: int = -1) -> ConstraintReport:
    """First-order conditions for ``T = gamma_M (x) T_F`` on the product, where
    ``{D, T} = 1 (x) {D_F, T_F}``, against their finite-space form."""
    cfg = cfg or LatticeDiracConfig(1)
    prod, t_f, t, j, t_hat = _product_setup(t_f, finite, cfg, eps_second_m)
    d = prod.dirac
    dt = d @ t + t @ d
    dt_f = anticommutator(finite.dirac, t_f)
    fhat = finite.hat(t_f)
    scale = max(1.0, operator_norm(finite.dirac))
    rep = ConstraintReport()
    rep.check("DT_is_product", _sparse_max_abs(dt - sp.kron(sp.identity(cfg.num_modes * SPINOR_DIM), sp.csr_matrix(dt_f))),
              tol * scale)
    _paired(rep, "DT_anticommutes_JTJ", sparse_operator_norm(dt @ t_hat + t_hat @ dt),
            operator_norm(anticommutator(dt_f, fhat)), tol * scale)
    full, fin = 0.0, 0.0
    for b in finite.algebra_basis:
        fin = max(fin, operator_norm(commutator(dt_f, finite.hat(b))))
        for n in _REDUCTION_SHIFTS:
            jb = _hat_sparse(j, plane_wave_element(cfg, n, b))
            full = max(full, sparse_operator_norm(dt @ jb - jb @ dt))
    _paired(rep, "DT_commutes_Jalgebra", full, fin, tol * scale)
    return rep
