"""Acceptance criteria 1-7, each at its stated tolerance and runtime budget.

Every test records a one-line verdict that is printed in the pytest terminal
summary under "acceptance criteria".
"""
import json
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE
from corpus import equivalence_corpus, random_factored_product, scalar_restricted_two_point
from mintwist import catalog
from mintwist.classify import SearchOptions, brute_force_enumerate, classify, full_report, same_solutions
from mintwist.documents import pretty_dumps
from mintwist.lattice import analytic_slope, boundedness_scan, default_scan_pair, fit_slope, relative_variation
from mintwist.linalg import anticommutator, commutant_basis, dagger, operator_norm
from mintwist.triple import FAIL, PASS, verify_axioms
from mintwist.twist import (
    direct_twisted_first_order,
    direct_twisted_order_zero,
    equivalence_crosscheck,
    factorize_selfadjoint,
    first_order_conditions,
    order_zero_conditions,
    validate_twisting_operator,
)

EXPERIMENT_DIR = Path(__file__).resolve().parent.parent / "experiments"


@contextmanager
def criterion(num, budget_s):
    """Record pass/fail for criterion ``num``; the body sets ``note['detail']``."""
    note = {"detail": ""}
    start = time.perf_counter()
    try:
        yield note
        elapsed = time.perf_counter() - start
        assert elapsed < budget_s, f"runtime {elapsed:.1f} s exceeds {budget_s} s"
    except BaseException as exc:
        ACCEPTANCE[num] = (False, f"{note['detail']} | {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
        raise
    ACCEPTANCE[num] = (True, f"{note['detail']} ({time.perf_counter() - start:.1f} s)")


def grading_baseline(t, tol=1e-10):
    """Largest residual of every grading check; all must pass at ``tol``."""
    g = t.grading
    reports = [validate_twisting_operator(g, t, tol), order_zero_conditions(g, t, tol),
               first_order_conditions(g, t, tol)]
    worst = 0.0
    for rep in reports:
        assert rep.overall_pass, rep.summary()
        worst = max([worst] + [e.residual for e in rep.entries
                               if e.status == PASS and e.name != "nondegenerate"])
    scale = max(1.0, operator_norm(t.dirac))
    direct = [direct_twisted_order_zero(g, t), direct_twisted_first_order(g, t) / scale]
    assert max(direct) < tol, direct
    return max([worst] + direct)


def test_criterion_1_grading_baseline():
    with criterion(1, 10) as note:
        worst = {}
        for t in (catalog.two_point(), catalog.sm_one_generation()):
            worst[t.name] = grading_baseline(t)
        # M2 acts irreducibly on C^2, so its commutant is the scalars and no
        # nondegenerate hermitian involution (grading or twist) commutes with it.
        m2 = catalog.irreducible_m2()
        assert m2.grading is None
        comm = commutant_basis(m2.algebra_basis, m2.hilbert_dim)
        assert len(comm) == 1 and operator_norm(comm[0] / comm[0][0, 0] - np.eye(2)) < 1e-10
        note["detail"] = ("grading passes validate/order-zero/first-order/direct at 1e-10: "
                          + ", ".join(f"{k} max residual {v:.1e}" for k, v in worst.items())
                          + "; m2 n/a (commutant is scalars, no grading exists)")


def test_criterion_2_equivalence():
    with criterion(2, 60) as note:
        corpus = equivalence_corpus()
        assert len(corpus) >= 20
        disagreements, compared, negatives, outside = [], 0, 0, 0
        for label, triple, x in corpus:
            rep = equivalence_crosscheck(x, triple, tol=1e-8)
            order_zero = order_zero_conditions(x, triple, 1e-8).overall_pass
            for name in ("order_zero_agreement", "first_order_agreement"):
                e = rep[name]
                if e.status == "n/a":
                    # the first-order statement presupposes the order-zero condition for T
                    assert name == "first_order_agreement" and not order_zero, f"{label}: {name} not applicable"
                    outside += 1
                    continue
                compared += 1
                if e.status == FAIL:
                    disagreements.append(f"{label}:{name}")
            negatives += not (order_zero and first_order_conditions(x, triple, 1e-8).overall_pass)
        note["detail"] = (f"{len(corpus)} instances ({negatives} violators), {compared - len(disagreements)}/{compared} "
                          f"comparisons agree at 1e-8, {outside} first-order comparisons outside the "
                          "hypothesis (T fails order zero)")
        assert not disagreements, disagreements


def test_criterion_3_factorization():
    with criterion(3, 10) as note:
        rng = np.random.default_rng(2024)
        worst, nonselfadjoint = 0.0, 0
        for i in range(50):
            d1, d2 = rng.integers(1, 5, size=2)
            _, _, (raw_a, raw_b), t = random_factored_product(rng, int(d1), int(d2))
            nonselfadjoint += max(operator_norm(raw_a - dagger(raw_a)), operator_norm(raw_b - dagger(raw_b))) > 1e-6
            fa, fb = factorize_selfadjoint(t, int(d1), int(d2))
            res = max(operator_norm(np.kron(fa, fb) - t), operator_norm(fa - dagger(fa)), operator_norm(fb - dagger(fb)),
                      operator_norm(fa @ fa - np.eye(d1)), operator_norm(fb @ fb - np.eye(d2)))
            worst = max(worst, res)
        note["detail"] = f"50 products ({nonselfadjoint} with non-selfadjoint raw factors), worst residual {worst:.1e}"
        assert worst < 1e-10


@pytest.mark.slow
def test_criterion_4_boundedness():
    with criterion(4, 300) as note:
        ns = [4, 8, 16, 32]
        lines = []
        for t in (catalog.two_point(), catalog.two_qubit_restricted()):
            pair = default_scan_pair(t)
            flat = boundedness_scan("gamma_M", t.grading, t, ns, pair)
            growing = boundedness_scan("identity", t.grading, t, ns, pair)
            var = relative_variation(flat)
            slope, _ = fit_slope(growing)
            expect = analytic_slope(t.grading, pair["m"])
            rel = abs(slope / expect - 1)
            lines.append(f"{t.name}: gamma variation {var:.1e}, identity slope {slope:.4f} vs {expect:.4f} ({rel:.1%})")
            assert var < 0.05, lines[-1]
            assert rel < 0.05, lines[-1]
        note["detail"] = "; ".join(lines)


ORACLE_TRIPLES = [catalog.two_point, catalog.irreducible_m2, catalog.two_qubit,
                  catalog.two_qubit_restricted, scalar_restricted_two_point]


def test_criterion_5_oracle_agreement():
    with criterion(5, 60) as note:
        counts = []
        for make in ORACLE_TRIPLES:
            t = make()
            assert t.hilbert_dim <= 4
            opts = SearchOptions(seed=0)
            got, oracle = classify(t, opts), brute_force_enumerate(t, 4, opts)
            assert same_solutions(got, oracle, 1e-6), f"{t.name}: classify and oracle differ"
            counts.append(f"{t.name}={len(got.solutions)}")
            if t.name == "two-point":
                assert len(got.solutions) == 2
                assert all(min(operator_norm(s.matrix - t.grading), operator_norm(s.matrix + t.grading)) < 1e-6
                           for s in got.solutions)
            if t.name == "m2":
                assert not got.solutions
        note["detail"] = "classify == oracle on " + ", ".join(counts)


def test_criterion_6_witness():
    with criterion(6, 60) as note:
        t = catalog.two_qubit_restricted()
        opts = SearchOptions(seed=0, tol=1e-8)
        space = classify(t, opts)
        witnesses = []
        for s in space.solutions:
            rep = full_report(s.matrix, t, opts)
            assert {"direct_order_zero", "direct_first_order"} <= {e.name for e in rep.entries}
            gap = operator_norm(anticommutator(t.dirac, s.matrix))
            if gap > 0.1 and rep.overall_pass:
                witnesses.append(gap)
        note["detail"] = f"{t.name}: {len(witnesses)} non-grading solutions, max |{{D,T}}| = {max(witnesses, default=0):.3f}"
        assert witnesses


@pytest.mark.slow
def test_criterion_7_standard_model_gate():
    with criterion(7, 600) as note:
        t = catalog.sm_one_generation()
        assert verify_axioms(t, 1e-10).overall_pass
        grading_baseline(t)
        opts = SearchOptions(seed=0, tol=1e-8)
        space = classify(t, opts)
        scale = max(1.0, operator_norm(t.dirac))
        for s in space.solutions:
            assert direct_twisted_order_zero(s.matrix, t) < opts.tol
            assert direct_twisted_first_order(s.matrix, t) < opts.tol * scale
        EXPERIMENT_DIR.mkdir(exist_ok=True)
        out = EXPERIMENT_DIR / "sm1g_classification.json"
        out.write_text(pretty_dumps(experiment_summary(t, space)))
        doc = json.loads(out.read_text())
        note["detail"] = (f"sm1g axioms pass at 1e-10; classification recorded in {out.name}: "
                          f"linear space dim {doc['linear_space_dim']}, "
                          f"{doc['num_solutions']} solutions, all direct-verified")


def experiment_summary(t, space):
    """Compact record: each solution as real coefficients in the orthonormal linear basis."""
    basis = space.linear_basis
    sols = []
    for s in space.solutions:
        coef = [round(float(np.vdot(b, s.matrix).real), 12) + 0.0 for b in basis]
        sols.append({
            "coefficients": coef,
            "trace": round(s.trace, 9) + 0.0,
            "tangent_dim": s.tangent_dim,
            "sign_partner": s.sign_partner,
            "anticommutator_norm": round(operator_norm(anticommutator(t.dirac, s.matrix)), 9),
            "max_residual": max(e.residual for e in s.report.entries
                                if e.status == PASS and np.isfinite(e.residual) and e.threshold < 1e-3),
        })
    search = {k: v for k, v in space.search_log.items() if not isinstance(v, list)}
    return {"triple": t.name, "linear_space_dim": len(basis), "num_solutions": len(sols),
            "num_product_only": len(space.product_only), "search": search, "solutions": sols}
