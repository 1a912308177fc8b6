import json
import os

import numpy as np
import pytest

from mintwist import catalog
from mintwist.cli import EXIT_FAIL, EXIT_INPUT, EXIT_PASS, EXIT_STRUCTURE, main
from mintwist.documents import (
    DocumentError,
    atomic_write,
    decode_matrix,
    dumps_triple,
    dumps_twist,
    encode_matrix,
    loads_triple,
    loads_twist,
    triple_to_document,
    write_triple,
    write_twist,
)
from mintwist.linalg import SIGMA_1


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestDocuments:
    @pytest.mark.parametrize("tag", sorted(catalog.BUILTINS))
    def test_round_trip_byte_identical(self, tag):
        text = dumps_triple(catalog.builtin(tag))
        assert dumps_triple(loads_triple(text)) == text

    def test_round_trip_preserves_matrices(self):
        t = catalog.sm_one_generation()
        u = loads_triple(dumps_triple(t))
        assert np.array_equal(u.dirac, t.dirac)
        assert all(np.array_equal(a, b) for a, b in zip(u.algebra_basis, t.algebra_basis))
        assert np.array_equal(u.real_structure.j.matrix, t.real_structure.j.matrix)
        assert u.real_structure.signs == t.real_structure.signs

    def test_negative_zero_folded(self):
        assert encode_matrix(np.array([[-0.0 - 0.0j]])) == [[[0.0, 0.0]]]
        assert "-0.0" not in json.dumps(encode_matrix(np.array([[-0.0 - 0.0j]])))

    def test_twist_round_trip(self):
        m = np.kron(SIGMA_1, np.diag([1, -1]))
        assert np.array_equal(loads_twist(dumps_twist(m)), m)

    def test_truncated_json_reports_line(self):
        text = dumps_triple(catalog.two_point())
        with pytest.raises(DocumentError) as exc:
            loads_triple(text[: len(text) // 2])
        assert exc.value.where.startswith("line 1 column")

    @pytest.mark.parametrize("mutate, where", [
        (lambda d: d.pop("dirac"), "dirac"),
        (lambda d: d.pop("schema_version"), "schema_version"),
        (lambda d: d.update(schema_version="9.9"), "schema_version"),
        (lambda d: d.update(hilbert_dim=3), "algebra_basis[0]"),
        (lambda d: d.update(hilbert_dim=True), "hilbert_dim"),
        (lambda d: d["dirac"][1].pop(), "dirac[1]"),
        (lambda d: d["dirac"][0].__setitem__(1, [1.0]), "dirac[0][1]"),
        (lambda d: d["real_structure"].update(eps=0), "real_structure.eps"),
        (lambda d: d["real_structure"].pop("M"), "real_structure.M"),
        (lambda d: d.update(scalar_field="quaternion"), "scalar_field"),
        (lambda d: d.update(algebra_basis=[]), "algebra_basis"),
        (lambda d: d.update(kind="twist"), "kind"),
    ])
    def test_schema_errors_name_field(self, mutate, where):
        doc = json.loads(dumps_triple(catalog.two_point()))
        mutate(doc)
        with pytest.raises(DocumentError) as exc:
            loads_triple(json.dumps(doc))
        assert exc.value.where == where

    def test_non_object(self):
        with pytest.raises(DocumentError):
            loads_triple("[1, 2]")

    def test_non_finite_entry(self):
        with pytest.raises(DocumentError):
            decode_matrix([[[float("nan"), 0.0]]], "m")

    def test_eps_second_optional(self):
        doc = triple_to_document(catalog.two_point())
        doc["real_structure"]["eps_second"] = None
        doc["grading"] = None
        t = loads_triple(json.dumps(doc))
        assert t.real_structure.eps_second is None and t.grading is None

    def test_atomic_write_replaces(self, tmp_path):
        path = tmp_path / "out.json"
        path.write_text("old")
        atomic_write(path, "new\n")
        assert path.read_text() == "new\n"
        assert [p.name for p in tmp_path.iterdir()] == ["out.json"]

    def test_atomic_write_failure_leaves_target(self, tmp_path):
        path = tmp_path / "out.json"
        path.write_text("old")

        with pytest.raises(TypeError):
            atomic_write(path, 123)
        assert path.read_text() == "old"
        assert [p.name for p in tmp_path.iterdir()] == ["out.json"]


class TestVerifyCommand:
    def test_builtin_passes(self, capsys):
        code, out, _ = run(capsys, "verify", "two-point")
        assert code == EXIT_PASS and "overall: PASS" in out

    def test_m2_fails_order_zero(self, capsys):
        code, out, _ = run(capsys, "--json", "verify", "m2")
        assert code == EXIT_FAIL
        entries = {e["name"]: e for e in json.loads(out)["report"]["entries"]}
        assert entries["order_zero"]["status"] == "fail"

    def test_non_hermitian_dirac(self, capsys, tmp_path):
        doc = triple_to_document(catalog.two_point())
        doc["dirac"] = encode_matrix(np.array([[0, 1], [-1, 0]]))
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        code, out, _ = run(capsys, "--json", "verify", str(path))
        assert code == EXIT_FAIL
        entries = {e["name"]: e for e in json.loads(out)["report"]["entries"]}
        assert entries["dirac_hermitian"]["status"] == "fail"

    def test_truncated_file(self, capsys, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(dumps_triple(catalog.two_point())[:80])
        code, _, err = run(capsys, "verify", str(path))
        assert code == EXIT_INPUT and "line 1 column" in err

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "verify", "no-such-file.json")
        assert code == EXIT_INPUT and "not a builtin tag" in err

    def test_bad_arguments(self, capsys):
        assert run(capsys, "verify")[0] == EXIT_INPUT
        assert run(capsys, "nonsense")[0] == EXIT_INPUT

    def test_env_tolerance(self, capsys, monkeypatch):
        monkeypatch.setenv("MINTWIST_TOL", "1e-3")
        code, out, _ = run(capsys, "--json", "verify", "two-point")
        assert code == EXIT_PASS and json.loads(out)["config"]["tol"] == 1e-3
        code, out, _ = run(capsys, "--json", "--tol", "1e-6", "verify", "two-point")
        assert json.loads(out)["config"]["tol"] == 1e-6

    def test_env_tolerance_invalid(self, capsys, monkeypatch):
        monkeypatch.setenv("MINTWIST_TOL", "tiny")
        assert run(capsys, "verify", "two-point")[0] == EXIT_INPUT
        monkeypatch.setenv("MINTWIST_TOL", "-1")
        assert run(capsys, "verify", "two-point")[0] == EXIT_INPUT


class TestTwistCheckCommand:
    def test_grading_passes(self, capsys):
        code, out, _ = run(capsys, "twist-check", "two-point", "grading")
        assert code == EXIT_PASS and "overall: PASS" in out

    def test_identity_is_degenerate(self, capsys):
        code, out, _ = run(capsys, "--json", "twist-check", "two-point", "identity")
        assert code == EXIT_FAIL
        entries = {e["name"]: e for e in json.loads(out)["report"]["entries"]}
        assert entries["nondegenerate"]["status"] == "fail"

    def test_sigma1_fails_algebra(self, capsys, tmp_path):
        path = tmp_path / "x.json"
        write_twist(path, SIGMA_1)
        code, out, _ = run(capsys, "--json", "twist-check", "two-point", str(path))
        assert code == EXIT_FAIL
        entries = {e["name"]: e for e in json.loads(out)["report"]["entries"]}
        assert entries["commutes_algebra"]["status"] == "fail"

    def test_dimension_mismatch(self, capsys, tmp_path):
        path = tmp_path / "x.json"
        write_twist(path, np.eye(4))
        code, _, err = run(capsys, "twist-check", "two-point", str(path))
        assert code == EXIT_INPUT and "4-dimensional" in err

    def test_missing_real_structure(self, capsys, tmp_path):
        doc = triple_to_document(catalog.two_point())
        doc["real_structure"] = None
        path = tmp_path / "t.json"
        path.write_text(json.dumps(doc))
        assert run(capsys, "twist-check", str(path), "grading")[0] == EXIT_STRUCTURE


class TestClassifyCommand:
    def test_two_point(self, capsys):
        code, out, _ = run(capsys, "--json", "classify", "two-point")
        doc = json.loads(out)
        assert code == EXIT_PASS and doc["result"]["num_solutions"] == 2
        assert "timing_seconds" not in doc

    def test_m2_empty(self, capsys):
        code, out, _ = run(capsys, "--json", "classify", "m2")
        assert code == EXIT_PASS and json.loads(out)["result"]["num_solutions"] == 0

    def test_missing_real_structure(self, capsys, tmp_path):
        doc = triple_to_document(catalog.two_point())
        doc["real_structure"] = None
        path = tmp_path / "t.json"
        path.write_text(json.dumps(doc))
        code, _, err = run(capsys, "classify", str(path))
        assert code == EXIT_STRUCTURE and "missing real structure" in err

    def test_deterministic_output(self, capsys, tmp_path):
        path = tmp_path / "a.json"
        run(capsys, "--seed", "7", "classify", "two-qubit-sub", "--out", str(path))
        first = path.read_bytes()
        run(capsys, "--seed", "7", "classify", "two-qubit-sub", "--out", str(path))
        assert path.read_bytes() == first
        assert json.loads(first)["result"]["num_solutions"] == 4

    def test_timing_flag(self, capsys):
        _, out, _ = run(capsys, "--json", "classify", "two-point", "--timing")
        assert json.loads(out)["timing_seconds"] >= 0


class TestLatticeDemoCommand:
    def test_single_cutoff_no_footer(self, capsys):
        code, out, _ = run(capsys, "lattice-demo", "two-point", "--N", "4")
        assert code == EXIT_PASS
        assert out.splitlines()[0] == "N,norm,tcal"
        assert len(out.splitlines()) == 2 and "# fit" not in out

    def test_identity_branch_grows(self, capsys, tmp_path):
        path = tmp_path / "scan.csv"
        code, out, _ = run(capsys, "lattice-demo", "two-point", "--tcal", "identity", "--N", "4", "8",
                           "--out", str(path))
        assert code == EXIT_PASS and path.read_text() == out
        norms = [float(line.split(",")[1]) for line in out.splitlines()[1:3]]
        assert norms[1] > 1.9 * norms[0]

    def test_json(self, capsys):
        code, out, _ = run(capsys, "--json", "lattice-demo", "two-point", "--N", "2", "4")
        doc = json.loads(out)
        assert [r["N"] for r in doc["rows"]] == [2, 4]

    def test_invalid_cutoff(self, capsys):
        assert run(capsys, "lattice-demo", "two-point", "--N", "0")[0] == EXIT_INPUT


class TestExportCommand:
    def test_export_matches_library(self, capsys, tmp_path):
        code, out, _ = run(capsys, "export", "sm1g")
        assert code == EXIT_PASS and out == dumps_triple(catalog.sm_one_generation())
        path = tmp_path / "sm.json"
        run(capsys, "export", "sm1g", "--out", str(path))
        assert path.read_text() == out

    def test_exported_file_verifies(self, capsys, tmp_path):
        path = tmp_path / "tq.json"
        write_triple(path, catalog.two_qubit_restricted())
        assert run(capsys, "verify", str(path))[0] == EXIT_PASS
