import json

import numpy as np
import pytest

from collapsekit.cli import main
from collapsekit.io import dump_document, load_document
from collapsekit.measurement import AlgebraicState, observable

from conftest import PAULI_Z


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def docs(tmp_path):
    theta = {}
    for name, angle in (("a1", 0.0), ("a2", np.pi / 2),
                        ("b1", 5 * np.pi / 4), ("b2", 3 * np.pi / 4)):
        m = np.cos(angle) * np.diag([1.0, -1.0]) + np.sin(angle) * np.array(
            [[0.0, 1.0], [1.0, 0.0]]
        )
        theta[name] = write(tmp_path / f"{name}.json", {
            "kind": "observable", "name": name.upper(),
            "matrix": [[float(v) for v in row] for row in m],
        })
    theta["z"] = write(tmp_path / "z.json", {
        "kind": "observable", "name": "Z", "matrix": [[1.0, 0.0], [0.0, -1.0]],
    })
    theta["x"] = write(tmp_path / "x.json", {
        "kind": "observable", "name": "X", "matrix": [[0.0, 1.0], [1.0, 0.0]],
    })
    theta["ket0"] = write(tmp_path / "ket0.json", {
        "kind": "state", "matrix": [[1.0, 0.0], [0.0, 0.0]],
    })
    theta["vec0"] = write(tmp_path / "vec0.json", {
        "kind": "vector", "amplitudes": [1.0, 0.0],
    })
    psi = np.zeros((4, 4))
    psi[1, 1] = psi[2, 2] = 0.5
    psi[1, 2] = psi[2, 1] = -0.5
    theta["singlet"] = write(tmp_path / "singlet.json", {
        "kind": "state", "matrix": [[float(v) for v in row] for row in psi],
    })
    corr = [[0.5, 0.0], [0.0, 0.5]]
    anti = [[0.0, 0.5], [0.5, 0.0]]
    theta["prbox"] = write(tmp_path / "prbox.json", {
        "kind": "marginal-problem",
        "axes": {"A1": [-1, 1], "A2": [-1, 1], "B1": [-1, 1], "B2": [-1, 1]},
        "contexts": [
            {"axes": ["A1", "B1"], "table": corr},
            {"axes": ["A1", "B2"], "table": corr},
            {"axes": ["A2", "B1"], "table": corr},
            {"axes": ["A2", "B2"], "table": anti},
        ],
    })
    theta["product"] = write(tmp_path / "product.json", {
        "kind": "marginal-problem",
        "axes": {"A1": [-1, 1], "B1": [-1, 1]},
        "contexts": [
            {"axes": ["A1", "B1"], "table": [[0.25, 0.25], [0.25, 0.25]]},
        ],
    })
    theta["chain"] = write(tmp_path / "chain.json", {
        "kind": "chain-spec",
        "observables": [
            {"kind": "observable", "name": "Z",
             "matrix": [[1.0, 0.0], [0.0, -1.0]]},
            {"kind": "observable", "name": "X",
             "matrix": [[0.0, 1.0], [1.0, 0.0]]},
        ],
        "length": 3, "convention": "left_fold", "seed": 5,
    })
    theta["tmp"] = tmp_path
    return theta


class TestDecompose:
    def test_table_output(self, docs, capsys):
        assert main([f"--format=table", "decompose", docs["z"]]) == 0
        out = capsys.readouterr().out
        assert "-1" in out and "1" in out

    def test_json_output(self, docs, capsys):
        assert main(["--format=json", "decompose", docs["z"]]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["eigenvalues"] == ["-1", "1"]
        assert payload["ranks"] == [1, 1]

    def test_missing_file_exit_2(self, docs, capsys):
        assert main(["decompose", str(docs["tmp"] / "nope.json")]) == 2

    def test_wrong_kind_exit_2(self, docs, capsys):
        assert main(["decompose", docs["ket0"]]) == 2

    def test_malformed_json_reports_position(self, docs, capsys):
        bad = docs["tmp"] / "bad.json"
        bad.write_text('{"kind": "observable", "matrix": [[1, }')
        assert main(["decompose", str(bad)]) == 2
        err = capsys.readouterr().err
        assert "line" in err and "column" in err


class TestJoint:
    def test_z_then_x_on_ket0(self, docs, capsys):
        assert main(["--format=json", "joint", docs["z"], docs["x"],
                     "--state", docs["ket0"]]) == 0
        rows = json.loads(capsys.readouterr().out)["rows"]
        table = {r["outcomes"]: float(r["probability"]) for r in rows}
        assert table["1,-1"] == pytest.approx(0.5)
        assert table["1,1"] == pytest.approx(0.5)
        assert table["-1,-1"] == 0.0

    def test_left_right_trees_differ(self, docs, capsys):
        outputs = []
        for tree in ("left", "right"):
            assert main(["--format=json", "joint", docs["z"], docs["x"],
                         docs["z"], "--state", docs["ket0"],
                         "--tree", tree]) == 0
            outputs.append(capsys.readouterr().out)
        assert outputs[0] != outputs[1]


class TestEquivalence:
    def test_exact(self, docs, capsys):
        assert main(["--format=json", "equivalence", docs["z"], docs["x"],
                     "--state", docs["ket0"]]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["dim"] == 4
        assert float(payload["max_deviation"]) == 0.0
        assert float(payload["min_polynomial_positivity"]) >= -1e-10

    def test_perturb_detected(self, docs, capsys):
        assert main(["--format=json", "equivalence", docs["z"], docs["x"],
                     "--state", docs["ket0"], "--perturb", "1e-6"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert float(payload["max_deviation"]) == pytest.approx(1e-6)


class TestInstruments:
    def test_pointer_statistics(self, docs, capsys):
        assert main(["--format=json", "instruments", docs["z"], docs["x"],
                     "--vector", docs["vec0"]]) == 0
        payload = json.loads(capsys.readouterr().out)
        table = {r["outcomes"]: float(r["probability"]) for r in payload["joint"]}
        assert table["1,1"] == pytest.approx(0.5)
        assert float(payload["luders_duality_max_deviation"]) <= 1e-12


class TestChsh:
    def test_singlet_value(self, docs, capsys):
        assert main(["--format=json", "chsh",
                     docs["a1"], docs["a2"], docs["b1"], docs["b2"],
                     "--state", docs["singlet"]]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert float(payload["chsh_value"]) == pytest.approx(
            2.0 * np.sqrt(2.0), abs=1e-6
        )


class TestFeasible:
    def test_feasible_exit_0(self, docs, capsys):
        assert main(["--format=json", "feasible", docs["product"]]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["verdict"] == "feasible"

    def test_pr_box_exit_3(self, docs, capsys):
        assert main(["--format=json", "feasible", docs["prbox"]]) == 3
        payload = json.loads(capsys.readouterr().out)
        assert payload["verdict"] == "infeasible"
        assert payload["certificate"]
        assert float(payload["violation"]) > 0.1


class TestChain:
    def test_records_deterministic(self, docs, capsys):
        argv = ["chain", docs["chain"], "--state", docs["ket0"],
                "--runs", "50", "--mechanism", "step", "--emit-records"]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        second = capsys.readouterr().out
        assert first == second
        assert len(first.strip().splitlines()) == 50

    def test_seed_flag_changes_records(self, docs, capsys):
        base = ["chain", docs["chain"], "--state", docs["ket0"],
                "--runs", "50", "--mechanism", "step", "--emit-records"]
        assert main(base) == 0
        first = capsys.readouterr().out
        assert main(base + ["--seed", "99"]) == 0
        second = capsys.readouterr().out
        assert first != second

    def test_env_seed(self, docs, capsys, monkeypatch):
        base = ["chain", docs["chain"], "--state", docs["ket0"],
                "--runs", "50", "--mechanism", "step", "--emit-records"]
        monkeypatch.setenv("COLLAPSEKIT_SEED", "99")
        assert main(base) == 0
        env_out = capsys.readouterr().out
        monkeypatch.delenv("COLLAPSEKIT_SEED")
        assert main(base + ["--seed", "99"]) == 0
        flag_out = capsys.readouterr().out
        assert env_out == flag_out

    def test_summary_table(self, docs, capsys):
        assert main(["--format=json", "chain", docs["chain"],
                     "--state", docs["ket0"], "--runs", "2000"]) == 0
        rows = json.loads(capsys.readouterr().out)["rows"]
        total = sum(float(r["empirical"]) for r in rows)
        assert total == pytest.approx(1.0, abs=1e-9)


class TestBrackets:
    def test_catalan_sequence(self, docs, capsys):
        assert main(["--format=json", "brackets", "7"]) == 0
        rows = json.loads(capsys.readouterr().out)["rows"]
        assert [r["bracketings"] for r in rows] == [1, 1, 2, 5, 14, 42, 132]


class TestToleranceFlags:
    def test_flag_overrides_config(self, docs, capsys):
        # A slightly non-Hermitian matrix passes with a loose flag even when
        # the config file is strict.
        near = docs["tmp"] / "near.json"
        near.write_text(json.dumps({
            "kind": "observable", "name": "N",
            "matrix": [[1.0, 1e-7], [0.0, -1.0]],
        }))
        cfg = docs["tmp"] / "cfg.json"
        cfg.write_text(json.dumps({"herm": 1e-12}))
        assert main(["--config", str(cfg), "decompose", str(near)]) == 2
        capsys.readouterr()
        assert main(["--config", str(cfg), "--tol-herm", "1e-3",
                     "decompose", str(near)]) == 0


class TestDocumentRoundTrip:
    def test_observable(self, docs, tmp_path):
        z = load_document(docs["z"])
        out = tmp_path / "z2.json"
        out.write_text(dump_document(z))
        z2 = load_document(str(out), expect="observable")
        assert np.abs(z.matrix() - z2.matrix()).max() == 0.0

    def test_state(self, docs, tmp_path):
        rho = AlgebraicState.maximally_mixed(3)
        out = tmp_path / "rho.json"
        out.write_text(dump_document(rho))
        rho2 = load_document(str(out), expect="state")
        assert np.abs(rho.density - rho2.density).max() == 0.0
