import json
import math

import numpy as np
import pytest

from gaudin import equations as eq
from gaudin.cli import UsageError, main, parse_config, run
from gaudin.model import SystemSpec, momentum_labels


def _run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    assert code == 0, out
    return json.loads(out)


class TestParseConfig:
    def test_basic(self):
        cfg = parse_config(["solve", "--N", "3", "--L", "1", "--c", "1", "--n", "1,2,3"])
        assert cfg.command == "solve"
        assert cfg.spec == SystemSpec(3, 1.0, 1.0)
        assert cfg.n == (1, 2, 3)
        assert cfg.solver.grad_tol == 1e-12 and cfg.solver.max_iters == 200

    def test_length_mismatch(self):
        with pytest.raises(UsageError):
            parse_config(["solve", "--N", "2", "--L", "1", "--c", "1", "--n", "1,2,3"])

    def test_missing_coupling(self):
        with pytest.raises(UsageError, match="--c"):
            parse_config(["solve", "--N", "2", "--L", "1", "--n", "1,2"])

    def test_flag_overrides_file(self):
        text = json.dumps({"N": 2, "L": 1.0, "c": 1.5, "n": [1, 2]})
        cfg = parse_config(["solve", "--c", "2.0"], file_text=text)
        assert cfg.spec.coupling == 2.0
        assert parse_config(["solve"], file_text=text).spec.coupling == 1.5

    def test_config_file_path(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"spec": {"n_particles": 2, "length": 1.0, "coupling": 1.0},
                                    "n": "1,2", "seed": 5}))
        cfg = parse_config(["multistart", "--config", str(path)])
        assert cfg.spec.n_particles == 2 and cfg.seed == 5

    def test_scan_needs_no_state(self):
        cfg = parse_config(["scan-minors", "--N", "10", "--samples", "3"])
        assert cfg.spec == SystemSpec(10, 1.0, 1.0) and cfg.samples == 3

    def test_bad_n(self):
        with pytest.raises(UsageError):
            parse_config(["solve", "--N", "2", "--L", "1", "--c", "1", "--n", "1,x"])


class TestMain:
    def test_usage_exit_code(self, capsys):
        assert main(["solve", "--N", "2", "--L", "1", "--c", "1", "--n", "1,2,3"]) == 2
        captured = capsys.readouterr()
        assert captured.out == "" and "usage error" in captured.err
        assert main(["nonsense"]) == 2

    def test_solve_single(self, capsys):
        data = _run_json(capsys, ["solve", "--N", "1", "--L", "3.14159265358979", "--c", "5",
                                  "--n", "2"])
        assert data["roots"][0] == pytest.approx(2.0, abs=1e-12)
        assert data["energy"] == pytest.approx(4.0, abs=1e-11)

    def test_solve_fields(self, capsys):
        data = _run_json(capsys, ["solve", "--N", "3", "--L", "1", "--c", "1", "--n", "3,-1,0"])
        assert data["canonicalization"]["sign_map"] == [1, -1, 1]
        assert data["canonicalization"]["zero_reduced"] is True
        assert data["roots"][0] == 0.0
        assert data["residual_norms"]["raw"] <= 1e-12
        assert data["residual_norms"]["transformed"] <= 1e-12
        for key in ("b_value", "iterations", "ordering", "energy", "signed_roots"):
            assert key in data

    def test_roots_round_trip(self, capsys):
        data = _run_json(capsys, ["solve", "--N", "4", "--L", "1", "--c", "0.5", "--n", "1,2,4,7"])
        k = np.array(data["roots"])
        spec = SystemSpec(4, 1.0, 0.5)
        r = eq.residual_transformed(k, momentum_labels((1, 2, 4, 7)).labels, spec)
        assert abs(float(np.max(np.abs(r))) - data["residual_norms"]["transformed"]) <= 1e-12

    def test_verify(self, capsys):
        data = _run_json(capsys, ["verify", "--N", "3", "--L", "1", "--c", "1", "--n", "1,2,3"])
        assert data["minor_chain"]["all_positive"]
        assert data["oracle_max_deviation"] <= 1e-8

    def test_multistart(self, capsys):
        data = _run_json(capsys, ["multistart", "--N", "5", "--L", "1", "--c", "1", "--n",
                                  "1,2,3,4,5", "--starts", "20", "--seed", "7"])
        assert data["clusters"] == 1 and data["converged"] == 20

    def test_scan_minors(self, capsys):
        data = _run_json(capsys, ["scan-minors", "--N", "10", "--samples", "100", "--seed", "1"])
        assert data["chain_ok_fraction"] == 1.0

    def test_limits(self, capsys):
        data = _run_json(capsys, ["limits", "--N", "3", "--L", "1", "--c", "1e-8", "--n", "1,2,3"])
        assert data["free"]["deviation"] <= 1e-5 and data["free"]["in_regime"]
        assert not data["tonks"]["in_regime"]

    def test_compare_bc(self, capsys):
        data = _run_json(capsys, ["compare-bc", "--N", "2", "--L", "1", "--c", "1", "--n", "1,2"])
        assert data["obstruction_ok"] and data["half_system_residual"] <= 1e-9

    def test_csv_and_out(self, tmp_path, capsys):
        out = tmp_path / "roots.csv"
        assert main(["solve", "--N", "2", "--L", "1", "--c", "1", "--n", "1,2", "--format", "csv",
                     "--out", str(out)]) == 0
        assert capsys.readouterr().out == ""
        rows = out.read_text().splitlines()
        assert rows[0] == "index,root,signed_root" and len(rows) == 3

    def test_scan_csv_one_row_per_sample(self, capsys):
        assert main(["scan-minors", "--N", "5", "--samples", "4", "--format", "csv"]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 5

    def test_solver_failure_exit_code(self, capsys):
        code = main(["solve", "--N", "5", "--L", "1", "--c", "1e-3", "--n", "1,2,3,4,5",
                     "--max-iters", "1"])
        assert code == 1
        assert "computation failed" in capsys.readouterr().err

    def test_byte_identical(self, capsys):
        argv = ["multistart", "--N", "3", "--L", "1", "--c", "0.1", "--n", "1,3,6", "--seed", "2"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first


def test_run_writes_file(tmp_path):
    cfg = parse_config(["solve", "--N", "1", "--L", "1", "--c", "1", "--n", "1",
                        "--out", str(tmp_path / "o.json")])
    assert run(cfg) == 0
    data = json.loads((tmp_path / "o.json").read_text())
    assert data["roots"][0] == pytest.approx(math.pi)
