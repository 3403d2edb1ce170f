import json
import math

import pytest

from dinfh.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestMembershipCommand:
    def test_resolvent_point(self, capsys):
        code, out, _ = run_cli(capsys, "membership", "--z", "1", "8", "4", "2")
        assert code == 0
        payload = json.loads(out)
        assert payload["schema_version"] == "1"
        assert payload["in_spectrum"] is False
        assert payload["witnesses"][0]["x_re"] == pytest.approx(-79 / 64)

    def test_complex_literals(self, capsys):
        code, out, _ = run_cli(capsys, "membership", "--z", "1,0", "1,0", "0,0", "0,0")
        assert code == 0
        assert json.loads(out)["in_spectrum"] is True


class TestTraceCommand:
    def test_oracle_tau(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "trace",
            "--z", "2,0", "0,0", "0,0", "1,0",
            "--functional", "tr",
            "--word", "tau",
            "--method", "oracle",
            "--N", "64",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["value_re"] == pytest.approx(-1 / 3)
        assert payload["functional"] == "Tr"

    def test_quadrature_tabulated(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "trace",
            "--z", "2", "0", "0", "1",
            "--word", "tau",
            "--formula", "tabulated",
            "--n-nodes", "16",
        )
        assert code == 0
        assert json.loads(out)["value_re"] == pytest.approx(1 / 3)

    def test_on_spectrum_error(self, capsys):
        code, out, err = run_cli(capsys, "trace", "--z", "1", "1", "0", "0")
        assert code == 2
        assert json.loads(err)["error"] == "OnSpectrum"


class TestPeriodCommand:
    def test_named_loop(self, capsys):
        code, out, _ = run_cli(
            capsys, "period", "--loop", "L1", "--functional", "phitr", "--steps", "64"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["value_im"] == pytest.approx(-2 * math.pi, abs=1e-6)
        assert payload["nearest"] == -2
        assert payload["residual"] <= 1e-6

    def test_inline_loop(self, capsys):
        desc = json.dumps(
            {
                "kind": "circle",
                "center": [[2.5, 0], [0, 0], [0, 0], [0.5, 0]],
                "radius": 0.4,
                "coords": ["z0"],
                "steps": 64,
            }
        )
        code, out, _ = run_cli(capsys, "period", "--loop", desc)
        assert code == 0
        assert json.loads(out)["nearest"] == 0


class TestTreeCommands:
    def test_tree_dump(self, capsys):
        code, out, _ = run_cli(capsys, "tree", "--element", "a", "--level", "1")
        assert code == 0
        assert out.splitlines() == ["0 -> 1", "1 -> 0", "2 -> 3", "3 -> 2"]

    def test_tree_spectrum_csv(self, capsys):
        code, out, _ = run_cli(
            capsys, "tree-spectrum", "--z1", "1", "--z2", "1", "--z3", "1",
            "--level", "1",
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "level,z1,z2,z3,lambda,multiplicity_hint"
        assert len(lines) == 4

    def test_coverage(self, capsys):
        code, out, _ = run_cli(
            capsys, "coverage", "--z1", "1", "--z2", "0", "--z3", "0", "--level", "2"
        )
        assert code == 0
        assert json.loads(out)["gap"] == pytest.approx(0.0, abs=1e-12)


class TestSliceCommand:
    def test_csv_output(self, capsys, tmp_path):
        out_file = tmp_path / "slice.csv"
        code, _, _ = run_cli(
            capsys,
            "slice",
            "--axes", "z0", "z1",
            "--fixed", "1,0", "0,0",
            "--grid", "5", "5",
            "--u-range", "-2", "2",
            "--v-range", "-2", "2",
            "--out", str(out_file),
        )
        assert code == 0
        lines = out_file.read_text().splitlines()
        assert lines[0] == "u,v,margin,in_spectrum"
        assert len(lines) == 26


class TestMcCheckCommand:
    def test_closedness_csv(self, capsys):
        code, out, _ = run_cli(
            capsys, "mc-check", "--z", "1", "8", "4", "2", "--n-nodes", "64"
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "coord_i,coord_j,residual"
        max_line = [l for l in lines if l.startswith("# max residual")]
        assert float(max_line[0].split(":")[1]) <= 1e-6


class TestVerifyCommand:
    def test_single_criterion(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--only", "2")
        assert code == 0
        payload = json.loads("\n".join(out.splitlines()[1:]))
        assert payload["all_passed"] is True
        assert payload["criteria"][0]["number"] == 2


class TestErratumCommand:
    def test_report_content(self, capsys):
        code, out, _ = run_cli(capsys, "erratum-report", "--skip-periods")
        assert code == 0
        payload = json.loads(out)
        assert payload["tau_trace"]["direct_algebra"] == pytest.approx(-1 / 3)
        assert payload["tau_trace"]["tabulated"] == pytest.approx(1 / 3)
        assert payload["mixed_partials"]["pointwise_inequality_reproducible"] is False


class TestDeterminism:
    def test_identical_artifacts(self, capsys, tmp_path):
        f1, f2 = tmp_path / "a.json", tmp_path / "b.json"
        run_cli(capsys, "membership", "--z", "1", "8", "4", "2", "--out", str(f1))
        run_cli(capsys, "membership", "--z", "1", "8", "4", "2", "--out", str(f2))
        assert f1.read_bytes() == f2.read_bytes()

    def test_erratum_deterministic(self, capsys, tmp_path):
        f1, f2 = tmp_path / "a.json", tmp_path / "b.json"
        for f in (f1, f2):
            run_cli(capsys, "erratum-report", "--skip-periods", "--out", str(f))
        assert f1.read_bytes() == f2.read_bytes()


class TestUsageErrors:
    def test_unknown_command_exits_1(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bogus"])
        assert exc.value.code == 1

    def test_bad_complex_literal_exits_1(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["membership", "--z", "1", "2", "3", "nope"])
        assert exc.value.code == 1
