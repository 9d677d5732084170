"""
Tests for the command-line surface: output formats and exit codes
"""
import csv
import io
import json

import pytest
from typer.testing import CliRunner

from cli import app

HEADER = "quantity,n,t_re,t_im,z_re,z_im,value_re,value_im,err_abs"

runner = CliRunner()


def _csv_rows(text):
    lines = text.splitlines()
    return lines[0], list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


class TestOutput:
    """CSV with a metadata line, or a JSON list"""

    def test_moments_csv(self):
        result = runner.invoke(app, ["moments", "--t", "0", "--m", "2"])
        assert result.exit_code == 0
        metadata, rows = _csv_rows(result.stdout)
        assert metadata.startswith("# quartic-lab moments ")
        config = json.loads(metadata[len("# quartic-lab moments "):])
        assert config["command"] == "moments"
        assert config["prec_bits"] == 128
        assert result.stdout.splitlines()[1] == HEADER
        assert [row["quantity"] for row in rows] == ["mu"] * 5
        assert [int(row["n"]) for row in rows] == list(range(5))
        assert all(float(row["err_abs"]) < 1e-30 for row in rows)

    def test_json_format(self):
        result = runner.invoke(app, ["p4-tower", "--x", "0.5", "--n-max", "1", "--format", "json"])
        assert result.exit_code == 0
        records = json.loads(result.stdout)
        assert [r["quantity"] for r in records] == ["f0", "f1", "f2", "sigma"] * 2
        assert records[0]["z_re"].startswith("0.5")
        f_sum = sum(float(r["value_re"]) for r in records[:3])
        assert f_sum == pytest.approx(1.0)

    def test_out_file(self, tmp_path):
        target = tmp_path / "hankel.csv"
        result = runner.invoke(app, ["hankel", "--t", "-3", "--N", "4", "--m", "4", "--out", str(target)])
        assert result.exit_code == 0
        assert result.stdout == ""
        _, rows = _csv_rows(target.read_text())
        assert [row["quantity"] for row in rows] == ["H"] * 5
        assert all(float(row["err_abs"]) < 1e-20 for row in rows)

    def test_op_table_string_equation(self):
        result = runner.invoke(app, ["op-table", "--t", "-3", "--N", "4", "--n-max", "4"])
        assert result.exit_code == 0
        _, rows = _csv_rows(result.stdout)
        checked = [row for row in rows if row["quantity"] == "gamma_sq" and row["err_abs"]]
        assert checked
        assert all(float(row["err_abs"]) < 1e-25 for row in checked)

    def test_p4_residuals(self):
        result = runner.invoke(app, ["p4-residuals", "--n-max", "1"])
        assert result.exit_code == 0
        _, rows = _csv_rows(result.stdout)
        quantities = {row["quantity"] for row in rows}
        assert {"sigma_form", "p4_ode_f1", "p4_ode_f2", "toda", "dictionary"} <= quantities
        assert not any(row["quantity"] == "p4_ode_f0" and row["n"] == "0" for row in rows)
        for row in rows:
            if row["quantity"] != "sigma_form":
                assert float(row["err_abs"]) < 1e-15

    def test_sign_chart_grid(self):
        result = runner.invoke(app, ["sign-chart", "--window", "-3", "3", "-2", "2", "--nx", "7", "--ny", "5"])
        assert result.exit_code == 0
        _, rows = _csv_rows(result.stdout)
        assert len(rows) == 35
        near = [row for row in rows if row["quantity"] == "re_eta_near_cut"]
        assert {(float(row["z_re"]), float(row["z_im"])) for row in near} == {(-2.0, 0.0), (2.0, 0.0)}

    def test_trace_escapes(self):
        result = runner.invoke(app, ["trace", "--start", "b2", "--angle", "0", "--kind", "orthogonal"])
        assert result.exit_code == 0
        _, rows = _csv_rows(result.stdout)
        assert rows[-1]["quantity"] == "end_escape"


def _metadata(text, command):
    line = text.splitlines()[0]
    prefix = f"# quartic-lab {command} "
    assert line.startswith(prefix)
    return json.loads(line[len(prefix):])


class TestMetadata:
    """The metadata line records every flag that shapes a run"""

    def test_moment_provenance(self):
        result = runner.invoke(app, ["moments", "--t", "0", "--m", "2", "--provenance", "closed_form"])
        assert result.exit_code == 0
        assert _metadata(result.stdout, "moments")["provenance"] == "closed_form"

    def test_asym_compare_flags(self):
        args = ["asym-compare", "--n-min", "2", "--n-max", "3", "--z", "2.5"]
        diagonal = runner.invoke(app, args + ["--sequence", "n"])
        alternating = runner.invoke(app, args + ["--sequence", "alternating"])
        assert diagonal.exit_code == 0
        assert alternating.exit_code == 0
        first = _metadata(diagonal.stdout, "asym-compare")
        second = _metadata(alternating.stdout, "asym-compare")
        assert first["sequence"] == "n"
        assert second["sequence"] == "alternating"
        assert first["quantity"] == "gamma_sq"
        assert first["z"] == 2.5

    def test_pole_scan_factor(self):
        result = runner.invoke(app, ["pole-scan", "--window", "-1", "1", "-1", "1", "--nx", "3", "--ny", "3",
                                     "--factor", "e"])
        assert result.exit_code == 0
        assert _metadata(result.stdout, "pole-scan")["factor"] == "e"

    def test_trace_options(self):
        result = runner.invoke(app, ["trace", "--start", "b2", "--angle", "0", "--kind", "orthogonal"])
        assert result.exit_code == 0
        config = _metadata(result.stdout, "trace")
        assert config["start"] == "b2"
        assert config["angle"] == 0.0
        assert config["kind"] == "orthogonal"
        assert config["max_steps"] == 20000
        assert config["direction"] == 0


class TestExitCodes:
    """2 for rejected flags, 3 for numeric failures"""

    def test_grid_too_small(self):
        result = runner.invoke(app, ["sign-chart", "--nx", "1"])
        assert result.exit_code == 2
        assert "Invalid configuration for sign-chart" in result.stderr

    def test_empty_window(self):
        result = runner.invoke(app, ["pole-scan", "--window", "1", "-1", "0", "1", "--nx", "3", "--ny", "3"])
        assert result.exit_code == 2
        assert "empty window" in result.stderr

    def test_degree_range(self):
        result = runner.invoke(app, ["asym-compare", "--n-min", "5", "--n-max", "3"])
        assert result.exit_code == 2

    def test_precision_floor(self):
        result = runner.invoke(app, ["moments", "--prec-bits", "32"])
        assert result.exit_code == 2

    def test_numeric_failure_is_reported_as_json(self):
        """A trajectory cut off after one step is a step-limit failure"""
        result = runner.invoke(app, ["trace", "--max-steps", "1"])
        assert result.exit_code == 3
        record = json.loads(result.stderr.strip().splitlines()[-1])
        assert record["error"] == "StepLimit"
        assert record["command"] == "trace"
        assert result.stdout == ""


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
