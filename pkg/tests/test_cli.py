"""End-to-end command line behavior: outputs, exit codes, file writing."""

from __future__ import annotations

import json
import shutil
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from wellpoles import cli
from wellpoles.document import parse_chart_document


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestAxis:
    def test_json_output(self, capsys):
        code, out, err = run(capsys, "axis", "--U", "2", "--channel", "plus")
        assert code == 0 and err == ""
        doc = json.loads(out)
        assert doc["kind"] == "axis_poles"
        kinds = sorted(p["kind"] for p in doc["poles"])
        assert kinds == ["bound", "virtual", "virtual"]

    def test_csv_output(self, capsys):
        code, out, err = run(capsys, "axis", "--U", "2", "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "channel,alpha,re_k,im_k,kind,multiplicity"
        assert len(lines) == 4

    def test_repulsive_side(self, capsys):
        code, out, _ = run(capsys, "axis", "--U", "2", "--gamma", "-1")
        assert code == 0
        doc = json.loads(out)
        assert doc["gamma"] == -1
        assert all(p["kind"] == "virtual" for p in doc["poles"])


class TestChart:
    def test_json_parses_strictly(self, capsys):
        code, out, err = run(capsys, "chart", "--U", "1", "--channel", "plus")
        assert code == 0 and err == ""
        doc = parse_chart_document(out)
        assert doc["completeness"]["complete"] is True

    def test_repeated_runs_byte_identical(self, capsys):
        code1, out1, _ = run(capsys, "chart", "--U", "1", "--channel", "minus")
        code2, out2, _ = run(capsys, "chart", "--U", "1", "--channel", "minus")
        assert code1 == code2 == 0
        assert out1 == out2

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "chart.json"
        code, out, _ = run(
            capsys, "chart", "--U", "1", "--out", str(target)
        )
        assert code == 0 and out == ""
        parse_chart_document(target.read_text())

    def test_svg_render(self, capsys, tmp_path):
        target = tmp_path / "chart.svg"
        code, _, _ = run(
            capsys, "chart", "--U", "2", "--svg", str(target)
        )
        assert code == 0
        text = target.read_text()
        root = ET.fromstring(text)
        assert root.tag.split("}")[-1] == "svg"
        assert "script" not in text.lower()
        assert "polyline" in text

    def test_csv_output(self, capsys):
        code, out, _ = run(
            capsys, "chart", "--U", "1", "--format", "csv"
        )
        assert code == 0
        assert out.splitlines()[0] == "trajectory,closure,alpha,re_k,im_k"

    def test_no_certify_drops_certificate(self, capsys):
        code, out, _ = run(
            capsys, "chart", "--U", "1", "--no-certify"
        )
        assert code == 0
        assert json.loads(out)["completeness"] is None

    def test_alpha_cap_shortens_open_curves(self, capsys):
        code, out, _ = run(
            capsys, "chart", "--U", "1", "--alpha-cap", "12.566370614359172"
        )
        assert code == 0
        doc = json.loads(out)
        spans = [
            max(t["alphas"]) - min(t["alphas"]) for t in doc["trajectories"]
        ]
        assert max(spans) <= 2 * 12.566370614359172 + 1e-6


class TestCritical:
    def test_attractive_even(self, capsys):
        code, out, _ = run(capsys, "critical", "--channel", "plus", "--gamma", "+1")
        assert code == 0
        doc = json.loads(out)
        assert abs(doc["U"] - 1.9624365469419596) < 1e-8
        assert doc["transition"] == "plane_to_axis"
        assert doc["pair_count"] == 2

    def test_no_collision_is_numeric_failure(self, capsys):
        code, out, err = run(
            capsys, "critical", "--channel", "minus", "--gamma", "-1"
        )
        assert code == 3 and out == ""
        payload = json.loads(err)
        assert payload["error"]["type"] == "NoRootInBracket"
        assert payload["error"]["message"]


class TestThreshold:
    def test_closed_form(self, capsys):
        code, out, _ = run(capsys, "threshold", "--channel", "minus", "--n", "1")
        assert code == 0
        assert abs(json.loads(out)["U"] - 0.5483113556160755) < 1e-12

    def test_check_agrees(self, capsys):
        code, out, _ = run(
            capsys, "threshold", "--channel", "minus", "--n", "1", "--check"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["flip_agrees"] is True
        assert abs(doc["flip"] - doc["U"]) < 1e-4


class TestSweep:
    def test_transition_attributed(self, capsys):
        code, out, _ = run(
            capsys, "sweep", "--channel", "plus", "--depths", "1.95,2.0"
        )
        assert code == 0
        doc = json.loads(out)
        assert len(doc["entries"]) == 2
        assert doc["entries"][0]["topology"] == {"open": 1}
        assert doc["entries"][1]["topology"] == {"closed_4pi": 1, "open": 1}
        (tr,) = doc["transitions"]
        assert abs(tr["critical"]["U"] - 1.9624365469419596) < 1e-6

    def test_depths_required(self, capsys):
        code, _, err = run(capsys, "sweep", "--channel", "plus")
        assert code == 2
        assert json.loads(err)["error"]["type"] == "DocumentError"

    def test_bad_depths_list(self, capsys):
        code, _, err = run(capsys, "sweep", "--depths", "1.0,zap")
        assert code == 2
        assert "depths" in json.loads(err)["error"]["message"]


class TestVerify:
    def test_passes_on_defaults(self, capsys):
        code, out, _ = run(capsys, "verify", "--samples", "60", "--seed", "7")
        assert code == 0
        doc = json.loads(out)
        assert doc["passed"] is True
        assert doc["worst_residuals"]["transpose_inverse"] < 1e-10
        assert doc["worst_residuals"]["factorization"] < 1e-12

    def test_failure_exits_one(self, capsys, monkeypatch):
        def broken(k, coupling, spec):
            return {
                "transpose_inverse": 1.0,
                "hermitian_adjoint": 0.0,
                "conjugation": 0.0,
            }

        monkeypatch.setattr(cli, "verify_relations", broken)
        code, out, _ = run(capsys, "verify", "--samples", "5")
        assert code == 1
        assert json.loads(out)["passed"] is False

    def test_seed_changes_samples_not_verdict(self, capsys):
        code1, out1, _ = run(capsys, "verify", "--samples", "40", "--seed", "1")
        code2, out2, _ = run(capsys, "verify", "--samples", "40", "--seed", "2")
        assert code1 == code2 == 0
        r1 = json.loads(out1)["worst_residuals"]
        r2 = json.loads(out2)["worst_residuals"]
        assert r1 != r2


class TestUsageErrors:
    def test_bad_choice(self, capsys):
        code, _, _ = run(capsys, "axis", "--channel", "bogus")
        assert code == 2

    def test_no_command(self, capsys):
        code, _, _ = run(capsys)
        assert code == 2

    def test_help_exits_zero(self, capsys):
        assert run(capsys, "--help")[0] == 0

    def test_negative_depth_rejected(self, capsys):
        code, _, err = run(capsys, "axis", "--U", "-3")
        assert code == 2
        assert json.loads(err)["error"]["type"] == "ValueError"


class TestConfigFlag:
    def test_file_sets_cli_overrides(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"U": 2.0, "channel": "minus"}))
        code, out, _ = run(
            capsys, "axis", "--config", str(path), "--channel", "plus"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["potential"]["U"] == 2.0
        assert doc["channel"] == "plus"

    def test_unknown_config_key(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text('{"wat": 1}')
        code, _, err = run(capsys, "axis", "--config", str(path))
        assert code == 2
        assert "unknown keys" in json.loads(err)["error"]["message"]

    def test_config_can_supply_depths(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"depths": [1.0], "channel": "plus"}))
        code, out, _ = run(capsys, "sweep", "--config", str(path))
        assert code == 0
        assert len(json.loads(out)["entries"]) == 1


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "wellpoles.cli", "threshold", "--n", "2"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["n"] == 2

    @pytest.mark.skipif(
        shutil.which("wellpoles") is None, reason="console script not on PATH"
    )
    def test_console_script(self):
        proc = subprocess.run(
            ["wellpoles", "threshold", "--n", "1"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["kind"] == "bound_threshold"
