import json
import math
import os

import pytest

from ktlab.cli import UsageError, config_hash, main, parse_rational_list, parse_schedule


def run(tmp_path, *argv):
    return main(["--out-dir", str(tmp_path), *argv])


def read_lines(path):
    with open(path) as fh:
        return fh.read().splitlines()


class TestParsers:
    def test_comma_list(self):
        assert parse_schedule("1,2,4") == [1.0, 2.0, 4.0]

    def test_geometric_up(self):
        assert parse_schedule("8:64:x2") == [8.0, 16.0, 32.0, 64.0]

    def test_geometric_down(self):
        sched = parse_schedule("1e-1:1e-3:/10")
        assert sched == pytest.approx([1e-1, 1e-2, 1e-3])

    def test_bad_step_rejected(self):
        with pytest.raises(UsageError):
            parse_schedule("1:8:*2")
        with pytest.raises(UsageError):
            parse_schedule("1:8:/2")  # shrinking step never reaches 8

    def test_rational_list(self):
        from fractions import Fraction

        assert parse_rational_list("2, 3/2") == [Fraction(2), Fraction(3, 2)]


class TestConfigHash:
    def test_ignores_run_shape_keys(self):
        base = {"d": 1, "seed": 0}
        assert config_hash({**base, "workers": 4, "out_dir": "/a"}) == \
            config_hash({**base, "workers": 1, "out_dir": "/b"})

    def test_sensitive_to_semantic_keys(self):
        assert config_hash({"d": 1}) != config_hash({"d": 2})


class TestExponentsCommand:
    def test_classifies_endpoint(self, tmp_path, capsys):
        code = run(tmp_path, "exponents", "--d", "2", "--q", "2", "--p", "4",
                   "--r", "4/3", "--a", "2")
        assert code == 0
        assert capsys.readouterr().out.strip() == "endpoint"
        payload = json.loads((tmp_path / "exponents.json").read_text())
        assert payload["status"] == "endpoint"
        assert payload["violated"] == []

    def test_rational_scale_flag(self, tmp_path, capsys):
        code = run(tmp_path, "exponents", "--d", "2", "--q", "2", "--p", "4",
                   "--r", "4/3", "--a", "2", "--scale", "4/3")
        assert code == 0
        assert "(3/2, 3, 1, 3/2)" in capsys.readouterr().out

    def test_scan_emits_region_csv(self, tmp_path):
        assert run(tmp_path, "exponents", "--d", "2", "--scan",
                   "--denominator", "8") == 0
        lines = read_lines(tmp_path / "region.csv")
        assert lines[0].startswith("# config ")
        assert lines[1] == "one_over_p,one_over_q,status"
        statuses = {ln.split(",")[2] for ln in lines[2:]}
        assert "endpoint" in statuses
        assert "admissible-nonendpoint" in statuses

    def test_usage_error_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(tmp_path, "exponents", "--d", "2", "--bogus-flag")
        assert exc.value.code == 2


class TestOutputContracts:
    def test_blowup_csv_schema_and_manifest(self, tmp_path):
        assert run(tmp_path, "blowup", "--d", "1", "--v-schedule", "8,16,32") == 0
        lines = read_lines(tmp_path / "blowup.csv")
        assert lines[1] == "V,lhs,rhs,lhs_err,rhs_err"
        assert len(lines) == 2 + 3
        fit = json.loads((tmp_path / "fit.json").read_text())
        assert set(fit["coefficients"]) == {"slope", "intercept"}
        assert fit["model"] == "log"
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["command"] == "blowup"
        assert "blowup.csv" in manifest["outputs"]
        assert "wall_s" in manifest["timings"]

    def test_angular_csv_schema(self, tmp_path):
        assert run(tmp_path, "angular", "--d", "2",
                   "--eps-schedule", "1e-1,1e-2,1e-3") == 0
        lines = read_lines(tmp_path / "angular.csv")
        assert lines[1] == "epsilon,value,stderr"
        fit = json.loads((tmp_path / "fit.json").read_text())
        slope = fit["coefficients"]["slope"]
        assert abs(slope - 8 * math.pi) < 0.10 * 8 * math.pi

    def test_bounds_csv_schema(self, tmp_path):
        assert run(tmp_path, "bounds", "--d", "1", "--count", "3",
                   "--seed", "1") == 0
        lines = read_lines(tmp_path / "bounds.csv")
        assert lines[1] == "config_id,form,bound,margin,kind"
        # two rows (bilinear + interpolated) per configuration, no stray commas
        assert len(lines) == 2 + 6
        assert all(len(ln.split(",")) == 5 for ln in lines[2:])

    def test_sweep_csv_schema(self, tmp_path):
        assert run(tmp_path, "sweep", "--d", "1", "--sigma-schedule", "2,3/2") == 0
        lines = read_lines(tmp_path / "sweep.csv")
        assert lines[1] == "sigma,q_sigma,worst_constant"
        assert len(lines) == 4

    def test_config_hash_embedded_and_consistent(self, tmp_path):
        run(tmp_path, "blowup", "--d", "1", "--v-schedule", "8,16")
        csv_hash = read_lines(tmp_path / "blowup.csv")[0].split()[-1]
        fit = json.loads((tmp_path / "fit.json").read_text())
        assert fit["config_hash"] == csv_hash

    def test_identity_failure_exits_1(self, tmp_path, capsys):
        code = run(tmp_path, "identity", "--d", "1", "--V", "2", "--tol", "1e-15")
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_config_file_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"v_schedule": "8,16", "d": 1}))
        assert main(["--out-dir", str(tmp_path), "--config", str(cfg),
                     "blowup"]) == 0
        lines = read_lines(tmp_path / "blowup.csv")
        assert len(lines) == 2 + 2


class TestVerifyAll:
    def test_worker_count_does_not_change_output_bytes(self, tmp_path, capsys):
        dir1, dir4 = tmp_path / "w1", tmp_path / "w4"
        assert main(["--out-dir", str(dir1), "verify-all", "--seed", "0",
                     "--workers", "1"]) == 0
        assert main(["--out-dir", str(dir4), "verify-all", "--seed", "0",
                     "--workers", "4"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 2 * 9
        assert "FAIL" not in out
        names = sorted(os.listdir(dir1))
        assert names == sorted(os.listdir(dir4))
        for name in names:
            if name == "manifest.json":
                continue  # wall-clock timings legitimately differ
            assert (dir1 / name).read_bytes() == (dir4 / name).read_bytes(), name
