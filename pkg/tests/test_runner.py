import json
import os

import numpy as np
import pytest

from aqc_shield import cli, codes, runner, verify
from aqc_shield.config import ExperimentConfig, SweepSpec, loads_config

QUICK = """
[model]
n = 4
n_b = 1
j = 0.1
seed = 7

[protocol]
tau = 0.25
total_time = 2.0

[run]
tolerance = 1e-8

[output]
out_dir = {out}
"""

# All four bound verdicts (including the printed phi-distance constant,
# which is tighter than what is provable; see the acceptance suite) happen
# to hold on this configuration.
ALL_PASS = """
[model]
n = 4
n_b = 2
j = 0.1

[protocol]
tau = 0.25
total_time = 6.0

[run]
tolerance = 1e-8

[output]
out_dir = {out}
"""


def quick_cfg(out_dir, **overrides) -> ExperimentConfig:
    cfg = loads_config(QUICK.format(out=out_dir))
    for key, value in overrides.items():
        section, field = key.split("__")
        setattr(getattr(cfg, section), field, value)
    return cfg


class TestExecute:
    def test_provable_bounds_hold(self, tmp_path):
        result = runner.execute_experiment(quick_cfg(tmp_path))
        for name in ("monotonic", "triangle", "eq3"):
            assert result.report.slacks[name] >= 0
        meta = result.report.meta
        assert meta.n == 4 and meta.k_pulses == 4
        assert meta.l_pulses == meta.k_pulses * result.built.schedule.cycles
        assert result.report.budget6 is not None

    def test_j_zero_decoupling_distance_is_zero(self, tmp_path):
        result = runner.execute_experiment(quick_cfg(tmp_path, model__j=0.0))
        assert result.report.d_d == 0.0

    def test_dilation_multiplies_cycles(self, tmp_path):
        base = runner.build_model(quick_cfg(tmp_path))
        dilated_cfg = quick_cfg(tmp_path)
        dilated_cfg.run.r = 2
        dilated = runner.build_model(dilated_cfg)
        assert dilated.schedule.cycles == 2 * base.schedule.cycles

    def test_scaling_rule_protocol(self, tmp_path):
        cfg = quick_cfg(tmp_path)
        # J = 1 keeps w below tau at this small n (w scales as 1/J)
        cfg.model.j = 1.0
        cfg.protocol.tau = None
        cfg.protocol.total_time = None
        cfg.protocol.zeta = 1.0
        cfg.protocol.epsilon1 = 1.5
        cfg.protocol.epsilon2 = 0.5
        built = runner.build_model(cfg)
        assert built.scaling_rule is not None
        assert built.schedule.total_pulses % 4 == 0
        result = runner.execute_experiment(cfg)
        assert result.report.pred8 is not None

    def test_penalty_run(self, tmp_path):
        result = runner.execute_experiment(
            quick_cfg(tmp_path, model__e_p=0.5, model__j=0.05))
        assert result.report.slacks["eq3"] >= 0


class TestOutputs:
    def test_files_written_and_deterministic(self, tmp_path):
        cfg = quick_cfg(tmp_path / "a")
        report1, code1 = runner.run_experiment(cfg)
        csv1 = (tmp_path / "a" / "run_report.csv").read_bytes()
        json1 = (tmp_path / "a" / "run_summary.json").read_bytes()
        cfg2 = quick_cfg(tmp_path / "b")
        runner.run_experiment(cfg2)
        csv2 = (tmp_path / "b" / "run_report.csv").read_bytes()
        json2 = (tmp_path / "b" / "run_summary.json").read_bytes()
        assert csv1 == csv2
        assert json1 == json2
        header, row = csv1.decode().strip().split("\n")
        assert header.startswith("n,J,tau")
        data = json.loads(json1)
        assert data["n"] == 4

    def test_env_override(self, tmp_path, monkeypatch):
        target = tmp_path / "envdir"
        monkeypatch.setenv("AQC_SHIELD_OUT", str(target))
        runner.run_experiment(quick_cfg(tmp_path / "ignored"))
        assert (target / "run_report.csv").exists()

    def test_out_dir_argument_beats_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("AQC_SHIELD_OUT", str(tmp_path / "env"))
        runner.run_experiment(quick_cfg(tmp_path / "cfg"), out_dir=str(tmp_path / "arg"))
        assert (tmp_path / "arg" / "run_report.csv").exists()

    def test_gap_csv(self, tmp_path):
        cfg = quick_cfg(tmp_path)
        path = runner.write_gap_csv(cfg, grid_points=21)
        lines = open(path).read().strip().split("\n")
        assert lines[0].startswith("s,E0,E1")
        assert lines[0].endswith(",gap")
        assert len(lines) == 22


class TestSweep:
    def sweep_spec(self, out_dir, taus=(0.5, 0.25, 0.125)) -> SweepSpec:
        base = quick_cfg(out_dir)
        return SweepSpec(base=base, axes=[("protocol.tau", list(taus))])

    def test_rows_ordered_and_dd_decreasing(self, tmp_path):
        rows = runner.run_sweep(self.sweep_spec(tmp_path))
        assert [r[0] for r in rows] == [0, 1, 2]
        assert all(status == "ok" for _, status, _ in rows)
        d_d_column = [values[8] for _, _, values in rows]
        assert d_d_column[0] > d_d_column[1] > d_d_column[2]

    def test_cross_product_count_and_order(self, tmp_path):
        base = quick_cfg(tmp_path)
        spec = SweepSpec(base=base, axes=[("model.j", [0.05, 0.1]),
                                          ("protocol.tau", [0.5, 0.25])])
        points = runner.sweep_points(spec)
        assert len(points) == 4
        assert [(p.model.j, p.protocol.tau) for p in points] == [
            (0.05, 0.5), (0.05, 0.25), (0.1, 0.5), (0.1, 0.25)]

    def test_parallel_matches_serial(self, tmp_path):
        spec_a = self.sweep_spec(tmp_path / "serial", taus=(0.5, 0.25))
        runner.run_sweep(spec_a, parallelism=1)
        spec_b = self.sweep_spec(tmp_path / "parallel", taus=(0.5, 0.25))
        runner.run_sweep(spec_b, parallelism=2)
        serial = (tmp_path / "serial" / "run_sweep.csv").read_bytes()
        parallel = (tmp_path / "parallel" / "run_sweep.csv").read_bytes()
        assert serial == parallel

    def test_point_failure_recorded(self, tmp_path):
        base = quick_cfg(tmp_path)
        spec = SweepSpec(base=base, axes=[("model.beta_b", [1.0, -1.0])])
        rows = runner.run_sweep(spec)
        assert rows[0][1] == "ok"
        assert rows[1][1].startswith("error:")
        text = (tmp_path / "run_sweep.csv").read_text().strip().split("\n")
        assert len(text) == 3


class TestCli:
    def test_code_subcommand_output(self, capsys):
        assert cli.main(["code", "--n", "4"]) == 0
        out = capsys.readouterr().out
        assert "00: (|0000⟩+|1111⟩)/√2" in out
        assert "Xbar[1] = X1 X2" in out
        assert "Zbar[2] = Z3 Z4" in out

    def test_simulate_exit_codes(self, tmp_path, capsys):
        path = tmp_path / "exp.cfg"
        path.write_text(ALL_PASS.format(out=tmp_path / "o1"))
        assert cli.main(["simulate", str(path)]) == 0
        bad = tmp_path / "missing.cfg"
        assert cli.main(["simulate", str(bad)]) == 1

    def test_simulate_exit_two_on_failed_verdict(self, tmp_path):
        # one bath qubit at this coupling violates the printed phi-distance
        # constant (see the acceptance suite), so the bound gate trips
        path = tmp_path / "exp.cfg"
        path.write_text(QUICK.format(out=tmp_path / "o2")
                        .replace("total_time = 2.0", "total_time = 8.0"))
        assert cli.main(["simulate", str(path)]) == 2

    def test_simulate_invalid_config(self, tmp_path):
        path = tmp_path / "broken.cfg"
        path.write_text("[model]\nn = 4\n[protocol]\ntau = 0.5\n")  # no cycles
        assert cli.main(["simulate", str(path)]) == 1

    def test_simulate_deterministic_bytes(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(QUICK.format(out=tmp_path / "out"))
        cli.main(["simulate", str(path)])
        first = (tmp_path / "out" / "run_report.csv").read_bytes()
        cli.main(["simulate", str(path)])
        second = (tmp_path / "out" / "run_report.csv").read_bytes()
        assert first == second

    def test_sweep_subcommand(self, tmp_path):
        path = tmp_path / "sweep.cfg"
        path.write_text(QUICK.format(out=tmp_path / "out")
                        + "\n[sweep]\nprotocol.tau = 0.5, 0.25\n")
        assert cli.main(["sweep", str(path), "--parallel", "2"]) == 0
        lines = (tmp_path / "out" / "run_sweep.csv").read_text().strip().split("\n")
        assert len(lines) == 3

    def test_gap_subcommand(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(QUICK.format(out=tmp_path / "out"))
        assert cli.main(["gap", str(path), "--grid-points", "11"]) == 0
        assert (tmp_path / "out" / "run_gap.csv").exists()

    def test_seed_override_changes_output(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(QUICK.format(out=tmp_path / "a"))
        cli.main(["simulate", str(path), "--out-dir", str(tmp_path / "a")])
        cli.main(["simulate", str(path), "--seed", "99", "--out-dir", str(tmp_path / "b")])
        a = (tmp_path / "a" / "run_report.csv").read_text()
        b = (tmp_path / "b" / "run_report.csv").read_text()
        assert a != b


class TestVerifySuite:
    def test_mutation_is_caught(self, monkeypatch):
        # a sign error injected into the group average must trip the
        # projector-style checks
        original = codes.group_average

        def broken(group, a):
            return -original(group, a)

        monkeypatch.setattr(codes, "group_average", broken)
        lines = []
        failures = verify.verify(print_fn=lines.append)
        assert failures > 0
        failed = "\n".join(line for line in lines if line.startswith("FAIL"))
        assert "group_average" in failed
