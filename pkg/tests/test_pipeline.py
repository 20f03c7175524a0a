"""Unit tests for the pipeline driver and the command-line interface."""
import json

import numpy as np
import pytest

from peepopt.cli import main
from peepopt.noise import NoiseModel
from peepopt.pipeline import (
    PipelineError,
    RunConfig,
    cnot_reduction,
    evaluate_circuit,
    ideal_distribution,
    run_pipeline,
)
from peepopt.qasm import parse_qasm

TINY = (
    'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\n'
    "rx(0.4) q[0];\ncx q[0],q[1];\nrz(0.7) q[1];\ncx q[1],q[2];\n"
    "rx(0.2) q[2];\ncx q[0],q[1];\n"
)


@pytest.fixture
def tiny_qasm(tmp_path):
    path = tmp_path / "tiny.qasm"
    path.write_text(TINY)
    return path


def fast_config(path, **kw):
    defaults = dict(
        circuits=[str(path)],
        k=2,
        noise=NoiseModel(p1=0.001, p2=0.01),
        configs=["basic", "pop-err"],
        c=3,
        max_iterations=150,
        expand_restarts=2,
        expand_max_iters=50,
        seed=1,
    )
    defaults.update(kw)
    return RunConfig(**defaults)


class TestRunConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            RunConfig(circuits=[], k=7)
        with pytest.raises(ValueError):
            RunConfig(circuits=[], shots_per_circuit=0)
        with pytest.raises(ValueError):
            RunConfig(circuits=[], configs=["bogus"])

    def test_from_dict_builds_noise(self):
        cfg = RunConfig.from_dict(
            {"circuits": ["a.qasm"], "noise": {"p1": 0.002, "p2": 0.02}})
        assert cfg.noise == NoiseModel(p1=0.002, p2=0.02)


class TestEvaluate:
    def test_report_shape(self, tiny_qasm):
        report = evaluate_circuit(str(tiny_qasm), fast_config(tiny_qasm))
        assert report.num_qubits == 3
        assert 0.0 <= report.baseline_tvd <= 1.0
        assert set(report.configs) == {"basic", "pop-err"}
        for res in report.configs.values():
            assert 0.0 <= res.tvd <= 1.0
            assert 0.0 <= res.jsd <= 1.0
            assert res.num_results == len(res.solutions) == len(res.results_qasm)
            for text in res.results_qasm:
                parse_qasm(text)  # every result is valid QASM

    def test_missing_file_is_input_stage_error(self, tmp_path):
        cfg = fast_config(tmp_path / "absent.qasm")
        with pytest.raises(PipelineError) as exc:
            evaluate_circuit(str(tmp_path / "absent.qasm"), cfg)
        assert exc.value.stage == "input"

    def test_parse_stage_error(self, tmp_path):
        bad = tmp_path / "bad.qasm"
        bad.write_text("OPENQASM 2.0;\nqreg q[2];\nccx q[0],q[1],q[0];\n")
        with pytest.raises(PipelineError) as exc:
            evaluate_circuit(str(bad), fast_config(bad))
        assert exc.value.stage == "parse"

    def test_baseline_tvd_recomputable_from_ideal(self, tiny_qasm):
        cfg = fast_config(tiny_qasm)
        report = evaluate_circuit(str(tiny_qasm), cfg)
        circuit = parse_qasm(tiny_qasm.read_text())
        ideal = ideal_distribution(circuit)
        assert ideal.sum() == pytest.approx(1.0, abs=1e-10)
        assert report.baseline_cnots == 3

    def test_cnot_reduction_empty_and_zero_base(self, tiny_qasm):
        from peepopt.expand import expand_all, OptBudget
        from peepopt.partition import scan_partition
        circuit = parse_qasm(tiny_qasm.read_text())
        blocks = scan_partition(circuit, 2)
        approx = expand_all(blocks, 3, 0.3, 0, OptBudget(restarts=2, max_iters=40))
        assert cnot_reduction([], approx, circuit) == 0.0
        original = tuple(0 for _ in blocks)
        assert cnot_reduction([original], approx, circuit) == 0.0


class TestRunPipeline:
    def test_writes_reports(self, tiny_qasm, tmp_path):
        out = tmp_path / "out"
        cfg = fast_config(tiny_qasm, out_dir=str(out))
        reports = run_pipeline(cfg)
        assert len(reports) == 1
        payload = json.loads((out / "report.json").read_text())
        assert payload["seed"] == 1
        assert len(payload["circuits"]) == 1
        csv = (out / "summary.csv").read_text().splitlines()
        assert csv[0] == "circuit,config,tvd,jsd,cnot_reduction_pct,num_results,seconds"
        assert len(csv) == 1 + len(cfg.configs)


class TestCli:
    def test_partition_verb(self, tiny_qasm, capsys):
        assert main(["partition", "--circuit", str(tiny_qasm), "--k", "2"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["num_qubits"] == 3
        assert len(out["blocks"]) >= 2

    def test_expand_then_recombine(self, tiny_qasm, tmp_path, capsys):
        cache = tmp_path / "cache.json"
        noise = tmp_path / "noise.json"
        noise.write_text(json.dumps({"p1": 0.001, "p2": 0.01}))
        assert main([
            "expand", "--circuit", str(tiny_qasm), "--k", "2",
            "--out", str(cache), "--noise", str(noise),
        ]) == 0
        assert cache.exists()
        results = tmp_path / "results"
        assert main([
            "recombine", "--cache", str(cache), "--name", "basic",
            "--c", "2", "--out", str(results),
        ]) == 0
        assert list(results.glob("result_*.qasm"))

    def test_metrics_verb(self, tmp_path, capsys):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        a.write_text(json.dumps({"00": 512, "01": 512}))
        b.write_text(json.dumps({"00": 768, "01": 256}))
        assert main(["metrics", str(a), str(b), "--qubits", "2"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["tvd"] == pytest.approx(0.25)

    def test_run_verb(self, tiny_qasm, tmp_path, capsys):
        out = tmp_path / "out"
        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "k": 2, "c": 2, "max_iterations": 100,
            "expand_restarts": 2, "expand_max_iters": 40,
            "configs": ["basic"],
        }))
        assert main([
            "run", "--circuit", str(tiny_qasm), "--config", str(config),
            "--out", str(out), "--seed", "3",
        ]) == 0
        assert (out / "report.json").exists()
        assert "baseline tvd" in capsys.readouterr().out

    def test_input_error_exit_code(self, tmp_path, capsys):
        assert main(["partition", "--circuit", str(tmp_path / "none.qasm")]) == 1

    def test_pipeline_error_exit_code(self, tmp_path, capsys):
        assert main([
            "run", "--circuit", str(tmp_path / "none.qasm"),
            "--out", str(tmp_path / "out"),
        ]) == 2
