import json
import math
from pathlib import Path

import pytest

import spinpulse as sp
from spinpulse.cli import main


def write_config(path: Path, doc: dict) -> Path:
    cfg_path = path / "run.json"
    cfg_path.write_text(json.dumps(doc, indent=1))
    return cfg_path


def base_config(n=6, rabi=0.2, **extra):
    doc = {
        "version": 1,
        "chain": {"n_qubits": n, "larmor_spacing": 100.0, "cutoff": 1e-6},
        "gate": {"type": "cn", "rabi": rabi, "equal_epsilon": False},
        "seed": 0,
    }
    doc.update(extra)
    return doc


class TestSimulate:
    def test_writes_report_and_tables(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, base_config())
        out = tmp_path / "out"
        code = main(["simulate", "--config", str(cfg_path), "--out", str(out),
                     "--trace"])
        assert code == 0
        assert (out / "report.json").exists()
        assert (out / "unwanted.csv").exists()
        assert (out / "trace.csv").exists()
        assert (out / "bands.json").exists()
        report = sp.RunReport.load(out / "report.json")
        assert report.engine == "perturbative"
        assert report.probability(0) > 0.4

    def test_reruns_are_byte_identical(self, tmp_path):
        cfg_path = write_config(tmp_path, base_config())
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", str(cfg_path), "--out", str(out_a)]) == 0
        assert main(["simulate", "--config", str(cfg_path), "--out", str(out_b)]) == 0
        assert (out_a / "report.json").read_bytes() == (out_b / "report.json").read_bytes()
        assert (out_a / "unwanted.csv").read_bytes() == (out_b / "unwanted.csv").read_bytes()

    def test_doubled_cutoff_prunes_at_half(self, tmp_path):
        cfg_path = write_config(tmp_path, base_config())
        out = tmp_path / "out"
        assert main([
            "simulate", "--config", str(cfg_path), "--out", str(out),
            "--doubled-probabilities",
        ]) == 0
        report = sp.RunReport.load(out / "report.json")
        assert report.doubled is True
        assert report.prune_cutoff == pytest.approx(0.5e-6)

    def test_unknown_config_key_is_an_error(self, tmp_path, capsys):
        doc = base_config()
        doc["tpyo"] = 1
        cfg_path = write_config(tmp_path, doc)
        code = main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "o")])
        assert code == 2
        err = capsys.readouterr().err
        record = json.loads(err.strip())
        assert record["error"]["type"] == "ConfigError"
        assert "tpyo" in record["error"]["message"]

    def test_unknown_section_key_is_an_error(self, tmp_path):
        doc = base_config()
        doc["chain"]["n_qubit"] = 4
        cfg_path = write_config(tmp_path, doc)
        assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "o")]) == 2

    def test_exact_engine_cap_error(self, tmp_path):
        doc = base_config(n=16, rabi=0.2)
        cfg_path = write_config(tmp_path, doc)
        code = main(["simulate-exact", "--config", str(cfg_path),
                     "--out", str(tmp_path / "o")])
        assert code == 3

    def test_cutoff_flag_overrides_chain_cutoff(self, tmp_path):
        cfg_path = write_config(tmp_path, base_config())
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg_path), "--out", str(out),
                     "--cutoff", "1e-4"]) == 0
        report = sp.RunReport.load(out / "report.json")
        assert report.prune_cutoff == pytest.approx(1e-4)
        assert all(
            abs(c) ** 2 >= 1e-4 for c in report.final_amps.values()
        )

    def test_engine_flag_selects_exact(self, tmp_path):
        doc = {
            "version": 1,
            "chain": {"n_qubits": 4, "larmor_spacing": 100.0},
            "gate": {"type": "cn", "k": 2},
        }
        cfg_path = write_config(tmp_path, doc)
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg_path), "--out", str(out),
                     "--engine", "exact"]) == 0
        assert sp.RunReport.load(out / "report.json").engine == "exact"

    def test_jitter_section_uses_seed(self, tmp_path):
        doc = base_config(n=12, rabi=0.1)
        doc["jitter"] = {"first": 2, "last": 6, "bound": 0.02}
        cfg_path = write_config(tmp_path, doc)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["design", "--config", str(cfg_path), "--out", str(out_a)]) == 0
        assert main(["design", "--config", str(cfg_path), "--out", str(out_b)]) == 0
        proto_a = sp.Protocol.load(out_a / "protocol.json")
        assert proto_a == sp.Protocol.load(out_b / "protocol.json")
        jittered = [p for i, p in enumerate(proto_a.pulses[1:], start=1)
                    if 2 <= i <= 6]
        assert any(p.rabi != 0.1 for p in jittered)

        doc["seed"] = 99
        cfg_path2 = write_config(tmp_path / "a", doc)
        out_c = tmp_path / "c"
        assert main(["design", "--config", str(cfg_path2), "--out", str(out_c)]) == 0
        assert sp.Protocol.load(out_c / "protocol.json") != proto_a

    def test_protocol_file_input(self, tmp_path):
        chain = sp.ChainConfig(n_qubits=5, larmor_spacing=100.0)
        proto = sp.build_cn_protocol(chain, rabi=0.3)
        proto.save(tmp_path / "protocol.json")
        doc = {
            "version": 1,
            "chain": {"n_qubits": 5, "larmor_spacing": 100.0},
            "protocol_file": "protocol.json",
        }
        cfg_path = write_config(tmp_path, doc)
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
        report = sp.RunReport.load(out / "report.json")
        assert report.probability(proto.target_state) == pytest.approx(0.5, abs=1e-6)


class TestSimulateExactAndClassical:
    def test_exact_small_chain(self, tmp_path):
        doc = {
            "version": 1,
            "chain": {"n_qubits": 5, "larmor_spacing": 100.0},
            "gate": {"type": "cn", "k": 3, "equal_epsilon": True},
        }
        cfg_path = write_config(tmp_path, doc)
        out = tmp_path / "out"
        assert main(["simulate-exact", "--config", str(cfg_path), "--out", str(out)]) == 0
        report = sp.RunReport.load(out / "report.json")
        assert report.engine == "exact"
        assert report.probability(0) == pytest.approx(0.5, abs=0.01)

    def test_classical_runs_protocol_file(self, tmp_path):
        chain = sp.ChainConfig(n_qubits=2, larmor_spacing=5.0, base_larmor=8.0)
        nu = sp.transition_frequency(0, 1, chain)
        proto = sp.Protocol(
            pulses=(sp.Pulse(frequency=nu, rabi=0.5, duration=math.pi / 0.5),),
            gate="x",
        )
        proto.save(tmp_path / "protocol.json")
        doc = {
            "version": 1,
            "chain": {"n_qubits": 2, "larmor_spacing": 5.0, "base_larmor": 8.0},
            "protocol_file": "protocol.json",
        }
        cfg_path = write_config(tmp_path, doc)
        out = tmp_path / "out"
        assert main(["classical", "--config", str(cfg_path), "--out", str(out)]) == 0
        report = sp.RunReport.load(out / "report.json")
        assert report.engine == "classical"
        # transfer is complete up to non-resonant leakage, which is sizable
        # at this deliberately small spacing
        assert report.probability(2) == pytest.approx(1.0, abs=0.02)


class TestDesign:
    def test_large_chain_tenth_revolution(self, tmp_path):
        doc = {
            "version": 1,
            "chain": {"n_qubits": 1000, "larmor_spacing": 100.0},
            "gate": {"type": "cn", "k": 10},
        }
        cfg_path = write_config(tmp_path, doc)
        out = tmp_path / "out"
        assert main(["design", "--config", str(cfg_path), "--out", str(out)]) == 0
        proto = sp.Protocol.load(out / "protocol.json")
        assert len(proto) == 1 + 2 * 1000 - 3
        assert abs(proto.pulses[1].rabi - 0.1) < 2e-4


class TestSweep:
    def test_writes_regions_and_intervals(self, tmp_path):
        doc = base_config(n=10)
        doc["sweep"] = {
            "spacings": {"start": 100.0, "stop": 1000.0, "points": 3, "scale": "log"},
            "rabis": {"start": 0.19, "stop": 0.21, "points": 41},
            "threshold": 1e-4,
        }
        cfg_path = write_config(tmp_path, doc)
        out = tmp_path / "out"
        assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
        csv_lines = (out / "regions.csv").read_text().strip().split("\n")
        assert csv_lines[0] == "larmor_spacing,rabi,error_probability,accepted"
        assert len(csv_lines) == 1 + 3 * 41
        intervals = json.loads((out / "intervals.json").read_text())
        assert len(intervals) == 3


class TestCompare:
    def test_paired_values(self, tmp_path):
        doc = {
            "version": 1,
            "chain": {"n_qubits": 4, "larmor_spacing": 100.0},
            "gate": {"type": "cn", "k": 3, "equal_epsilon": True},
            "compare": {"vary": "spacing", "values": [100.0, 300.0]},
        }
        cfg_path = write_config(tmp_path, doc)
        out = tmp_path / "out"
        assert main(["compare", "--config", str(cfg_path), "--out", str(out)]) == 0
        lines = (out / "compare.csv").read_text().strip().split("\n")
        assert lines[0] == "spacing,p_exact,p_formula"
        assert len(lines) == 3
        for line in lines[1:]:
            _, p_exact, p_formula = (float(v) for v in line.split(","))
            assert 0 <= p_exact < 1e-3
            assert 0 <= p_formula < 1e-3


class TestAnalyze:
    def test_bands_profiles_and_phase(self, tmp_path):
        cfg_path = write_config(tmp_path, base_config(report={"trace": True}))
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
        analysis = tmp_path / "analysis"
        assert main([
            "analyze", "--report", str(out / "report.json"),
            "--phase-with", str(out / "report.json"),
            "--out", str(analysis),
        ]) == 0
        assert (analysis / "unwanted.csv").exists()
        assert (analysis / "bands.json").exists()
        assert (analysis / "profiles.csv").exists()
        phase = json.loads((analysis / "phase.json").read_text())
        assert phase["deviation_radians"] == 0.0
