"""Command-line front end: config handling, outputs, exit codes."""

import json
import math

import numpy as np
import pytest

from spectral_qpe import cli
from spectral_qpe.phase_estimation import phase_to_energy


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


DIAG_I = {  # diag(1, i): eigenphases 0 and pi/2
    "problem": "explicit_unitary",
    "unitary": [[1, [0, 0]], [0, [0, 1]]],
}


def read_rows(path):
    header, *rows = path.read_text().strip().split("\n")
    return header, [r.split(",") for r in rows]


class TestSolve:
    def test_writes_histogram_and_result(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfg = dict(DIAG_I, m_index=2, time=1.0, trials=64, seed=1,
                   guess={"amplitudes": [0, [0, 1]]}, out="run1")
        assert cli.main(["solve", "--config", write_config(tmp_path, cfg)]) == 0

        header, rows = read_rows(tmp_path / "run1.histogram.csv")
        assert header == "bin,phase_radians,energy,probability,counts"
        assert len(rows) == 4
        assert [int(r[0]) for r in rows] == [0, 1, 2, 3]
        assert sum(int(r[4]) for r in rows) == 64
        assert float(rows[1][2]) == pytest.approx(phase_to_energy(math.pi / 2, 1.0))

        record = json.loads((tmp_path / "run1.result.json").read_text())
        assert record["command"] == "solve"
        assert record["dominant"]["bin"] == 1
        assert record["dominant"]["counts"] == 64
        assert record["dominant"]["probability"] == 1.0
        assert record["dominant"]["eigenvector_fidelity"] is None  # no oracle here
        assert record["peaks"] == [record["dominant"]]
        out = capsys.readouterr().out
        assert "bin 1:" in out
        assert "wrote run1.histogram.csv and run1.result.json" in out

    def test_dominant_found_even_below_threshold(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        # one trial: default threshold max(0.05, 4/sqrt(1)) = 4 suppresses all
        # peaks, but solve still reports the observed bin
        cfg = dict(DIAG_I, m_index=2, time=1.0, trials=1, seed=0, out="one")
        assert cli.main(["solve", "--config", write_config(tmp_path, cfg)]) == 0
        record = json.loads((tmp_path / "one.result.json").read_text())
        assert record["dominant"]["counts"] == 1

    def test_flag_overrides_land_in_resolved_config(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = dict(DIAG_I, m_index=2, time=1.0, trials=3, seed=9, out="ov")
        path = write_config(tmp_path, cfg)
        assert cli.main(["solve", "--config", path, "--seed", "5",
                         "--trials", "7", "--index-qubits", "3"]) == 0
        record = json.loads((tmp_path / "ov.result.json").read_text())
        resolved = record["config"]
        assert resolved["seed"] == 5
        assert resolved["trials"] == 7
        assert resolved["m_index"] == 3
        assert "out" not in resolved
        assert "threads" not in resolved


class TestDeterminism:
    CFG = {
        "problem": "tfim", "sites": 2, "coupling": 1.1, "field": 0.4,
        "m_index": 3, "time": 0.5, "trials": 999, "seed": 42,
    }

    def run(self, tmp_path, out, extra=()):
        cfg = dict(self.CFG, out=str(tmp_path / out))
        path = write_config(tmp_path, cfg, name=f"{out}.json")
        assert cli.main(["spectrum", "--config", path, *extra]) == 0
        return (
            (tmp_path / f"{out}.histogram.csv").read_bytes(),
            (tmp_path / f"{out}.result.json").read_bytes(),
        )

    def test_reruns_are_byte_identical(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert self.run(tmp_path, "a") == self.run(tmp_path, "b")

    def test_thread_count_is_content_neutral(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        serial = self.run(tmp_path, "t1", ("--threads", "1"))
        threaded = self.run(tmp_path, "t4", ("--threads", "4"))
        assert serial == threaded


class TestSpectrum:
    def test_two_peak_weights(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = dict(
            DIAG_I, m_index=2, time=1.0, trials=4000, seed=11, threshold=0.1,
            guess={"amplitudes": [0.5, [math.sqrt(0.75), 0]]}, out="sp",
        )
        assert cli.main(["spectrum", "--config", write_config(tmp_path, cfg)]) == 0
        record = json.loads((tmp_path / "sp.result.json").read_text())
        assert [p["bin"] for p in record["peaks"]] == [1, 0]  # descending weight
        for peak, want in zip(record["peaks"], (0.75, 0.25)):
            sigma = math.sqrt(want * (1 - want) / 4000)
            assert abs(peak["probability"] - want) <= 3 * sigma

    def test_threshold_above_one_reports_no_peaks(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = dict(DIAG_I, m_index=2, time=1.0, trials=16, seed=2,
                   threshold=1.1, out="none")
        assert cli.main(["spectrum", "--config", write_config(tmp_path, cfg)]) == 0
        record = json.loads((tmp_path / "none.result.json").read_text())
        assert record["peaks"] == []
        assert record["dominant"]["counts"] > 0

    def test_grid_problem_with_trotter_slices(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = {
            "problem": "grid", "system_qubits": 2, "potential": "constant:0.3",
            "mass": 1.0, "m_index": 3, "time": 0.5, "slices": 8,
            "trials": 50, "seed": 7, "out": "grid",
        }
        assert cli.main(["spectrum", "--config", write_config(tmp_path, cfg)]) == 0
        _, rows = read_rows(tmp_path / "grid.histogram.csv")
        assert sum(int(r[4]) for r in rows) == 50


class TestConfigRejections:
    def check(self, tmp_path, capsys, cfg, needle, command="solve"):
        code = cli.main([command, "--config", write_config(tmp_path, cfg)])
        assert code == 2
        err = capsys.readouterr().err
        assert needle in err
        return err

    def test_unknown_key_is_named(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfg = dict(DIAG_I, m_index=2, time=1.0, trails=7)
        self.check(tmp_path, capsys, cfg, 'unknown key "trails"')

    def test_register_cap_is_cited(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfg = {"problem": "tfim", "sites": 2, "m_index": 25, "time": 1.0}
        err = self.check(tmp_path, capsys, cfg, "26")
        assert "27" in err

    def test_zero_time(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfg = dict(DIAG_I, m_index=2, time=0.0)
        self.check(tmp_path, capsys, cfg, 'key "time"')

    def test_slices_meaningless_for_explicit_unitary(self, tmp_path, monkeypatch,
                                                     capsys):
        monkeypatch.chdir(tmp_path)
        cfg = dict(DIAG_I, m_index=2, time=1.0, slices=4)
        self.check(tmp_path, capsys, cfg, 'key "slices"')

    def test_nonpositive_threshold(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfg = dict(DIAG_I, m_index=2, time=1.0, threshold=-0.5)
        self.check(tmp_path, capsys, cfg, 'key "threshold"')

    def test_missing_config_file(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        assert cli.main(["solve", "--config", str(tmp_path / "nope.json")]) == 2
        assert "cannot read config" in capsys.readouterr().err

    def test_bad_unitary_matrix_entry(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfg = {"problem": "explicit_unitary", "unitary": [[1, "x"], [0, 1]],
               "m_index": 2, "time": 1.0}
        self.check(tmp_path, capsys, cfg, '[re, im]')

    def test_failed_run_leaves_no_files(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfg = dict(DIAG_I, m_index=2, time=1.0, threshold=-1.0, out="ghost")
        self.check(tmp_path, capsys, cfg, "threshold")
        assert list(tmp_path.glob("ghost*")) == []

    def test_invalid_log_level_env(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("SPECTRAL_QPE_LOG", "loud")
        cfg = dict(DIAG_I, m_index=2, time=1.0)
        assert cli.main(["solve", "--config", write_config(tmp_path, cfg)]) == 2
        assert "SPECTRAL_QPE_LOG" in capsys.readouterr().err


class TestTrotterBench:
    X_PLUS_Z = {
        "problem": "explicit_terms", "system_qubits": 1,
        "terms": [
            {"support": [0], "matrix": [[0, 1], [1, 0]]},
            {"support": [0], "matrix": [[1, 0], [0, -1]]},
        ],
    }

    def test_error_sweep_halves_per_doubling(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = dict(self.X_PLUS_Z, time=1.0, slice_sweep=[16, 32, 64], out="xz")
        assert cli.main(["trotter-bench", "--config",
                         write_config(tmp_path, cfg)]) == 0
        header, rows = read_rows(tmp_path / "xz.trotter.csv")
        assert header == "r,operator_error,wall_seconds"
        assert [int(r[0]) for r in rows] == [16, 32, 64]
        errors = [float(r[1]) for r in rows]
        assert 0.4 <= errors[1] / errors[0] <= 0.6
        assert 0.4 <= errors[2] / errors[1] <= 0.6
        assert all(float(r[2]) >= 0 for r in rows)

    def test_commuting_terms_are_exact_at_one_slice(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = {
            "problem": "explicit_terms", "system_qubits": 2,
            "terms": [
                {"support": [0], "matrix": [[1, 0], [0, -1]]},
                {"support": [1], "matrix": [[1, 0], [0, -1]]},
            ],
            "time": 0.9, "slice_sweep": [1, 4], "out": "zz",
        }
        assert cli.main(["trotter-bench", "--config",
                         write_config(tmp_path, cfg)]) == 0
        _, rows = read_rows(tmp_path / "zz.trotter.csv")
        assert all(float(r[1]) <= 1e-9 for r in rows)

    def test_rejects_explicit_unitary(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfg = dict(DIAG_I, time=1.0, slice_sweep=[1, 2])
        assert cli.main(["trotter-bench", "--config",
                         write_config(tmp_path, cfg)]) == 2
        assert "Hamiltonian-bearing" in capsys.readouterr().err

    def test_rejects_non_increasing_sweep(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfg = dict(self.X_PLUS_Z, time=1.0, slice_sweep=[8, 8])
        assert cli.main(["trotter-bench", "--config",
                         write_config(tmp_path, cfg)]) == 2
        assert "strictly increasing" in capsys.readouterr().err


class TestResources:
    def run(self, capsys, *argv):
        code = cli.main(["resources", *argv])
        captured = capsys.readouterr()
        return code, captured.out if code == 0 else captured.err

    def total_line(self, out):
        return [line for line in out.splitlines() if line.startswith("total")][0]

    def test_plain_budget(self, capsys):
        code, out = self.run(capsys, "--particles", "5",
                             "--qubits-per-particle", "10",
                             "--index-qubits", "7", "--scratch-qubits", "3")
        assert code == 0
        assert self.total_line(out).split() == ["total", "60"]

    def test_pair_promotion_budget(self, capsys):
        code, out = self.run(capsys, "--particles", "5",
                             "--qubits-per-particle", "10",
                             "--index-qubits", "7", "--scratch-qubits", "3",
                             "--position-qubits-per-particle", "30",
                             "--pair-in-position-space")
        assert code == 0
        assert self.total_line(out).split() == ["total", "100"]
        assert "interacting_pair_in_position_space yes" in " ".join(out.split())

    def test_minimal_budget(self, capsys):
        code, out = self.run(capsys, "--particles", "1",
                             "--qubits-per-particle", "1",
                             "--index-qubits", "1", "--scratch-qubits", "0")
        assert code == 0
        assert self.total_line(out).split() == ["total", "2"]

    def test_negative_count_rejected(self, capsys):
        code, err = self.run(capsys, "--particles", "2",
                             "--qubits-per-particle", "3", "--index-qubits", "-1")
        assert code == 2
        assert "index_qubits" in err


class TestOracleCheck:
    # asymmetric single-qubit Hamiltonian: trace nonzero, so the readout
    # distribution is not mirror symmetric and a reversed transform shows up
    TILTED = {
        "problem": "explicit_terms", "system_qubits": 1,
        "terms": [{"support": [0], "matrix": [[0.7, 0.9], [0.9, -0.1]]}],
    }

    def test_passes_on_spin_chain(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfg = {"problem": "tfim", "sites": 2, "coupling": 1.3, "field": 0.9,
               "m_index": 4, "time": 0.6}
        assert cli.main(["oracle-check", "--config",
                         write_config(tmp_path, cfg)]) == 0
        out = capsys.readouterr().out
        assert "oracle check passed" in out
        assert "distribution check" in out
        assert "eigenvector-fidelity audit" in out

    def test_corrupted_readout_is_caught(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfg = dict(self.TILTED, m_index=3, time=0.8)
        path = write_config(tmp_path, cfg)
        assert cli.main(["oracle-check", "--config", path]) == 0
        capsys.readouterr()
        assert cli.main(["oracle-check", "--config", path,
                         "--corrupt-qft-sign"]) == 4
        err = capsys.readouterr().err
        assert "oracle check failed" in err
        assert "distribution check" in err

    def test_rejects_explicit_unitary(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfg = dict(DIAG_I, m_index=2, time=1.0)
        assert cli.main(["oracle-check", "--config",
                         write_config(tmp_path, cfg)]) == 2
        assert "Hamiltonian-bearing" in capsys.readouterr().err


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        cli.main([])
    assert excinfo.value.code == 2
