"""
Tests for CLI module
What to learn here: Driving a command-line entry point in-process, checking
exit codes, and asserting byte-identical reruns.
"""

import json
import tempfile
from pathlib import Path
from unittest.mock import patch

import pytest
import pandas as pd

from src.cli import RunConfig, apply_overrides, load_config, main
from src.errors import ConfigError, NumericalError


class TestConfig:
    """Config parsing and overrides"""

    def test_dotted_overrides(self):
        """--a.b=value sets nested keys with JSON-typed values"""
        raw = apply_overrides({"chain": {"n_sites": 3}}, ["--chain.n_sites=6", "--medium.kind=Thermal", "--medium.beta=0.5"])
        assert raw["chain"]["n_sites"] == 6
        assert raw["medium"] == {"kind": "Thermal", "beta": 0.5}

    def test_malformed_override(self):
        """Overrides need --key=value"""
        with pytest.raises(ConfigError):
            apply_overrides({}, ["chain.n_sites"])

    def test_unknown_key_rejected(self):
        """Unknown keys fail validation"""
        with pytest.raises(ConfigError):
            load_config("run", None, ["--chain.model=IsingEngineered", "--chain.n_sites=3", "--colour=blue"])

    def test_round_trip(self):
        """Serializing a parsed config reproduces it"""
        config = load_config("p00-sweep", None, ["--chain.model=IsingEngineered", "--chain.n_sites=4", "--grid.p00=[0,0.5,1]"])
        again = RunConfig.model_validate(json.loads(config.model_dump_json()))
        assert again == config

    def test_command_mismatch(self):
        """The config document cannot name a different command"""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "run.json"
            path.write_text(json.dumps({"command": "run", "chain": {"model": "XXEngineered", "n_sites": 3}}))
            with pytest.raises(ConfigError):
                load_config("entangle", path, [])


class TestCommands:
    """End-to-end command runs"""

    def setup_method(self):
        """Fresh output directory per test"""
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def teardown_method(self):
        """Remove outputs"""
        self.tmp.cleanup()

    def _run(self, command, *overrides):
        return main([command, f"--output_dir={self.out}", *overrides])

    def test_verify_identities_ising(self):
        """IsingEngineered N=6 passes"""
        assert self._run("verify-identities", "--chain.model=IsingEngineered", "--chain.n_sites=6") == 0
        frame = pd.read_csv(self.out / "verify-identities.csv")
        assert list(frame.columns[:5]) == ["model", "N", "i", "pair", "residual"]
        assert len(frame) == 9

    def test_verify_identities_odd_xx(self):
        """XXEngineered N=7 passes with the odd-N targets"""
        assert self._run("verify-identities", "--chain.model=XXEngineered", "--chain.n_sites=7") == 0

    def test_unattainable_threshold(self):
        """A threshold below the floating-point floor fails with a failure list"""
        code = self._run("verify-identities", "--chain.model=IsingEngineered", "--chain.n_sites=4", "--threshold=1e-16")
        assert code != 0
        failures = json.loads((self.out / "verify-identities_failures.json").read_text())
        assert failures["failures"]

    def test_config_error_exit_code(self):
        """Invalid configs exit with 2"""
        assert self._run("run", "--chain.model=IsingEngineered", "--chain.n_sites=1") == 2
        assert self._run("run", "--chain.model=Heisenberg", "--chain.n_sites=4") == 2

    @pytest.mark.parametrize("command,overrides", [
        ("sweep-medium", ["--chain.model=IsingEngineered", "--chain.n_sites=3", '--grid.media=["Thermal(hot)"]']),
        ("sweep-medium", ["--chain.model=IsingEngineered", "--chain.n_sites=3", '--grid.media=["Vacuum"]']),
        ("sweep-medium", ["--chain.model=XXEngineered", "--chain.n_sites=3", "--grid.n_range=[3,20]"]),
        ("run", ["--chain.model=IsingEngineered", "--chain.n_sites=20"]),
        ("run", ["--chain.model=IsingEngineered", "--chain.n_sites=5", "--medium.kind=ProductZ", '--medium.bits="01"']),
        ("run", ["--chain.model=IsingEngineered", "--chain.n_sites=4", "--medium.kind=ProductStates"]),
        ("run", ["--chain.model=XXEngineered", "--chain.n_sites=4", "--medium.kind=XEigenstates", '--medium.signs="+x"']),
        ("entangle", ["--chain.model=IsingEngineered", "--chain.n_sites=5", '--medium.bits="01"']),
        ("entangle", ["--chain.model=XXEngineered", "--chain.n_sites=4"]),
        ("p00-sweep", ["--chain.model=XXEngineered", "--chain.n_sites=3"]),
        ("homogeneous", ["--chain.model=IsingEngineered", "--chain.n_sites=6"]),
    ])
    def test_invalid_setups_exit_with_config_code(self, command, overrides):
        """Bad media, sizes and model/command pairings are configuration errors"""
        assert self._run(command, *overrides) == 2
        assert not list(self.out.iterdir())

    def test_config_errors_raise_before_running(self):
        """load_config itself rejects what the handlers cannot run"""
        with pytest.raises(ConfigError, match="Thermal"):
            load_config("sweep-medium", None, ["--chain.model=IsingEngineered", "--chain.n_sites=3",
                                               '--grid.media=["Thermal(hot)"]'])
        with pytest.raises(ConfigError, match="QST_DENSE_MAX_QUBITS"):
            load_config("run", None, ["--chain.model=IsingEngineered", "--chain.n_sites=20"])

    def test_numerical_error_exit_code(self):
        """Library failures exit with 3"""
        assert self._run(
            "verify-identities", "--chain.model=XXHomogeneous", "--chain.n_sites=4", "--chain.end_coupling_ratio=0.7"
        ) == 3

    @patch("src.cli.check_swap_identities")
    def test_library_failure_is_logged_not_raised(self, mock_check):
        """A NumericalError inside a handler becomes exit code 3 and writes nothing"""
        mock_check.side_effect = NumericalError("eigendecomposition failed")
        assert self._run("verify-identities", "--chain.model=IsingEngineered", "--chain.n_sites=4") == 3
        assert not (self.out / "verify-identities.csv").exists()
        mock_check.assert_called_once()

    def test_run_maximally_mixed(self):
        """Ising N=5 through a maximally mixed medium: fidelity 1"""
        assert self._run("run", "--chain.model=IsingEngineered", "--chain.n_sites=5", "--medium.kind=MaximallyMixed") == 0
        record = json.loads((self.out / "run.json").read_text())
        assert record["fidelity"] == pytest.approx(1.0, abs=1e-9)
        assert record["conventions"]["heisenberg"] == "U^dag O U"

    def test_homogeneous_summary(self):
        """N=100 with ratio 0.7 reaches the 0.87 estimate"""
        code = self._run(
            "homogeneous", "--chain.model=XXHomogeneous", "--chain.n_sites=100", "--chain.end_coupling_ratio=0.7"
        )
        assert code == 0
        summary = json.loads((self.out / "homogeneous_summary.json").read_text())
        assert summary["avg_fidelity_estimate_max"] >= 0.87
        curve = pd.read_csv(self.out / "homogeneous_curve.csv")
        assert list(curve.columns) == ["t", "abs_f", "avg_fidelity_estimate"]

    def test_entangle(self):
        """Entanglement report for psi = |0>"""
        assert self._run(
            "entangle", "--chain.model=IsingEngineered", "--chain.n_sites=4", "--medium.bits=\"01\"", "--input.theta=0"
        ) == 0
        record = json.loads((self.out / "entangle.json").read_text())
        assert record["ghz_proxy_spin_n_entropy"] == pytest.approx(1.0, abs=1e-9)

    def test_triplet_check(self):
        """The Ising triplet appears in the CSV"""
        assert self._run("triplet-check", "--chain.model=IsingEngineered", "--chain.n_sites=3") == 0
        frame = pd.read_csv(self.out / "triplet-check.csv", keep_default_na=False)
        assert ((frame["B"] == "Z") & (frame["C"] == "I") & (frame["D"] == "Z")).any()

    def test_p00_sweep(self):
        """The squared law wins"""
        assert self._run("p00-sweep", "--chain.model=IsingEngineered", "--chain.n_sites=3") == 0
        frame = pd.read_csv(self.out / "p00-sweep.csv")
        assert (frame["winner"] == "squared").all()

    def test_byte_identical_reruns(self):
        """Same config and seed give byte-identical files"""
        args = ("sweep-medium", "--chain.model=XXEngineered", "--chain.n_sites=3",
                "--grid.pure_inputs=2", "--grid.mixed_inputs=1", "--seed=11")
        assert self._run(*args) == 0
        first = (self.out / "sweep-medium.csv").read_bytes()
        assert self._run(*args) == 0
        assert (self.out / "sweep-medium.csv").read_bytes() == first

    def test_numeric_bits_override(self):
        """Unquoted bitstrings reach the medium as text"""
        config = load_config("entangle", None, ["--chain.model=IsingEngineered", "--chain.n_sites=4", "--medium.bits=10"])
        assert config.medium.bits == "10"

    def test_homogeneous_run_uses_optimal_time(self):
        """The homogeneous chain runs at its optimal transfer time"""
        code = self._run(
            "run", "--chain.model=XXHomogeneous", "--chain.n_sites=4", "--chain.end_coupling_ratio=0.7",
            "--grid.t_max=20", "--grid.grid_points=2001", "--n_outcome=1", "--m1_outcome=1",
        )
        assert code == 0
        record = json.loads((self.out / "run.json").read_text())
        assert record["conventions"]["correction_rule"] == "closed-form-unvalidated"
        assert 0 < record["time"] <= 20

    def test_sampled_run_replays(self):
        """Sampled outcomes are fixed by the seed"""
        args = ("run", "--chain.model=XXEngineered", "--chain.n_sites=4", "--seed=3")
        assert self._run(*args) == 0
        first = (self.out / "run.json").read_bytes()
        assert self._run(*args) == 0
        assert (self.out / "run.json").read_bytes() == first


if __name__ == "__main__":
    pytest.main([__file__])
