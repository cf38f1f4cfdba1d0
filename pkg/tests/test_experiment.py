"""
Tests for experiment sweeps, aggregation and result files.
"""

import json
import math

import pandas as pd
import pytest
from jsonschema import validate

from secure_cwpcn.config.settings import ExperimentSpec
from secure_cwpcn.errors import InfeasibleProblemError
from secure_cwpcn.harness.experiment import (
    RESULT_COLUMNS,
    config_hash,
    load_manifest_schema,
    run_experiment,
)


@pytest.fixture
def quick_spec():
    return ExperimentSpec(
        name="quick",
        algorithms=["greedy", "unknown_csi", "no_coop_baseline"],
        axis="delta_eps",
        values=[0.0, 0.1],
        states=8,
        seed=5,
    )


@pytest.fixture
def quick_config(unit_config):
    return unit_config.with_updates(solver={"check_feasibility": False})


def _timeless(frame: pd.DataFrame) -> pd.DataFrame:
    return frame.drop(columns=["wall_time"])


@pytest.mark.unit
class TestConfigHash:
    """Test cases for config hashing."""

    def test_stable_and_hex(self, unit_config):
        """Test that the hash is a 64-character hex digest and repeatable."""
        digest = config_hash(unit_config)
        assert len(digest) == 64
        assert all(c in "0123456789abcdef" for c in digest)
        assert config_hash(unit_config.with_updates()) == digest

    def test_changes_with_config(self, unit_config):
        """Test that any field change changes the hash."""
        assert config_hash(unit_config) != config_hash(unit_config.with_updates(seed=12))
        assert config_hash(unit_config) != config_hash(
            unit_config.with_updates(solver={"eta0": 1.0})
        )


@pytest.mark.integration
class TestRunExperiment:
    """Test cases for run_experiment."""

    def test_frame_layout(self, quick_spec, quick_config):
        """Test one row per (algorithm, value) with the frozen columns."""
        frame = run_experiment(quick_spec, quick_config).frame
        assert list(frame.columns) == RESULT_COLUMNS
        assert len(frame) == 6
        assert set(frame["status"]) == {"ok"}
        assert set(frame["algorithm"]) == set(quick_spec.algorithms)
        assert (frame["seed"] == 5).all()
        assert (frame["mode"] == "noncollusive").all()

    def test_algorithms_share_the_ensemble(self, quick_spec, quick_config):
        """Test that every algorithm sees the same eps_p at a sweep value."""
        frame = run_experiment(quick_spec, quick_config).frame
        for _, group in frame.groupby("value"):
            assert group["eps_p"].nunique() == 1
            assert group["config_hash"].nunique() == 1

    def test_baseline_row(self, quick_spec, quick_config):
        """Test that the reference curve has no secondary rate and eps_ps = eps_p."""
        frame = run_experiment(quick_spec, quick_config).frame
        baseline = frame[frame["algorithm"] == "no_coop_baseline"]
        assert (baseline["ergodic_rate"] == 0.0).all()
        assert (baseline["eps_ps"] == baseline["eps_p"]).all()

    def test_deterministic(self, quick_spec, quick_config):
        """Test that identical inputs reproduce identical rows."""
        first = run_experiment(quick_spec, quick_config).frame
        second = run_experiment(quick_spec, quick_config).frame
        pd.testing.assert_frame_equal(_timeless(first), _timeless(second))

    def test_infeasible_alg1(self, quick_config, mocker):
        """Test that an unreachable reduction yields an infeasible row, not an exception."""
        mocker.patch(
            "secure_cwpcn.harness.experiment.run_dual",
            side_effect=InfeasibleProblemError("unreachable", eps_p=0.4, eps_0=-0.6),
        )
        spec = ExperimentSpec(algorithms=["alg1"], axis="delta_eps", values=[1.0], states=8)
        result = run_experiment(spec, quick_config)
        row = result.frame.iloc[0]
        assert row["status"] == "infeasible"
        assert row["eps_p"] == 0.4
        assert math.isnan(row["ergodic_rate"])
        assert result.dual_logs == {}
        assert result.manifest["rows"][0]["residual"] is None

    def test_alg1_dual_log(self, quick_config):
        """Test that a feasible alg1 run records its dual iterations."""
        spec = ExperimentSpec(algorithms=["alg1"], axis="delta_eps", values=[0.0], states=6)
        result = run_experiment(spec, quick_config)
        assert result.frame.iloc[0]["status"] == "ok"
        assert list(result.dual_logs) == ["dual_alg1_noncollusive_delta_eps_0_r0.csv"]
        log = result.dual_logs["dual_alg1_noncollusive_delta_eps_0_r0.csv"]
        assert len(log) == result.frame.iloc[0]["dual_iterations"]

    def test_integer_axis(self, quick_config):
        """Test a sweep over the number of secondary users."""
        spec = ExperimentSpec(
            algorithms=["unknown_csi"], axis="num_sus", values=[1, 2], states=4
        )
        frame = run_experiment(spec, quick_config).frame
        assert frame["value"].tolist() == [1.0, 2.0]
        assert frame["config_hash"].nunique() == 2

    def test_replicates(self, quick_config):
        """Test that replicates pool their states into one row."""
        spec = ExperimentSpec(
            algorithms=["greedy"], values=[0.0], states=4, replicates=2
        )
        row = run_experiment(spec, quick_config).frame.iloc[0]
        assert row["replicates"] == 2
        assert row["ergodic_rate_se"] >= 0.0

    def test_write(self, quick_spec, quick_config, tmp_path):
        """Test the result CSV and the schema-valid manifest on disk."""
        run_experiment(quick_spec, quick_config, output_dir=tmp_path)

        frame = pd.read_csv(tmp_path / "results.csv")
        assert list(frame.columns) == RESULT_COLUMNS
        with open(tmp_path / "manifest.json", encoding="utf-8") as f:
            manifest = json.load(f)
        validate(instance=manifest, schema=load_manifest_schema())
        assert manifest["seed"] == 5
        assert len(manifest["rows"]) == 6

    def test_nothing_written_without_output_dir(self, quick_spec, quick_config, tmp_path, monkeypatch):
        """Test that no files appear when no output directory is given."""
        monkeypatch.chdir(tmp_path)
        run_experiment(quick_spec, quick_config)
        assert list(tmp_path.iterdir()) == []

    @pytest.mark.slow
    def test_worker_count_does_not_change_results(self, quick_spec, quick_config):
        """Test that process-parallel solves give the same rows as serial ones."""
        serial = run_experiment(quick_spec, quick_config, workers=1).frame
        parallel = run_experiment(quick_spec, quick_config, workers=2).frame
        pd.testing.assert_frame_equal(_timeless(serial), _timeless(parallel))

    def test_wall_time_per_row(self, quick_spec, quick_config):
        """Test that every row and its manifest entry carry the same wall time."""
        result = run_experiment(quick_spec, quick_config)
        times = result.frame["wall_time"].tolist()
        assert all(t >= 0.0 for t in times)
        assert times == [row["wall_time"] for row in result.manifest["rows"]]


@pytest.mark.integration
class TestModeComparison:
    """Test cases for sweeps that pair eavesdropper models."""

    @pytest.fixture
    def paired_spec(self):
        return ExperimentSpec(
            name="paired",
            algorithms=["greedy", "no_coop_baseline"],
            modes=["noncollusive", "collusive"],
            axis="num_eavs",
            values=[2],
            states=10,
            seed=3,
        )

    def test_one_row_per_mode(self, paired_spec, quick_config):
        """Test that each algorithm gets a row for each listed mode."""
        frame = run_experiment(paired_spec, quick_config).frame
        assert len(frame) == 4
        assert sorted(frame["mode"].unique()) == ["collusive", "noncollusive"]
        assert frame.groupby("mode")["config_hash"].nunique().tolist() == [1, 1]
        assert frame["config_hash"].nunique() == 2

    def test_collusion_never_lowers_no_cooperation_outage(self, paired_spec, quick_config):
        """Test that colluding eavesdroppers see the same ensemble and at least as much outage."""
        frame = run_experiment(paired_spec, quick_config).frame
        baseline = frame[frame["algorithm"] == "no_coop_baseline"].set_index("mode")
        assert baseline.loc["collusive", "eps_p"] >= baseline.loc["noncollusive", "eps_p"]

    def test_mode_in_dual_log_names(self, quick_config):
        """Test that alg1 logs of different modes do not overwrite each other."""
        spec = ExperimentSpec(
            algorithms=["alg1"],
            modes=["noncollusive", "collusive"],
            values=[0.0],
            states=4,
        )
        result = run_experiment(spec, quick_config)
        assert sorted(result.dual_logs) == [
            "dual_alg1_collusive_delta_eps_0_r0.csv",
            "dual_alg1_noncollusive_delta_eps_0_r0.csv",
        ]
        assert [row["mode"] for row in result.manifest["rows"]] == ["noncollusive", "collusive"]

    def test_repeated_modes_rejected(self):
        """Test that listing a mode twice is a validation error."""
        with pytest.raises(ValueError):
            ExperimentSpec(modes=["collusive", "collusive"])
