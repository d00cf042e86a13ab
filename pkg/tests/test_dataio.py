import json

import numpy as np
import pytest

from chainmix import (
    Responsibilities,
    TrajectoryDataset,
    ValidationError,
    random_mixture_params,
    sufficient_stats,
    vem_fit,
    VemConfig,
)
from chainmix import dataio


class TestTrajectoryFiles:
    def test_round_trip(self, tmp_path):
        ds = TrajectoryDataset(([0, 1, 2], [2, 2], [1]), s=3)
        path = tmp_path / "traj.txt"
        dataio.write_trajectories(path, ds)
        loaded = dataio.read_trajectories(path)
        assert loaded.s == 3
        assert loaded.n == 3
        for a, b in zip(loaded.trajectories, ds.trajectories):
            assert np.array_equal(a, b)

    def test_one_based_round_trip(self, tmp_path):
        ds = TrajectoryDataset(([0, 1], [1, 0]), s=2)
        path = tmp_path / "traj.txt"
        dataio.write_trajectories(path, ds, one_based=True)
        raw = path.read_text().splitlines()
        assert raw[1] == "1 2"  # states shifted up on disk
        loaded = dataio.read_trajectories(path, one_based=True)
        assert np.array_equal(loaded.trajectories[0], [0, 1])

    def test_comma_separated_and_header(self, tmp_path):
        path = tmp_path / "traj.txt"
        path.write_text("# s=4\n0,1,2\n3 3 0\n")
        loaded = dataio.read_trajectories(path)
        assert loaded.s == 4
        assert np.array_equal(loaded.trajectories[0], [0, 1, 2])
        assert np.array_equal(loaded.trajectories[1], [3, 3, 0])

    def test_state_count_inferred_without_header(self, tmp_path):
        path = tmp_path / "traj.txt"
        path.write_text("0 2\n1 0\n")
        assert dataio.read_trajectories(path).s == 3

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "traj.txt"
        path.write_text("0 1\noops\n")
        with pytest.raises(ValidationError, match=":2"):
            dataio.read_trajectories(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "traj.txt"
        path.write_text("\n")
        with pytest.raises(ValidationError):
            dataio.read_trajectories(path)


class TestLabelFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "labels.txt"
        dataio.write_labels(path, [0, 2, 1])
        assert np.array_equal(dataio.read_labels(path), [0, 2, 1])

    def test_one_based(self, tmp_path):
        path = tmp_path / "labels.txt"
        dataio.write_labels(path, [0, 1], one_based=True)
        assert path.read_text() == "1\n2\n"
        assert np.array_equal(dataio.read_labels(path, one_based=True), [0, 1])


class TestParamsJson:
    def test_round_trip(self, tmp_path):
        params = random_mixture_params(3, 4, seed=1)
        path = tmp_path / "model.json"
        dataio.write_params(path, params)
        loaded = dataio.read_params(path)
        assert loaded.k == 3 and loaded.s == 4
        assert np.allclose(loaded.mu, params.mu)
        assert np.allclose(loaded.nu, params.nu)
        assert np.allclose(loaded.P, params.P)

    def test_declared_shape_mismatch(self, tmp_path):
        params = random_mixture_params(2, 2, seed=2)
        path = tmp_path / "model.json"
        dataio.write_params(path, params)
        payload = json.loads(path.read_text())
        payload["k"] = 5
        path.write_text(json.dumps(payload))
        with pytest.raises(ValidationError):
            dataio.read_params(path)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"k": 1, "s": 1, "mu": [1.0]}))
        with pytest.raises(ValidationError, match="nu"):
            dataio.read_params(path)


class TestPosteriorJson:
    def test_round_trip(self, tmp_path):
        params = random_mixture_params(2, 2, seed=3)
        from chainmix import sample_mixture
        data, _ = sample_mixture(params, 10, 8, seed=4)
        stats = sufficient_stats(data)
        from chainmix import sample_simplex_rows
        fit, post = vem_fit(stats, sample_simplex_rows(10, 3, seed=5),
                            VemConfig(k_max=3))
        path = tmp_path / "posterior.json"
        dataio.write_posterior(path, post, fit.objective_trace)
        loaded, trace = dataio.read_posterior(path)
        assert np.allclose(loaded.n_hat, post.n_hat)
        assert np.allclose(loaded.n_ialpha_hat, post.n_ialpha_hat)
        assert np.allclose(trace, fit.objective_trace)
        payload = json.loads(path.read_text())
        assert set(payload) == {"N_hat", "N_i_hat", "N_ialpha_hat",
                                "responsibilities", "elbo_trace"}


class TestTablesAndPoints:
    def test_points_round_trip(self, tmp_path):
        pts = np.array([[0.5, -1.25], [3.0, 4.5]])
        path = tmp_path / "points.csv"
        dataio.write_points_csv(path, pts)
        assert np.allclose(dataio.read_points_csv(path), pts)

    def test_points_dimension_mismatch(self, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(ValidationError):
            dataio.read_points_csv(path)

    def test_kl_report_infinities_are_json_safe(self, tmp_path):
        from chainmix.theory import KlReport
        report = KlReport(pairwise=np.array([[0.0, np.inf], [1.0, 0.0]]),
                          rates=np.array([[0.0, 2.0], [np.inf, 0.0]]),
                          bound=0.125, horizon=3)
        path = tmp_path / "kl.json"
        dataio.write_kl_report(path, report)
        payload = json.loads(path.read_text())  # strict JSON must parse
        assert payload["pairwise"][0][1] == "inf"
        assert payload["bound"] == 0.125

    def test_table_csv_and_json(self, tmp_path):
        header = ["a", "b"]
        rows = [[1, 2.5], [3, np.inf]]
        dataio.write_table(tmp_path / "t.csv", header, rows, fmt="csv")
        dataio.write_table(tmp_path / "t.json", header, rows, fmt="json")
        assert (tmp_path / "t.csv").read_text().splitlines()[0] == "a,b"
        payload = json.loads((tmp_path / "t.json").read_text())
        assert payload[1]["b"] == "inf"
