import numpy as np
import pytest

from chainmix import (
    EmConfig,
    NumericalError,
    VemConfig,
    em_fit,
    random_mixture_params,
    sample_mixture,
    sample_simplex_rows,
    multistart_fit,
    sufficient_stats,
    vem_fit,
)
from chainmix.multistart import restart_seed_sequence


@pytest.fixture(scope="module")
def small_problem():
    params = random_mixture_params(2, 3, seed=301)
    data, labels = sample_mixture(params, 25, 15, seed=302)
    return sufficient_stats(data), labels


class TestSampleSimplexRows:
    def test_single_column_is_ones(self):
        r = sample_simplex_rows(5, 1, seed=0)
        assert np.all(r.gamma == 1.0)

    def test_rows_sum_to_one(self):
        r = sample_simplex_rows(200, 7, seed=1)
        assert np.allclose(r.gamma.sum(axis=1), 1.0, atol=1e-12)

    def test_uniform_simplex_moments(self):
        # Monte Carlo check of the first moment of the flat simplex law
        r = sample_simplex_rows(10**5, 3, seed=2)
        means = r.gamma.mean(axis=0)
        assert np.all(np.abs(means - 1 / 3) < 0.005)

    def test_deterministic(self):
        a = sample_simplex_rows(10, 4, seed=3)
        b = sample_simplex_rows(10, 4, seed=3)
        assert np.array_equal(a.gamma, b.gamma)


class TestMultistart:
    def test_single_restart_matches_direct_call(self, small_problem):
        stats, _ = small_problem
        report = multistart_fit(stats, "em", restarts=1, config=EmConfig(k=2),
                                seed=77)
        init = sample_simplex_rows(stats.n, 2, restart_seed_sequence(77, 0))
        direct = em_fit(stats, init)
        assert report.best.objective == direct.objective
        assert np.array_equal(report.best.labels, direct.labels)

        vreport = multistart_fit(stats, "vem", restarts=1,
                                 config=VemConfig(k_max=3), seed=78)
        vinit = sample_simplex_rows(stats.n, 3, restart_seed_sequence(78, 0))
        vdirect, vpost = vem_fit(stats, vinit, VemConfig(k_max=3))
        assert vreport.best.objective == vdirect.objective
        assert np.allclose(vreport.best_posterior.n_hat, vpost.n_hat)

    def test_same_master_seed_bit_identical(self, small_problem):
        stats, labels = small_problem
        a = multistart_fit(stats, "vem", restarts=6, config=VemConfig(k_max=4),
                           seed=5, true_labels=labels)
        b = multistart_fit(stats, "vem", restarts=6, config=VemConfig(k_max=4),
                           seed=5, true_labels=labels)
        assert np.array_equal(a.all_objectives, b.all_objectives)
        assert np.array_equal(a.all_accuracies, b.all_accuracies)
        assert a.seeds == b.seeds
        assert a.best_index == b.best_index
        assert np.array_equal(a.best.responsibilities.gamma,
                              b.best.responsibilities.gamma)

    def test_thread_count_does_not_change_report(self, small_problem):
        stats, _ = small_problem
        serial = multistart_fit(stats, "em", restarts=8, config=EmConfig(k=2),
                                seed=9, threads=1)
        threaded = multistart_fit(stats, "em", restarts=8, config=EmConfig(k=2),
                                  seed=9, threads=4)
        assert np.array_equal(serial.all_objectives, threaded.all_objectives)
        assert serial.best_index == threaded.best_index
        assert serial.best.objective == threaded.best.objective

    def test_prefix_property(self, small_problem):
        stats, _ = small_problem
        few = multistart_fit(stats, "vem", restarts=3, config=VemConfig(k_max=4),
                             seed=11)
        many = multistart_fit(stats, "vem", restarts=9, config=VemConfig(k_max=4),
                              seed=11)
        # nested seed sets: the first runs coincide, so the best can only improve
        assert np.array_equal(few.all_objectives, many.all_objectives[:3])
        assert many.best.objective >= few.best.objective

    def test_best_is_max_objective(self, small_problem):
        stats, labels = small_problem
        report = multistart_fit(stats, "vem", restarts=10,
                                config=VemConfig(k_max=4), seed=13,
                                true_labels=labels)
        assert report.best.objective == np.nanmax(report.all_objectives)
        assert len(report.all_objectives) == 10
        assert report.all_accuracies.shape == (10,)

    def test_unknown_algorithm_rejected(self, small_problem):
        stats, _ = small_problem
        from chainmix import ValidationError
        with pytest.raises(ValidationError):
            multistart_fit(stats, "gibbs", restarts=2, config=EmConfig(k=2), seed=1)
        with pytest.raises(ValidationError):
            multistart_fit(stats, "em", restarts=2, config=VemConfig(k_max=2), seed=1)

    def test_all_failures_aggregate_error(self):
        # inf counts poison every restart; the error lists per-restart failures
        from chainmix.model_core import SufficientStats, Responsibilities
        stats = SufficientStats.__new__(SufficientStats)
        object.__setattr__(stats, "U", np.array([[1.0, 0.0]]))
        object.__setattr__(stats, "V", np.array([[[np.inf, 0.0], [0.0, 0.0]]]))
        with pytest.raises(NumericalError, match="all 3 restarts failed"):
            multistart_fit(stats, "em", restarts=3, config=EmConfig(k=1), seed=15)


def test_hard_instance_objective_accuracy_association():
    # many restarts on one deliberately hard instance: runs reaching higher
    # final objectives should classify at least as well on average
    params = random_mixture_params(10, 7, seed=401)
    data, labels = sample_mixture(params, 100, 50, seed=402)
    stats = sufficient_stats(data)
    report = multistart_fit(stats, "vem", restarts=60,
                            config=VemConfig(k_max=15), seed=403,
                            true_labels=labels)
    objectives = report.all_objectives
    accs = report.all_accuracies
    assert np.nanmax(objectives) > np.nanmin(objectives)
    order = np.argsort(objectives)
    bottom = accs[order[:15]]
    top = accs[order[-15:]]
    assert np.nanmean(top) >= np.nanmean(bottom)
