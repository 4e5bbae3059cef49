import numpy as np
import pytest

from reflectwalk import (
    NoReflectionsObserved,
    SimConfig,
    estimate_nu,
    estimate_pxy,
    ladder_laws,
    n_step_table,
    simulate,
    stationary_nu,
)


class TestSimulate:
    def test_one_step_law(self, law_a):
        config = SimConfig(law_a, 0, 1, 100_000, 42)
        result = simulate(config)
        p1 = result.terminal_prob(1)
        stderr = np.sqrt((2 / 3) * (1 / 3) / config.paths)
        assert abs(p1 - 2 / 3) < 4 * stderr

    def test_reflection_targets_law_a(self, law_a):
        # overshoot bound a = 1: every reflection lands on 1
        result = simulate(SimConfig(law_a, 0, 40, 5000, 9))
        assert result.reflection_target.shape == (1,)
        assert result.reflection_target[0] > 0

    def test_deterministic_replay(self, law_b):
        config = SimConfig(law_b, 2, 25, 1000, 77)
        a = simulate(config)
        b = simulate(config)
        assert np.array_equal(a.terminal, b.terminal)
        assert np.array_equal(a.first_reflection_time, b.first_reflection_time)
        assert np.array_equal(a.reflection_target, b.reflection_target)

    def test_single_path(self, law_a):
        result = simulate(SimConfig(law_a, 0, 10, 1, 5))
        assert result.terminal.sum() == 1

    def test_thread_count_does_not_change_results(self, law_a, monkeypatch):
        config = SimConfig(law_a, 0, 30, 40_000, 11)
        monkeypatch.setenv("REFLECTWALK_THREADS", "1")
        one = simulate(config)
        monkeypatch.setenv("REFLECTWALK_THREADS", "4")
        four = simulate(config)
        assert np.array_equal(one.terminal, four.terminal)
        assert np.array_equal(one.reflection_target, four.reflection_target)

    def test_bad_config_rejected(self, law_a):
        with pytest.raises(ValueError):
            SimConfig(law_a, -1, 5, 10, 0)
        with pytest.raises(ValueError):
            SimConfig(law_a, 0, 5, 0, 0)


class TestEstimatePxy:
    def test_time_zero_indicator(self, law_a):
        est = estimate_pxy(SimConfig(law_a, 3, 0, 500, 1), 3)
        assert est.point == 1.0 and est.stderr == 0.0
        est = estimate_pxy(SimConfig(law_a, 3, 0, 500, 1), 2)
        assert est.point == 0.0 and est.stderr == 0.0

    def test_matches_dp_law_a(self, law_a):
        config = SimConfig(law_a, 0, 50, 200_000, 7)
        exact = n_step_table(law_a, 0, 50)
        for y in (0, 1, 2):
            est = estimate_pxy(config, y)
            assert abs(est.point - exact.prob(50, y)) < 4 * max(est.stderr, 1e-9)

    def test_matches_dp_law_b(self, law_b):
        config = SimConfig(law_b, 0, 30, 200_000, 13)
        exact = n_step_table(law_b, 0, 30)
        for y in (5, 9, 12):
            est = estimate_pxy(config, y)
            assert abs(est.point - exact.prob(30, y)) < 4 * max(est.stderr, 1e-9)

    def test_stderr_formula(self, law_a):
        est = estimate_pxy(SimConfig(law_a, 0, 10, 4000, 3), 1)
        assert est.stderr == pytest.approx(
            np.sqrt(est.point * (1 - est.point) / 4000), rel=1e-12
        )

    def test_coverage_calibration(self, law_a):
        # ~95% of 2-stderr intervals should cover the exact value
        exact = n_step_table(law_a, 0, 20).prob(20, 1)
        hits = 0
        for seed in range(200):
            est = estimate_pxy(SimConfig(law_a, 0, 20, 4000, 1000 + seed), 1)
            if abs(est.point - exact) <= 2 * est.stderr:
                hits += 1
        assert 180 <= hits <= 200


class TestEstimateNu:
    def test_law_a_is_exactly_delta(self, law_a):
        est = estimate_nu(SimConfig(law_a, 0, 2000, 100, 21), burnin=10)
        assert est[1].point == 1.0

    def test_five_point_matches_closed_form(self, law_p5):
        nu, _ = stationary_nu(ladder_laws(law_p5))
        est = estimate_nu(SimConfig(law_p5, 0, 20_000, 300, 2024), burnin=100)
        for w in (1, 2):
            assert abs(est[w].point - nu[w - 1]) < 3 * est[w].stderr

    def test_burnin_insensitive(self, law_p5):
        config = SimConfig(law_p5, 0, 8000, 200, 5)
        a = estimate_nu(config, burnin=0)
        b = estimate_nu(config, burnin=100)
        for w in (1, 2):
            assert abs(a[w].point - b[w].point) < 3 * max(a[w].stderr, b[w].stderr)

    def test_no_reflections_raises(self, law_b):
        # positive drift from far out: no reflection in a short horizon
        with pytest.raises(NoReflectionsObserved):
            estimate_nu(SimConfig(law_b, 500, 10, 50, 3), burnin=0)
