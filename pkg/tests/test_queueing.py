import io
import math

import numpy as np
import pytest

from evqoe.queueing import (
    ConfidenceInterval,
    Exponential,
    SimConfig,
    daily_arrival_rates,
    erlang_c_delay_probability,
    erlang_c_wait,
    pollaczek_khinchine_wait,
    replicate,
    service_moments,
    simulate,
    simulation_report,
    wait_histogram,
    waiting_stats,
    weekday_profile_from_history,
    weekly_to_daily,
    write_wait_histogram_csv,
)
from evqoe.service_fit import ErlangFit


def erlang_fit(k, rate):
    return ErlangFit(
        shape_k=k, rate=rate, rmse=0.0, sample_mean=k / rate,
        sample_var=k / rate**2, n_samples=1000,
    )


class TestAnalyticOracles:
    def test_erlang_c_single_server_is_rho(self):
        # M/M/1: P(wait) = rho
        assert erlang_c_delay_probability(1, 0.7) == pytest.approx(0.7)

    def test_erlang_c_two_servers_closed_form(self):
        # M/M/2: C = 2 rho^2 / (1 + rho)
        rho = 0.6
        a = 2 * rho
        assert erlang_c_delay_probability(2, a) == pytest.approx(
            2 * rho**2 / (1 + rho)
        )

    def test_erlang_c_wait_mm1(self):
        # M/M/1: Wq = rho / (mu - lambda)
        lam, mu = 0.7, 1.0
        assert erlang_c_wait(1, lam, mu) == pytest.approx(lam / mu / (mu - lam))

    def test_erlang_c_unstable_rejected(self):
        with pytest.raises(ValueError):
            erlang_c_wait(2, 2.0, 1.0)
        with pytest.raises(ValueError):
            erlang_c_delay_probability(2, 2.0)

    def test_pk_matches_mm1(self):
        # With exponential service P-K reduces to the M/M/1 wait
        lam, mu = 0.5, 1.0
        assert pollaczek_khinchine_wait(lam, 1 / mu, 1 / mu**2) == pytest.approx(
            erlang_c_wait(1, lam, mu)
        )

    def test_pk_deterministic_is_half_mm1(self):
        lam = 0.5
        det = pollaczek_khinchine_wait(lam, 1.0, 0.0)
        exp = pollaczek_khinchine_wait(lam, 1.0, 1.0)
        assert det == pytest.approx(exp / 2)

    def test_pk_unstable_rejected(self):
        with pytest.raises(ValueError):
            pollaczek_khinchine_wait(1.0, 1.0, 1.0)


class TestSimulate:
    def test_deterministic_given_seed(self):
        config = SimConfig(0.5, 1, Exponential(1.0), arrivals_per_round=2000, seed=3)
        a, b = simulate(config), simulate(config)
        np.testing.assert_array_equal(a.waiting_times, b.waiting_times)

    def test_zero_arrivals(self):
        result = simulate(SimConfig(0.0, 2, Exponential(1.0), arrivals_per_round=100))
        assert result.mean_wait == 0.0 and result.p_zero_wait == 1.0

    def test_sample_size(self):
        config = SimConfig(0.5, 1, Exponential(1.0), arrivals_per_round=500, warmup_arrivals=50)
        assert simulate(config).waiting_times.size == 500

    def test_unstable_flag(self):
        assert simulate(
            SimConfig(2.0, 1, Exponential(1.0), arrivals_per_round=100)
        ).unstable

    def test_light_traffic_rarely_waits(self):
        result = simulate(SimConfig(0.01, 4, Exponential(1.0), arrivals_per_round=5000))
        assert result.p_zero_wait > 0.99

    def test_mm1_matches_erlang_c(self):
        config = SimConfig(
            0.7, 1, Exponential(1.0), arrivals_per_round=25_000, rounds=30, seed=0
        )
        _, ci = replicate(config)
        analytic = erlang_c_wait(1, 0.7, 1.0)
        assert ci.point == pytest.approx(analytic, rel=0.03)

    def test_mm3_matches_erlang_c(self):
        config = SimConfig(
            2.4, 3, Exponential(1.0), arrivals_per_round=25_000, rounds=30, seed=1
        )
        _, ci = replicate(config)
        analytic = erlang_c_wait(3, 2.4, 1.0)
        assert ci.point == pytest.approx(analytic, rel=0.05)
        assert ci.lower < analytic < ci.upper

    def test_mg1_erlang_matches_pk(self):
        service = erlang_fit(4, 4 / 30.0)  # mean 30 min
        config = SimConfig(
            0.7 / 30.0, 1, service, arrivals_per_round=25_000, rounds=30, seed=2
        )
        mean, var = service_moments(service)
        _, ci = replicate(config)
        assert ci.point == pytest.approx(
            pollaczek_khinchine_wait(config.arrival_rate, mean, var), rel=0.05
        )

    def test_replicate_needs_two_rounds(self):
        with pytest.raises(ValueError):
            replicate(SimConfig(0.5, 1, Exponential(1.0), rounds=1))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SimConfig(-1.0, 1, Exponential(1.0))
        with pytest.raises(ValueError):
            SimConfig(1.0, 0, Exponential(1.0))


class TestHelpers:
    def test_waiting_stats(self):
        stats = waiting_stats(np.array([0.0, 0.0, 2.0, 6.0]))
        assert stats["mean"] == 2.0 and stats["p_zero"] == 0.5

    def test_waiting_stats_empty_rejected(self):
        with pytest.raises(ValueError):
            waiting_stats(np.array([]))

    def test_weekly_to_daily_uniform(self):
        daily = weekly_to_daily([700.0, 1400.0])
        assert daily.shape == (14,)
        assert daily[0] == pytest.approx(100.0)
        assert daily[7:].sum() == pytest.approx(1400.0)

    def test_weekly_to_daily_profile_normalized(self):
        daily = weekly_to_daily([70.0], weekday_profile=[2, 1, 1, 1, 1, 1, 0])
        assert daily.sum() == pytest.approx(70.0)
        assert daily[0] == pytest.approx(20.0)
        assert daily[6] == 0.0

    def test_weekly_to_daily_bad_profile(self):
        with pytest.raises(ValueError):
            weekly_to_daily([70.0], weekday_profile=[1, 1, 1])

    def test_daily_arrival_rates(self):
        np.testing.assert_allclose(daily_arrival_rates([1440.0, 720.0]), [1.0, 0.5])

    def test_weekday_profile_from_history(self):
        weekdays = [0, 1, 0, 1]
        values = [30.0, 10.0, 30.0, 10.0]
        profile = weekday_profile_from_history(weekdays, values)
        assert profile[0] == pytest.approx(0.75)
        assert profile[1] == pytest.approx(0.25)
        assert profile[2:].sum() == 0.0

    def test_wait_histogram_density(self):
        waits = np.array([0.2, 0.8, 1.5, 3.2])
        starts, density = wait_histogram(waits, bin_width=1.0)
        assert starts[0] == 0.0
        assert density.sum() * 1.0 == pytest.approx(1.0)

    def test_wait_histogram_csv(self):
        buf = io.StringIO()
        starts, density = wait_histogram(np.array([0.5, 1.5]), bin_width=1.0)
        write_wait_histogram_csv(starts, density, buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "bin_start_min,density"
        assert len(lines) == 3

    def test_confidence_interval_ordering_enforced(self):
        with pytest.raises(ValueError):
            ConfidenceInterval(level=0.95, point=1.0, lower=2.0, upper=3.0)

    def test_simulation_report_shape(self):
        config = SimConfig(0.5, 2, Exponential(0.1), arrivals_per_round=1000, rounds=2)
        result, ci = replicate(config)
        report = simulation_report("S1", 2022, config, result, ci)
        assert report["site_id"] == "S1"
        assert report["service"] == {"shape_k": 1, "rate": 0.1}
        assert report["ci95"][0] <= report["mean_wait_min"] <= report["ci95"][1]
