"""Discrete-event M/G/k site simulator plus analytic M/M/k and M/G/1 oracles.

Times are in minutes. FIFO discipline with infinite waiting room: each
arrival is served by the earliest-free server, so the event loop reduces to
a heap of server release times.
"""

from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass, field
from typing import IO, Sequence, Union

import numpy as np
from scipy import stats

from .service_fit import ErlangFit


@dataclass(frozen=True)
class Exponential:
    """Exponential service law (for validation against M/M/k formulas)."""

    rate: float  # per minute

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    @property
    def var(self) -> float:
        return 1.0 / self.rate**2


ServiceLaw = Union[ErlangFit, Exponential]


def service_moments(service: ServiceLaw) -> tuple[float, float]:
    """(mean, variance) of the service law in minutes."""
    if isinstance(service, Exponential):
        return service.mean, service.var
    return service.shape_k / service.rate, service.shape_k / service.rate**2


def _draw_services(service: ServiceLaw, rng: np.random.Generator, n: int) -> np.ndarray:
    if isinstance(service, Exponential):
        return rng.exponential(1.0 / service.rate, n)
    return rng.gamma(service.shape_k, 1.0 / service.rate, n)


@dataclass(frozen=True)
class SimConfig:
    arrival_rate: float  # EV arrivals per minute (lambda_E = N_E / T)
    num_servers: int
    service: ServiceLaw
    arrivals_per_round: int = 25_000
    rounds: int = 30
    warmup_arrivals: int = 1_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.arrival_rate < 0:
            raise ValueError("arrival_rate must be >= 0")
        if self.num_servers < 1:
            raise ValueError("num_servers must be >= 1")

    @property
    def offered_utilization(self) -> float:
        mean, _ = service_moments(self.service)
        return self.arrival_rate * mean / self.num_servers


@dataclass
class SimResult:
    waiting_times: np.ndarray  # minutes, post-warmup
    arrival_times: np.ndarray  # absolute minutes, post-warmup
    unstable: bool
    round_means: list[float] = field(default_factory=list)

    @property
    def mean_wait(self) -> float:
        return float(self.waiting_times.mean()) if self.waiting_times.size else 0.0

    @property
    def p_zero_wait(self) -> float:
        if not self.waiting_times.size:
            return 1.0
        return float(np.mean(self.waiting_times == 0.0))

    @property
    def p99_wait(self) -> float:
        if not self.waiting_times.size:
            return 0.0
        return float(np.quantile(self.waiting_times, 0.99))

    @property
    def n_delayed(self) -> int:
        return int(np.count_nonzero(self.waiting_times > 0.0))


@dataclass(frozen=True)
class ConfidenceInterval:
    level: float
    point: float
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not self.lower <= self.point <= self.upper:
            raise ValueError("CI must satisfy lower <= point <= upper")


def simulate(config: SimConfig, seed: int | np.random.SeedSequence | None = None) -> SimResult:
    """Run one simulation round: warmup_arrivals discarded, then exactly
    arrivals_per_round waits recorded. Deterministic given the seed."""
    if seed is None:
        seed = config.seed
    rng = np.random.default_rng(seed)
    unstable = config.offered_utilization >= 1.0

    n_total = config.warmup_arrivals + config.arrivals_per_round
    if config.arrival_rate == 0.0:
        # Empty system: no congestion, report all-zero waits.
        return SimResult(
            waiting_times=np.zeros(config.arrivals_per_round),
            arrival_times=np.zeros(config.arrivals_per_round),
            unstable=False,
        )

    arrivals = np.cumsum(rng.exponential(1.0 / config.arrival_rate, n_total))
    services = _draw_services(config.service, rng, n_total)

    k = config.num_servers
    if k >= n_total:
        waits = np.zeros(n_total)
    else:
        free_at = [0.0] * k
        heapq.heapify(free_at)
        waits = np.empty(n_total)
        pop, push = heapq.heappop, heapq.heappush
        for i in range(n_total):
            t = arrivals[i]
            f = pop(free_at)
            start = t if f <= t else f
            waits[i] = start - t
            push(free_at, start + services[i])

    keep = slice(config.warmup_arrivals, None)
    return SimResult(
        waiting_times=waits[keep],
        arrival_times=arrivals[keep],
        unstable=unstable,
    )


def erlang_c_delay_probability(num_servers: int, offered_load: float) -> float:
    """Probability an arrival waits in M/M/k, via the Erlang-B recurrence."""
    if offered_load <= 0:
        return 0.0
    if offered_load >= num_servers:
        raise ValueError("offered load must be below num_servers for stability")
    b = 1.0
    for m in range(1, num_servers + 1):
        b = offered_load * b / (m + offered_load * b)
    rho = offered_load / num_servers
    return b / (1.0 - rho * (1.0 - b))


def erlang_c_wait(num_servers: int, arrival_rate: float, service_rate: float) -> float:
    """Analytic mean queueing wait for M/M/k (minutes)."""
    if arrival_rate >= num_servers * service_rate:
        raise ValueError("unstable: arrival_rate must be < num_servers * service_rate")
    if arrival_rate <= 0:
        return 0.0
    a = arrival_rate / service_rate
    c = erlang_c_delay_probability(num_servers, a)
    return c / (num_servers * service_rate - arrival_rate)


def pollaczek_khinchine_wait(
    arrival_rate: float, service_mean: float, service_var: float
) -> float:
    """Analytic mean queueing wait for M/G/1 (minutes)."""
    rho = arrival_rate * service_mean
    if rho >= 1.0:
        raise ValueError("unstable: arrival_rate * service_mean must be < 1")
    return arrival_rate * (service_var + service_mean**2) / (2.0 * (1.0 - rho))


def replicate(config: SimConfig) -> tuple[SimResult, ConfidenceInterval]:
    """Run config.rounds independent rounds (seeds spawned from the master
    seed) and build a Student-t CI on the mean wait from the round means."""
    if config.rounds < 2:
        raise ValueError("rounds must be >= 2")
    seeds = np.random.SeedSequence(config.seed).spawn(config.rounds)
    results = [simulate(config, seed) for seed in seeds]
    waits = np.concatenate([r.waiting_times for r in results])
    arrivals = np.concatenate([r.arrival_times for r in results])
    round_means = [r.mean_wait for r in results]
    aggregated = SimResult(
        waiting_times=waits,
        arrival_times=arrivals,
        unstable=any(r.unstable for r in results),
        round_means=round_means,
    )
    point = float(np.mean(round_means))
    sd = float(np.std(round_means, ddof=1))
    half = stats.t.ppf(0.975, config.rounds - 1) * sd / np.sqrt(config.rounds)
    ci = ConfidenceInterval(level=0.95, point=point, lower=point - half, upper=point + half)
    return aggregated, ci


def waiting_stats(waits: np.ndarray) -> dict[str, float]:
    """Summary used in the waiting-time report: mean, P(no wait), p99."""
    waits = np.asarray(waits, dtype=float)
    if waits.size == 0:
        raise ValueError("empty waiting-time sample")
    return {
        "mean": float(waits.mean()),
        "p_zero": float(np.mean(waits == 0.0)),
        "p99": float(np.quantile(waits, 0.99)),
    }


def weekly_to_daily(
    weekly_totals: Sequence[float], weekday_profile: Sequence[float] | None = None
) -> np.ndarray:
    """Disaggregate weekly request totals into daily counts using a
    within-week share profile (uniform 1/7 when absent)."""
    weekly = np.asarray(weekly_totals, dtype=float)
    if np.any(weekly < 0):
        raise ValueError("weekly totals must be non-negative")
    if weekday_profile is None:
        profile = np.full(7, 1.0 / 7.0)
    else:
        profile = np.asarray(weekday_profile, dtype=float)
        if profile.shape != (7,) or np.any(profile < 0) or profile.sum() == 0:
            raise ValueError("weekday profile needs 7 non-negative weights")
        profile = profile / profile.sum()
    return np.concatenate([w * profile for w in weekly])


def daily_arrival_rates(daily_counts: Sequence[float]) -> np.ndarray:
    """Per-minute Poisson rates lambda_E = N_E / 1440 for each day."""
    counts = np.asarray(daily_counts, dtype=float)
    if np.any(counts < 0):
        raise ValueError("daily counts must be non-negative")
    return counts / 1440.0


def weekday_profile_from_history(
    weekdays: Sequence[int], values: Sequence[float]
) -> np.ndarray:
    """Normalized mean share of each weekday (0=Monday) in a daily history."""
    weekdays = np.asarray(weekdays)
    values = np.asarray(values, dtype=float)
    means = np.zeros(7)
    for d in range(7):
        mask = weekdays == d
        if np.any(mask):
            means[d] = values[mask].mean()
    if means.sum() == 0:
        return np.full(7, 1.0 / 7.0)
    return means / means.sum()


def wait_histogram(
    waits: np.ndarray, bin_width: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """(bin_start_min, density) pairs for plotting the waiting-time law."""
    waits = np.asarray(waits, dtype=float)
    top = max(float(waits.max()), bin_width) if waits.size else bin_width
    n_bins = int(np.ceil(top / bin_width))
    counts, edges = np.histogram(waits, bins=n_bins, range=(0.0, n_bins * bin_width))
    density = counts / (waits.size * bin_width) if waits.size else counts.astype(float)
    return edges[:-1], density


def write_wait_histogram_csv(
    bin_starts: np.ndarray, density: np.ndarray, stream: IO[str]
) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["bin_start_min", "density"])
    for b, d in zip(bin_starts, density):
        writer.writerow([f"{b:.6f}", f"{d:.9f}"])


def simulation_report(
    site_id: str,
    year: int,
    config: SimConfig,
    result: SimResult,
    ci: ConfidenceInterval,
) -> dict:
    if isinstance(config.service, Exponential):
        service = {"shape_k": 1, "rate": config.service.rate}
    else:
        service = {"shape_k": config.service.shape_k, "rate": config.service.rate}
    return {
        "site_id": site_id,
        "year": year,
        "lambda_per_min": config.arrival_rate,
        "num_servers": config.num_servers,
        "service": service,
        "rounds": config.rounds,
        "mean_wait_min": result.mean_wait,
        "ci95": [ci.lower, ci.upper],
        "p_zero_wait": result.p_zero_wait,
        "p99_wait_min": result.p99_wait,
        "n_delayed": result.n_delayed,
        "unstable": result.unstable,
    }
