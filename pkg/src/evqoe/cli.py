"""Command-line entry point wiring the pipeline stages together.

All inter-stage communication goes through the documented CSV/JSON file
formats; each stage can be re-run in isolation. Numeric outputs are
deterministic given identical inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from datetime import date, timedelta
from pathlib import Path
from typing import Sequence

import numpy as np

from . import accuracy as accuracy_mod
from . import features as features_mod
from . import gapfill as gapfill_mod
from . import ingest as ingest_mod
from . import metrics as metrics_mod
from . import plots
from . import queueing
from . import sarimax as sarimax_mod
from . import service_fit as service_mod
from . import synth as synth_mod
from .config import RunConfig, provenance_header
from .errors import EvqoeError

MINUTES_PER_DAY = 1440


# ---------------------------------------------------------------------------
# shared helpers


def _outdir(config: RunConfig) -> Path:
    out = Path(config.get_str("io.out", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _figures_enabled(config: RunConfig) -> bool:
    return config.get_bool("run.figures", True)


def _site_filter(config: RunConfig) -> list[str]:
    return config.get_list("run.sites")


def _selected(site_id: str, site_filter: list[str]) -> bool:
    return not site_filter or site_id in site_filter


def _write_csv(path: Path, provenance: dict, write_body) -> None:
    with open(path, "w", encoding="utf-8", newline="") as stream:
        stream.write(provenance_header(provenance))
        write_body(stream)


def _write_json(path: Path, provenance: dict, payload) -> None:
    document = {"provenance": provenance, "data": payload}
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(document, stream, indent=2, sort_keys=True)
        stream.write("\n")


def _read_clean_sessions(path: Path) -> list[ingest_mod.SessionRecord]:
    with open(path, encoding="utf-8") as stream:
        records, rejected = ingest_mod.parse_sessions(stream)
    if rejected:
        raise EvqoeError(f"{path}: {len(rejected)} malformed row(s) in cleaned file")
    return records


def _read_sites(path: Path) -> dict[str, ingest_mod.Site]:
    payload = json.loads(path.read_text(encoding="utf-8"))["data"]
    sites = {}
    for entry in payload:
        sites[entry["site_id"]] = ingest_mod.Site(
            site_id=entry["site_id"],
            postal_code=entry["postal_code"],
            station_ids=frozenset(entry["station_ids"]),
            num_chargers=entry["num_chargers"],
            charger_levels=tuple(entry.get("charger_levels", ())),
        )
    return sites


def _daily_request_series(
    records: Sequence[ingest_mod.SessionRecord], site_id: str
) -> gapfill_mod.DailySeries:
    """Per-day merged-request counts for one site over its observed span."""
    site_records = [r for r in records if r.postal_code == site_id]
    if not site_records:
        raise EvqoeError(f"no sessions for site {site_id}")
    days = [r.start_time.date() for r in site_records]
    first, last = min(days), max(days)
    counts = Counter(days)
    n_days = (last - first).days + 1
    values = np.array(
        [counts.get(first + timedelta(days=i), 0) for i in range(n_days)], dtype=float
    )
    return gapfill_mod.DailySeries(site_id=site_id, start_date=first, values=values)


def _data_date_span(records: Sequence[ingest_mod.SessionRecord]) -> tuple[date, date]:
    first = min(r.start_time.date() for r in records)
    last = max(r.end_time.date() for r in records)
    return first, last + timedelta(days=1)


# ---------------------------------------------------------------------------
# synth


def _parse_synth_sites(config: RunConfig) -> tuple[synth_mod.SynthSite, ...]:
    sites = []
    for key in sorted(config.values):
        if not key.startswith("synth.site."):
            continue
        site_id = key.removeprefix("synth.site.")
        fields = {}
        for pair in config.values[key].split(","):
            name, _, value = pair.partition("=")
            fields[name.strip()] = value.strip()
        profile = tuple(
            float(x) for x in fields.get("profile", "1:1:1:1:1:1:1").split(":")
        )
        sites.append(
            synth_mod.SynthSite(
                site_id=site_id,
                postal_code=fields.get("postal", site_id),
                num_chargers=int(fields.get("chargers", 3)),
                base_rate=float(fields.get("base", 30)),
                weekday_profile=profile,
                annual_amplitude=float(fields.get("amp", 0.25)),
                growth_per_year=float(fields.get("growth", 0.1)),
                service_shape_k=int(fields.get("shape", 3)),
                service_rate=float(fields.get("rate", 0.1)),
            )
        )
    if not sites:
        sites = [
            synth_mod.SynthSite(
                site_id="H1A1A1", postal_code="H1A1A1", num_chargers=3,
                base_rate=35, annual_amplitude=0.3, growth_per_year=0.12,
                weekday_profile=(1.0, 0.95, 0.95, 1.0, 1.1, 1.1, 0.9),
            ),
            synth_mod.SynthSite(
                site_id="H2B2B2", postal_code="H2B2B2", num_chargers=2,
                base_rate=20, annual_amplitude=0.2, growth_per_year=0.08,
                service_shape_k=4, service_rate=0.08,
            ),
        ]
    return tuple(sites)


def cmd_synth(config: RunConfig) -> list[Path]:
    out = _outdir(config)
    start = config.get_date("synth.start", date(2018, 1, 1))
    end = config.get_date("synth.end", date(2023, 1, 1))
    gap = None
    if config.get_bool("synth.gap.enabled", True):
        gap = synth_mod.SynthGap(
            start=config.get_date("synth.gap.start", date(2020, 1, 1)),
            end=config.get_date("synth.gap.end", date(2021, 6, 30)),
            suppression=config.get_float("synth.gap.suppression", 0.6),
        )
    synth_config = synth_mod.SynthConfig(
        sites=_parse_synth_sites(config),
        start_date=start,
        end_date=end,
        gap=gap,
        seed=config.get_int("run.seed", 0),
    )
    records, truth = synth_mod.generate_sessions(synth_config)
    provenance = config.provenance([])

    artifacts = []
    sessions_path = out / "sessions.csv"
    _write_csv(sessions_path, provenance, lambda s: ingest_mod.write_sessions_csv(records, s))
    artifacts.append(sessions_path)

    manifest_path = out / "manifest.csv"

    def write_manifest(stream):
        stream.write("postal_code,num_chargers,levels\n")
        for site in synth_config.sites:
            levels = ";".join(["L2"] * site.num_chargers)
            stream.write(f"{site.postal_code},{site.num_chargers},{levels}\n")

    _write_csv(manifest_path, provenance, write_manifest)
    artifacts.append(manifest_path)

    holidays_path = out / "holidays.txt"
    with open(holidays_path, "w", encoding="utf-8") as stream:
        for year in range(start.year, end.year + 1):
            for month, day in ((1, 1), (7, 1), (12, 25)):
                stream.write(f"{date(year, month, day).isoformat()}\n")
    artifacts.append(holidays_path)

    registry_path = out / "registry.csv"
    _write_csv(
        registry_path,
        provenance,
        lambda s: synth_mod.write_registry_csv(synth_mod.registry_rows(synth_config), s),
    )
    artifacts.append(registry_path)

    truth_path = out / "ground_truth.json"
    _write_json(truth_path, provenance, truth.as_dict())
    artifacts.append(truth_path)
    return artifacts


# ---------------------------------------------------------------------------
# ingest


def _cleaning_rules(config: RunConfig) -> ingest_mod.CleaningRules:
    return ingest_mod.CleaningRules(
        min_duration=timedelta(minutes=config.get_float("clean.min_duration_min", 3)),
        max_duration=timedelta(minutes=config.get_float("clean.max_duration_min", 120)),
        require_payment=config.get_bool("clean.require_payment", True),
        require_energy=config.get_bool("clean.require_energy", True),
        merge_gap=timedelta(seconds=config.get_float("clean.merge_gap_s", 60)),
    )


def cmd_ingest(config: RunConfig) -> list[Path]:
    out = _outdir(config)
    sessions_path = config.get_path("io.sessions") or out / "sessions.csv"
    if not sessions_path.exists():
        raise FileNotFoundError(f"io.sessions: no such file: {sessions_path}")
    manifest_path = config.get_path("io.manifest")
    inputs = [sessions_path] + ([manifest_path] if manifest_path else [])
    provenance = config.provenance(inputs)

    rules = _cleaning_rules(config)
    with open(sessions_path, encoding="utf-8") as stream:
        parsed, rejected = ingest_mod.parse_sessions(stream)
    valid, clean_rejected = ingest_mod.clean_sessions(parsed, rules)
    rejected.extend(clean_rejected)
    merged = ingest_mod.merge_resumed_sessions(valid, rules)

    manifest = None
    if manifest_path:
        with open(manifest_path, encoding="utf-8") as stream:
            manifest = ingest_mod.load_site_manifest(stream)
    sites, cluster_rejected = ingest_mod.cluster_sites(merged, manifest)
    rejected.extend(cluster_rejected)

    artifacts = []
    clean_path = out / "sessions_clean.csv"
    _write_csv(clean_path, provenance, lambda s: ingest_mod.write_sessions_csv(merged, s))
    artifacts.append(clean_path)

    rejects_path = out / "rejections.csv"
    _write_csv(rejects_path, provenance, lambda s: ingest_mod.write_rejections_csv(rejected, s))
    artifacts.append(rejects_path)

    sites_path = out / "sites.json"
    _write_json(
        sites_path,
        provenance,
        [
            {
                "site_id": site.site_id,
                "postal_code": site.postal_code,
                "station_ids": sorted(site.station_ids),
                "num_chargers": site.num_chargers,
                "charger_levels": list(site.charger_levels),
            }
            for site in sites.values()
        ],
    )
    artifacts.append(sites_path)
    return artifacts


# ---------------------------------------------------------------------------
# metrics


def cmd_metrics(config: RunConfig) -> list[Path]:
    out = _outdir(config)
    clean_path = out / "sessions_clean.csv"
    sites_path = out / "sites.json"
    holidays_path = config.require_path("io.holidays")
    for path in (clean_path, sites_path):
        if not path.exists():
            raise FileNotFoundError(f"run ingest first: missing {path}")
    provenance = config.provenance([clean_path, sites_path, holidays_path])

    records = _read_clean_sessions(clean_path)
    sites = _read_sites(sites_path)
    with open(holidays_path, encoding="utf-8") as stream:
        holidays = metrics_mod.load_holidays(stream)
    delay_rule = metrics_mod.DelayRule(
        threshold=timedelta(minutes=config.get_float("metrics.delay_threshold_min", 5))
    )
    site_filter = _site_filter(config)
    start, end = _data_date_span(records)
    start = config.get_date("metrics.start", start)
    end = config.get_date("metrics.end", end)

    artifacts = []
    for site_id, site in sorted(sites.items()):
        if not _selected(site_id, site_filter):
            continue
        site_records = [r for r in records if r.postal_code == site_id]
        daily = metrics_mod.daily_report(
            site, site_records, start, end, holidays, delay_rule
        )
        daily_path = out / f"daily_metrics_{site_id}.csv"
        _write_csv(
            daily_path, provenance, lambda s, d=daily: metrics_mod.write_daily_metrics_csv(d, s)
        )
        artifacts.append(daily_path)

        summaries = []
        for metric in ("utilization", "occupancy", "idleness", "blocking"):
            summaries.extend(metrics_mod.threshold_summary(daily, metric))
        summary_path = out / f"thresholds_{site_id}.csv"
        _write_csv(
            summary_path,
            provenance,
            lambda s, rows=summaries: metrics_mod.write_threshold_summary_csv(rows, s),
        )
        artifacts.append(summary_path)

        if _figures_enabled(config):
            fig_path = out / f"daily_metrics_{site_id}.png"
            plots.plot_daily_metrics(daily, fig_path)
            artifacts.append(fig_path)
    return artifacts


# ---------------------------------------------------------------------------
# service fit


def cmd_fit_service(config: RunConfig) -> list[Path]:
    out = _outdir(config)
    clean_path = out / "sessions_clean.csv"
    if not clean_path.exists():
        raise FileNotFoundError(f"run ingest first: missing {clean_path}")
    provenance = config.provenance([clean_path])
    records = _read_clean_sessions(clean_path)
    site_filter = _site_filter(config)
    bin_width = config.get_float("fit.bin_width_min", service_mod.DEFAULT_BIN_WIDTH_MIN)

    reports = []
    artifacts = []
    for site_id in sorted({r.postal_code for r in records}):
        if not _selected(site_id, site_filter):
            continue
        durations = [
            r.duration.total_seconds() / 60.0
            for r in records
            if r.postal_code == site_id
        ]
        fit = service_mod.fit_erlang(durations, bin_width=bin_width)
        reports.append(service_mod.fit_report(site_id, fit))
        if _figures_enabled(config):
            histogram = service_mod.empirical_service_distribution(durations, bin_width)
            fig_path = out / f"service_fit_{site_id}.png"
            plots.plot_service_fit(histogram, fit, site_id, fig_path)
            artifacts.append(fig_path)

    fits_path = out / "service_fits.json"
    _write_json(fits_path, provenance, reports)
    artifacts.insert(0, fits_path)
    return artifacts


# ---------------------------------------------------------------------------
# gapfill


def _gap_spec(config: RunConfig) -> gapfill_mod.GapSpec:
    return gapfill_mod.GapSpec(
        gap_start=config.get_date("gap.start", date(2020, 1, 1)),
        gap_end=config.get_date("gap.end", date(2021, 6, 30)),
        window_m=config.get_int("gap.window_m", gapfill_mod.DEFAULT_WINDOW_M),
    )


def cmd_gapfill(config: RunConfig) -> list[Path]:
    out = _outdir(config)
    clean_path = out / "sessions_clean.csv"
    if not clean_path.exists():
        raise FileNotFoundError(f"run ingest first: missing {clean_path}")
    provenance = config.provenance([clean_path])
    records = _read_clean_sessions(clean_path)
    spec = _gap_spec(config)
    seed = config.get_int("run.seed", 0)
    draws = config.get_int("gap.draws", 1)
    site_filter = _site_filter(config)

    artifacts = []
    for site_id in sorted({r.postal_code for r in records}):
        if not _selected(site_id, site_filter):
            continue
        series = _daily_request_series(records, site_id)
        filled, mask = gapfill_mod.fill_gap(series, spec, seed=seed, draws=draws)
        filled_path = out / f"daily_filled_{site_id}.csv"
        _write_csv(
            filled_path,
            provenance,
            lambda s, f=filled, m=mask: gapfill_mod.write_filled_series_csv(f, m, s),
        )
        artifacts.append(filled_path)
        if _figures_enabled(config):
            fig_path = out / f"daily_filled_{site_id}.png"
            plots.plot_filled_series(filled, mask, fig_path)
            artifacts.append(fig_path)
    return artifacts


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(config: RunConfig) -> list[Path]:
    out = _outdir(config)
    fits_path = out / "service_fits.json"
    sites_path = out / "sites.json"
    for path in (fits_path, sites_path):
        if not path.exists():
            raise FileNotFoundError(f"missing upstream artifact: {path}")
    site_filter = _site_filter(config)
    fits = json.loads(fits_path.read_text(encoding="utf-8"))["data"]
    sites = _read_sites(sites_path)
    seed = config.get_int("run.seed", 0)

    reports = []
    artifacts = []
    inputs = [fits_path, sites_path]
    for entry in fits:
        site_id = entry["site_id"]
        if not _selected(site_id, site_filter) or site_id not in sites:
            continue
        filled_path = out / f"daily_filled_{site_id}.csv"
        if not filled_path.exists():
            raise FileNotFoundError(f"run gapfill first: missing {filled_path}")
        inputs.append(filled_path)
        with open(filled_path, encoding="utf-8") as stream:
            series, _ = gapfill_mod.read_filled_series_csv(stream, site_id)

        years = sorted({d.year for d in series.dates()})
        year = config.get_int("sim.year", years[-1])
        year_values = [
            v for d, v in zip(series.dates(), series.values) if d.year == year
        ]
        if not year_values:
            raise EvqoeError(f"site {site_id}: no data for sim.year={year}")
        lam = float(np.mean(year_values)) / MINUTES_PER_DAY

        fit = service_mod.ErlangFit(
            shape_k=int(entry["shape_k"]),
            rate=float(entry["rate_per_min"]),
            rmse=float(entry["rmse"]),
            sample_mean=float(entry["sample_mean_min"]),
            sample_var=float(entry["sample_var_min2"]),
            n_samples=int(entry["n_samples"]),
        )
        sim_config = queueing.SimConfig(
            arrival_rate=lam,
            num_servers=sites[site_id].num_chargers,
            service=fit,
            arrivals_per_round=config.get_int("sim.arrivals_per_round", 25_000),
            rounds=config.get_int("sim.rounds", 30),
            warmup_arrivals=config.get_int("sim.warmup", 1_000),
            seed=seed,
        )
        result, ci = queueing.replicate(sim_config)
        reports.append(queueing.simulation_report(site_id, year, sim_config, result, ci))

        bins, density = queueing.wait_histogram(result.waiting_times)
        hist_path = out / f"wait_hist_{site_id}.csv"
        provenance = config.provenance(inputs)
        _write_csv(
            hist_path,
            provenance,
            lambda s, b=bins, d=density: queueing.write_wait_histogram_csv(b, d, s),
        )
        artifacts.append(hist_path)
        if _figures_enabled(config):
            fig_path = out / f"wait_hist_{site_id}.png"
            plots.plot_wait_histogram(bins, density, site_id, fig_path)
            artifacts.append(fig_path)

    report_path = out / "sim_report.json"
    _write_json(report_path, config.provenance(inputs), reports)
    artifacts.insert(0, report_path)
    return artifacts


# ---------------------------------------------------------------------------
# forecast


def _registry_exog_daily(
    registry: features_mod.Registry, series: gapfill_mod.DailySeries, region: str, scale: float
) -> np.ndarray:
    return np.array(
        [
            registry.value_at(f"region:{region}", "evs", day) * scale
            for day in series.dates()
        ]
    )


def _extrapolate_linear(values: np.ndarray, horizon: int) -> np.ndarray:
    n = len(values)
    window = min(n, 52)
    x = np.arange(window, dtype=float)
    slope, intercept = np.polyfit(x, values[-window:], 1)
    future_x = np.arange(window, window + horizon, dtype=float)
    return intercept + slope * future_x


def cmd_forecast(config: RunConfig) -> list[Path]:
    out = _outdir(config)
    registry_path = config.require_path("io.registry")
    site_filter = _site_filter(config)
    with open(registry_path, encoding="utf-8") as stream:
        registry = features_mod.load_registry(stream)
    region = config.get_str("forecast.region", "R1")
    exog_scale = config.get_float("forecast.exog_scale", 1.0)
    horizon = config.get_int("forecast.horizon", 52)
    n_validation = config.get_int("forecast.validation_weeks", 52)
    level = config.get_float("forecast.level", 0.99)
    season = config.get_int("forecast.season", 52)
    grid = {
        "p": config.get_int_list("forecast.grid.p", (0, 1, 2)),
        "q": config.get_int_list("forecast.grid.q", (0, 1, 2)),
        "d": config.get_float_list("forecast.grid.d", (0.4, 0.6, 0.8)),
        "P": config.get_int_list("forecast.grid.P", (0, 1)),
        "D": config.get_int_list("forecast.grid.D", (1,)),
        "Q": config.get_int_list("forecast.grid.Q", (0, 1)),
    }

    filled_paths = sorted(out.glob("daily_filled_*.csv"))
    if not filled_paths:
        raise FileNotFoundError("run gapfill first: no daily_filled_*.csv in out dir")

    artifacts = []
    for filled_path in filled_paths:
        site_id = filled_path.stem.removeprefix("daily_filled_")
        if not _selected(site_id, site_filter):
            continue
        provenance = config.provenance([filled_path, registry_path])
        with open(filled_path, encoding="utf-8") as stream:
            series, _ = gapfill_mod.read_filled_series_csv(stream, site_id)
        exog_daily = {"region_evs": _registry_exog_daily(registry, series, region, exog_scale)}
        weekly = features_mod.weekly_aggregate(series, exog_daily)
        exog = weekly.exog_matrix(["region_evs"])

        best_spec, leaderboard = sarimax_mod.grid_search(
            weekly.y, exog, n_validation=n_validation, grid=grid, s=season
        )
        fit = sarimax_mod.fit_sarimax(weekly.y, exog, best_spec)
        future_exog = _extrapolate_linear(exog[:, 0], horizon)[:, None]
        result = sarimax_mod.forecast(fit, horizon, future_exog, level=level)
        future_weeks = [
            weekly.week_starts[-1] + timedelta(weeks=h) for h in range(1, horizon + 1)
        ]

        forecast_path = out / f"forecast_{site_id}.csv"
        _write_csv(
            forecast_path,
            provenance,
            lambda s, w=future_weeks, r=result: sarimax_mod.write_forecast_csv(w, r, s),
        )
        artifacts.append(forecast_path)

        best_entry = next(
            (g for g in leaderboard if g.spec == best_spec and g.mape is not None), None
        )
        validation_accuracy = {"mape": best_entry.mape} if best_entry else None
        sidecar_path = out / f"forecast_{site_id}.json"
        _write_json(
            sidecar_path, provenance, sarimax_mod.fit_sidecar(fit, validation_accuracy)
        )
        artifacts.append(sidecar_path)

        external = {}
        for pred_path in config.get_list("forecast.external_predictions"):
            with open(pred_path, encoding="utf-8") as stream:
                external[Path(pred_path).stem] = accuracy_mod.read_external_predictions(stream)
        rows = accuracy_mod.backtest(
            weekly,
            ["region_evs"],
            n_test=n_validation,
            sarimax_spec=best_spec,
            seasonal_period=season,
            external_predictions=external or None,
        )
        backtest_path = out / f"backtest_{site_id}.csv"
        _write_csv(
            backtest_path,
            provenance,
            lambda s, r=rows: accuracy_mod.write_backtest_csv(r, s),
        )
        artifacts.append(backtest_path)

        if _figures_enabled(config):
            fig_path = out / f"forecast_{site_id}.png"
            plots.plot_forecast(
                weekly.week_starts, weekly.y, future_weeks, result, site_id, fig_path
            )
            artifacts.append(fig_path)
    return artifacts


# ---------------------------------------------------------------------------
# pipeline


PIPELINE_STAGES = [
    ("ingest", cmd_ingest),
    ("metrics", cmd_metrics),
    ("fit-service", cmd_fit_service),
    ("gapfill", cmd_gapfill),
    ("simulate", cmd_simulate),
    ("forecast", cmd_forecast),
]


def cmd_pipeline(config: RunConfig) -> list[Path]:
    # fail fast on every externally supplied input before any work
    sessions = config.get_path("io.sessions") or _outdir(config) / "sessions.csv"
    for key, path in (
        ("io.sessions", sessions),
        ("io.holidays", config.get_path("io.holidays")),
        ("io.registry", config.get_path("io.registry")),
    ):
        if path is None:
            raise ValueError(f"missing required config key: {key}")
        if not path.exists():
            raise FileNotFoundError(f"{key}: no such file: {path}")

    out = _outdir(config)
    artifacts: list[Path] = []
    for name, handler in PIPELINE_STAGES:
        artifacts.extend(handler(config))

    manifest = {
        "stages": [name for name, _ in PIPELINE_STAGES],
        "artifacts": sorted(str(p.relative_to(out)) for p in artifacts),
    }
    manifest_path = out / "pipeline_manifest.json"
    _write_json(manifest_path, config.provenance([sessions]), manifest)
    artifacts.append(manifest_path)
    return artifacts


# ---------------------------------------------------------------------------
# entry point


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "metrics": cmd_metrics,
    "fit-service": cmd_fit_service,
    "simulate": cmd_simulate,
    "gapfill": cmd_gapfill,
    "forecast": cmd_forecast,
    "pipeline": cmd_pipeline,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evqoe",
        description="EV charging QoE metrics, M/G/k simulation, and demand forecasting",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("-c", "--config", help="run configuration file")
        cmd.add_argument("--seed", type=int, help="override run.seed")
        cmd.add_argument("--sites", help="override run.sites (comma-separated)")
        cmd.add_argument("--out", help="override io.out")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args, unknown = parser.parse_known_args(argv)

    overrides = []
    for item in unknown:
        if item.startswith("--") and "=" in item:
            overrides.append(item[2:])
        else:
            parser.error(f"unrecognized argument: {item}")

    try:
        config = RunConfig.from_file(args.config) if args.config else RunConfig()
        config.apply_overrides(overrides)
        if args.seed is not None:
            config.values["run.seed"] = str(args.seed)
        if args.sites:
            config.values["run.sites"] = args.sites
        if args.out:
            config.values["io.out"] = args.out
        artifacts = COMMANDS[args.command](config)
    except (EvqoeError, ValueError, OSError) as exc:
        report = {"command": args.command, "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        return 1
    for path in artifacts:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
