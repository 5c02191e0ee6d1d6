"""Command-line pipeline: sample, adjust, fit, simulate, optimize.

All commands read an optional JSON config (``schema_version: 1``) and write
CSV and/or JSON artifacts into the output directory. Randomized commands
require an explicit seed, which is expanded into named substreams so each
stage is independently reproducible.

Exit codes: 0 success, 2 input/config error, 3 fit non-convergence,
4 unstable simulation scenario.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import estimation, queueing, seasonal
from .gas import GasParams
from .seeding import substream

SCHEMA_VERSION = 1

EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_UNSTABLE = 4

# fitted coefficients bundled for the example scripts and default scenarios
REFERENCE_MODELS = {
    ("static", "exponential"): GasParams(0.0, 0.0, 0.0, 1.0, 1.0),
    ("static", "generalized_gamma"): GasParams(-0.12, 0.0, 0.0, 1.08, 0.93),
    ("dynamic", "exponential"): GasParams(0.0, 0.76, 0.06, 1.0, 1.0),
    ("dynamic", "generalized_gamma"): GasParams(-0.06, 0.72, 0.07, 1.15, 0.90),
}


class InputError(Exception):
    pass


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read config {path}: {e}")
    version = cfg.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {version}")
    return cfg


def _require_seed(args, cfg) -> int:
    seed = args.seed if args.seed is not None else cfg.get("seed")
    if seed is None:
        raise InputError("a seed is required (--seed or config 'seed')")
    return int(seed)


def _out_dir(args, cfg) -> Path:
    out = Path(args.out_dir or cfg.get("out_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _formats(args, cfg) -> set[str]:
    fmt = args.format or cfg.get("format")
    return {fmt} if fmt else {"csv", "json"}


def _model_from_config(entry) -> GasParams:
    if isinstance(entry, dict) and "c" in entry:
        return GasParams(c=entry["c"], b=entry.get("b", 0.0), a=entry.get("a", 0.0),
                         psi=entry.get("psi", 1.0), phi=entry.get("phi", 1.0))
    key = (entry["dynamics"], entry["family"])
    if key not in REFERENCE_MODELS:
        raise InputError(f"no reference coefficients for {key}; give c/b/a/psi/phi explicitly")
    return REFERENCE_MODELS[key]


# ---------------------------------------------------------------------------
# sample

def cmd_sample(args) -> int:
    cfg = _load_config(args.config)
    seed = _require_seed(args, cfg)
    out = _out_dir(args, cfg)
    gas = _model_from_config(cfg["arrival_model"]) if "arrival_model" in cfg \
        else seasonal.DEFAULT_GAS_PARAMS
    rng_seed = substream(seed, "sampling").integers(2**63)
    timestamps, _ = seasonal.generate_synthetic_arrivals(
        seed=int(rng_seed),
        weeks=int(cfg.get("weeks", 28)),
        gas_params=gas,
        mean_duration=float(cfg.get("mean_duration", 45.6)),
        trend_log_total=float(cfg.get("trend_log_total", -0.4)),
        pattern_scale=float(cfg.get("pattern_scale", 1.0)),
        round_to_minute=bool(cfg.get("round_to_minute", True)),
    )
    unit = "m" if bool(cfg.get("round_to_minute", True)) else "s"
    path = out / "arrivals.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp"])
        for ts in timestamps:
            w.writerow([np.datetime_as_string(ts.astype(f"datetime64[{unit}]"))])
    print(f"wrote {len(timestamps)} timestamps to {path}")
    return 0


# ---------------------------------------------------------------------------
# adjust

def _read_series(args) -> seasonal.InterArrivalSeries:
    path = args.input
    col_ts = args.timestamp_column
    col_dur = args.durations_column
    rows, bad = [], []
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise InputError(f"{path}: empty file")
            col = col_dur if col_dur else col_ts
            if col not in reader.fieldnames:
                raise InputError(f"{path}: missing column {col!r}")
            for lineno, row in enumerate(reader, start=2):
                value = (row.get(col) or "").strip()
                if not value:
                    bad.append(lineno)
                    continue
                if col_dur:
                    try:
                        rows.append(float(value))
                    except ValueError:
                        bad.append(lineno)
                else:
                    try:
                        rows.append(np.datetime64(value, "s"))
                    except ValueError:
                        bad.append(lineno)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}")
    if bad:
        raise InputError(f"{path}: malformed rows at lines {bad[:20]}")
    if len(rows) < 2:
        raise InputError(f"{path}: need at least two observations")
    if col_dur:
        return seasonal.InterArrivalSeries.from_durations(np.array(rows, dtype=float),
                                                          week_offset=args.week_offset)
    try:
        return seasonal.InterArrivalSeries.from_timestamps(np.array(rows), sort=args.sort)
    except ValueError as e:
        raise InputError(str(e))


def cmd_adjust(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args, cfg)
    series = _read_series(args)
    spacing = float(args.knot_spacing or cfg.get("knot_spacing", seasonal.DEFAULT_KNOT_SPACING))
    adjusted, fit = seasonal.seasonal_adjust(series, spacing)
    fitted_log = fit.predict_log(series.week_position, series.trend)

    formats = _formats(args, cfg)
    if "csv" in formats:
        path = out / "adjusted.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["timestamp", "raw_duration", "week_position", "fitted_log",
                        "adjusted_duration"])
            ts_unit = "m"
            if series.timestamps is not None and np.any(
                    series.timestamps != series.timestamps.astype("datetime64[m]")):
                ts_unit = "s"
            for i in range(len(adjusted)):
                ts = ("" if series.timestamps is None
                      else np.datetime_as_string(series.timestamps[i], unit=ts_unit))
                w.writerow([ts, series.durations[i], series.week_position[i],
                            f"{fitted_log[i]:.10g}", f"{adjusted[i]:.10g}"])
        print(f"wrote {path}")
    if "json" in formats:
        diag = {
            "schema_version": SCHEMA_VERSION,
            "knot_spacing": spacing,
            "knots": fit.knots.tolist(),
            "beta": fit.beta.tolist(),
            "gamma": fit.gamma,
            "standardization": fit.standardization,
            "n_zero_replaced": series.n_zero_replaced,
            "zero_replacement_value": seasonal.ZERO_REPLACEMENT,
            "n_observations": len(adjusted),
            **fit.diagnostics,
        }
        path = out / "adjust_diagnostics.json"
        with open(path, "w") as fh:
            json.dump(diag, fh, indent=2)
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# fit

def cmd_fit(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args, cfg)
    column = args.durations_column or "adjusted_duration"
    values = []
    try:
        with open(args.input, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or column not in reader.fieldnames:
                raise InputError(f"{args.input}: missing column {column!r}")
            for row in reader:
                values.append(float(row[column]))
    except OSError as e:
        raise InputError(f"cannot read {args.input}: {e}")
    except ValueError as e:
        raise InputError(f"{args.input}: {e}")

    table = estimation.model_table(np.array(values))
    formats = _formats(args, cfg)
    if "csv" in formats:
        table.to_csv(out / "model_table.csv")
        print(f"wrote {out / 'model_table.csv'}")
    if "json" in formats:
        table.to_json(out / "model_table.json")
        print(f"wrote {out / 'model_table.json'}")
    best = table.best.spec
    print(f"best model by AIC: {best.dynamics} {best.family}")
    if not all(r.converged for r in table.rows):
        print("warning: some fits did not converge", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return 0


# ---------------------------------------------------------------------------
# simulate

def _scenario_grid(cfg, seed: int) -> list[dict]:
    """Expand the config into concrete scenario dicts."""
    grid = []
    n_arrivals = int(cfg.get("n_arrivals", 1_000_000))
    warmup = int(cfg.get("warmup_arrivals", queueing.DEFAULT_WARMUP))
    replications = int(cfg.get("replications", 1))
    models = cfg.get("models", [
        {"dynamics": d, "family": f}
        for d in ("static", "dynamic") for f in ("exponential", "generalized_gamma")
    ])
    single = cfg.get("service_rates", [])
    multi = cfg.get("server_counts", [])
    mu_multi = float(cfg.get("multi_service_rate", 0.1))
    cells = [("mu", float(mu), 1, float(mu)) for mu in single]
    cells += [("servers", int(c), int(c), mu_multi) for c in multi]
    if not cells:
        cells = [("mu", 1.1, 1, 1.1)]
    for kind, value, servers, mu in cells:
        for m in models:
            grid.append({
                "kind": kind, "value": value, "servers": servers, "service_rate": mu,
                "model": m, "n_arrivals": n_arrivals, "warmup": warmup,
                "replications": replications,
            })
    return grid


_SIM_COLUMNS = ("cell", "servers", "service_rate", "dynamics", "family",
                "n_mean", "n_sd", "n_q95", "busy_mean", "busy_sd", "busy_q95",
                "resp_mean", "resp_sd", "resp_q95", "little_law_error", "status")


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    seed = _require_seed(args, cfg)
    out = _out_dir(args, cfg)
    rows, any_unstable = [], False
    for i, cell in enumerate(_scenario_grid(cfg, seed)):
        params = _model_from_config(cell["model"])
        dynamics = "static" if params.is_static else "dynamic"
        base = {"cell": f"{cell['kind']}={cell['value']:g}", "servers": cell["servers"],
                "service_rate": cell["service_rate"], "dynamics": dynamics,
                "family": cell["model"].get("family",
                                            params.gengamma_at(0.0).family)}
        try:
            scenario = queueing.QueueScenario(
                arrival=params, servers=cell["servers"], service_rate=cell["service_rate"],
                n_arrivals=cell["n_arrivals"], warmup_arrivals=cell["warmup"],
                replications=cell["replications"],
                seed=int(substream(seed, f"scenario-{i}").integers(2**63)),
            )
        except ValueError as e:
            any_unstable = True
            rows.append({**base, "status": f"skipped: {e}"})
            continue
        s = queueing.simulate_queue(scenario)
        rows.append({
            **base,
            "n_mean": s.number_in_system.mean, "n_sd": s.number_in_system.sd,
            "n_q95": s.number_in_system.q95,
            "busy_mean": s.busy_period.mean, "busy_sd": s.busy_period.sd,
            "busy_q95": s.busy_period.q95,
            "resp_mean": s.response_time.mean, "resp_sd": s.response_time.sd,
            "resp_q95": s.response_time.q95,
            "little_law_error": s.little_law_error, "status": "ok",
        })
        hist_path = out / f"histogram_{i:03d}.json"
        with open(hist_path, "w") as fh:
            json.dump({"schema_version": SCHEMA_VERSION, **base, **s.as_dict()}, fh)

    formats = _formats(args, cfg)
    if "csv" in formats:
        with open(out / "simulation_table.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=_SIM_COLUMNS, restval="")
            w.writeheader()
            w.writerows(rows)
        print(f"wrote {out / 'simulation_table.csv'}")
    if "json" in formats:
        with open(out / "simulation_table.json", "w") as fh:
            json.dump({"schema_version": SCHEMA_VERSION, "rows": rows}, fh, indent=2)
        print(f"wrote {out / 'simulation_table.json'}")
    return EXIT_UNSTABLE if any_unstable else 0


# ---------------------------------------------------------------------------
# optimize

def cmd_optimize(args) -> int:
    cfg = _load_config(args.config)
    seed = _require_seed(args, cfg)
    out = _out_dir(args, cfg)
    model = queueing.CostModel(
        server_cost=float(cfg.get("server_cost", 10.0)),
        congestion_cost=float(cfg.get("congestion_cost", 3000.0)),
        threshold=int(cfg.get("queue_threshold", 30)),
    )
    c_range = cfg.get("server_counts", [11, 12, 13, 14, 15])
    mu = float(cfg.get("multi_service_rate", 0.1))
    n_arrivals = int(cfg.get("n_arrivals", 1_000_000))
    warmup = int(cfg.get("warmup_arrivals", queueing.DEFAULT_WARMUP))
    static_params = _model_from_config(cfg.get("static_model",
                                               {"dynamics": "static", "family": "generalized_gamma"}))
    dynamic_params = _model_from_config(cfg.get("dynamic_model",
                                                {"dynamics": "dynamic", "family": "generalized_gamma"}))

    curves = {}
    for name, params in (("static", static_params), ("dynamic", dynamic_params)):
        scenarios = []
        for c in c_range:
            try:
                scenarios.append(queueing.QueueScenario(
                    arrival=params, servers=int(c), service_rate=mu,
                    n_arrivals=n_arrivals, warmup_arrivals=warmup,
                    seed=int(substream(seed, f"cost-{name}-{c}").integers(2**63))))
            except ValueError:
                continue
        if not scenarios:
            print("error: every server count is unstable", file=sys.stderr)
            return EXIT_UNSTABLE
        curves[name] = queueing.cost_curve(scenarios, model)

    dyn_points = {p.servers: p for p in curves["dynamic"].points}
    static_opt = curves["static"].optimal
    dynamic_opt = curves["dynamic"].optimal
    dyn_at_static_choice = dyn_points.get(static_opt.servers)
    penalty = (None if dyn_at_static_choice is None else
               dyn_at_static_choice.total_cost / dynamic_opt.total_cost - 1.0)

    result = {
        "schema_version": SCHEMA_VERSION,
        "cost_model": {"server_cost": model.server_cost,
                       "congestion_cost": model.congestion_cost,
                       "threshold": model.threshold},
        "curves": {name: [vars(p) for p in curve.points] for name, curve in curves.items()},
        "optimal_servers": {name: curve.optimal.servers for name, curve in curves.items()},
        "optimal_cost": {name: curve.optimal.total_cost for name, curve in curves.items()},
        "dynamic_cost_at_static_choice": (None if dyn_at_static_choice is None
                                          else dyn_at_static_choice.total_cost),
        "misspecification_penalty": penalty,
    }
    formats = _formats(args, cfg)
    if "json" in formats:
        with open(out / "cost_curves.json", "w") as fh:
            json.dump(result, fh, indent=2)
        print(f"wrote {out / 'cost_curves.json'}")
    if "csv" in formats:
        with open(out / "cost_curves.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["model", "servers", "server_cost", "congestion_cost",
                        "total_cost", "excess_fraction"])
            for name, curve in curves.items():
                for p in curve.points:
                    w.writerow([name, p.servers, p.server_cost, p.congestion_cost,
                                p.total_cost, p.excess_fraction])
        print(f"wrote {out / 'cost_curves.csv'}")
    print(f"optimal servers: static={static_opt.servers} "
          f"(cost {static_opt.total_cost:.2f}), dynamic={dynamic_opt.servers} "
          f"(cost {dynamic_opt.total_cost:.2f})")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gasqueue",
                                     description="Clustered-arrival duration modeling and queue simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="root random seed")
        p.add_argument("--out-dir", help="output directory (default: current)")
        p.add_argument("--format", choices=["csv", "json"],
                       help="restrict outputs to one format")

    p = sub.add_parser("sample", help="generate synthetic timestamped arrivals")
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("adjust", help="seasonally adjust raw inter-arrival times")
    common(p)
    p.add_argument("--input", required=True, help="input CSV")
    p.add_argument("--timestamp-column", default="timestamp")
    p.add_argument("--durations-column", help="read precomputed durations instead of timestamps")
    p.add_argument("--week-offset", type=float, default=0.0,
                   help="minutes since Monday 00:00 of the first duration (durations input)")
    p.add_argument("--sort", action="store_true", help="sort unsorted timestamps")
    p.add_argument("--knot-spacing", type=float, help="spline knot spacing in minutes")
    p.set_defaults(func=cmd_adjust)

    p = sub.add_parser("fit", help="fit the eight duration-model variants")
    common(p)
    p.add_argument("--input", required=True, help="adjusted-durations CSV")
    p.add_argument("--durations-column", help="column name (default adjusted_duration)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="simulate queue scenarios")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="staffing cost curves and optimal server count")
    common(p)
    p.set_defaults(func=cmd_optimize)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
