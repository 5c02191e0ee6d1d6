"""Staffing costs under the static and dynamic generalized-gamma arrival
models: per-c cost decomposition, the optimal server count for each model,
and the cost of staffing by the static recommendation when arrivals actually
cluster."""

import argparse

import numpy as np

from gasqueue.cli import REFERENCE_MODELS
from gasqueue.queueing import CostModel, QueueScenario, cost_curve

MODELS = {"static": ("static", "generalized_gamma"),
          "dynamic": ("dynamic", "generalized_gamma")}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-arrivals", type=float, default=3e7)
    ap.add_argument("--warmup", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--mu", type=float, default=0.1)
    ap.add_argument("--servers", type=int, nargs="+", default=[11, 12, 13, 14, 15])
    ap.add_argument("--server-cost", type=float, default=10.0)
    ap.add_argument("--congestion-cost", type=float, default=3000.0)
    ap.add_argument("--threshold", type=int, default=30)
    args = ap.parse_args()

    model = CostModel(server_cost=args.server_cost,
                      congestion_cost=args.congestion_cost,
                      threshold=args.threshold)
    root = np.random.SeedSequence(args.seed)
    seeds = iter(root.generate_state(2 * len(args.servers), np.uint64).tolist())

    curves = {}
    for name, key in MODELS.items():
        scenarios = [QueueScenario(
            arrival=REFERENCE_MODELS[key], servers=c, service_rate=args.mu,
            n_arrivals=int(args.n_arrivals), warmup_arrivals=args.warmup,
            replications=3, seed=int(next(seeds)) % 2**63)
            for c in args.servers]
        curves[name] = cost_curve(scenarios, model)
        print(f"\n{name} arrival model")
        print(f"{'c':>3} {'servers':>9} {'congestion':>11} {'total':>9} {'P(exceed)':>11}")
        for p in curves[name].points:
            print(f"{p.servers:>3} {p.server_cost:9.2f} {p.congestion_cost:11.2f} "
                  f"{p.total_cost:9.2f} {p.excess_fraction:11.6f}")

    static_opt = curves["static"].optimal
    dyn_opt = curves["dynamic"].optimal
    dyn_points = {p.servers: p for p in curves["dynamic"].points}
    print(f"\noptimal servers: static model {static_opt.servers} "
          f"(cost {static_opt.total_cost:.2f}), "
          f"dynamic model {dyn_opt.servers} (cost {dyn_opt.total_cost:.2f})")
    at_static = dyn_points.get(static_opt.servers)
    if at_static is not None:
        penalty = at_static.total_cost / dyn_opt.total_cost - 1.0
        print(f"clustered arrivals staffed at the static optimum cost "
              f"{at_static.total_cost:.2f}: a {100 * penalty:.1f}% penalty")


if __name__ == "__main__":
    main()
