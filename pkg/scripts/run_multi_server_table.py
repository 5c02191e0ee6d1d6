"""Multi-server study: c in {11, ..., 15} servers at per-server rate 0.1,
unit-rate arrivals from the four fitted models. Busy period here means the
full busy period (all servers simultaneously occupied)."""

import argparse

import numpy as np

from gasqueue.cli import REFERENCE_MODELS
from gasqueue.queueing import QueueScenario, mmc_analytic, simulate_queue

MODEL_ORDER = [("static", "exponential"), ("static", "generalized_gamma"),
               ("dynamic", "exponential"), ("dynamic", "generalized_gamma")]
LABEL = {"exponential": "Exp.", "generalized_gamma": "G.G."}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-arrivals", type=float, default=1e7)
    ap.add_argument("--warmup", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=2)
    ap.add_argument("--mu", type=float, default=0.1)
    ap.add_argument("--servers", type=int, nargs="+", default=[11, 12, 13, 14, 15])
    args = ap.parse_args()

    print(f"{'c':>3} {'model':<14}" + "".join(
        f"{m:>9}" for m in ("N.M", "N.SD", "N.q95", "B.M", "B.SD", "B.q95",
                            "R.M", "R.SD", "R.q95")))
    root = np.random.SeedSequence(args.seed)
    seeds = iter(root.generate_state(4 * len(args.servers), np.uint64).tolist())
    for c in args.servers:
        for dynamics, family in MODEL_ORDER:
            scenario = QueueScenario(
                arrival=REFERENCE_MODELS[(dynamics, family)], servers=c,
                service_rate=args.mu, n_arrivals=int(args.n_arrivals),
                warmup_arrivals=args.warmup, seed=int(next(seeds)) % 2**63)
            s = simulate_queue(scenario)
            cells = (s.number_in_system, s.busy_period, s.response_time)
            row = "".join(f"{v:9.1f}" for m in cells for v in (m.mean, m.sd, m.q95))
            print(f"{c:>3} {dynamics[:4] + ' ' + LABEL[family]:<14}{row}")
        oracle = mmc_analytic(1.0, args.mu, c)
        print(f"{'':>3} {'Erlang-C':<14}{oracle.number_in_system.mean:9.1f}"
              f"{oracle.number_in_system.sd:9.1f}{float(oracle.number_in_system.q95):9.1f}"
              f"{oracle.busy_period.mean:9.1f}{oracle.busy_period.sd:9.1f}{'':>9}"
              f"{oracle.response_time.mean:9.1f}{oracle.response_time.sd:9.1f}"
              f"{oracle.response_time.q95:9.1f}")


if __name__ == "__main__":
    main()
