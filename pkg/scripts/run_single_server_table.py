"""Single-server study: the four fitted arrival models against service rates
mu in {1.1, ..., 1.5}, reporting mean / SD / 95%-quantile for the number in
system, busy period and response time.

At the default 1e7 arrivals per cell this takes a couple of minutes; pass
--n-arrivals 1e9 to reproduce the full-scale study if you have the time.
"""

import argparse

import numpy as np

from gasqueue.cli import REFERENCE_MODELS
from gasqueue.queueing import QueueScenario, mm1_analytic, simulate_queue

MODEL_ORDER = [("static", "exponential"), ("static", "generalized_gamma"),
               ("dynamic", "exponential"), ("dynamic", "generalized_gamma")]
LABEL = {"exponential": "Exp.", "generalized_gamma": "G.G."}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-arrivals", type=float, default=1e7)
    ap.add_argument("--warmup", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--mus", type=float, nargs="+", default=[1.1, 1.2, 1.3, 1.4, 1.5])
    args = ap.parse_args()

    header = f"{'mu':>4} {'model':<14}" + "".join(
        f"{m:>9}" for m in ("N.M", "N.SD", "N.q95", "B.M", "B.SD", "B.q95",
                            "R.M", "R.SD", "R.q95"))
    print(header)
    root = np.random.SeedSequence(args.seed)
    seeds = iter(root.generate_state(4 * len(args.mus), np.uint64).tolist())
    for mu in args.mus:
        for dynamics, family in MODEL_ORDER:
            scenario = QueueScenario(
                arrival=REFERENCE_MODELS[(dynamics, family)], servers=1,
                service_rate=mu, n_arrivals=int(args.n_arrivals),
                warmup_arrivals=args.warmup, seed=int(next(seeds)) % 2**63)
            s = simulate_queue(scenario)
            cells = (s.number_in_system, s.busy_period, s.response_time)
            row = "".join(f"{v:9.1f}" for m in cells for v in (m.mean, m.sd, m.q95))
            print(f"{mu:>4} {dynamics[:4] + ' ' + LABEL[family]:<14}{row}")
        oracle = mm1_analytic(1.0, mu)
        print(f"{'':>4} {'M/M/1 exact':<14}"
              f"{oracle.number_in_system.mean:9.1f}{oracle.number_in_system.sd:9.1f}"
              f"{float(oracle.number_in_system.q95):9.1f}{oracle.busy_period.mean:9.1f}"
              f"{oracle.busy_period.sd:9.1f}{'':>9}{oracle.response_time.mean:9.1f}"
              f"{oracle.response_time.sd:9.1f}{oracle.response_time.q95:9.1f}")


if __name__ == "__main__":
    main()
