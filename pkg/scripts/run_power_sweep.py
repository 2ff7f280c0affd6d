"""Maximum RX / Eve area rates versus transmit power for all schemes.

    python3 scripts/run_power_sweep.py [--config configs/reference.json] [--trials N] [--out DIR]
"""

import argparse
import time
from pathlib import Path

from ris_secrecy.config import load_config
from ris_secrecy.evaluation import MonteCarloConfig, power_sweep, write_power_sweep_csv

ROOT = Path(__file__).resolve().parents[1]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, default=ROOT / "configs" / "reference.json")
    p.add_argument("--trials", type=int)
    p.add_argument("--out", type=Path, default=Path("results"))
    args = p.parse_args()

    cfg = load_config(args.config)
    mc = cfg.monte_carlo
    if args.trials:
        mc = MonteCarloConfig(args.trials, mc.base_seed)
    t0 = time.perf_counter()
    res = power_sweep(cfg.scenario, cfg.schemes, cfg.power_grid_dbm, mc, cfg.ao,
                      cfg.heatmap_grid, cfg.fading_draws, cfg.max_mode, cfg.warm_start)
    args.out.mkdir(parents=True, exist_ok=True)
    write_power_sweep_csv(args.out / "power_sweep.csv", res)

    print(f"{mc.n_trials} trials in {time.perf_counter() - t0:.1f} s")
    print("power_dbm " + " ".join(f"{p:>7.1f}" for p in res.powers_dbm))
    for s in res.schemes:
        print(f"{s.value:>9} RX  " + " ".join(f"{r:7.3f}" for r in res.rx_max[s]))
        print(f"{s.value:>9} Eve " + " ".join(f"{r:7.3f}" for r in res.eve_max[s]))
        print(f"{s.value:>9} gap " + " ".join(f"{r:7.3f}" for r in res.gap(s)))


if __name__ == "__main__":
    main()
