"""Write the asymmetry curves of the built-in games as CSV and summarize them.

    python3 scripts/reproduce_sweep.py --out-dir results --steps 21 --heights 8
"""

import argparse
import pathlib
import time

from bellasym.asymmetry import SweepConfig, curve_to_csv, sweep_curve
from bellasym.game_model import builtin_game, builtin_names


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", default="results")
    p.add_argument("--steps", type=int, default=21)
    p.add_argument("--heights", type=int, default=8)
    p.add_argument("--games", nargs="*", default=builtin_names())
    args = p.parse_args()

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.games:
        t0 = time.perf_counter()
        pts = sweep_curve(SweepConfig(builtin_game(name), steps=args.steps, heights=args.heights))
        path = out / f"{name}_sweep.csv"
        path.write_text(curve_to_csv(pts))
        peak = max(pts, key=lambda q: q.delta)
        print(f"{name}: {len(pts)} rows -> {path} ({time.perf_counter() - t0:.1f}s); "
              f"delta(1) = {pts[-1].delta:.12g}, largest delta {peak.delta:.6g} at xi = {peak.xi_x:g}")


if __name__ == "__main__":
    main()
