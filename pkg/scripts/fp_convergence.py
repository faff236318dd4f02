"""Time-step convergence of the split-step Fokker-Planck solver against the exact solution.

Usage: python scripts/fp_convergence.py [--dim 1] [--t-end 0.5] [--out fp_convergence.json]
"""

import argparse
import json
import math

import numpy as np

from kinsmooth.grid import Grid
from kinsmooth.inhomogeneous import fp_evolve, fp_exact_states
from kinsmooth.presets import parse_preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=1)
    ap.add_argument("--grid-n", type=int, default=64)
    ap.add_argument("--half-width", type=float, default=10.0)
    ap.add_argument("--t-end", type=float, default=0.5)
    ap.add_argument("--data", default="cosine-modulated")
    ap.add_argument("--out", default="fp_convergence.json")
    args = ap.parse_args()

    g = Grid(args.dim, args.grid_n, args.half_width, dim_x=args.dim)
    data = parse_preset(args.data, args.dim, args.dim)
    f0 = data.field(g)
    exact = fp_exact_states(data, g, [args.t_end])[0][1].coeffs
    rows = []
    for steps in (32, 64, 128, 256, 512):
        F = fp_evolve(f0, args.t_end, args.t_end / steps, n_records=1).states[-1].coeffs
        err = float(np.linalg.norm(F - exact) / np.linalg.norm(exact))
        rows.append({"steps": steps, "dt": args.t_end / steps, "rel_l2_error": err})
    for a, b in zip(rows, rows[1:]):
        b["order"] = math.log2(a["rel_l2_error"] / b["rel_l2_error"])
    for r in rows:
        print(f"dt={r['dt']:.5f}  error={r['rel_l2_error']:.3e}  order={r.get('order', float('nan')):.3f}")
    with open(args.out, "w") as fh:
        json.dump({"config": vars(args), "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
