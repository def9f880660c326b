"""Closed-form vs Brioschi curvature for every tagged catalog system.

Writes one CSV row per (system, point) and prints the worst discrepancy per system.

    python3 scripts/curvature_matrix.py --points 25 --out results/curvature_matrix.csv
"""

import argparse
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from sl2coalg import catalog
from sl2coalg.geometry import curvature_report


@dataclass
class MatrixConfig:
    points: int = 25
    seed: int = 42
    qmin: float = 0.15
    qmax: float = 1.2
    out: Path = Path("results/curvature_matrix.csv")
    systems: list = field(default_factory=lambda: [
        ("poincare", {"kappa": -0.3}),
        ("beltrami", {"kappa": 0.4}),
        ("darboux3", {"alpha": 1.2}),
        ("j3sq", {"alpha": 0.3}),
        ("j3sq_jm", {"alpha": 0.25}),
        ("z_type_I", {"z": 0.6}),
        ("z_ms", {"sign": 1, "z": 0.45}),
        ("z_ms", {"sign": -1, "z": 0.45}),
        ("z_j3sq", {"alpha": 0.2, "z": 0.5}),
    ])


def run(cfg: MatrixConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    worst = {}
    with cfg.out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["system", "params", "q1", "q2", "K_closed", "K_brioschi", "rel_err"])
        for name, params in cfg.systems:
            spec = catalog.build(name, params)
            pts = rng.uniform(cfg.qmin, cfg.qmax, (cfg.points, 2)) * rng.choice([-1.0, 1.0], (cfg.points, 2))
            rep = curvature_report(spec, pts)
            label = f"{name}{params}"
            errs = []
            for (q1, q2), kc, kb in zip(rep.points, rep.k_closed, rep.k_brioschi):
                e = abs(kc - kb) / (1 + abs(kc))
                errs.append(e)
                w.writerow([name, params, f"{q1:.17g}", f"{q2:.17g}", f"{kc:.17g}", f"{kb:.17g}", f"{e:.3e}"])
            worst[label] = (spec.curvature_label, max(errs))
    return worst


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=MatrixConfig.points)
    ap.add_argument("--seed", type=int, default=MatrixConfig.seed)
    ap.add_argument("--out", type=Path, default=MatrixConfig.out)
    a = ap.parse_args()
    worst = run(MatrixConfig(points=a.points, seed=a.seed, out=a.out))
    for label, (formula, err) in worst.items():
        print(f"{label:40s} {formula:60s} max rel err {err:.2e}")
    print(f"wrote {a.out}")


if __name__ == "__main__":
    main()
