"""Which f make the space of H = Jp f(z Jm)/2 constantly curved?

Scans K(x) over a grid for a list of candidate f and several z; only exp(x) and
exp(-x) come out constant, with K = z and K = -z.

    python3 scripts/constant_curvature_scan.py --z 0.3 1.0 --out results/scan.csv
"""

import argparse
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from sl2coalg.geometry import constant_curvature_scan, curvature_f_deformed


@dataclass
class ScanConfig:
    fs: list = field(default_factory=lambda: ["exp(x)", "exp(-x)", "1", "cosh(x)", "(1+x)^2", "1/(1+x)"])
    zs: list = field(default_factory=lambda: [0.3, 1.0, -0.5])
    x_min: float = 0.01
    x_max: float = 2.0
    n: int = 50
    tol: float = 1e-9
    out: Path = Path("results/constant_curvature_scan.csv")


def run(cfg: ScanConfig):
    grid = np.linspace(cfg.x_min, cfg.x_max, cfg.n)
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    verdicts = []
    with cfg.out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f", "z", "x", "K"])
        for z in cfg.zs:
            for f in cfg.fs:
                for x in grid:
                    w.writerow([f, z, f"{x:.17g}", f"{curvature_f_deformed(f, float(x), z):.17g}"])
                verdicts.append((f, z, constant_curvature_scan(f, grid, z, cfg.tol)))
    return verdicts


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--z", type=float, nargs="+", default=None)
    ap.add_argument("--f", nargs="+", default=None, help="candidate f(x) expressions")
    ap.add_argument("--out", type=Path, default=ScanConfig.out)
    a = ap.parse_args()
    cfg = ScanConfig(out=a.out)
    if a.z:
        cfg.zs = a.z
    if a.f:
        cfg.fs = a.f
    for f, z, v in run(cfg):
        print(f"z={z:+.3g}  f(x)={f:10s} {v}")
    print(f"wrote {cfg.out}")


if __name__ == "__main__":
    main()
