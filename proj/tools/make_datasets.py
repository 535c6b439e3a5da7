#!/usr/bin/env python3
"""Writes the benchmark CSVs under data/.

The classification sets and diabetes come from scikit-learn. Boston housing is
read from a local copy of the MASS ``Boston`` table. California housing is
either downloaded through scikit-learn or read from a local parquet copy (the
pytorch-widedeep wheel ships one as
``pytorch_widedeep/datasets/data/california_housing.parquet.brotli``).
``synthetic_yield.csv`` is generated here.
"""
import argparse
import csv
import pathlib

import numpy as np
from sklearn import datasets


def write_csv(path, names, features, targets, target_name="target"):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + [target_name])
        for row, t in zip(features, targets):
            w.writerow([repr(float(v)) for v in row] + [t])
    print(f"wrote {path} ({len(targets)} rows)")


def cliff_peak_surface(n, dim=9, seed=0):
    # Latin hypercube design over [0,1]^dim.
    rng = np.random.default_rng(seed)
    cut = (np.arange(n)[:, None] + rng.random((n, dim))) / n
    x = np.empty_like(cut)
    for j in range(dim):
        x[:, j] = cut[rng.permutation(n), j]
    # Sharp logistic cliff along an oblique plane, gated by a narrow peak.
    plane = 1.5 * x[:, 0] + x[:, 1] - 0.8 * x[:, 2] - 0.9
    cliff = 1.0 / (1.0 + np.exp(-25.0 * plane))
    peak = np.exp(-((x[:, 3] - 0.6) ** 2 + (x[:, 4] - 0.4) ** 2) / 0.05)
    smooth = 0.3 * x[:, 5] + 0.2 * np.sin(3.0 * x[:, 6]) + 0.1 * x[:, 7] * x[:, 8]
    y = cliff * (0.5 + 2.0 * peak) + smooth
    return x, y


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--boston", help="path to MASS Boston.csv (R export)")
    ap.add_argument("--ca-housing", nargs="?", const="download", metavar="PARQUET",
                    help="California housing: a local parquet copy, or download when no path")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    iris = datasets.load_iris()
    write_csv(out / "iris.csv", iris.feature_names, iris.data,
              [iris.target_names[t] for t in iris.target], "species")
    for name, loader in [("wine", datasets.load_wine),
                         ("breast_cancer", datasets.load_breast_cancer),
                         ("digits", datasets.load_digits)]:
        d = loader()
        names = getattr(d, "feature_names", None)
        if names is None or name == "digits":
            names = [f"p{i}" for i in range(d.data.shape[1])]
        write_csv(out / f"{name}.csv", names, d.data, d.target)

    diab = datasets.load_diabetes(scaled=False)
    write_csv(out / "diabetes.csv", diab.feature_names, diab.data, diab.target)

    x, y = cliff_peak_surface(5000)
    write_csv(out / "synthetic_yield.csv", [f"x{i}" for i in range(x.shape[1])], x, y, "yield")

    if args.boston:
        with open(args.boston) as fh:
            rows = list(csv.reader(fh))
        header = rows[0][1:]
        feats = np.array([[float(v) for v in r[1:-1]] for r in rows[1:]])
        targ = [float(r[-1]) for r in rows[1:]]
        write_csv(out / "boston.csv", header[:-1], feats, targ, header[-1])

    if args.ca_housing == "download":
        ca = datasets.fetch_california_housing()
        write_csv(out / "ca_housing.csv", ca.feature_names, ca.data, ca.target, "value")
    elif args.ca_housing:
        import pandas as pd
        df = pd.read_parquet(args.ca_housing)
        names = [c for c in df.columns if c != "MedHouseVal"]
        write_csv(out / "ca_housing.csv", names, df[names].to_numpy(),
                  df["MedHouseVal"].to_numpy(), "value")


if __name__ == "__main__":
    main()
