#!/usr/bin/env python3
"""Regenerate the files under tests/fixtures.

series_fixture.csv   12 synthetic categories, 120-160 months each
snapshot_small.jsonl a few hundred metadata records in the snapshot layout
"""

import argparse
import datetime as dt
import json
import math
import pathlib

import numpy as np

END_YEAR, END_MONTH = 2019, 12


def logistic(t, L, k, t0):
    return L / (1.0 + math.exp(-k * (t - t0)))


def launch_then_stall(L, k, t0, stall, slope):
    def f(t):
        if t < stall:
            return logistic(t, L, k, t0)
        return logistic(stall, L, k, t0) + slope * (t - stall)
    return f


def ar1(rng, n, mean, phi, sd):
    y, out = mean, []
    for _ in range(n):
        y = mean + phi * (y - mean) + rng.normal(0.0, sd)
        out.append(max(y, 0.0))
    return lambda t: out[t]


def categories(rng):
    return [
        ("cs.LG", 150, lambda t: logistic(t, 400, 0.06, 110)),
        ("cs.CV", 144, launch_then_stall(300, 0.15, 60, 48, 0.2)),
        ("quant-ph", 160, lambda t: logistic(t, 250, 0.08, 30)),
        ("hep-lat", 140, lambda t: 40.0),
        ("math.AG", 136, lambda t: 10 + 0.3 * t),
        ("cond-mat.soft", 128, ar1(rng, 128, 30.0, 0.8, 4.0)),
        ("cs.RO", 132, launch_then_stall(200, 0.2, 55, 44, 0.1)),
        ("physics.bio-ph", 150, lambda t: logistic(t, 80, 0.04, 80)),
        ("cs.CR", 120, lambda t: 0.0 if t < 20 else 0.8 * (t - 20)),
        ("stat.ML", 140, lambda t: logistic(t, 150, 0.1, 70)),
        ("nlin.CD", 124, lambda t: 50 - 0.15 * t),
        ("econ.EM", 120, lambda t: 5.0),
    ]


def month_minus(year, month, k):
    idx = year * 12 + month - 1 - k
    return idx // 12, idx % 12 + 1


def write_series(path, seed):
    rng = np.random.default_rng(seed)
    rows = []
    for name, n, rate in categories(rng):
        y0, m0 = month_minus(END_YEAR, END_MONTH, n - 1)
        for t in range(n):
            y, m = month_minus(y0, m0, -t)
            rows.append((name, f"{y:04d}-{m:02d}", int(rng.poisson(max(rate(t), 0.0)))))
    rows.sort()
    with open(path, "w") as fh:
        fh.write("category,month,count\n")
        for r in rows:
            fh.write(f"{r[0]},{r[1]},{r[2]}\n")


def rfc2822(when):
    return when.strftime("%a, %d %b %Y %H:%M:%S GMT")


def write_snapshot(path, seed):
    rng = np.random.default_rng(seed)
    lines = []
    serial = 0
    start = dt.datetime(2018, 1, 1, 12, 0, 0)
    for cat, extra, rate in [("cs.AI", "cs.LG", 6), ("math.CO", "", 3), ("astro-ph.GA", "astro-ph.SR", 4)]:
        for month in range(24):
            first = start.replace(year=2018 + month // 12, month=month % 12 + 1)
            for _ in range(int(rng.poisson(rate))):
                serial += 1
                created = first + dt.timedelta(days=int(rng.integers(0, 27)), hours=int(rng.integers(0, 11)))
                versions = [{"version": "v1", "created": rfc2822(created)}]
                if rng.random() < 0.3:
                    versions.append({"version": "v2", "created": rfc2822(created + dt.timedelta(days=40))})
                    rng.shuffle(versions)
                rec = {
                    "id": f"{1800 + month // 12 * 100 + month % 12 + 1}.{serial:05d}",
                    "categories": (cat + " " + extra).strip(),
                    "versions": versions,
                }
                lines.append(json.dumps(rec))
    lines.append('{"id": "broken", "categories": ')
    lines.append(json.dumps({"id": "hep-th/8501001", "categories": "hep-th",
                             "versions": [{"version": "v1", "created": "Tue, 1 Jan 1985 10:00:00 GMT"}]}))
    lines.append(json.dumps({"id": "no-versions", "categories": "cs.AI", "versions": []}))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"))
    ap.add_argument("--seed", type=int, default=20190101)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_series(out / "series_fixture.csv", args.seed)
    write_snapshot(out / "snapshot_small.jsonl", args.seed + 1)


if __name__ == "__main__":
    main()
