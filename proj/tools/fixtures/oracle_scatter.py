#!/usr/bin/env python3
# Copyright 2026 The KIRO Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Independent oracle for the scatter exports of the bundled fixtures.

Recomputes scatter.csv and fit.json from the snapshot fixtures with exact
summation (math.fsum) and closed-form OLS, and writes them in the library's
export format. The end-to-end test requires the CLI output to match these
bytes.

Usage: oracle_scatter.py <snapshot dir> <window> <min_articles> <out dir>
"""

import json
import math
import sys
from pathlib import Path


def fmt(v):
    return "0" if v == 0 else "%.12g" % v


def entropy(entries):
    total = math.fsum(entries.values())
    return max(0.0, -math.fsum((m / total) * math.log(m / total) for m in entries.values() if m > 0))


def summed(snapshot, subject):
    acc = {}
    found = False
    for d in snapshot["distributions"]:
        if d["subject"] != subject:
            continue
        found = True
        for c, m in d["entries"].items():
            acc[c] = acc.get(c, 0.0) + m
    return acc if found and any(m > 0 for m in acc.values()) else None


def main():
    snap_dir, window, min_articles, out = Path(sys.argv[1]), sys.argv[2], int(sys.argv[3]), Path(sys.argv[4])
    points = []
    for f in sorted(snap_dir.glob(f"*.{window}.snapshot.json")):
        s = json.loads(f.read_text(encoding="utf-8"))
        if s["site_stats"]["articles"] <= min_articles:
            continue
        e, v = summed(s, "edits"), summed(s, "views")
        if e is None or v is None:
            continue
        slug = s["wiki"] if s["family"] == "wikipedia" else f'{s["wiki"]}.{s["family"]}'
        points.append((slug, entropy(e), entropy(v)))
    points.sort()
    n = len(points)
    xs = [p[1] for p in points]
    ys = [p[2] for p in points]
    mx, my = math.fsum(xs) / n, math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    syy = math.fsum((y - my) ** 2 for y in ys)
    slope = sxy / sxx
    intercept = my - slope * mx
    sse = math.fsum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 if syy == 0 else min(1.0, max(0.0, 1 - sse / syy))

    out.mkdir(parents=True, exist_ok=True)
    lines = ["wiki,edit_entropy,view_entropy"] + [f"{w},{fmt(x)},{fmt(y)}" for w, x, y in points]
    (out / "scatter.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    fit = ('{"intercept":%s,"n_points":%d,"parameters":{"log_base":"e","min_articles":%d,"window":"%s"},'
           '"r_squared":%s,"slope":%s}\n') % (fmt(intercept), n, min_articles, window, fmt(r2), fmt(slope))
    (out / "fit.json").write_text(fit, encoding="utf-8")


if __name__ == "__main__":
    main()
