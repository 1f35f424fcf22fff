"""Regenerate oracle_columns.json: chart columns of small C2 and C4 spheres.

Run once from the repo root; the tests compare against the frozen file so
that any later change to the chain models shows up as a diff.
"""

import itertools
import json
from pathlib import Path

from eoperiod import bredon
from eoperiod.groups import C2, C4


def columns():
    out = {}
    for c, a, b in itertools.product(range(-2, 3), range(-3, 4), range(-3, 4)):
        idx = bredon.sphere(C4, c, a, b)
        out[f"C4 {c} {a} {b}"] = {str(f): v for f, v in sorted(bredon.chart_column(idx).items())}
    for c, a in itertools.product(range(-2, 3), range(-4, 5)):
        idx = bredon.sphere(C2, c, a)
        out[f"C2 {c} {a}"] = {str(f): v for f, v in sorted(bredon.chart_column(idx).items())}
    for k in range(1, 5):
        idx = bredon.sphere(C4, k, k, k)
        out[f"C4 {k} {k} {k}"] = {str(f): v for f, v in sorted(bredon.chart_column(idx).items())}
    return out


if __name__ == "__main__":
    path = Path(__file__).with_name("oracle_columns.json")
    path.write_text(json.dumps(columns(), indent=0, sort_keys=True))
    print(f"wrote {path}")
