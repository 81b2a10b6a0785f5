#!/usr/bin/env python3
"""Download the two real series used by the backtests into data/.

    python3 tools/fetch_data.py [--out data]

unrate_semiannual.csv
    FRED UNRATE (seasonally adjusted), averaged over half-years,
    1948H1 to 2025H1: 155 observations.
gasoline_weekly.csv
    FRED GASREGW, U.S. regular retail gasoline price (dollars per gallon),
    weekly from 1990-08-20 to 2004-02-16. FRED carries a few more weeks
    than the 699-observation `gasprice` series shipped with R's quantreg;
    pass --gasprice-csv with a two-column export of that series to use it
    instead.

Only the standard library is used.
"""

import argparse
import csv
import io
import sys
import urllib.request
from collections import OrderedDict
from pathlib import Path

FRED = "https://fred.stlouisfed.org/graph/fredgraph.csv?id={id}&cosd={start}&coed={end}"


def fetch(series_id, start, end):
    url = FRED.format(id=series_id, start=start, end=end)
    with urllib.request.urlopen(url, timeout=60) as resp:
        text = resp.read().decode("utf-8")
    rows = list(csv.reader(io.StringIO(text)))
    out = []
    for date, value in rows[1:]:
        if value in ("", "."):
            continue
        out.append((date, float(value)))
    return out


def semiannual(monthly):
    halves = OrderedDict()
    for date, value in monthly:
        year, month = int(date[:4]), int(date[5:7])
        key = f"{year}-{'01' if month <= 6 else '07'}"
        halves.setdefault(key, []).append(value)
    return [(k, sum(v) / len(v)) for k, v in halves.items() if len(v) == 6]


def write(path, header, rows, fmt):
    with open(path, "w", newline="") as f:
        f.write(header + "\n")
        for label, value in rows:
            f.write(f"{label},{value:{fmt}}\n")
    print(f"{path}: {len(rows)} rows")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--gasprice-csv", help="two-column CSV export of quantreg::gasprice")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    unrate = semiannual(fetch("UNRATE", "1948-01-01", "2025-06-30"))
    write(out / "unrate_semiannual.csv", "date,unrate", unrate, ".4f")

    if args.gasprice_csv:
        with open(args.gasprice_csv) as f:
            rows = [(r[0], float(r[1])) for r in list(csv.reader(f))[1:]]
    else:
        rows = fetch("GASREGW", "1990-08-20", "2004-02-16")
    write(out / "gasoline_weekly.csv", "date,price", rows, ".3f")
    return 0


if __name__ == "__main__":
    sys.exit(main())
