#!/usr/bin/env python3
"""Fetch and prepare the UCI benchmark datasets used by the acceptance suite.

Produces four numeric CSV files (label in the last column) under data/:

  sonar.csv       208 x 60, 2 classes (R/M string labels kept verbatim)
  parkinsons.csv  195 x 22, 2 classes (name column dropped, status moved last)
  ilpd.csv        583 x 10, 2 classes (gender mapped Female=0/Male=1, the four
                  missing A/G-ratio cells filled with the column mean)
  segment.csv     2310 x 19, 7 classes (whitespace converted to commas)

Run from the repository root:  python3 scripts/fetch_uci_data.py [--out data]
"""

import argparse
import csv
import io
import sys
import urllib.request
import zipfile

BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases"

SOURCES = {
    "sonar": f"{BASE}/undocumented/connectionist-bench/sonar/sonar.all-data",
    "parkinsons": f"{BASE}/parkinsons/parkinsons.data",
    "ilpd": f"{BASE}/00225/Indian%20Liver%20Patient%20Dataset%20(ILPD).csv",
    "segment": f"{BASE}/statlog/segment/segment.dat",
}

# Fallback zips on the redesigned archive host.
STATIC_ZIPS = {
    "sonar": ("https://archive.ics.uci.edu/static/public/151/"
              "connectionist+bench+sonar+mines+vs+rocks.zip", "sonar.all-data"),
    "parkinsons": ("https://archive.ics.uci.edu/static/public/174/parkinsons.zip",
                   "parkinsons.data"),
    "ilpd": ("https://archive.ics.uci.edu/static/public/225/ilpd+indian+liver+patient+dataset.zip",
             "Indian Liver Patient Dataset (ILPD).csv"),
    "segment": ("https://archive.ics.uci.edu/static/public/147/statlog+image+segmentation.zip",
                "segment.dat"),
}


def download(name: str) -> str:
    try:
        with urllib.request.urlopen(SOURCES[name], timeout=60) as response:
            return response.read().decode("utf-8", errors="replace")
    except Exception as primary:
        url, member = STATIC_ZIPS[name]
        try:
            with urllib.request.urlopen(url, timeout=60) as response:
                archive = zipfile.ZipFile(io.BytesIO(response.read()))
                return archive.read(member).decode("utf-8", errors="replace")
        except Exception as fallback:
            raise RuntimeError(f"could not fetch {name}: {primary}; fallback: {fallback}")


def prepare_sonar(raw: str) -> list[list[str]]:
    rows = [line.split(",") for line in raw.splitlines() if line.strip()]
    assert all(len(row) == 61 for row in rows), "sonar: expected 60 features + label"
    assert len(rows) == 208, f"sonar: expected 208 rows, got {len(rows)}"
    return rows


def prepare_parkinsons(raw: str) -> list[list[str]]:
    reader = list(csv.reader(io.StringIO(raw)))
    header, body = reader[0], [row for row in reader[1:] if row]
    status = header.index("status")
    keep = [i for i in range(len(header)) if header[i] not in ("name", "status")]
    rows = [[row[i] for i in keep] + [row[status]] for row in body]
    assert all(len(row) == 23 for row in rows), "parkinsons: expected 22 features + label"
    assert len(rows) == 195, f"parkinsons: expected 195 rows, got {len(rows)}"
    return rows


def prepare_ilpd(raw: str) -> list[list[str]]:
    rows = [row for row in csv.reader(io.StringIO(raw)) if row]
    assert all(len(row) == 11 for row in rows), "ilpd: expected 10 features + label"
    assert len(rows) == 583, f"ilpd: expected 583 rows, got {len(rows)}"
    for row in rows:
        row[1] = {"Female": "0", "Male": "1"}[row[1]]
    # fill empty numeric cells (column 9, A/G ratio) with the column mean
    for col in range(10):
        values = [float(row[col]) for row in rows if row[col].strip()]
        mean = sum(values) / len(values)
        for row in rows:
            if not row[col].strip():
                row[col] = repr(mean)
    return rows


def prepare_segment(raw: str) -> list[list[str]]:
    rows = [line.split() for line in raw.splitlines() if line.strip()]
    assert all(len(row) == 20 for row in rows), "segment: expected 19 features + label"
    assert len(rows) == 2310, f"segment: expected 2310 rows, got {len(rows)}"
    return rows


PREPARERS = {
    "sonar": prepare_sonar,
    "parkinsons": prepare_parkinsons,
    "ilpd": prepare_ilpd,
    "segment": prepare_segment,
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data", help="output directory (default: data)")
    parser.add_argument("--only", choices=sorted(SOURCES), action="append",
                        help="fetch a subset")
    args = parser.parse_args()

    import pathlib
    out_dir = pathlib.Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    names = args.only or sorted(SOURCES)
    failures = 0
    for name in names:
        target = out_dir / f"{name}.csv"
        try:
            rows = PREPARERS[name](download(name))
        except Exception as e:
            print(f"error: {e}", file=sys.stderr)
            failures += 1
            continue
        with open(target, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)
        print(f"wrote {target} ({len(rows)} rows)")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
