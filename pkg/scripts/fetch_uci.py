#!/usr/bin/env python3
"""Download the real UCI datasets behind the bundled synthetic stand-ins.

Requires ordinary internet access (not available in every build sandbox).
Writes CSVs with headers compatible with the bundled files, so the acceptance
tests pick them up automatically:

    data/banknote_authentication.csv   (1372 rows, 4 features)
    data/blood_transfusion.csv         (748 rows, 4 features)
"""

import csv
import io
import sys
import urllib.request
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data"

BANKNOTE_URL = ("https://archive.ics.uci.edu/ml/machine-learning-databases/"
                "00267/data_banknote_authentication.txt")
TRANSFUSION_URL = ("https://archive.ics.uci.edu/ml/machine-learning-databases/"
                   "blood-transfusion/transfusion.data")


def fetch(url: str) -> str:
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read().decode("utf-8")


def main() -> int:
    OUT.mkdir(exist_ok=True)
    try:
        banknote = fetch(BANKNOTE_URL)
        transfusion = fetch(TRANSFUSION_URL)
    except OSError as exc:
        print(f"download failed ({exc}); are you online?", file=sys.stderr)
        return 1

    path = OUT / "banknote_authentication.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variance", "skewness", "curtosis", "entropy", "target"])
        for row in csv.reader(io.StringIO(banknote)):
            if row:
                writer.writerow(row)
    print(f"wrote {path}")

    path = OUT / "blood_transfusion.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["recency", "frequency", "monetary", "time", "target"])
        rows = list(csv.reader(io.StringIO(transfusion)))
        for row in rows[1:]:  # the source file carries its own header
            if row:
                writer.writerow(row)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
