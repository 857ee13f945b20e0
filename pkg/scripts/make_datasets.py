#!/usr/bin/env python3
"""Regenerate the bundled CSVs in data/ from the deterministic generators."""

from pathlib import Path

from gdtree.synth import banknote_like, transfusion_like, write_csv, xor_grid

OUT = Path(__file__).resolve().parent.parent / "data"


def main():
    OUT.mkdir(exist_ok=True)
    for name, ds in [
        ("xor_grid.csv", xor_grid()),
        ("banknote_synth.csv", banknote_like()),
        ("transfusion_synth.csv", transfusion_like()),
    ]:
        write_csv(ds, OUT / name)
        print(f"wrote {OUT / name} ({ds.n_rows} rows, {ds.n_features} features)")


if __name__ == "__main__":
    main()
