#!/usr/bin/env python3
"""Recompute AR/DR/DA of every evaluated cell of a run directory from the
dumped VCD traces and compare them with matrix.json and matrix.csv.

Shares no code with the C++ pipeline: VCDs are read with a small parser
below and divergence is counted cycle by cycle.

Exit 0 when every cell matches exactly, 1 on any disagreement, 2 on bad input.
"""
import csv
import json
import sys
from pathlib import Path


def read_vcd(path):
    """Returns (cycles, {name: [value per cycle]})."""
    ids = {}
    values = {}
    current = {}
    last = None
    in_header = True

    def hold(times):
        for name, v in current.items():
            values[name].extend([v] * times)

    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if in_header:
            if line.startswith("$var"):
                parts = line.split()
                ids[parts[3]] = parts[4]
                values[parts[4]] = []
            elif line.startswith("$enddefinitions"):
                in_header = False
            continue
        if line.startswith("#"):
            t = int(line[1:])
            if last is not None:
                hold(t - last)
            last = t
        elif line.startswith("$"):
            continue
        elif line[0] in "bB":
            bits, ident = line[1:].split()
            current[ids[ident]] = int(bits, 2)
        else:
            current[ids[line[1:]]] = int(line[0])
    if last is None:
        return 0, values
    hold(1)
    cycles = last + 1
    for name, seq in values.items():
        if len(seq) != cycles:
            raise ValueError(f"{path}: {name} has {len(seq)} samples for {cycles} cycles")
    return cycles, values


def check_problem(pdir):
    matrix = json.loads((pdir / "matrix.json").read_text())
    outputs = [o["name"] for o in matrix["outputs"]]
    suites = {g["source"]: g["accepted"] for g in matrix.get("generation", [])}
    with open(pdir / "matrix.csv", newline="") as f:
        rows = {(r["source"], r["target"]): r for r in csv.DictReader(f)}
    checked = 0
    errors = []
    for cell in matrix["cells"]:
        if cell["status"] != "ok":
            continue
        src, tgt = cell["source"], cell["target"]
        total = divergent = 0
        for test_id in suites[src]:
            base = pdir / "traces" / src.lower() / test_id
            n_exp, exp = read_vcd(base / "oracle.vcd")
            n_act, act = read_vcd(base / (tgt.lower() + ".vcd"))
            if n_exp != n_act:
                errors.append(f"{src}->{tgt} {test_id}: cycle counts differ")
                continue
            total += n_exp
            for c in range(n_exp):
                if any(exp[o][c] != act[o][c] for o in outputs):
                    divergent += 1
        ar = 1 if divergent > 0 else 0
        dr = divergent / total if total else 0.0
        da = dr if ar else 0.0
        where = f"{pdir.name} {src}->{tgt}"
        if (cell["ar"], cell["dr"], cell["da"]) != (ar, dr, da):
            errors.append(f"{where}: pipeline {cell['ar']},{cell['dr']},{cell['da']} "
                          f"recomputed {ar},{dr},{da}")
        if (cell["divergent_cycles"], cell["total_cycles"]) != (divergent, total):
            errors.append(f"{where}: cycle counts differ")
        row = rows.get((src, tgt))
        if row is None or (int(row["ar"]), float(row["dr"]), float(row["da"])) != (ar, dr, da):
            errors.append(f"{where}: matrix.csv disagrees")
        if not (da <= dr and da <= ar):
            errors.append(f"{where}: DA bound violated")
        checked += 1
    return checked, errors


def main(argv):
    if len(argv) != 2:
        print("usage: crosscheck_metrics.py RUN_DIR", file=sys.stderr)
        return 2
    run = Path(argv[1])
    problems = sorted(p for p in run.iterdir() if (p / "matrix.csv").exists())
    if not problems:
        print(f"no evaluated problems in {run}", file=sys.stderr)
        return 2
    checked = 0
    errors = []
    for p in problems:
        n, e = check_problem(p)
        checked += n
        errors += e
    for e in errors:
        print(e, file=sys.stderr)
    print(f"{checked} cells checked, {len(errors)} disagreements")
    return 0 if not errors and checked > 0 else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv))
