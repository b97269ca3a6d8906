#!/usr/bin/env python3
"""Regenerate the scripted mock responses for the desk corpus.

Writes <out>/index.json plus numbered response files. Test-generation
responses are shared by every seeding mutant of a problem (each loop replays
the sequence from its start); debug responses are scripted per target.
"""
import argparse
import json
import random
from pathlib import Path

HEADERS = {
    "full_adder": [("a", 1), ("b", 1), ("c", 1)],
    "alu4": [("op", 2), ("x", 4), ("y", 4)],
    "arbiter": [("rst", 1), ("r1", 1), ("r2", 1)],
    "bcd_counter": [("reset", 1), ("en", 1)],
    "seq_detect": [("rst_n", 1), ("din", 1)],
}
SEQUENTIAL = {"arbiter", "bcd_counter", "seq_detect"}
RESET_ACTIVE = {"rst": 1, "reset": 1, "rst_n": 0}


def header(ports):
    return "inputs: " + ", ".join(f"{n}[{w}]" for n, w in ports)


def row(ports, values):
    return " ".join(format(v, f"0{w}b") for (_, w), v in zip(ports, values))


def random_rows(ports, cycles, rng, reset_rate=0):
    rows = []
    for n in range(cycles):
        values = [rng.getrandbits(w) for _, w in ports]
        name = ports[0][0]
        if name in RESET_ACTIVE:
            active = n == 0 or (reset_rate and rng.randrange(reset_rate) == 0)
            values[0] = RESET_ACTIVE[name] if active else 1 - RESET_ACTIVE[name]
        rows.append(row(ports, values))
    return rows


def stimulus(ports, rows):
    return header(ports) + "\n" + "\n".join(rows) + "\n"


def fenced(text, lead="Here is the unit test."):
    return f"{lead}\n\n```\n{text}```\n\nEach row is one clock cycle.\n"


def testgen_script(problem, rng):
    ports = HEADERS[problem]
    if problem == "full_adder":
        rows = [row(ports, [(v >> 2) & 1, (v >> 1) & 1, v & 1]) for v in range(8)]
        return [fenced(stimulus(ports, rows), "All eight input combinations:")]
    if problem not in SEQUENTIAL:
        return [fenced(stimulus(ports, random_rows(ports, 24, rng)))]
    short = stimulus(ports, random_rows(ports, 4, rng))
    longer = stimulus(ports, random_rows(ports, 16, rng, reset_rate=8))
    reordered = header(list(reversed(ports))) + "\n" + "\n".join(
        random_rows(ports, 6, rng)) + "\n"
    longest = stimulus(ports, random_rows(ports, 40, rng, reset_rate=10))
    return [
        fenced(short, "A first short test:"),
        fenced(short, "Trying the same sequence again:"),
        fenced(longer, "A longer test reaching more states:"),
        fenced(reordered, "A test with the columns listed differently:"),
        fenced(longest, "A long randomized test:"),
    ]


def module_block(text, lead="Here is the corrected module."):
    return f"{lead}\n\n```verilog\n{text.rstrip()}\n```\n"


def debug_script(problem, bc, ref, buggy):
    # Fixed per-problem personalities keep the distribution interesting.
    if problem == "full_adder":
        return [module_block(ref)]
    if problem == "alu4":
        return [module_block(buggy, "The design looks correct to me."), module_block(ref)]
    if problem == "arbiter":
        broken = ref.replace("endcase", "endcas", 1)
        renamed = ref.replace("output reg g2", "output reg grant2").replace("g2 <=", "grant2 <=")
        return [module_block(broken), module_block(renamed), module_block(ref)]
    if problem == "bcd_counter":
        return ["I could not find the bug from the mismatches alone.\n", module_block(ref)]
    # seq_detect: never repaired, every answer repeats the buggy design.
    return [module_block(buggy, "No change is needed.")] * 5


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--problems", default="data/problems")
    ap.add_argument("--out", default="data/mock/desk")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for old in out.glob("*.txt"):
        old.unlink()
    files = []
    sequences = {}

    def add(text):
        name = f"{len(files) + 1:04d}.txt"
        (out / name).write_text(text)
        files.append(name)
        return name

    for problem in sorted(HEADERS):
        pdir = Path(args.problems) / problem
        sequences[f"{problem}/testgen"] = [add(t) for t in testgen_script(problem, rng)]
        ref = (pdir / "ref.sv").read_text()
        manifest = json.loads((pdir / "manifest.json").read_text())
        for m in manifest["mutants"]:
            buggy = (pdir / m["file"]).read_text()
            sequences[f"{problem}/{m['bc']}/debug"] = [
                add(t) for t in debug_script(problem, m["bc"], ref, buggy)]
    index = {"digests": {}, "sequences": sequences}
    (out / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(files)} responses to {out}")


if __name__ == "__main__":
    main()
