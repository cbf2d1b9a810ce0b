#!/usr/bin/env python3
"""Writes git_log_50.txt and the expected per-commit loc sums next to it.

The expectations are computed here, from the generated numbers, so the C++
parser is checked against an independent tally."""
import json
import random
from pathlib import Path

here = Path(__file__).parent
rng = random.Random(50)
authors = ["alice", "bob", "carol", "codebot[bot]", "ci-agent-7"]
dirs = ["core", "ui", "net", "docs", "build/scripts", ""]

lines, expected = [], []
ts = 1_700_000_000
for i in range(50):
    ts += rng.randint(60, 7200)
    cid = f"{rng.getrandbits(64):016x}"
    lines.append(f"H|{cid}|{ts}|{rng.choice(authors)}")
    loc, modules = 0, set()
    for _ in range(rng.randint(0, 4)):
        d = rng.choice(dirs)
        path = f"{d}/f{rng.randint(0, 9)}.c" if d else f"README{rng.randint(0, 3)}.md"
        if rng.random() < 0.1:
            lines.append(f"-\t-\t{path}")
            continue
        a, r = rng.randint(0, 300), rng.randint(0, 120)
        lines.append(f"{a}\t{r}\t{path}")
        loc += a - r
        modules.add(d.split("/")[0] if d else ".")
    if rng.random() < 0.2:
        lines.append("")
    expected.append({"commit_id": cid, "ts": ts, "loc_delta": loc, "modules": sorted(modules)})

(here / "git_log_50.txt").write_text("\n".join(lines) + "\n")
(here / "git_log_50.expected.json").write_text(json.dumps(expected, indent=1) + "\n")
