#!/usr/bin/env python3
"""Run every experiment with the bundled configs into ./out/.

Everything is deterministic: rerunning overwrites byte-identical files.
"""

import pathlib
import sys

from nlasim.cli import main

HERE = pathlib.Path(__file__).resolve().parent
CONFIGS = {
    "table1": "table1.cfg",
    "linearity": "linearity.cfg",
    "fringe": "fringe.cfg",
    "vis-tau": "vis_tau.cfg",
    "epr": "epr.cfg",
    "bound": "bound.cfg",
}


def run(out_dir: pathlib.Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    for sub, cfg in CONFIGS.items():
        out = out_dir / f"{sub.replace('-', '_')}.csv"
        print(f"== {sub} -> {out}")
        code = main([sub, "--config", str(HERE / "configs" / cfg), "--out", str(out)])
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    target = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path("out")
    sys.exit(run(target))
