"""Run every experiment config in scripts/configs and summarize the exit statuses.

Usage: python3 scripts/run_experiments.py [--out results] [--jobs 4] [--only NAME ...]
"""
import argparse
import json
import pathlib
import time

from ppt import cli

HERE = pathlib.Path(__file__).resolve().parent
STATUS = {0: "ok", 1: "violations", 2: "config error", 3: "solver error"}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--only", nargs="*", default=None, help="config stems to run")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    for cfg in sorted((HERE / "configs").glob("*.json")):
        if args.only and cfg.stem not in args.only:
            continue
        t0 = time.perf_counter()
        code = cli.main(["run", str(cfg), "--out", str(out / cfg.stem), "--jobs", str(args.jobs)])
        dt = time.perf_counter() - t0
        line = f"{cfg.stem:<18} exit {code} ({STATUS.get(code, '?')}) in {dt:6.1f}s"
        rep = out / cfg.stem / "report.json"
        if rep.exists():
            for e in json.loads(rep.read_text())["experiments"]:
                line += f"\n    {e['name']:<24} rows={e['rows']:<6} violations={e['violations']}"
        print(line, flush=True)


if __name__ == "__main__":
    main()
