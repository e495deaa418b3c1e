"""Run every scenario config in scripts/configs through the CLI.

    python3 scripts/run_all.py [--threads N] [--only NAME ...]
"""

import argparse
import pathlib
import time

from singular_elliptic.cli import main

HERE = pathlib.Path(__file__).resolve().parent


def run():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--only", nargs="*", default=None)
    args = ap.parse_args()
    codes = {}
    for cfg in sorted((HERE / "configs").glob("*.json")):
        if args.only and cfg.stem not in args.only:
            continue
        t0 = time.perf_counter()
        codes[cfg.stem] = main(["run", str(cfg), "--threads", str(args.threads)])
        print(f"{cfg.stem:28s} exit {codes[cfg.stem]}  {time.perf_counter() - t0:7.1f} s")
    return max(codes.values(), default=0)


if __name__ == "__main__":
    raise SystemExit(run())
