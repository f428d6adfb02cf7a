"""Run every built-in scenario and print its checks.

    python scripts/reproduce_figures.py --out results --threads 4
    python scripts/reproduce_figures.py fig6-snac fig6-lzt
"""

import argparse
import time

from snacsim.experiments import builtin_scenarios, run_scenario, scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("names", nargs="*", help="scenario ids (default: all)")
    ap.add_argument("--out", default="results")
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args()

    names = args.names or list(builtin_scenarios())
    failed = 0
    for name in names:
        t0 = time.perf_counter()
        rs = run_scenario(scenario(name), out_dir=f"{args.out}/{name}", threads=args.threads)
        print(f"{name}  ({len(rs.rows)} rows, {time.perf_counter() - t0:.1f} s)")
        for c in rs.checks:
            failed += not c["passed"]
            print(f"    {'PASS' if c['passed'] else 'FAIL'}  {c.get('name', c['metric'])}: {c['value']}")
    print(f"{failed} check(s) failed")


if __name__ == "__main__":
    main()
