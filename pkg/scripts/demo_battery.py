"""Run the worked-example battery for several Cuntz algebras and print a table."""
import argparse
import time

from projsum.cli import demo_battery


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("ns", nargs="*", type=int, default=[2, 3, 4, 5, 7])
    args = ap.parse_args()
    for n in args.ns:
        t0 = time.perf_counter()
        items = demo_battery(n)
        print(f"O_{n}  (K0 = Z/{n - 1})  {time.perf_counter() - t0:.2f}s")
        for it in items:
            flag = "ok " if it["valid"] else "BAD"
            print(f"  {flag} {it['name']:<24} projections={it['projections']:>6}  residual={it['max_residual']:.1e}")


if __name__ == "__main__":
    main()
