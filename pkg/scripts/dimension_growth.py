"""How the largest matrix and the projection count grow as alpha approaches 1.

For alpha = 1 + 1/d on the zero class both routes are compared: the direct
rational construction (dimension d) and the real-number construction.
"""
import argparse
import time
from fractions import Fraction

from projsum.errors import DimensionCapExceeded
from projsum.ktheory import KGroup
from projsum.strategies import SpectralElement, real_projected_dim, strat_spectral
from projsum.verify import verify_certificate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim-cap", type=int, default=2000)
    ap.add_argument("--ds", type=int, nargs="*", default=[2, 3, 5, 10, 20, 50, 100, 400, 1000])
    args = ap.parse_args()
    print(f"{'alpha':>10} {'rational dim':>13} {'real dim':>9} {'route':>9} {'projections':>12} {'secs':>6}")
    for d in args.ds:
        alpha = 1 + Fraction(1, d)
        real_dim = real_projected_dim(alpha)
        t0 = time.perf_counter()
        try:
            cert = strat_spectral(SpectralElement(KGroup(()), ((alpha, ()),)), dim_cap=args.dim_cap)
            rep = verify_certificate(cert)
            route = "rational" if any(n == "strat_rational" for n, _ in cert.strategy_trace[:3]) else "real"
            count = str(rep.projections) if rep.valid else "INVALID"
        except DimensionCapExceeded as exc:
            route, count = "capped", f">{exc.cap}"
        print(f"{str(alpha):>10} {d:>13} {real_dim:>9} {route:>9} {count:>12} {time.perf_counter() - t0:>6.2f}")


if __name__ == "__main__":
    main()
