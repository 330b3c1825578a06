"""Moment checks of the QR factors of real and complex Gaussian matrices."""

import argparse

from weakcond.mc import qr_ensemble_check


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sizes", type=int, nargs="+", default=[2, 4])
    a = ap.parse_args(argv)
    for n in a.sizes:
        for beta in (1, 2):
            res = qr_ensemble_check(n, beta, a.samples, a.seed)
            failed = [k for k, v in res["checks"].items() if not v["pass"]]
            print(f"n={n} beta={beta}: {'passed' if res['passed'] else 'FAILED ' + ','.join(failed)}")


if __name__ == "__main__":
    main()
