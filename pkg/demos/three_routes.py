"""Compute one weight function three independent ways and compare them."""
import numpy as np

from momentlab.convo import weight_via_convolution
from momentlab.divdiff import weight_via_divdiff
from momentlab.polycore import RealPolynomial, RootMultiset
from momentlab.weight import build_weight, eval_weight

ONE = RealPolynomial([1.0])


def main():
    roots = RootMultiset.from_triples([(-0.8, 0.0, 2), (-1.5, 1.2, 1)])
    t = np.logspace(-6, 0, 7)
    pfd = eval_weight(build_weight(ONE, roots), t)
    dd = weight_via_divdiff(ONE, roots, t)
    conv = weight_via_convolution(roots, t)
    print(f"{'t':>10} {'partial fractions':>20} {'divided diff':>20} {'convolution':>20}")
    for row in zip(t, pfd, dd, conv):
        print(f"{row[0]:10.1e} " + " ".join(f"{v:20.12e}" for v in row[1:]))


if __name__ == "__main__":
    main()
