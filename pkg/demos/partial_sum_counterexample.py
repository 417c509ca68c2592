"""Walk through the c = 1 partial-sum kernel.

The diagonal kernel with coefficients 1/(n+1)^6 is subnormal.  Its Schur
product with the Szego kernel has coefficients 1/p(n), where p(n) is the sum
of (j+1)^6 for j = 0..n.  That product is not subnormal, and this script shows
why: the weight of 1/p(n) dips below zero at a tiny value of t.
"""
import numpy as np

from momentlab.classify import decide, exact_sequence, hausdorff_finite_test
from momentlab.kernelcheck import misra_report
from momentlab.polycore import RealPolynomial, faulhaber_partial_sum, find_roots
from momentlab.weight import build_weight, eval_weight, moments

ONE = RealPolynomial([1.0])


def main():
    p = faulhaber_partial_sum(1, 6)
    print("p(n) coefficients (constant term first):")
    print("  ", np.array2string(np.array(p.coeffs), precision=6))

    roots = find_roots(p)
    print("roots of p:")
    for z, m in roots.entries:
        print(f"   {z.real:+.6f} {z.imag:+.6f}i  (mult {m})")

    w = build_weight(ONE, roots)
    print("moments of the weight against 1/p(n):")
    for r in moments(w, range(6)):
        print(f"   n={r.n}: integral {r.integrated:.12e}  claimed {r.claimed:.12e}")

    v = decide(ONE, p)
    cert = v.certificate
    print(f"verdict: {v.decision} via {v.rule}")
    print(f"   w({cert.witness_t:.3e}) = {float(eval_weight(w, cert.witness_t)):.3e}")

    # the negative lobe is so far out that low-order differences cannot see it
    fd = hausdorff_finite_test(exact_sequence(ONE, p), 30, 30)
    print(f"exact finite differences up to order 30 all nonnegative: {fd.passed}")

    rep = misra_report(1.0)
    print(f"kernel itself: {rep.kernel_verdict.decision} ({rep.kernel_verdict.rule})")


if __name__ == "__main__":
    main()
