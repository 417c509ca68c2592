"""Classify small families of rational sequences and print the rule that decided each."""
from momentlab.classify import classify_degree3, classify_degree5_vertical, decide_roots
from momentlab.polycore import RealPolynomial, RootMultiset

ONE = RealPolynomial([1.0])


def main():
    print("1/((n+1)((n-a)(n-conj a))) as the pair moves across Re a = -1:")
    for x in (-1.3, -1.1, -1.0, -0.9, -0.7):
        v = classify_degree3(-1.0, complex(x, 2.0))
        print(f"   a = {x:+.1f}+2i: {v.decision:<10} boundary={v.boundary_flag}")

    print("two pairs on the line Re z = -1 with imaginary parts 1 and u:")
    for u in (1.0, 1.5, 2.0, 2.5, 3.0, 4.0):
        v = classify_degree5_vertical(-1.0, 1.0, u)
        print(f"   u = {u}: {v.decision}")

    roots = RootMultiset.from_triples([(-1.0, 0.0, 1), (-2.0, 0.0, 1), (-0.5, 3.0, 1), (-3.0, 0.0, 1)])
    v = decide_roots(ONE, roots)
    print(f"dominant pair at -0.5 +- 3i: {v.decision} via {v.rule}")


if __name__ == "__main__":
    main()
