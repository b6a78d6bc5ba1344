"""Classify Mobius transformations and build them from point data.

Walks through the four conjugacy kinds on the disc, shows how the trace
of the unit-determinant representative decides the kind, and finishes
with three-point interpolation.
"""

import numpy as np

from hkvf.mobius import INF, MobiusTransform, from_three_points, random_transform


def show(label, m):
    cls = m.classify()
    fixed = "whole sphere" if cls.kind == "identity" else cls.fixed_points
    print(f"{label:<28} kind={cls.kind:<11} trace={cls.trace:.4f} fixed={fixed}")


def main():
    print("== the standard kinds ==")
    show("identity", MobiusTransform.identity())
    show("rotation about 0", MobiusTransform(np.exp(0.5j), 0, 0, 1))
    theta = 0.7
    show("boundary-parabolic at -1",
         MobiusTransform(1 + 1j * theta, 1j * theta, -1j * theta, 1 - 1j * theta))
    show("axis through -1, 1", MobiusTransform(1, 0.4, 0.4, 1))
    show("spiral (loxodromic)", MobiusTransform(np.exp(0.3 + 1j), 0, 0, 1))

    print()
    print("== conjugation preserves the kind ==")
    rng = np.random.default_rng(7)
    m = MobiusTransform(1, 0.4, 0.4, 1)
    for _ in range(3):
        h = random_transform(rng)
        show("  conjugated copy", m.conjugate_by(h))

    print()
    print("== a transform from three point pairs ==")
    # send 1 -> i, i -> -1, -1 -> -i: the quarter rotation
    m = from_three_points([1, 1j, -1], [1j, -1, -1j])
    show("quarter turn", m)
    print(f"  0 -> {m(0j)}, infinity -> {m(INF)}")


if __name__ == "__main__":
    main()
