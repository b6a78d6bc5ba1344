"""Reduce rigid flows to their rotation/translation normal forms.

Three flows that look different in their given charts reduce to the two
model motions: e^{it} z about the origin, or z + it up a strip.  The
conformal chain, time rescale, and residuals document each reduction.
"""

from hkvf import surfaces
from hkvf.classify import classify_flow
from hkvf.geometry import ConformalMetric, VectorField


def show(title, res):
    atoms = " -> ".join(a.kind for a in res.chain.atoms) or "identity"
    print(f"== {title} ==")
    print(f"  target       {res.target.to_dict()}")
    print(f"  normal form  {res.normal_form} (periodic branch: "
          f"{res.periodic_branch})")
    print(f"  chain        {atoms}")
    print(f"  time rescale {res.rescale:.6f}")
    if res.lattice is not None:
        print(f"  lattice      {res.lattice:.6f}")
    print(f"  residuals    flow {res.residuals['normal_form']:.2e}, "
          f"symmetry {res.residuals['symmetry']:.2e}")
    print()


def main():
    # an elliptic motion of the hyperbolic disc about the interior point 0.3
    u = "(0.6*x*y - 1.09*y)/0.91"
    v = "(-0.3*(x^2-y^2) + 1.09*x - 0.3)/0.91"
    disc = surfaces.disc()
    res = classify_flow(disc, ConformalMetric(disc, "2/(1-r^2)"),
                        VectorField(u, v))
    show("off-center elliptic motion of the hyperbolic disc", res)
    print(f"  (the chain recenters 0.3 to the origin: "
          f"0.3 -> {abs(res.chain.apply(0.3 + 0j)):.2e})")
    print()

    # a hyperbolic motion of the disc: fixes -1 and 1, aperiodic, so it
    # reduces to a translation of the channel
    X = VectorField("(1 - x^2 + y^2)/4", "-x*y/2")
    res = classify_flow(disc, ConformalMetric(disc, "2/(1-r^2)"), X)
    show("axis motion of the hyperbolic disc", res)

    # a spiral on the punctured plane: rotation and dilation mixed; the
    # flow unrolls to a vertical translation of a slanted cylinder
    spiral = VectorField("0.2*x - y", "x + 0.2*y")
    pp = surfaces.punctured_plane()
    res = classify_flow(pp, ConformalMetric(pp, "1/r"), spiral)
    show("logarithmic spiral on the cone metric", res)


if __name__ == "__main__":
    main()
