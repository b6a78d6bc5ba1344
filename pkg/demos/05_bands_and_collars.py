"""Band coordinates along a flow and collar charts at a closed boundary.

After reduction, every surface unrolls to a band where the metric factor
depends only on the first coordinate and the flow is the unit vertical
field.  At a closed boundary edge, flowing the inward geodesic produces
a conformal collar chart that continues the surface past the edge.
"""

import math

from hkvf import surfaces
from hkvf.classify import canonical_coordinates, classify_flow, collar_extend
from hkvf.geometry import ConformalMetric, VectorField

ROT = VectorField.rotational()


def main():
    print("== band profile of the round sphere ==")
    sphere = surfaces.riemann_sphere()
    res = classify_flow(sphere, ConformalMetric(sphere, "2/(1+r^2)"), ROT)
    cc = canonical_coordinates(res)
    print(f"  band x1 in [{cc.band[0]:.2f}, {cc.band[1]:.2f}], "
          f"second coordinate an angle: {cc.vertical_periodic}")
    print(f"  profile residual {cc.residual:.2e} over {len(cc.profile)} points")
    print("  x1      lambda(x1)   2 e^x1/(1+e^2x1)")
    for s, v in cc.profile[:: len(cc.profile) // 4]:
        closed = 2.0 * math.exp(s) / (1.0 + math.exp(2.0 * s))
        print(f"  {s:+.3f}  {v:.8f}   {closed:.8f}")
    print()

    print("== collar chart at the outer edge of a closed annulus ==")
    annulus = ConformalMetric(surfaces.closed_annulus(0.5), "1")
    chart = collar_extend(annulus, ROT, 1.0 + 0j, eps=0.3)
    print(f"  base point {chart.base_point}, depth {chart.depth}, "
          f"extension {chart.extension}")
    print(f"  conformality residual {chart.conformality_residual:.2e}")
    print(f"  orthogonality (field vs geodesic) {chart.orthogonality_max:.2e}")
    print("  depth integral f(t) against the closed form -log(1-t):")
    for t, f in chart.f_samples[:: len(chart.f_samples) // 4]:
        print(f"    t={t:+.3f}  f={f:+.6f}  closed={-math.log1p(-t):+.6f}")
    print("  grid rows below y=0 continue the annulus past |z|=1:")
    row0 = chart.grid[0]
    print(f"    outermost row radii: {abs(row0[0]):.4f} .. {abs(row0[-1]):.4f}")


if __name__ == "__main__":
    main()
