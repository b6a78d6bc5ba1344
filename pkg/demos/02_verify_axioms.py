"""Verify the flow axioms for fields on canonical surfaces.

A rigid flow must be Killing (isometric), nowhere zero, tangent to any
boundary (slip), and complete.  The round sphere's rotation passes all
four; two small perturbations each break exactly one axiom.
"""

from hkvf import surfaces
from hkvf.geometry import ConformalMetric, VectorField
from hkvf.verify import VerifyOptions, verify


def report(title, rep):
    print(f"== {title} ==")
    for c in rep.checks:
        extra = ""
        if c.escape_time is not None:
            extra = f"  [escape at t={c.escape_time:.3f}]"
        print(f"  {c.name:<18} {c.status:<15} worst={c.worst:.3g}{extra}")
    verdict = "a rigid flow" if rep.is_hkvf else "not a rigid flow"
    print(f"  -> {verdict}")
    if rep.periodic is not None:
        p = rep.periodic
        period = f" (period {p.period:.6f})" if p.period else ""
        print(f"  -> orbits periodic: {p.periodic}{period}")
    print()


def main():
    sphere = ConformalMetric(surfaces.riemann_sphere(), "2/(1+r^2)")
    report("rotation of the round sphere",
           verify(sphere, VectorField.rotational()))

    flat_disc = ConformalMetric(surfaces.closed_disc(), "1")
    report("horizontal drift against the disc wall (slip fails)",
           verify(flat_disc, VectorField("1", "0")))

    punctured = ConformalMetric(surfaces.punctured_plane(), "1")
    report("horizontal drift into the puncture (completeness fails)",
           verify(punctured, VectorField("1", "0"),
                  VerifyOptions(seeds=(-1.0 + 0j,))))


if __name__ == "__main__":
    main()
