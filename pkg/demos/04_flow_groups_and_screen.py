"""Recover one-parameter families from samples and screen non-isometries.

A rigid flow pushed to an affine chart is z -> a(t) z + b(t) with
a(t) = exp(a'(0) t).  From a handful of sampled transforms the generator
is recovered by least squares; families with Re a'(0) != 0 expand areas
exponentially and are rejected by the isometry screen.
"""

import numpy as np

from hkvf import surfaces
from hkvf.flowgroup import (
    ROTATION_LIKE,
    GeneratorData,
    fit_family,
    isometry_screen,
    sample_closed_form,
)
from hkvf.geometry import ConformalMetric

FLAT = ConformalMetric(surfaces.plane(), "1")
TIMES = tuple(np.linspace(0.0, 0.6, 7))


def screen(label, gen):
    fit = fit_family(sample_closed_form(gen, TIMES))
    err = max(abs(fit.a_dot0 - gen.a_dot0), abs(fit.b_dot0 - gen.b_dot0))
    verdict = isometry_screen(fit, FLAT)
    word = "accepted" if verdict.accepted else "rejected"
    print(f"== {label} ==")
    print(f"  generator a'(0)={gen.a_dot0}  b'(0)={gen.b_dot0}")
    print(f"  fit error {err:.2e}; screen {word} "
          f"(Re a'(0) = {verdict.re_a_dot0:+.4f})")
    for t, measured, predicted in verdict.area_ratios:
        m = "n/a" if measured is None else f"{measured:.6f}"
        print(f"    area ratio at t={t}: measured {m}, predicted "
              f"{predicted:.6f}")
    print()


def main():
    screen("pure rotation (isometric)",
           GeneratorData(1.3j, 0j, ROTATION_LIKE))
    screen("slow spiral (expands areas)",
           GeneratorData(0.08 + 1.0j, 0j, ROTATION_LIKE))
    screen("contracting spiral",
           GeneratorData(-0.10 + 0.7j, 0j, ROTATION_LIKE))


if __name__ == "__main__":
    main()
