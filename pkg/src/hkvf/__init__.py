"""Verification and canonical reduction of rigid flows on conformal surfaces.

Submodules:

- ``mobius``: Mobius transformations, classification, three-point interpolation
- ``surfaces``: the catalog of canonical surfaces (sphere, disc, annuli, ...)
- ``expr``: a tiny expression language for metric factors and vector fields
- ``geometry``: Killing residuals, curvature, geodesics, areas, flows
- ``conformal_maps``: atomic conformal maps and composite chains
- ``verify``: checks the four flow axioms (Killing, nonvanishing, slip, complete)
- ``flowgroup``: reconstructs the one-parameter Mobius family behind a flow
- ``classify``: reduces a verified flow to rotation/translation normal form
- ``cli``: the command-line entry point
"""

__version__ = "0.1.0"
