"""Certified experiments on return-time sets.

Seven largely independent pieces: integer sequence generators and the
alternating splitter (seqcore), circle rotation witnesses and
separation scans (circle), rigid product measures and their Gaussian
overlap models (specmeasure), cutting-and-stacking towers with exact
overlap accounting (rankone), diagonal-plus-shift operators with
certified power norms (linsys), progression block families (bohrgen),
and a config-driven experiment runner (cli).  Everything user-facing
reports through the certificate schema in ``certificates``.

Submodules import numpy and mpmath on demand; ``import recurlab``
alone stays cheap.
"""

__version__ = "0.1.0"

__all__ = [
    "bohrgen",
    "certificates",
    "circle",
    "cli",
    "linsys",
    "precision",
    "rankone",
    "ratintervals",
    "seqcore",
    "specmeasure",
]
