"""Figure scripts over the experiment CSV schemas.

Standalone by design: these scripts read only the documented CSV columns
and re-implement the Marchenko-Pastur density from its closed form, so
they carry no dependency on the sampling package.
"""

__version__ = "0.1.0"
