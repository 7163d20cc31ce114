"""Random matrix product states under the sequential and Fubini-Study measures.

Core entry points:

- :func:`fsmps.mps.sample_rmps` / :func:`fsmps.mps.sample_central_gauge`
  draw from the two reference ensembles;
- :func:`fsmps.measure.fs_log_weight` is the determinant correction that
  turns the sequential measure into the Fubini-Study one;
- :func:`fsmps.sampler.run_fs_sampler` is the Metropolis-Hastings sampler
  for the corrected measure;
- :mod:`fsmps.spectra` holds the Marchenko-Pastur references and the
  S-transform transfer map;
- ``fsmps`` (CLI) drives reproducible experiments; see the README.
"""

from .kernels import BACKEND as kernel_backend
from .linalg import RngStream
from .mps import BondProfile, Mps, RightEnvironments, bond_profile

__version__ = "0.1.0"

__all__ = [
    "BondProfile",
    "Mps",
    "RightEnvironments",
    "RngStream",
    "bond_profile",
    "kernel_backend",
    "__version__",
]
