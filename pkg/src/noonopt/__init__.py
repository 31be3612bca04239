"""Differentiable two-mode Fock simulator and Fisher-information optimizer.

The pipeline models a coherent + squeezed-vacuum interferometer with
photon-number-resolved detection, scores its coincidence fringes by
classical Fisher information, and tunes the eight circuit parameters by
Adam on a smooth CFI surrogate.  See the module docstrings for the
individual layers:

``fock``       truncated two-mode states and passive optics
``dualnum``    forward-mode dual numbers with an 8-wide tangent
``circuit``    the eight-parameter interferometer
``metrology``  fringes, CFI/QFI estimators, efficiency metrics
``autodiff``   gradients of any scalar pipeline output
``optimizer``  loss, calibration, Adam loop, multi-start
``wigner``     displaced-parity Wigner functions and negativity
``reporting``  run persistence and feasibility arithmetic
``cli``        the ``noonopt`` command
"""

from . import autodiff, circuit, dualnum, fock, metrology, optimizer, reporting, wigner

__all__ = [
    "autodiff",
    "circuit",
    "dualnum",
    "fock",
    "metrology",
    "optimizer",
    "reporting",
    "wigner",
]

__version__ = "0.1.0"
