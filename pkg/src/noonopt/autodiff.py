"""Gradients of scalar pipeline outputs with respect to the circuit.

Forward mode with an eight-wide tangent: the parameter count is tiny
and fixed, so one dual sweep through the complex Fock pipeline yields
the full gradient.  A central-difference oracle with a documented step
is provided for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import circuit
from . import dualnum as dn

FD_STEP = 1e-5


@dataclass
class Gradient8:
    """One derivative per trainable circuit parameter."""

    d_r: float
    d_loggamma: float
    d_dcoh: float
    d_dsq: float
    d_theta1: float
    d_phi1: float
    d_theta2: float
    d_phi2: float

    def to_array(self) -> np.ndarray:
        return np.array(
            [
                self.d_r,
                self.d_loggamma,
                self.d_dcoh,
                self.d_dsq,
                self.d_theta1,
                self.d_phi1,
                self.d_theta2,
                self.d_phi2,
            ]
        )

    @classmethod
    def from_array(cls, a) -> "Gradient8":
        return cls(*(float(x) for x in a))


def grad(objective, at: circuit.CircuitParams) -> tuple[float, Gradient8]:
    """Value and exact forward-mode gradient of objective at `at`.

    `objective` maps CircuitParams to a real scalar and must be built
    from dual-aware operations.
    """
    out = objective(at.seeded())
    if dn.is_dual(out):
        val = float(np.real(out.val))
        tan = np.real(np.asarray(out.tan, dtype=complex)).astype(float)
    else:
        val, tan = float(out), np.zeros(dn.TANGENT_WIDTH)
    if not np.isfinite(val) or not np.all(np.isfinite(tan)):
        raise FloatingPointError("non-finite objective or gradient")
    return val, Gradient8.from_array(tan)


def fd_gradient(objective, at: circuit.CircuitParams, h: float = FD_STEP) -> Gradient8:
    """Central-difference oracle, one parameter at a time."""
    base = at.to_vector()
    out = np.empty(len(base))
    for i in range(len(base)):
        up, dn_ = base.copy(), base.copy()
        up[i] += h
        dn_[i] -= h
        f_up = float(dn.value(objective(circuit.CircuitParams.from_vector(up))))
        f_dn = float(dn.value(objective(circuit.CircuitParams.from_vector(dn_))))
        out[i] = (f_up - f_dn) / (2 * h)
    return Gradient8.from_array(out)
