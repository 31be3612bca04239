"""The interferometer: sources, preparation optics, and readout.

Mode 0 carries a coherent state |alpha> with alpha = sqrt(gamma * r);
mode 1 carries squeezed vacuum with parameter r.  Preparation applies a
phase d_coh to the coherent arm, d_sq to the squeezed arm, then mixes on
a beamsplitter (theta1, phi1).  Readout rotates mode 0 by the unknown
phase phi_est and mixes on a second beamsplitter (theta2, phi2) before
photon-number-resolved detection.

Beamsplitter phase convention: relative to the bare generator used by
:func:`noonopt.fock.beamsplitter`, the first splitter carries a fixed
+pi/2 phase offset and the second a fixed +pi offset (the latter is the
same as flipping the sign of theta2).  At the standard working point
(phi1=0, phi2=pi) this mixes the two pair amplitudes - coherent-arm
double emission and squeezed-arm pair - in quadrature at BS1, which is
the setting that interferes them into balanced |20>/|02> superpositions,
and makes the readout splitter a real one, which parks the coincidence
minima inside the scanned phase window.  Without the offsets those same
literal angles leave the pair amplitudes in phase at BS1 and the
interference fringes collapse.  The offsets are constants folded into
the circuit, not extra parameters: phi1 and phi2 remain free and
trainable, and any constant offset is absorbed by them during
optimization.

Eight real parameters are trainable; ``PARAM_NAMES`` fixes their order
everywhere (tangent slots, trace columns, serialized vectors).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dualnum as dn
from . import fock

PARAM_NAMES = (
    "r",
    "log_gamma",
    "d_coh",
    "d_sq",
    "theta1",
    "phi1",
    "theta2",
    "phi2",
)

# Detection patterns (mode-0 count, mode-1 count) targeted per total
# photon number.  Ordered pairs: (2,0) and (0,2) are distinct channels.
PATTERNS = {
    2: ((1, 1), (2, 0)),
    3: ((2, 1), (3, 0)),
    4: ((3, 1), (2, 2)),
    5: ((3, 2),),
}

# Pump ratio gamma = alpha^2 / r giving the best NOON fidelity at each N
# for the fixed-source working point.
AFEK_GAMMA = {2: 1.0, 3: 1.0, 4: np.sqrt(3.0), 5: 1.925}

# Fixed beamsplitter phase offsets (see module docstring).
BS1_PHASE_OFFSET = np.pi / 2
BS2_PHASE_OFFSET = np.pi


def pattern_set(n_total: int) -> tuple:
    """Monitored (mode-0, mode-1) coincidence patterns for a given N."""
    if n_total not in PATTERNS:
        raise ValueError(f"no pattern table for N={n_total}")
    return PATTERNS[n_total]


@dataclass
class CircuitParams:
    r: object
    log_gamma: object
    d_coh: object
    d_sq: object
    theta1: object
    phi1: object
    theta2: object
    phi2: object

    @classmethod
    def from_vector(cls, vec) -> "CircuitParams":
        return cls(*vec)

    def to_vector(self) -> np.ndarray:
        return np.array([float(dn.value(getattr(self, k))) for k in PARAM_NAMES])

    def seeded(self) -> "CircuitParams":
        """Dual copy with one tangent slot per parameter."""
        return CircuitParams(
            *(
                dn.Dual.seed(float(dn.value(getattr(self, k))), i)
                for i, k in enumerate(PARAM_NAMES)
            )
        )


def afek_init(n_total: int) -> tuple[CircuitParams, int]:
    """Fixed-source working point and its cutoff, the optimizer's start."""
    if n_total not in AFEK_GAMMA:
        raise ValueError(f"no tabulated working point for N={n_total}")
    params = CircuitParams(
        r=0.35,
        log_gamma=float(np.log(AFEK_GAMMA[n_total])),
        d_coh=0.0,
        d_sq=0.0,
        theta1=np.pi / 4,
        phi1=0.0,
        theta2=np.pi / 4,
        phi2=np.pi,
    )
    return params, fock.cutoff_for(n_total)


def prepare_probe(params: CircuitParams, c: int) -> fock.TwoModeState:
    """State entering the phase shift, before any phi_est dependence."""
    gamma = dn.exp(params.log_gamma)
    alpha = dn.sqrt(gamma * params.r)
    state = fock.tensor_product(
        fock.coherent_amplitudes(alpha, c),
        fock.squeezed_vacuum_amplitudes(params.r, c),
        c,
    )
    state = fock.phase_rotation(state, 0, params.d_coh)
    state = fock.phase_rotation(state, 1, params.d_sq)
    return fock.beamsplitter(state, params.theta1, params.phi1 + BS1_PHASE_OFFSET)


def readout_blocks(params: CircuitParams, c: int) -> list:
    """Cached second-beamsplitter blocks (phi_est independent)."""
    return fock.bs_blocks(params.theta2, params.phi2 + BS2_PHASE_OFFSET, c)


def apply_readout(probe: fock.TwoModeState, phi_est, blocks: list) -> fock.TwoModeState:
    return fock.apply_bs_blocks(fock.phase_rotation(probe, 0, phi_est), blocks)


def forward(params: CircuitParams, phi_est, c: int) -> fock.TwoModeState:
    """Full circuit: probe, phase phi_est on mode 0, readout beamsplitter."""
    probe = prepare_probe(params, c)
    return apply_readout(probe, phi_est, readout_blocks(params, c))


def pattern_probability(params: CircuitParams, phi_est, pattern: tuple[int, int], c: int):
    """P(pattern | phi_est) for one coincidence pattern."""
    return fock.coincidence_probability(forward(params, phi_est, c), pattern)


def pattern_probabilities(params: CircuitParams, patterns, phi_grid, c: int) -> dict:
    """P_pattern(phi) for each requested pattern over a phase grid.

    Shares the probe and readout blocks across the grid; returns
    {pattern: array of len(phi_grid)} of plain floats.
    """
    probe = prepare_probe(params, c)
    blocks = readout_blocks(params, c)
    out = {p: np.empty(len(phi_grid)) for p in patterns}
    for i, phi in enumerate(phi_grid):
        final = apply_readout(probe, phi, blocks)
        for p in patterns:
            out[p][i] = float(dn.value(fock.coincidence_probability(final, p)))
    return out
