"""Truncated two-mode Fock space: states, sources, and passive optics.

States live on a square amplitude grid ``amps[n0, n1]`` with both mode
occupations truncated at a shared photon-number cutoff.  Source
truncation loss is recorded once in ``norm_deficit``; every circuit
element afterwards is exactly unitary on the truncated space, so the
deficit is carried unchanged and nothing is renormalized mid-circuit.
Renormalization is available as an explicit, separate operation.

All operations accept either plain complex arrays or
:class:`~noonopt.dualnum.Dual` amplitudes, so the same code path
produces values and forward-mode derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import dualnum as dn


def cutoff_for(n_total: int) -> int:
    """Photon-number cutoff used for a target total photon number."""
    return max(3 * n_total + 4, 12)


@dataclass
class TwoModeState:
    """Amplitudes on the truncated two-mode grid.

    amps : (cutoff, cutoff) complex array or Dual, indexed [n0, n1]
    norm_deficit : probability mass lost to source truncation
    """

    amps: object
    cutoff: int
    norm_deficit: float = 0.0

    def norm_squared(self) -> float:
        a = dn.value(self.amps)
        return float(np.sum(np.abs(a) ** 2))


def coherent_amplitudes(alpha, cutoff: int):
    """Fock amplitudes of |alpha> with real alpha, truncated at cutoff."""
    term = dn.exp(-0.5 * alpha * alpha)
    out = [term]
    for n in range(1, cutoff):
        term = term * alpha / np.sqrt(n)
        out.append(term)
    return dn.stack(out)


def squeezed_vacuum_amplitudes(r, cutoff: int):
    """Fock amplitudes of single-mode squeezed vacuum with real r.

    Only even occupations are populated: A_0 = 1/sqrt(cosh r) and
    A_{2m} = A_{2m-2} * (-tanh r) * sqrt((2m-1)/(2m)), equivalent to
    (-tanh r)^m sqrt((2m)!) / (2^m m! sqrt(cosh r)).
    """
    out = [0.0] * cutoff
    term = 1.0 / dn.sqrt(dn.cosh(r))
    out[0] = term
    m = 1
    while 2 * m < cutoff:
        term = term * (-dn.tanh(r)) * np.sqrt((2 * m - 1) / (2 * m))
        out[2 * m] = term
        m += 1
    return dn.stack(out)


def tensor_product(amps0, amps1, cutoff: int) -> TwoModeState:
    """Two-mode state from two single-mode amplitude vectors.

    The missing probability mass of the product (truncation loss of the
    sources) is recorded as the state's ``norm_deficit``.
    """
    amps = dn.outer(amps0, amps1)
    deficit = 1.0 - float(np.sum(np.abs(dn.value(amps)) ** 2))
    return TwoModeState(amps, cutoff, deficit)


def phase_rotation(state: TwoModeState, mode: int, phi) -> TwoModeState:
    """Apply exp(i phi n) on one mode."""
    n = np.arange(state.cutoff)
    f = dn.exp(1j * (phi * n))
    if mode == 0:
        new = state.amps * f[:, None] if dn.is_dual(f) else state.amps * f[:, np.newaxis]
    else:
        new = state.amps * f
    return TwoModeState(new, state.cutoff, state.norm_deficit)


def _block_range(n: int, cutoff: int) -> tuple[int, int]:
    """Occupation range of mode 0 within the total-photon-number-n block."""
    return max(0, n - cutoff + 1), min(n, cutoff - 1)


def bs_blocks(theta, phi, cutoff: int) -> list:
    """Per-total-photon-number unitaries of the beamsplitter.

    The generator is theta * (e^{i phi} a0+ a1 - e^{-i phi} a0 a1+),
    which conserves total photon number; block n acts on the amplitudes
    {|n0, n-n0>}.  Exponentiating each truncated block directly keeps
    every block exactly unitary.
    """
    z = theta * dn.exp(1j * phi)
    blocks = []
    for n in range(2 * cutoff - 1):
        lo, hi = _block_range(n, cutoff)
        m = hi - lo + 1
        kp = np.zeros((m, m))
        for j in range(m - 1):
            kp[j + 1, j] = np.sqrt((lo + j + 1) * (n - lo - j))
        gen = z * kp - dn.conj(z) * kp.T
        blocks.append(dn.expm(gen))
    return blocks


def apply_bs_blocks(state: TwoModeState, blocks: list) -> TwoModeState:
    c = state.cutoff
    psi = state.amps
    dual = dn.is_dual(psi) or any(dn.is_dual(u) for u in blocks)
    out_val = np.zeros((c, c), dtype=complex)
    out_tan = np.zeros((dn.TANGENT_WIDTH, c, c), dtype=complex) if dual else None
    for n, u in enumerate(blocks):
        lo, hi = _block_range(n, c)
        i0 = np.arange(lo, hi + 1)
        i1 = n - i0
        w = dn.matmul(u, psi[i0, i1])
        out_val[i0, i1] = dn.value(w)
        if dual:
            out_tan[:, i0, i1] = w.tan if dn.is_dual(w) else 0.0
    amps = dn.Dual(out_val, out_tan) if dual else out_val
    return TwoModeState(amps, c, state.norm_deficit)


def beamsplitter(state: TwoModeState, theta, phi) -> TwoModeState:
    """Apply B(theta, phi) = exp(theta (e^{i phi} a0+ a1 - h.c.))."""
    return apply_bs_blocks(state, bs_blocks(theta, phi, state.cutoff))


def beamsplitter_dense(state: TwoModeState, theta: float, phi: float) -> TwoModeState:
    """Reference beamsplitter on the dense two-mode space.

    Builds the full cutoff^2-dimensional generator with truncated
    ladder operators and exponentiates it in one piece.  Used as a
    cross-check for the block-diagonal production path; plain values
    only.
    """
    c = state.cutoff
    a = np.diag(np.sqrt(np.arange(1, c)), k=1)
    eye = np.eye(c)
    hop = np.kron(a.T, eye) @ np.kron(eye, a)
    gen = theta * (np.exp(1j * phi) * hop - np.exp(-1j * phi) * hop.conj().T)
    u = scipy.linalg.expm(gen)
    amps = (u @ dn.value(state.amps).reshape(-1)).reshape(c, c)
    return TwoModeState(amps, c, state.norm_deficit)


def coincidence_probability(state: TwoModeState, pattern: tuple[int, int]):
    """Probability of detecting (n0, n1) photons."""
    a, b = pattern
    return dn.abs2(state.amps[a, b])


def photon_marginal(state: TwoModeState, mode: int) -> np.ndarray:
    """Photon-number distribution of one mode (plain floats)."""
    p = np.abs(dn.value(state.amps)) ** 2
    return p.sum(axis=1 - mode)


def number_moments(state: TwoModeState, mode: int):
    """Raw first and second moments of the photon number in one mode.

    Sums n p(n) and n^2 p(n) over the truncated marginal without
    normalizing, so any truncation deficit is reflected in the moments
    rather than hidden by rescaling.
    """
    p = dn.abs2(state.amps)
    n = np.arange(state.cutoff, dtype=float)
    w = n[:, None] if mode == 0 else n[None, :]
    m1 = dn.asum(p * w)
    m2 = dn.asum(p * w * w)
    return m1, m2


def renormalize(state: TwoModeState) -> TwoModeState:
    """Rescale the amplitudes to unit norm and clear the deficit."""
    norm2 = dn.asum(dn.abs2(state.amps))
    amps = state.amps * (1.0 / dn.sqrt(norm2))
    return TwoModeState(amps, state.cutoff, 0.0)


def partial_trace(state: TwoModeState, keep: int) -> np.ndarray:
    """Single-mode density matrix after tracing out the other mode.

    rho[m, n] = sum_k amps[m, k] conj(amps[n, k]) for keep=0, and the
    transposed-index analogue for keep=1.  Plain values only.
    """
    psi = dn.value(state.amps)
    if keep == 0:
        return psi @ psi.conj().T
    return psi.T @ psi.conj()
