"""Fringes and Fisher information: ground-truth, differentiable, quantum.

Two classical-Fisher-information estimators live here.  The ground-truth
path scans a dense phase grid and finite-differences it; it is accurate
but not differentiable.  The training path samples a coarse grid,
differentiates spectrally, and replaces the hard max with a LogSumExp so
the whole quantity is smooth in the circuit parameters.  The quantum
Fisher information of the phase generator is exact through the number
variance of the probe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import circuit
from . import dualnum as dn
from . import fock

P_FLOOR = 1e-12
AMPLITUDE_FLOOR = 1e-3


@dataclass
class FringeScan:
    """One pattern's probability over a dense inclusive [0, 2pi] grid."""

    phis: np.ndarray
    probs: np.ndarray
    meta: tuple = ()


@dataclass
class CfiProfile:
    F: np.ndarray
    f_peak_raw: float
    f_peak_norm: object  # float, or the string "n/a" for flat fringes
    p_max: float
    visibility: float


@dataclass
class EfficiencyReport:
    qfi: float
    p_sel: float
    f_sigma_raw: float
    eta_sigma: float
    events_per_pulse: float
    # Both working-phase conventions are evaluated; the summed-CFI argmax
    # is the one the headline numbers use.
    phi_star: float = 0.0
    phi_star_alt: float = 0.0
    p_sel_alt: float = 0.0


def phase_grid(m: int = 400) -> np.ndarray:
    return np.linspace(0.0, 2.0 * np.pi, m)


def scan_fringe(params: circuit.CircuitParams, pattern, c: int, m: int = 400) -> FringeScan:
    """Sample P(pattern | phi) on m uniform points over [0, 2pi] inclusive."""
    if m < 16:
        raise ValueError("need at least 16 phase points")
    phis = phase_grid(m)
    probs = circuit.pattern_probabilities(params, (tuple(pattern),), phis, c)[tuple(pattern)]
    return FringeScan(phis, probs, (sum(pattern), tuple(pattern), params.to_vector()))


def _cfi_curve(phis: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """F(phi) = (dP/dphi)^2 / max(P, floor) with simple finite differences.

    Central differences in the interior, one-sided at the two ends.
    """
    dp = np.gradient(probs, phis, edge_order=1)
    return dp * dp / np.maximum(probs, P_FLOOR)


def cfi_ground_truth(scan: FringeScan) -> CfiProfile:
    F = _cfi_curve(scan.phis, scan.probs)
    pmax = float(scan.probs.max())
    pmin = float(scan.probs.min())
    vis = (pmax - pmin) / (pmax + pmin) if pmax + pmin > 0 else 0.0
    return CfiProfile(
        F=F,
        f_peak_raw=float(F.max()),
        f_peak_norm=f_peak_norm(scan),
        p_max=pmax,
        visibility=vis,
    )


def f_peak_norm(scan: FringeScan, normalization: str = "unit_peak",
                amplitude_floor: float = AMPLITUDE_FLOOR):
    """Peak CFI of the amplitude-normalized fringe, or "n/a" if flat.

    The default rescales to unit peak, P/max(P).  A min-max rescale is
    available behind the switch but blows up on fringes with exact
    zeros, so it is not the shipping convention.
    """
    pmax = float(scan.probs.max())
    pmin = float(scan.probs.min())
    if pmax - pmin < amplitude_floor:
        return "n/a"
    if normalization == "unit_peak":
        pn = scan.probs / pmax
    elif normalization == "min_max":
        pn = (scan.probs - pmin) / (pmax - pmin)
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    return float(_cfi_curve(scan.phis, pn).max())


def spectral_derivative_matrix(k: int) -> np.ndarray:
    """Real k x k matrix sending samples of P to samples of dP/dphi.

    Acts on k uniform samples over [0, 2pi): multiply Fourier
    coefficient m by i*m, zero the unpaired Nyquist bin, transform back.
    The result is purely real, so one matmul keeps the training path
    inside real dual arithmetic.
    """
    freqs = np.fft.fftfreq(k, d=1.0 / k)
    mult = 1j * freqs
    mult[np.abs(freqs) == k // 2] = 0.0
    dmat = np.fft.ifft(mult[:, None] * np.fft.fft(np.eye(k), axis=0), axis=0)
    return np.ascontiguousarray(dmat.real)


def cfi_differentiable_set(params: circuit.CircuitParams, patterns, c: int,
                           k: int = 8, beta: float = 50.0,
                           eps_frac: float = 0.05) -> dict:
    """Smooth peak-CFI estimates for several patterns at shared cost.

    The probe and readout blocks depend on the parameters but not the
    pattern, so one pass serves every monitored channel.
    """
    if k < 8 or k % 2:
        raise ValueError("need an even sample count of at least 8")
    phis = 2.0 * np.pi * np.arange(k) / k
    probe = circuit.prepare_probe(params, c)
    blocks = circuit.readout_blocks(params, c)
    outputs = [circuit.apply_readout(probe, phi, blocks) for phi in phis]
    dmat = spectral_derivative_matrix(k)
    out = {}
    for pattern in patterns:
        pattern = tuple(pattern)
        p = dn.stack([fock.coincidence_probability(s, pattern) for s in outputs])
        dp = dn.matmul(dmat, p)
        eps = dn.asum(p) * (eps_frac / k)
        f = dp * dp / (p + eps)
        # exact shift identity keeps exp() in range for any fringe scale
        shift = float(np.max(dn.value(f)))
        out[pattern] = shift + dn.log(dn.asum(dn.exp((f - shift) * beta))) / beta
    return out


def cfi_differentiable(params: circuit.CircuitParams, pattern, c: int,
                       k: int = 8, beta: float = 50.0, eps_frac: float = 0.05):
    """Smooth peak-CFI estimate, evaluable on dual parameters.

    Samples the fringe at k phases on [0, 2pi) (endpoint excluded),
    differentiates via the discrete Fourier transform, regularizes the
    quotient with eps = eps_frac * mean(P), and softens the max with a
    LogSumExp at inverse temperature beta.
    """
    return cfi_differentiable_set(params, (pattern,), c, k, beta, eps_frac)[tuple(pattern)]


def qfi_probe(params: circuit.CircuitParams, c: int):
    """Quantum Fisher information of the phase shift on the probe.

    4 * Var(n0) of prepare_probe, using raw truncated moments.
    """
    probe = circuit.prepare_probe(params, c)
    m1, m2 = fock.number_moments(probe, 0)
    return 4.0 * (m2 - m1 * m1)


def fft_fringe_check(scan: FringeScan) -> tuple[int, float]:
    """Dominant integer fringe frequency and its worst harmonic ratio.

    Drops the duplicated endpoint so the samples cover exactly one
    period, removes the mean, and compares integer-frequency powers.
    """
    p = scan.probs[:-1] - scan.probs[:-1].mean()
    power = np.abs(np.fft.rfft(p)) ** 2
    power[0] = 0.0
    dominant = int(np.argmax(power))
    rest = np.delete(power, dominant)
    ratio = float(rest.max() / power[dominant]) if power[dominant] > 0 else 0.0
    return dominant, ratio


def efficiency_metrics(params: circuit.CircuitParams, n_total: int, c: int,
                       m: int = 400) -> EfficiencyReport:
    """Summed-CFI efficiency numbers over the complete N-photon sector."""
    patterns = [(n1, n_total - n1) for n1 in range(n_total + 1)]
    phis = phase_grid(m)
    probs = circuit.pattern_probabilities(params, patterns, phis, c)
    f_sigma = np.zeros(m)
    for pat in patterns:
        f_sigma += _cfi_curve(phis, probs[pat])
    i_star = int(np.argmax(f_sigma))
    sector = np.zeros(m)
    for pat in patterns:
        sector += probs[pat]
    i_alt = int(np.argmax(sector))
    p_sel = float(sector[i_star])
    qfi = float(dn.value(qfi_probe(params, c)))
    eta = float(f_sigma[i_star]) / qfi
    return EfficiencyReport(
        qfi=qfi,
        p_sel=p_sel,
        f_sigma_raw=float(f_sigma[i_star]),
        eta_sigma=eta,
        events_per_pulse=eta * p_sel,
        phi_star=float(phis[i_star]),
        phi_star_alt=float(phis[i_alt]),
        p_sel_alt=float(sector[i_alt]),
    )
