"""Single-mode Wigner functions by displaced parity, and negativity.

Conventions: hbar = 2, so the vacuum has unit quadrature variance,
W_vac(0,0) = 1/(2 pi), and the vacuum shot-noise circle is the unit
circle.  Phase-space points map to displacements via
alpha = (x + i p) / sqrt(2 hbar).

The displacement matrix elements use the associated-Laguerre closed
form, evaluated batched over grid points; the expensive part is a
handful of vectorized Laguerre calls rather than a per-point loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

HBAR = 2.0
DEFAULT_EXTENT = 6.0
DEFAULT_POINTS = 201
BOUNDARY_TOL = 1e-8


@dataclass
class WignerGrid:
    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray  # real, shape (len(x_axis), len(p_axis))

    def cell_area(self) -> float:
        dx = self.x_axis[1] - self.x_axis[0]
        dp = self.p_axis[1] - self.p_axis[0]
        return float(dx * dp)

    def integral(self) -> float:
        return float(self.values.sum() * self.cell_area())


@dataclass
class NegativityResult:
    volume: float
    extent: float
    points: int


def _displacement_batch(alphas: np.ndarray, c: int) -> np.ndarray:
    """<m|D(alpha)|n> for a 1-d batch of alphas; shape (len, c, c)."""
    alphas = np.asarray(alphas, dtype=complex).ravel()
    y = np.abs(alphas) ** 2
    envelope = np.exp(-0.5 * y)
    lg = gammaln(np.arange(c) + 1.0)  # ln n!
    out = np.zeros((alphas.size, c, c), dtype=complex)
    for d in range(c):  # d = m - n >= 0
        pw = envelope * alphas**d
        for n in range(c - d):
            m = n + d
            coeff = np.exp(0.5 * (lg[n] - lg[m]))
            lag = eval_genlaguerre(n, d, y)
            out[:, m, n] = coeff * pw * lag
            if d:
                # row < column entries via <n|D(a)|m> = <m|D(-a)|n>*
                out[:, n, m] = (-1.0) ** d * coeff * np.conj(alphas) ** d * envelope * lag
    return out


def displacement_matrix(alpha: complex, c: int) -> np.ndarray:
    """Truncated displacement operator D(alpha) as a c x c matrix."""
    return _displacement_batch(np.array([alpha]), c)[0]


def wigner(rho: np.ndarray, x_axis=None, p_axis=None, chunk: int = 1024) -> WignerGrid:
    """W(x, p) = Tr[rho D(alpha) Pi D(alpha)^dagger] / (pi hbar).

    Evaluated through the identity D(a) Pi D(a)^+ = D(2a) Pi, so every
    |m><n| kernel element is a closed Laguerre form with no internal
    truncation; the only approximation in W is the truncation of rho
    itself.  rho need not have unit trace; the integral of W then
    matches its trace instead of 1.
    """
    if x_axis is None:
        x_axis = np.linspace(-DEFAULT_EXTENT, DEFAULT_EXTENT, DEFAULT_POINTS)
    if p_axis is None:
        p_axis = np.linspace(-DEFAULT_EXTENT, DEFAULT_EXTENT, DEFAULT_POINTS)
    c = rho.shape[0]
    parity = (-1.0) ** np.arange(c)
    xs, ps = np.meshgrid(x_axis, p_axis, indexing="ij")
    alphas = ((xs + 1j * ps) / np.sqrt(2.0 * HBAR)).ravel()
    rho_p = rho * parity[:, None]  # absorb Pi into the row index
    w = np.empty(alphas.size, dtype=complex)
    for start in range(0, alphas.size, chunk):
        dmats = _displacement_batch(2.0 * alphas[start:start + chunk], c)
        # Tr[rho D(2a) Pi] = sum_{m,n} rho[m,n] (-1)^m <n|D(2a)|m>
        w[start:start + chunk] = np.einsum("mn,gnm->g", rho_p, dmats)
    w /= np.pi * HBAR
    resid = float(np.abs(w.imag).max())
    if resid > 1e-10:
        raise FloatingPointError(f"Wigner values not real: residue {resid}")
    return WignerGrid(np.asarray(x_axis, float), np.asarray(p_axis, float),
                      w.real.reshape(xs.shape))


def negativity(grid: WignerGrid) -> NegativityResult:
    """Riemann-sum negativity volume; the grid must contain the state."""
    v = grid.values
    border = max(
        np.abs(v[0, :]).max(), np.abs(v[-1, :]).max(),
        np.abs(v[:, 0]).max(), np.abs(v[:, -1]).max(),
    )
    if border > BOUNDARY_TOL:
        raise ValueError(
            f"state leaks off the grid: boundary |W| = {border:.2e} > {BOUNDARY_TOL}"
        )
    vol = float(np.where(v < 0, -v, 0.0).sum() * grid.cell_area())
    return NegativityResult(vol, float(grid.x_axis[-1]), len(grid.x_axis))


def negativity_volume(rho: np.ndarray, extent: float = DEFAULT_EXTENT,
                      points: int = DEFAULT_POINTS, max_doublings: int = 3):
    """Negativity with automatic grid enlargement for broad states.

    Keeps the cell size roughly constant while doubling the extent
    until the boundary check passes.  Returns (NegativityResult,
    WignerGrid).
    """
    for _ in range(max_doublings + 1):
        axis = np.linspace(-extent, extent, points)
        grid = wigner(rho, axis, axis)
        try:
            return negativity(grid), grid
        except ValueError:
            extent *= 2.0
            points = 2 * points - 1
    raise ValueError(f"state not contained even at extent {extent / 2}")
