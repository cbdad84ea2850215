"""Initial data generators.

All generators return an (eta0, u0) pair of arrays on the given grid.
Random data is built directly from half-spectrum coefficients with the
Nyquist mode left empty, so it is band-limited by construction.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid

__all__ = ["gaussian_pair", "single_mode_pair", "random_bandlimited_pair", "zero_pair"]


def gaussian_pair(grid: Grid, eps: float = 1e-2, width: float = 5.0,
                  ratio: float = 1.0, center: float = 0.0) -> tuple:
    """eta = eps exp(-(x-center)^2/width^2), u = ratio * eta."""
    if width <= 0.0:
        raise ValueError(f"width must be positive, got {width}")
    eta = eps * np.exp(-((grid.x - center) / width) ** 2)
    return eta, ratio * eta


def single_mode_pair(grid: Grid, m: int, amp_eta: float = 0.0, amp_u: float = 0.0,
                     phase: float = 0.0) -> tuple:
    """Single Fourier mode cos(k_m x + phase) with k_m = pi m / L."""
    if not 0 <= m < grid.N // 2:
        raise ValueError(f"mode index {m} outside resolvable range [0, {grid.N // 2})")
    wave = np.cos(grid.k[m] * grid.x + phase)
    return amp_eta * wave, amp_u * wave


def random_bandlimited_pair(grid: Grid, seed: int, eps: float = 1e-2,
                            kmax_fraction: float = 0.5) -> tuple:
    """Random smooth pair with H1 norm of order eps.

    Spectral amplitudes fall off like (1 + k^2)^-2 below a cutoff at
    kmax_fraction of the resolvable band and vanish above it, so every
    sample is well resolved on the grid it was drawn for.
    """
    if not 0.0 < kmax_fraction <= 1.0:
        raise ValueError(f"kmax_fraction must be in (0, 1], got {kmax_fraction}")
    rng = np.random.default_rng(seed)
    half = grid.N // 2 + 1
    cutoff = max(2, int(kmax_fraction * (grid.N // 2)))

    def draw():
        coeff = np.zeros(half, dtype=complex)
        live = np.arange(1, min(cutoff, half - 1))
        mag = (1.0 + grid.k[live] ** 2) ** -2
        coeff[live] = mag * (rng.standard_normal(live.size) + 1j * rng.standard_normal(live.size))
        field = grid.from_hat(coeff) * grid.N
        nrm = np.sqrt(grid.integrate(field**2 + grid.deriv(field) ** 2))
        return field * (eps / nrm) if nrm > 0 else field

    return draw(), draw()


def zero_pair(grid: Grid) -> tuple:
    return np.zeros(grid.N), np.zeros(grid.N)
