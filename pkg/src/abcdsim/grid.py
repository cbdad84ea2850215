"""Periodic grid, spectral operators and dealiased products.

Everything downstream (time stepping, virial and energy diagnostics) is
built on the operators defined here.  Fields are plain real numpy arrays
bound to a Grid by length; operators validate the binding.

Conventions:
    nodes  x_j = -L + 2*L*j/N,  j = 0 .. N-1
    modes  k_m = pi*m/L with m in the symmetric index set -N/2 .. N/2-1

Real fields go through the half spectrum (rfft).  The Nyquist mode is
kept empty: initial data never populates it, odd-order derivatives and
dealiased products zero it.  With Nyquist-free fields the rectangle rule
is exact for the product of any two resolved fields, which is what makes
the integration-by-parts steps of the identity checks hold to round-off.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Grid", "canonical_pair"]


class Grid:
    """Uniform periodic grid on [-L, L) with spectral operators.

    Parameters
    ----------
    box_half_length : float
        Half width L of the periodic box.  Must be positive.
    node_count : int
        Number of nodes N.  Must be even and at least 16.
    """

    def __init__(self, box_half_length, node_count):
        L = float(box_half_length)
        if not np.isfinite(L) or L <= 0.0:
            raise ValueError(f"box_half_length must be positive, got {box_half_length}")
        N = int(node_count)
        if N != node_count or N < 16 or N % 2 != 0:
            raise ValueError(f"node_count must be an even integer >= 16, got {node_count}")
        self.L = L
        self.N = N
        self.dx = 2.0 * L / N
        self.x = -L + self.dx * np.arange(N)
        # symmetric wavenumber set in FFT ordering, for inspection and tests
        self.wavenumbers = 2.0 * np.pi * np.fft.fftfreq(N, d=self.dx)
        # half spectrum used by the real transforms
        self.k = 2.0 * np.pi * np.fft.rfftfreq(N, d=self.dx)
        self.k2 = self.k * self.k
        self._ik = 1j * self.k
        self._ik[-1] = 0.0  # odd symbol has no Nyquist partner
        self._helm = 1.0 / (1.0 + self.k2)
        # fine grid for zero-padded quadratic products
        m = (3 * N) // 2
        self.n_fine = m if m % 2 == 0 else m + 1

    # -- binding ---------------------------------------------------------

    def check(self, values):
        """Validate that an array is a field on this grid."""
        v = np.asarray(values)
        if v.shape != (self.N,):
            raise ValueError(f"field has shape {v.shape}, expected ({self.N},)")
        if np.iscomplexobj(v):
            raise ValueError("fields must be real arrays")
        return v

    def compatible(self, other) -> bool:
        return isinstance(other, Grid) and other.N == self.N and other.L == self.L

    # -- transforms ------------------------------------------------------

    def hat(self, values):
        return np.fft.rfft(self.check(values))

    def from_hat(self, coeffs):
        return np.fft.irfft(coeffs, n=self.N)

    # -- operators -------------------------------------------------------

    def deriv(self, values, order: int = 1):
        """Spectral x-derivative of the given order (1, 2 or 3)."""
        if order not in (1, 2, 3):
            raise ValueError(f"unsupported derivative order {order}")
        vh = self.hat(values) * (1j * self.k) ** order
        if order % 2 == 1:
            vh[-1] = 0.0
        return self.from_hat(vh)

    def helmholtz_inverse(self, values):
        """Apply (1 - dxx)^-1, Fourier symbol 1/(1 + k^2)."""
        return self.from_hat(self.hat(values) * self._helm)

    def integrate(self, values) -> float:
        """Rectangle rule, exact for resolved trigonometric polynomials."""
        return self.dx * float(np.sum(self.check(values)))

    def l2_norm(self, values) -> float:
        v = self.check(values)
        return float(np.sqrt(self.dx * np.sum(v * v)))

    # -- dealiased products ---------------------------------------------

    def _to_fine(self, coeffs):
        """Fine-grid samples of the trig polynomial with the given rfft coeffs."""
        fh = np.zeros(self.n_fine // 2 + 1, dtype=complex)
        fh[: self.N // 2] = coeffs[: self.N // 2]  # Nyquist dropped
        return np.fft.irfft(fh, n=self.n_fine) * (self.n_fine / self.N)

    def _from_fine(self, fine_values):
        """Coarse rfft coeffs of a fine-grid field, truncated alias-free."""
        wh = np.fft.rfft(fine_values)[: self.N // 2 + 1] * (self.N / self.n_fine)
        wh[-1] = 0.0
        return wh

    def mult(self, u, v):
        """Dealiased pointwise product via zero padding.

        Returns the projection of u*v onto the resolved (Nyquist-free)
        band, computed on a fine grid so no aliased images fold back.
        """
        uf = self._to_fine(self.hat(u))
        vf = self._to_fine(self.hat(v))
        return self.from_hat(self._from_fine(uf * vf))

    def __repr__(self):
        return f"Grid(L={self.L!r}, N={self.N})"


def canonical_pair(state):
    """Canonical variables (f, g) with (1 - dxx) f = u, (1 - dxx) g = eta."""
    g = state.grid
    return g.helmholtz_inverse(state.u), g.helmholtz_inverse(state.eta)
