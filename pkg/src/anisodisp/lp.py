"""Dyadic frequency projectors and homogeneous Besov norms.

The radial bump is built from the standard smooth cutoff

    chi(r) = 1 for r <= 1,  0 for r >= 2,
    chi(r) = h(2 - r) / (h(2 - r) + h(r - 1)),   h(s) = exp(-1/s),

and psi(r) = chi(r) - chi(2r), supported in 1/2 <= r <= 2.  The dyadic sum
sum_j psi(2^{-j} r) telescopes to 1 away from r = 0.  The fattened bump
psi_fat(r) = chi(r/2) - chi(4r) equals 1 on the support of psi and is
supported in 1/4 <= r <= 4.
"""

import numpy as np

from .spectral import SpectralField, SpectralError, l1_norm, l2_norm, linf_norm


def _smooth_step(s):
    """C^inf step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    out[s >= 1.0] = 1.0
    mid = (s > 0.0) & (s < 1.0)
    sm = s[mid]
    a = np.exp(-1.0 / sm)
    b = np.exp(-1.0 / (1.0 - sm))
    out[mid] = a / (a + b)
    return out


def chi(r):
    """Radial cutoff: 1 on [0, 1], 0 on [2, inf)."""
    return _smooth_step(2.0 - np.asarray(r, dtype=float))


def bump(r):
    """psi(r) = chi(r) - chi(2r); support [1/2, 2], dyadic partition of unity."""
    r = np.asarray(r, dtype=float)
    return chi(r) - chi(2.0 * r)


def bump_fattened(r):
    """psi_fat = 1 on supp psi, support [1/4, 4]."""
    r = np.asarray(r, dtype=float)
    return chi(r / 2.0) - chi(4.0 * r)


def shell_field(grid, j=0, amplitude=1.0):
    """Radial field whose spectrum is the shell-j bump: smooth, radial,
    nonzero at the origin, and supported away from the symbol singularity
    at xi = 0 (so the periodic box sees no slow dispersive tails)."""
    coeffs = amplitude * bump(grid.xi_mod * 2.0 ** (-j)).astype(np.complex128)
    f = SpectralField(grid, coeffs)
    f.zero_nyquist()
    return f


class LPBank:
    """Littlewood-Paley projector family for one grid.

    j_range covers the dyadic shells fully resolved by the frequency lattice:
    2^{j_min} is at least the lattice spacing 2 pi / L and 2^{j_max + 1} stays
    below the Nyquist frequency pi N / L.
    """

    def __init__(self, grid):
        self.grid = grid
        xi_min = 2.0 * np.pi / grid.L
        xi_max = np.pi * grid.N / grid.L
        self.j_min = int(np.ceil(np.log2(xi_min)))
        self.j_max = int(np.floor(np.log2(xi_max))) - 1
        if self.j_max < self.j_min:
            raise SpectralError("grid too coarse for any dyadic shell")
        self.j_range = range(self.j_min, self.j_max + 1)

    def shell_weights(self, j, fattened=False):
        prof = bump_fattened if fattened else bump
        return prof(self.grid.xi_mod * 2.0 ** (-j))

    def project(self, field, j, fattened=False):
        if j not in self.j_range:
            raise SpectralError(
                f"shell index {j} outside resolved range [{self.j_min}, {self.j_max}]"
            )
        return SpectralField(field.grid, field.coeffs * self.shell_weights(j, fattened))

    def partition_defect(self, xi_mod):
        """max |sum_j psi(2^-j xi) - 1| over the given moduli (valid shell band)."""
        total = np.zeros_like(xi_mod)
        for j in self.j_range:
            total += bump(xi_mod * 2.0 ** (-j))
        return float(np.max(np.abs(total - 1.0)))

    def besov_norm(self, field, a, b, c=1):
        """Homogeneous Besov norm: ell^c over j of 2^{ja} ||Q_j f||_{L^b}.

        Q_j uses the fattened bump, matching how the shell pieces enter the
        decay estimate.  L^1/L^inf norms are physical-space quadratures.
        """
        if not 0.0 <= a <= 6.0:
            raise SpectralError(f"Besov regularity must lie in [0, 6], got {a}")
        if b not in (1, 2) and not np.isinf(b):
            raise SpectralError(f"Besov integrability must be 1, 2 or inf, got {b}")
        if c not in (1, 2) and not np.isinf(c):
            raise SpectralError(f"Besov summability must be 1, 2 or inf, got {c}")
        norm_b = {1: l1_norm, 2: l2_norm}.get(b, linf_norm)
        terms = []
        for j in self.j_range:
            piece = self.project(field, j, fattened=True)
            if np.max(np.abs(piece.coeffs)) == 0.0:
                terms.append(0.0)
                continue
            terms.append(2.0 ** (j * a) * norm_b(piece))
        terms = np.array(terms)
        if c == 1:
            return float(np.sum(terms))
        if c == 2:
            return float(np.sqrt(np.sum(terms**2)))
        return float(np.max(terms)) if terms.size else 0.0

    def per_shell(self, field, a, b):
        """The sequence 2^{ja} ||Q_j f||_{L^b} indexed by j, for diagnostics."""
        norm_b = {1: l1_norm, 2: l2_norm}.get(b, linf_norm)
        return {
            j: 2.0 ** (j * a) * norm_b(self.project(field, j, fattened=True))
            for j in self.j_range
        }
