"""Residual and property checks tying kernels to their defining relations.

Every check returns a CheckReport carrying the sup-norm residual, a
scale-free relative residual, a pass flag against the stated tolerance,
and free-form metadata; reports serialize to JSON lines.

Singular kernel parts enter matrix-level checks through their exact grid
representation: the identity line as I/h and the parity line as P/h on
the interior nodes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from qmetric.kernels import Grid, Kernel, hermiticity_defect
from qmetric.potentials import PotentialSpec, eval_mass_term, eval_potential
from qmetric.spectral import DiscretizedHamiltonian

__all__ = [
    "CheckReport",
    "kernel_matrix",
    "kg_residual",
    "pseudo_hermiticity_residual",
    "positivity_check",
    "invertibility_check",
]

_TINY = 1e-300


@dataclass
class CheckReport:
    check: str
    residual: float
    relative: float
    passed: bool
    meta: dict = field(default_factory=dict)

    def to_json_line(self) -> str:
        def coerce(value):
            if isinstance(value, (bool, np.bool_)):
                return bool(value)
            if isinstance(value, (int, np.integer)):
                return int(value)
            return float(value)

        return json.dumps({"check": self.check, "residual": self.residual,
                           "relative": self.relative, "pass": self.passed,
                           "meta": self.meta}, default=coerce)


def kernel_matrix(k: Kernel) -> np.ndarray:
    """Interior-node matrix M = c_diag I/h + c_anti P/h + smooth samples.

    P is the grid parity permutation (node x -> -x), which maps the set
    of interior nodes onto itself.
    """
    n, h = k.grid.n, k.grid.h
    m = n - 2
    M = np.array(k.smooth[1:-1, 1:-1], dtype=complex)
    idx = np.arange(m)
    if k.c_diag != 0.0:
        M[idx, idx] += k.c_diag / h
    if k.c_anti != 0.0:
        M[idx, idx[::-1]] += k.c_anti / h
    return M


def _grids_match(a: Grid, b: Grid) -> bool:
    return a.n == b.n and abs(a.half_width - b.half_width) <= 1e-12 * max(1.0, a.half_width)


def kg_residual(k: Kernel, pot: PotentialSpec, grid: Grid,
                tolerance: float = 1e-8, band_exclude: int = 2) -> CheckReport:
    """Wave-operator residual [-Dxx + Dyy + mu^2] smooth on interior nodes.

    Second central differences; a band |i - j| <= band_exclude around
    the diagonal is left out of the sup because first-order kernels fold
    there and the centered stencil does not apply.  The identity and
    parity lines contribute only through the mass term; their channel
    values sup|c_diag * mu^2(x, x)| and sup|c_anti * mu^2(x, -x)| are
    reported in the metadata, not folded into the verdict.
    """
    if grid.n < 33:
        raise ValueError(f"grid too coarse for residual stencils: n={grid.n}")
    if not _grids_match(k.grid, grid):
        raise ValueError("kernel grid does not match the supplied grid")
    S = k.smooth
    h = grid.h
    X, Y = grid.mesh()
    mu2 = eval_mass_term(pot, X, Y)
    R = -(S[2:, 1:-1] - 2.0 * S[1:-1, 1:-1] + S[:-2, 1:-1]) / h**2 \
        + (S[1:-1, 2:] - 2.0 * S[1:-1, 1:-1] + S[1:-1, :-2]) / h**2 \
        + mu2[1:-1, 1:-1] * S[1:-1, 1:-1]
    ii = np.arange(1, grid.n - 1)
    keep = np.abs(ii[:, None] - ii[None, :]) > band_exclude
    residual = float(np.max(np.abs(R[keep]))) if np.any(keep) else 0.0
    scale = max(k.sup_smooth, _TINY) * (4.0 / h**2 + float(np.max(np.abs(mu2))))
    diag_channel = float(np.abs(k.c_diag) * np.max(np.abs(eval_mass_term(
        pot, grid.nodes, grid.nodes))))
    anti_channel = float(np.abs(k.c_anti) * np.max(np.abs(eval_mass_term(
        pot, grid.nodes, -grid.nodes))))
    return CheckReport(
        check="kg_residual",
        residual=residual,
        relative=residual / scale,
        passed=residual <= tolerance,
        meta={"n": grid.n, "band_exclude": band_exclude, "tolerance": tolerance,
              "identity_channel": diag_channel, "parity_channel": anti_channel})


def pseudo_hermiticity_residual(k: Kernel, ham: DiscretizedHamiltonian,
                                tolerance: float = 1e-6) -> CheckReport:
    """Sup norm of H^dag M - M H for the kernel's interior matrix M."""
    if not _grids_match(k.grid, ham.grid):
        raise ValueError("kernel and Hamiltonian grids do not match")
    M = kernel_matrix(k)
    H = ham.matrix
    comm = H.conj().T @ M - M @ H
    residual = float(np.max(np.abs(comm)))
    denom = max(float(np.max(np.abs(M))), _TINY) * max(float(np.max(np.abs(H))), _TINY)
    relative = residual / denom
    return CheckReport(
        check="pseudo_hermiticity",
        residual=residual,
        relative=relative,
        passed=relative <= tolerance,
        meta={"n": k.grid.n, "bc": ham.bc, "tolerance": tolerance})


def positivity_check(k: Kernel, grid: Grid) -> CheckReport:
    """Smallest eigenvalue of the Hermitized interior matrix.

    Passes when the spectrum is nonnegative within the eigensolver's
    rounding floor dim * eps * max_eigenvalue (rank-deficient but
    positive-semidefinite truncations are accepted; genuinely indefinite
    kernels fail).  The exact extreme eigenvalues are in the metadata.
    """
    if not _grids_match(k.grid, grid):
        raise ValueError("kernel grid does not match the supplied grid")
    defect = hermiticity_defect(k)
    if defect >= 1e-8:
        raise ValueError(f"kernel is not Hermitian (defect {defect:.3g})")
    M = kernel_matrix(k)
    M = 0.5 * (M + M.conj().T)
    vals = np.linalg.eigvalsh(M)
    lam_min = float(vals[0])
    lam_max = float(vals[-1])
    floor = M.shape[0] * np.finfo(float).eps * max(abs(lam_max), abs(lam_min))
    residual = max(0.0, -lam_min)
    return CheckReport(
        check="positivity",
        residual=residual,
        relative=residual / max(abs(lam_max), _TINY),
        passed=bool(lam_min > -floor),
        meta={"n": k.grid.n, "min_eigenvalue": lam_min, "max_eigenvalue": lam_max,
              "floor": floor})


def invertibility_check(k: Kernel, grid: Grid,
                        tolerance: float = 1e-10) -> CheckReport:
    """Singular-value ratio sigma_min / sigma_max of the interior matrix."""
    if not _grids_match(k.grid, grid):
        raise ValueError("kernel grid does not match the supplied grid")
    s = np.linalg.svd(kernel_matrix(k), compute_uv=False)
    sigma_max = float(s[0])
    sigma_min = float(s[-1])
    ratio = sigma_min / sigma_max if sigma_max > 0.0 else 0.0
    return CheckReport(
        check="invertibility",
        residual=sigma_min,
        relative=ratio,
        passed=bool(ratio > tolerance),
        meta={"n": k.grid.n, "sigma_max": sigma_max, "tolerance": tolerance})
