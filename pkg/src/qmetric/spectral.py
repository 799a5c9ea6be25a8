"""Finite-difference spectral construction of the metric kernel.

The Hamiltonian -kappa d^2/dx^2 + v(x) is discretized on the interior
nodes of a grid with walls held at zero (exact for box domains, a
truncated approximation on the line).  Right and left eigenvectors are
computed independently, paired by eigenvalue, and normalized to a
biorthonormal system under the grid inner product h * sum(conj(a) * b).
The metric kernel is then the resolved sum of left projectors

    M(x, y) = sum_n phi_n(x) * conj(phi_n(y))

over a chosen number of modes.  Couplings where the eigensystem
degenerates raise ExceptionalPointError.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from qmetric.kernels import FLOAT_FMT, Grid, Kernel
from qmetric.potentials import PhysConstants, PotentialSpec, eval_potential

__all__ = [
    "ExceptionalPointError",
    "DiscretizedHamiltonian",
    "BiorthonormalSystem",
    "discretize",
    "free_box_levels",
    "pair_eigensystem",
    "biorthonormalize",
    "spectral_metric",
    "spectrum_to_csv",
]


class ExceptionalPointError(RuntimeError):
    """Raised when eigenvectors coalesce and no biorthonormal system exists."""


@dataclass
class DiscretizedHamiltonian:
    """Dense matrix restriction of the Hamiltonian to interior grid nodes.

    bc records how the walls are treated: "dirichlet" (exact for a box)
    or "truncated" (zero imposed at the edge of a finite window on the
    line).  The matrix is complex symmetric.
    """

    grid: Grid
    matrix: np.ndarray
    bc: str

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.grid.nodes[1:-1]

    @property
    def dim(self) -> int:
        return self.grid.n - 2


@dataclass
class BiorthonormalSystem:
    """Paired eigenvalues with right/left eigenvectors as matrix columns.

    Normalization: h * right[:, n].conj() @ left[:, m] = delta_nm, with
    sqrt(h) * ||right[:, n]|| = 1.  Energies are sorted by real part,
    ties by imaginary part.
    """

    grid: Grid
    energies: np.ndarray
    right: np.ndarray
    left: np.ndarray
    defect: float


def discretize(pot: PotentialSpec, grid: Grid, bc: str = "auto") -> DiscretizedHamiltonian:
    """Build the interior-node matrix with second central differences.

    Point couplings i*zeta*delta(x - a) enter as diagonal spikes
    i*zeta/h at the interior node nearest a; if that node is further
    than h/2 away a placement warning is emitted.
    """
    if pot.domain.is_box:
        half = pot.domain.half_width
        if abs(grid.half_width - half) > 1e-12 * max(1.0, half):
            raise ValueError(
                f"grid half-width {grid.half_width} does not match the box half-width {half}")
    if bc == "auto":
        bc = "dirichlet" if pot.domain.is_box else "truncated"
    if bc not in ("dirichlet", "truncated"):
        raise ValueError(f"unknown boundary treatment {bc!r}")
    n, h = grid.n, grid.h
    m = n - 2
    kappa = pot.constants.hbar**2 / (2.0 * pot.constants.mass)
    x = grid.nodes[1:-1]
    H = np.zeros((m, m), dtype=complex)
    idx = np.arange(m)
    H[idx, idx] = 2.0 * kappa / h**2 + eval_potential(pot, x)
    H[idx[:-1], idx[:-1] + 1] = -kappa / h**2
    H[idx[:-1] + 1, idx[:-1]] = -kappa / h**2
    for a, zeta in pot.deltas:
        j = int(np.argmin(np.abs(x - a)))
        if abs(x[j] - a) > 0.5 * h + 1e-12:
            warnings.warn(
                f"point coupling at {a} lies {abs(x[j] - a):.3g} from the nearest "
                "interior node (more than half a grid cell)", RuntimeWarning)
        H[j, j] += 1j * zeta / h
    return DiscretizedHamiltonian(grid=grid, matrix=H, bc=bc)


def free_box_levels(grid: Grid, constants: PhysConstants, count: int | None = None) -> np.ndarray:
    """Exact eigenvalues of the discretized zero-potential box.

    E_k = (2 kappa / h^2) (1 - cos(k pi h / L)) for k = 1 .. n-2, with
    L the box width; the continuum limit is kappa (k pi / L)^2.
    """
    m = grid.n - 2
    if count is None:
        count = m
    if not 1 <= count <= m:
        raise ValueError(f"count must lie in [1, {m}], got {count}")
    k = np.arange(1, count + 1)
    kappa = constants.hbar**2 / (2.0 * constants.mass)
    L = 2.0 * grid.half_width
    return (2.0 * kappa / grid.h**2) * (1.0 - np.cos(k * np.pi * grid.h / L))


def pair_eigensystem(matrix: np.ndarray, h: float):
    """Diagonalize a matrix and its conjugate transpose and pair the modes.

    Returns (energies, right, left, defect) with the normalization of
    BiorthonormalSystem.  Raises ExceptionalPointError for eigenvalue
    gaps below 1e-9 (relative), eigenvector condition number above 1e8,
    an unpairable left mode, or a biorthonormality defect >= 1e-8.
    """
    matrix = np.asarray(matrix, dtype=complex)
    m = matrix.shape[0]
    wr, vr = np.linalg.eig(matrix)
    scale = max(1.0, float(np.abs(wr).max()))
    if m > 1:
        dist = np.abs(wr[:, None] - wr[None, :]) + np.diag(np.full(m, np.inf))
        if dist.min() < 1e-9 * scale:
            raise ExceptionalPointError(
                f"eigenvalue gap {dist.min():.3g} below threshold; "
                "eigenvectors are coalescing")
    cond = np.linalg.cond(vr)
    if cond > 1e8:
        raise ExceptionalPointError(
            f"right eigenvector condition number {cond:.3g} exceeds 1e8")
    wl, vl = np.linalg.eig(matrix.conj().T)

    order = np.lexsort((wr.imag, wr.real))
    energies = wr[order]
    right = vr[:, order]
    left = np.empty_like(right)
    available = np.ones(m, dtype=bool)
    wl_conj = np.conj(wl)
    for k, e in enumerate(energies):
        gaps = np.where(available, np.abs(wl_conj - e), np.inf)
        j = int(np.argmin(gaps))
        if gaps[j] > 1e-6 * scale:
            raise ExceptionalPointError(
                f"no left eigenvalue pairs with {e} (best gap {gaps[j]:.3g})")
        available[j] = False
        left[:, k] = vl[:, j]

    right = right / (np.sqrt(h) * np.linalg.norm(right, axis=0))
    overlaps = h * np.sum(np.conj(right) * left, axis=0)
    if np.min(np.abs(overlaps)) < 1e-12:
        raise ExceptionalPointError(
            "a mode is orthogonal to its own partner (self-orthogonality)")
    left = left / overlaps
    defect = float(np.max(np.abs(h * (right.conj().T @ left) - np.eye(m))))
    if defect >= 1e-8:
        raise ExceptionalPointError(f"biorthonormality defect {defect:.3g} >= 1e-8")
    return energies, right, left, defect


def biorthonormalize(ham: DiscretizedHamiltonian) -> BiorthonormalSystem:
    """Biorthonormal eigensystem of a discretized Hamiltonian.

    Validates the eigen-relations H psi = E psi and H^dag phi = conj(E) phi
    to a relative residual of 1e-8.
    """
    energies, right, left, defect = pair_eigensystem(ham.matrix, ham.grid.h)
    hnorm = max(1.0, float(np.max(np.abs(ham.matrix))))
    r_right = np.max(np.abs(ham.matrix @ right - right * energies[None, :]))
    r_left = np.max(np.abs(ham.matrix.conj().T @ left - left * np.conj(energies)[None, :]))
    rel = max(r_right, r_left) / (hnorm * max(1.0, float(np.max(np.abs(right)))))
    if rel >= 1e-8:
        raise ExceptionalPointError(f"eigenpair residual {rel:.3g} >= 1e-8")
    return BiorthonormalSystem(grid=ham.grid, energies=energies,
                               right=right, left=left, defect=defect)


def spectral_metric(sys: BiorthonormalSystem, n_modes: int) -> Kernel:
    """Metric kernel from the n_modes left eigenvectors of lowest |Re E|.

    The interior-node matrix sum phi phi^dag is explicitly Hermitized
    and embedded into the full grid with zero walls.  The identity
    content of the metric appears only in the infinite-mode limit, so
    c_diag = c_anti = 0 here.
    """
    m = sys.left.shape[1]
    if not 1 <= n_modes <= m:
        raise ValueError(f"n_modes must lie in [1, {m}], got {n_modes}")
    idx = np.argsort(np.abs(sys.energies.real), kind="stable")[:n_modes]
    phi = sys.left[:, idx]
    M = phi @ phi.conj().T
    M = 0.5 * (M + M.conj().T)
    smooth = np.zeros((sys.grid.n, sys.grid.n), dtype=complex)
    smooth[1:-1, 1:-1] = M
    return Kernel(grid=sys.grid, smooth=smooth)


def spectrum_to_csv(sys: BiorthonormalSystem, path) -> None:
    """Write the sorted energies as CSV rows n,Re_E,Im_E (n starting at 1)."""
    with open(path, "w") as fh:
        fh.write("n,Re_E,Im_E\n")
        for k, e in enumerate(sys.energies, start=1):
            fh.write(f"{k},{FLOAT_FMT % e.real},{FLOAT_FMT % e.imag}\n")
