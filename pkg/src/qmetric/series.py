"""Neumann-series engine for pseudo-metric kernels.

The integral operator acting on a kernel eta is

    (K eta)(x, y) = (m/hbar^2) [ int_{r0}^{y} dr v(r) int_{x-y+r}^{x+y-r} ds eta(s, r)
                  + int_{r0}^{x} ds conj(v(s)) int_{-x+y+s}^{x+y-s} dr eta(s, r) ]

and the kernel solution is the series eta = sum_l K^l u over a seed u.
Identity and parity singular parts are propagated by closed forms; the
smooth part goes through characteristic-line quadrature: per-column
cumulative integrals of the bilinear representation combined with a
composite Simpson rule in the outer variable.  Point couplings use the
slice rule: each delta at x = a contributes line integrals of the
kernel slices at y = a and x = a, with one-sided limits recovered at
jump positions by two-node extrapolation.

Evaluations outside the grid square treat the kernel as zero.  For a
box domain that is exact (the kernel vanishes at and beyond the walls);
on the full line it is a truncation, counted per evaluation and
reported through the optional stats dictionary and SeriesState.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qmetric.kernels import Grid, Kernel, SeedPair, seed_to_kernel
from qmetric.potentials import PotentialSpec, eval_potential, unit_step

__all__ = [
    "KConfig",
    "SeriesState",
    "apply_K_to_identity",
    "apply_K_smooth",
    "apply_K_delta_rule",
    "apply_K",
    "neumann_series",
    "convergence_bound",
]


@dataclass(frozen=True)
class KConfig:
    """Quadrature and iteration controls for the series engine.

    r0 is the base point of the indefinite integrals (it must lie on a
    grid node when the smooth quadrature is used); simpson_per_h is the
    number of Simpson panels per grid cell (even, at least 8).
    """

    r0: float = 0.0
    simpson_per_h: int = 8
    max_order: int = 4
    stop_tol: float = 1e-10

    def __post_init__(self):
        if not np.isfinite(self.r0):
            raise ValueError(f"r0 must be finite, got {self.r0}")
        if self.simpson_per_h < 8 or self.simpson_per_h % 2 != 0:
            raise ValueError(
                f"simpson_per_h must be even and at least 8, got {self.simpson_per_h}")
        if self.max_order < 1:
            raise ValueError(f"max_order must be at least 1, got {self.max_order}")
        if not self.stop_tol > 0.0:
            raise ValueError(f"stop_tol must be positive, got {self.stop_tol}")

    def to_dict(self) -> dict:
        return {"r0": self.r0, "simpson_per_h": self.simpson_per_h,
                "max_order": self.max_order, "stop_tol": self.stop_tol}

    @staticmethod
    def from_dict(data: dict) -> "KConfig":
        known = {"r0", "simpson_per_h", "max_order", "stop_tol"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown series config keys: {sorted(extra)}")
        return KConfig(**data)


@dataclass
class SeriesState:
    """Iterates K^l u, their running sum, and per-order sup norms."""

    iterates: list
    partial_sum: Kernel
    sup_norms: list
    diverged: bool = False
    truncated_evals: int = 0


def _check_grid_domain(pot: PotentialSpec, grid: Grid) -> None:
    if pot.domain.is_box:
        half = pot.domain.half_width
        if abs(grid.half_width - half) > 1e-12 * max(1.0, half):
            raise ValueError(
                f"grid half-width {grid.half_width} does not match the box half-width {half}")


def _segment_prefix(pot: PotentialSpec, t) -> np.ndarray:
    """Exact int_0^t v(r) dr for the piecewise-constant segment part."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    for (a, b), v in pot.segments:
        out += v * (np.clip(t, a, b) - np.clip(0.0, a, b))
    return out


def apply_K_to_identity(pot: PotentialSpec, grid: Grid, cfg: KConfig | None = None) -> Kernel:
    """Closed-form action of K on the identity kernel delta(x - y).

    Only the segment part of the potential enters here; point couplings
    are handled by apply_K_delta_rule.  The result is

        (m/hbar^2) [ int_{r0}^{(x+y)/2} Re v + i sign(y-x) int_{r0}^{(x+y)/2} Im v ]

    with both integrals evaluated exactly for piecewise-constant v.
    """
    _check_grid_domain(pot, grid)
    r0 = 0.0 if cfg is None else cfg.r0
    X, Y = grid.mesh()
    pref = _segment_prefix(pot, 0.5 * (X + Y))
    base = _segment_prefix(pot, np.asarray(r0))
    c = pot.constants.mass / pot.constants.hbar**2
    smooth = c * ((pref.real - base.real)
                  + 1j * np.sign(Y - X) * (pref.imag - base.imag))
    return Kernel(grid=grid, smooth=smooth)


def _prefix_query(t: np.ndarray, Sb: np.ndarray, Cb: np.ndarray,
                  X: float, h: float) -> np.ndarray:
    """Cumulative integral of a bilinear column at query positions.

    Sb and Cb hold, per query row, nodal values and nodal prefix
    integrals (from -X) of one interpolated column; entries of t beyond
    [-X, X] clamp to the boundary values (kernel zero outside).
    """
    tt = np.clip(t, -X, X)
    pos = (tt + X) / h
    k = np.minimum(pos.astype(int), Sb.shape[0] - 2)
    f = pos - k
    rows = np.arange(t.shape[0])[:, None]
    s0 = Sb[k, rows]
    s1 = Sb[k + 1, rows]
    return Cb[k, rows] + h * (f * s0 + 0.5 * f * f * (s1 - s0))


def _characteristic_term(S: np.ndarray, vfun, grid: Grid, r0: float,
                         spp: int, count_clamped: bool) -> tuple[np.ndarray, int]:
    """A(x,y) = int_{r0}^{y} v(r) [ C(x+y-r, r) - C(x-y+r, r) ] dr on all nodes.

    C(t, r) is the cumulative integral of the bilinear kernel along the
    first coordinate.  Accumulation runs once per antidiagonal value of
    x+y (and per value of x-y), capturing the prefix at every y node.
    """
    n, h, X = grid.n, grid.h, grid.half_width
    nodes = grid.nodes
    j0_hits = np.nonzero(np.abs(nodes - r0) <= 1e-9 * max(1.0, X))[0]
    if len(j0_hits) == 0:
        raise ValueError(f"series base point r0={r0} must coincide with a grid node")
    j0 = int(j0_hits[0])

    Cn = np.zeros((n, n), dtype=complex)
    Cn[1:] = np.cumsum(0.5 * h * (S[:-1] + S[1:]), axis=0)

    du = grid.diff_nodes
    lam = np.arange(spp + 1) / spp
    wts = np.ones(spp + 1)
    wts[1:-1:2] = 4.0
    wts[2:-1:2] = 2.0
    wts *= (h / spp) / 3.0

    I1 = np.zeros((2 * n - 1, n - 1), dtype=complex)
    I2 = np.zeros((2 * n - 1, n - 1), dtype=complex)
    clamped = 0
    tol_out = 1e-12 * max(1.0, X)
    for c in range(n - 1):
        r_q = nodes[c] + lam * h
        mid = nodes[c] + 0.5 * h
        # nudge the sample toward the cell interior so segment jumps that sit
        # exactly on cell edges contribute their one-sided value
        v_q = np.asarray(vfun(r_q + (mid - r_q) * 1e-9), dtype=complex)
        Sb = S[:, c][:, None] * (1.0 - lam)[None, :] + S[:, c + 1][:, None] * lam[None, :]
        Cb = Cn[:, c][:, None] * (1.0 - lam)[None, :] + Cn[:, c + 1][:, None] * lam[None, :]
        t1 = du[None, :] - r_q[:, None]
        t2 = du[None, :] + r_q[:, None]
        if count_clamped:
            clamped += int(np.count_nonzero(np.abs(t1) > X + tol_out))
            clamped += int(np.count_nonzero(np.abs(t2) > X + tol_out))
        q1 = _prefix_query(t1, Sb, Cb, X, h)
        q2 = _prefix_query(t2, Sb, Cb, X, h)
        wv = (wts * v_q)[:, None]
        I1[:, c] = (wv * q1).sum(axis=0)
        I2[:, c] = (wv * q2).sum(axis=0)

    cs1 = np.concatenate([np.zeros((2 * n - 1, 1), dtype=complex),
                          np.cumsum(I1, axis=1)], axis=1)
    cs2 = np.concatenate([np.zeros((2 * n - 1, 1), dtype=complex),
                          np.cumsum(I2, axis=1)], axis=1)
    G1 = cs1 - cs1[:, [j0]]
    G2 = cs2 - cs2[:, [j0]]
    ii = np.arange(n)
    IU = ii[:, None] + ii[None, :]
    IW = ii[:, None] - ii[None, :] + (n - 1)
    J = np.broadcast_to(ii[None, :], (n, n))
    return G1[IU, J] - G2[IW, J], clamped


def apply_K_smooth(kernel: Kernel, pot: PotentialSpec, cfg: KConfig,
                   grid: Grid, stats: dict | None = None) -> Kernel:
    """Quadrature action of K on the smooth kernel part (segment potential).

    Singular parts of the input are ignored here; the dispatcher
    apply_K adds their closed-form images.  The second term of K is
    evaluated by running the first-term machinery on the transposed
    array with the conjugate potential, which makes Hermiticity
    preservation exact for Hermitian inputs.
    """
    _check_grid_domain(pot, grid)
    count = not pot.domain.is_box
    S = np.ascontiguousarray(kernel.smooth)
    A1, n1 = _characteristic_term(S, lambda r: eval_potential(pot, r),
                                  grid, cfg.r0, cfg.simpson_per_h, count)
    A2, n2 = _characteristic_term(np.ascontiguousarray(S.T),
                                  lambda r: np.conj(eval_potential(pot, r)),
                                  grid, cfg.r0, cfg.simpson_per_h, count)
    c = pot.constants.mass / pot.constants.hbar**2
    out = c * (A1 + A2.T)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite value in characteristic quadrature")
    if stats is not None:
        stats["truncated_evals"] = stats.get("truncated_evals", 0) + n1 + n2
    return Kernel(grid=grid, smooth=out)


class _SliceModel:
    """Piecewise-linear slice with one-sided limits at marked jump positions.

    Nodes lying on a marked position are dropped (they store midpoint
    averages); the one-sided limits there are rebuilt by linear
    extrapolation from the two nearest nodes on each side.
    """

    def __init__(self, nodes: np.ndarray, vals: np.ndarray, cuts):
        atol = 1e-9 * max(1.0, abs(float(nodes[-1])))
        cuts = sorted(c for c in cuts if nodes[0] - atol < c < nodes[-1] + atol)
        keep = np.ones(len(nodes), dtype=bool)
        for c in cuts:
            keep &= np.abs(nodes - c) > atol
        kn, kv = nodes[keep], vals[keep]

        def one_sided(c, side):
            if side == "left":
                sel = np.nonzero(kn < c - atol)[0]
                pick = sel[-2:]
            else:
                sel = np.nonzero(kn > c + atol)[0]
                pick = sel[:2]
            if len(pick) == 0:
                return 0.0 + 0.0j
            if len(pick) == 1:
                return kv[pick[0]]
            (xa, xb), (va, vb) = kn[pick], kv[pick]
            return va + (vb - va) * (c - xa) / (xb - xa)

        t_list = list(kn)
        w_list = list(kv)
        for c in cuts:
            pos = np.searchsorted(np.asarray(t_list), c)
            t_list[pos:pos] = [c, c]
            w_list[pos:pos] = [one_sided(c, "left"), one_sided(c, "right")]
        self.t = np.asarray(t_list, dtype=float)
        self.w = np.asarray(w_list, dtype=complex)
        widths = np.diff(self.t)
        self.cum = np.zeros(len(self.t), dtype=complex)
        self.cum[1:] = np.cumsum(0.5 * (self.w[:-1] + self.w[1:]) * widths)

    def antiderivative(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, self.t[0], self.t[-1])
        idx = np.clip(np.searchsorted(self.t, tc, side="right") - 1, 0, len(self.t) - 2)
        t0 = self.t[idx]
        width = self.t[idx + 1] - t0
        safe = np.where(width > 0.0, width, 1.0)
        f = np.where(width > 0.0, (tc - t0) / safe, 0.0)
        w0 = self.w[idx]
        val = w0 + f * (self.w[idx + 1] - w0)
        return self.cum[idx] + 0.5 * (w0 + val) * (tc - t0)


def apply_K_delta_rule(kernel: Kernel, pot: PotentialSpec, grid: Grid,
                       stats: dict | None = None) -> Kernel:
    """Action of the point couplings i*zeta_n*delta(x - a_n) under K.

    For each coupling, with z_n = 2 m zeta_n / hbar^2:

        (iz_n/2) [ theta(y - a_n) int_{x-y+a_n}^{x+y-a_n} F(s, a_n) ds
                 - theta(x - a_n) int_{y-x+a_n}^{x+y-a_n} F(a_n, r) dr ]

    applied to identity, parity and smooth input parts: the first two
    analytically, the smooth part by exact integration of its slice
    models at y = a_n and x = a_n.
    """
    _check_grid_domain(pot, grid)
    n, h, half = grid.n, grid.h, grid.half_width
    nodes = grid.nodes
    X, Y = grid.mesh()
    out = np.zeros((n, n), dtype=complex)
    c0 = pot.constants.c0
    tol = 1e-9 * max(1.0, half)
    clamped = 0
    count = not pot.domain.is_box
    locations = [a for a, _ in pot.deltas]
    for a, zeta in pot.deltas:
        if abs(a) > half + tol:
            raise ValueError(f"delta location {a} lies outside the grid")
        z = c0 * zeta
        if kernel.c_diag != 0.0:
            out += kernel.c_diag * (0.5j * z) * unit_step(X + Y - 2.0 * a) * np.sign(Y - X)
        if kernel.c_anti != 0.0:
            out += kernel.c_anti * (0.5j * z) * (
                unit_step(Y - a) * (unit_step(X + Y) - unit_step(X - Y + 2.0 * a))
                - unit_step(X - a) * (unit_step(X + Y) - unit_step(Y - X + 2.0 * a)))
        if kernel.sup_smooth > 0.0:
            pos = np.clip((a + half) / h, 0.0, n - 1.0)
            ja = int(min(int(pos), n - 2))
            lam = pos - ja
            col = (1.0 - lam) * kernel.smooth[:, ja] + lam * kernel.smooth[:, ja + 1]
            row = (1.0 - lam) * kernel.smooth[ja, :] + lam * kernel.smooth[ja + 1, :]
            # jump lines of earlier iterates cross this slice at the coupling
            # locations and at their reflections through x + y = 2 a_m
            cuts = set(locations) | {2.0 * b - a for b in locations}
            col_model = _SliceModel(nodes, col, cuts)
            row_model = _SliceModel(nodes, row, cuts)
            tA = X + Y - a
            tB = X - Y + a
            tC = Y - X + a
            if count:
                for tq in (tA, tB, tC):
                    clamped += int(np.count_nonzero(np.abs(tq) > half + tol))
            I1 = col_model.antiderivative(tA) - col_model.antiderivative(tB)
            I2 = row_model.antiderivative(tA) - row_model.antiderivative(tC)
            out += (0.5j * z) * (unit_step(Y - a) * I1 - unit_step(X - a) * I2)
    if stats is not None:
        stats["truncated_evals"] = stats.get("truncated_evals", 0) + clamped
    return Kernel(grid=grid, smooth=out)


def apply_K(kernel: Kernel, pot: PotentialSpec, cfg: KConfig, grid: Grid,
            stats: dict | None = None) -> Kernel:
    """One application of K, dispatching singular and smooth input parts.

    Raises:
        ValueError: for a parity singular part under a segment
            potential (no closed-form rule exists for that channel).
    """
    _check_grid_domain(pot, grid)
    out = np.zeros((grid.n, grid.n), dtype=complex)
    if pot.has_segments:
        if kernel.c_anti != 0.0:
            raise ValueError(
                "parity singular part is not supported under a segment potential")
        if kernel.c_diag != 0.0:
            out += kernel.c_diag * apply_K_to_identity(pot, grid, cfg).smooth
        if kernel.sup_smooth > 0.0:
            out += apply_K_smooth(kernel, pot, cfg, grid, stats).smooth
    if pot.has_deltas:
        out += apply_K_delta_rule(kernel, pot, grid, stats).smooth
    return Kernel(grid=grid, smooth=out)


def neumann_series(seed: SeedPair, pot: PotentialSpec, cfg: KConfig, grid: Grid,
                   include_identity: bool = True,
                   include_parity: bool = False) -> SeriesState:
    """Iterate K from a seed kernel and accumulate the series solution.

    Stops after max_order applications or when the latest iterate's sup
    norm drops below stop_tol.  Divergence (three consecutive sup-norm
    increases ending above ten times the order-1 norm) sets a flag on
    the returned state; the computation is still returned.
    """
    k0 = seed_to_kernel(seed, grid, include_identity=include_identity,
                        include_parity=include_parity)
    iterates = [k0]
    sup_norms = [k0.sup_smooth]
    stats: dict = {}
    if pot.has_segments or pot.has_deltas:
        for _ in range(cfg.max_order):
            nxt = apply_K(iterates[-1], pot, cfg, grid, stats)
            iterates.append(nxt)
            sup_norms.append(nxt.sup_smooth)
            if nxt.sup_smooth < cfg.stop_tol:
                break
    smooth = np.zeros((grid.n, grid.n), dtype=complex)
    for k in iterates:
        smooth += k.smooth
    partial = Kernel(grid=grid,
                     c_diag=sum(k.c_diag for k in iterates),
                     c_anti=sum(k.c_anti for k in iterates),
                     smooth=smooth)
    diverged = (len(sup_norms) >= 4
                and sup_norms[-1] > sup_norms[-2] > sup_norms[-3] > sup_norms[-4]
                and sup_norms[-1] > 10.0 * sup_norms[1])
    return SeriesState(iterates=iterates, partial_sum=partial, sup_norms=sup_norms,
                       diverged=diverged,
                       truncated_evals=stats.get("truncated_evals", 0))


def convergence_bound(pot: PotentialSpec, grid: Grid, ell: int) -> np.ndarray:
    """Pointwise bound |z|^l (|x-a| + |y-a|)^(l-1) / 2 on the l-th iterate.

    Valid for a single point coupling acting on the identity seed.
    """
    if len(pot.deltas) != 1:
        raise ValueError("the iterate bound is available for a single point coupling only")
    if pot.has_segments:
        raise ValueError("the iterate bound is available for a pure point coupling only")
    if ell < 1:
        raise ValueError(f"iterate order must be at least 1, got {ell}")
    a, zeta = pot.deltas[0]
    z = pot.constants.c0 * zeta
    X, Y = grid.mesh()
    return 0.5 * np.abs(z) ** ell * (np.abs(X - a) + np.abs(Y - a)) ** (ell - 1)
