"""Discrete nonlocal form for piecewise-constant fields on a cell grid.

For ``u = sum_i u_i 1_{C_i}`` the energy ``1/2 iint (u(x) - u(y))^2 J(x - y)``
equals ``u^T A u`` with ``A = S I - W``: ``W_ij`` is the pair weight of two
cells and ``S`` the total weight one cell exchanges with all other cells of
space.  The exterior (killing) weight of a cell is the part of ``S`` not
spent inside the domain, ``kappa_i = S - sum_{j in Omega} W_ij``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, sparse

from nlsym import _stencil
from nlsym.errors import ConfigurationError, DomainError
from nlsym.kernels import pnorm, tail_mass
from nlsym.lattice import CellField, GridField, snap_index

__all__ = [
    "FormMatrix",
    "ReducedSystem",
    "assemble",
    "pair_weight",
    "exterior_weight",
    "total_weight",
    "form_value",
    "apply_operator",
    "rho_restricted",
    "pv_apply",
    "reduce_antisymmetric",
    "reflect_cells",
    "export_triplets",
]

ROW_CHUNK = 512


@dataclass(frozen=True, eq=False)
class FormMatrix:
    """Assembled discrete form on a mask, with its translation-invariant stencil.

    ``table[k + extent]`` holds the pair weight of two cells offset by ``k``;
    it covers every offset within the mask's grid box, so the same object
    evaluates the form for fields living anywhere on that box.
    """

    kernel: object
    mask: object
    table: np.ndarray
    extent: tuple
    S: float
    W: np.ndarray
    kappa: np.ndarray
    A: np.ndarray
    M: sparse.spmatrix = field(repr=False)

    @property
    def h(self):
        return self.mask.h

    @property
    def dim(self):
        return self.mask.dim

    @property
    def mass(self):
        """Diagonal entry of the mass matrix, ``h^N``."""
        return self.h**self.dim

    @property
    def n(self):
        return self.mask.n

    def weights(self, diff):
        """Pair weights for integer offsets ``diff`` (..., N)."""
        diff = np.asarray(diff, dtype=np.int64)
        ext = np.asarray(self.extent)
        if np.any(np.abs(diff) > ext):
            raise ConfigurationError("offset beyond the assembled stencil; fields must stay on the grid box")
        idx = diff + ext
        return self.table[tuple(np.moveaxis(idx, -1, 0))]

    def norm(self):
        """Spectral-norm bound ``2 S`` (Gershgorin on the full-space operator)."""
        return 2.0 * self.S


def total_weight(kernel, h):
    """Total pair weight ``S`` of one cell against all other cells of space."""
    return _stencil.total_weight(kernel, h)


def pair_weight(kernel, h, cell_i, cell_j):
    """``int_{C_i} int_{C_j} J(x - y) dy dx`` for distinct integer cell indices."""
    k = np.atleast_1d(np.asarray(cell_j, dtype=np.int64) - np.asarray(cell_i, dtype=np.int64))
    if not np.any(k):
        raise DomainError("pair weight needs two distinct cells")
    return _stencil.offset_weight(kernel, h, k)


def assemble(kernel, mask, extent=None):
    """Assemble ``A = S I - W`` on the inside cells of ``mask``.

    ``extent`` bounds the stencil offsets; by default it spans the grid box.
    """
    if kernel.dim != mask.dim:
        raise DomainError("kernel and mask dimensions differ")
    _stencil.check_cell_scheme(kernel)
    if extent is None:
        extent = tuple(n - 1 for n in mask.grid.shape)
    extent = tuple(int(e) for e in extent)
    table = _stencil.stencil_table(kernel, mask.h, extent)
    table.setflags(write=False)
    S = float(_stencil.total_weight(kernel, mask.h))
    cells = mask.cells
    diff = cells[None, :, :] - cells[:, None, :]
    ext = np.asarray(extent)
    if np.any(np.abs(diff) > ext):
        raise ConfigurationError("stencil extent smaller than the domain")
    W = table[tuple(np.moveaxis(diff + ext, -1, 0))]
    kappa = S - W.sum(axis=1)
    A = S * np.eye(mask.n) - W
    M = sparse.identity(mask.n, format="dia") * mask.h**mask.dim
    return FormMatrix(kernel, mask, table, extent, S, W, kappa, A, M)


def exterior_weight(F, cell):
    """Killing weight ``kappa`` of one inside cell (given by its integer index)."""
    cell = np.atleast_1d(np.asarray(cell, dtype=np.int64))
    hit = np.flatnonzero(np.all(F.mask.cells == cell, axis=1))
    if len(hit) != 1:
        raise DomainError(f"cell {cell.tolist()} is not inside the domain")
    return float(F.kappa[hit[0]])


# ---------------------------------------------------------------------------
# form evaluation
# ---------------------------------------------------------------------------


def _support(g, grid):
    pos = np.argwhere(g.values != 0)
    return pos + np.asarray(grid.lo), g.values[tuple(pos.T)]


def _as_grid(F, u):
    if isinstance(u, CellField):
        if not u.mask.same(F.mask):
            raise ValueError("field is defined on a different mask")
        return u.to_grid()
    if isinstance(u, GridField):
        if u.grid.key() != F.mask.grid.key():
            raise ValueError("field is defined on a different grid")
        return u
    raise TypeError("expected a CellField or GridField")


def form_value(F, u, v):
    """``J(u, v)`` for piecewise-constant fields (zero outside their support)."""
    if isinstance(u, CellField) and isinstance(v, CellField):
        if not (u.mask.same(F.mask) and v.mask.same(F.mask)):
            raise ValueError("fields are defined on a different mask")
        return float(u.values @ (F.A @ v.values))
    gu, gv = _as_grid(F, u), _as_grid(F, v)
    cu, vu = _support(gu, F.mask.grid)
    cv, vv = _support(gv, F.mask.grid)
    diag = F.S * float(np.sum(gu.values * gv.values))
    off = 0.0
    for start in range(0, len(cu), ROW_CHUNK):
        rows = cu[start:start + ROW_CHUNK]
        Wb = F.weights(cv[None, :, :] - rows[:, None, :])
        off += float(vu[start:start + ROW_CHUNK] @ (Wb @ vv))
    return diag - off


def apply_operator(F, v, rows):
    """``(A_box v)_i`` for the grid positions ``rows`` (integer cell indices, (m, N))."""
    g = _as_grid(F, v)
    rows = np.asarray(rows, dtype=np.int64).reshape(-1, F.dim)
    cv, vv = _support(g, F.mask.grid)
    pos = rows - np.asarray(F.mask.grid.lo)
    out = F.S * g.values[tuple(pos.T)]
    for start in range(0, len(rows), ROW_CHUNK):
        blk = rows[start:start + ROW_CHUNK]
        Wb = F.weights(cv[None, :, :] - blk[:, None, :])
        out[start:start + ROW_CHUNK] -= Wb @ vv
    return out


def rho_restricted(F, v, Uprime):
    """``1/2 sum_{i != j in U'} (v_i - v_j)^2 W_ij`` over the cells of the grid array ``Uprime``."""
    g = _as_grid(F, v)
    sel = np.asarray(Uprime, dtype=bool)
    pos = np.argwhere(sel)
    cells = pos + np.asarray(F.mask.grid.lo)
    vals = g.values[tuple(pos.T)]
    total = 0.0
    for start in range(0, len(cells), ROW_CHUNK):
        blk = cells[start:start + ROW_CHUNK]
        Wb = F.weights(cells[None, :, :] - blk[:, None, :])
        d = vals[start:start + ROW_CHUNK, None] - vals[None, :]
        total += float(np.sum(d * d * Wb))
    return 0.5 * total


# ---------------------------------------------------------------------------
# principal-value oracle
# ---------------------------------------------------------------------------


def pv_apply(kernel, v, x, delta, support):
    """Pointwise ``[I v](x)`` for a smooth compactly supported ``v``.

    Uses the symmetric second difference inside the ``|.|_p`` ball of radius
    ``delta`` and the plain difference outside; ``support = (lo, hi)`` is a
    box containing the support of ``v``.  ``v`` maps points (..., N) to values.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lo, hi = (np.atleast_1d(np.asarray(b, dtype=float)) for b in support)
    if not delta > 0:
        raise DomainError("split radius must be positive")

    def V(pts):
        return float(v(np.asarray(pts, dtype=float)[None, :])[0])

    def J(z):
        return float(kernel(np.asarray(z, dtype=float)[None, :])[0])

    vx = V(x)
    opts = dict(epsabs=1e-13, epsrel=1e-11, limit=400)
    brk = list(kernel.breakpoints)
    if kernel.dim == 1:
        pts = [R for R in brk if R < delta]
        near = integrate.quad(lambda z: (2 * vx - V(x + z) - V(x - z)) * J([z]), 0.0, delta,
                              points=pts or None, **opts)[0]
        far = 0.0
        a, b = lo[0] - x[0], hi[0] - x[0]
        for seg in ((a, min(b, -delta)), (max(a, delta), b)):
            if seg[1] > seg[0]:
                cut = [c for c in (-np.array(brk)).tolist() + brk if seg[0] < c < seg[1]]
                far += integrate.quad(lambda z: V(x + z) * J([z]), seg[0], seg[1],
                                      points=cut or None, **opts)[0]
        return near + vx * tail_mass(kernel, delta) - far

    corners = np.array([[cx, cy] for cx in (lo[0], hi[0]) for cy in (lo[1], hi[1])])
    rmax = float(np.max(np.linalg.norm(corners - x, axis=1)))

    def near_theta(theta):
        e = np.array([np.cos(theta), np.sin(theta)])
        sc = float(pnorm(e, kernel.pnorm))
        return integrate.quad(lambda r: (2 * vx - V(x + r * e) - V(x - r * e)) * J(r * e) * r,
                              0.0, delta / sc, **opts)[0]

    def far_theta(theta):
        e = np.array([np.cos(theta), np.sin(theta)])
        sc = float(pnorm(e, kernel.pnorm))
        r0 = delta / sc
        if rmax <= r0:
            return 0.0
        cut = [R / sc for R in brk if r0 < R / sc < rmax]
        return integrate.quad(lambda r: V(x + r * e) * J(r * e) * r, r0, rmax,
                              points=cut or None, **opts)[0]

    near = integrate.quad(near_theta, 0.0, np.pi, **opts)[0]
    far = integrate.quad(far_theta, 0.0, 2 * np.pi, **opts)[0]
    return near + vx * tail_mass(kernel, delta) - far


# ---------------------------------------------------------------------------
# antisymmetric reduction
# ---------------------------------------------------------------------------


def reflect_cells(grid, cells, lam, axis=0):
    """Integer indices of the reflected cells ``Q_lambda(cells)``."""
    t = snap_index(grid.h, lam)
    out = np.array(cells, dtype=np.int64, copy=True)
    out[:, axis] = t - 1 - out[:, axis]
    lo = np.asarray(grid.lo)
    if np.any(out < lo) or np.any(out >= lo + np.asarray(grid.shape)):
        raise ConfigurationError("reflected cells leave the grid box; increase padding")
    return out


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """``B = P^T A P`` on antisymmetric fields parametrized by their ``H``-side values.

    ``cells`` are the integer indices of the reduced unknowns (all on the
    ``H_lambda`` side), ``reflected`` their mirror cells.  The reduced mass is
    ``P^T M P = 2 h^N I``.
    """

    lam: float
    t: int
    cells: np.ndarray
    reflected: np.ndarray
    B: np.ndarray
    mass: float

    @property
    def n(self):
        return len(self.cells)

    def embed(self, F, a):
        """Antisymmetric grid field with values ``a`` on ``cells`` and ``-a`` on their mirrors."""
        grid = F.mask.grid
        vals = np.zeros(grid.shape)
        lo = np.asarray(grid.lo)
        vals[tuple((self.cells - lo).T)] = a
        vals[tuple((self.reflected - lo).T)] = -np.asarray(a, dtype=float)
        return GridField(grid, vals)


def reduce_antisymmetric(F, lam, cells=None):
    """Reduced matrix of the form on antisymmetric fields about the plane ``x_1 = lam``.

    ``cells`` is a grid-shaped boolean array of unknowns on the ``H_lambda``
    side (default: inside cells of the domain on that side).
    """
    from nlsym.lattice import half_cells

    grid = F.mask.grid
    t = snap_index(grid.h, lam)
    lam = t * grid.h / 2.0
    side = half_cells(grid, lam)
    sel = F.mask.inside & side if cells is None else np.asarray(cells, dtype=bool)
    if np.any(sel & ~side):
        raise ValueError("reduced unknowns must lie strictly on the H side")
    cb = np.argwhere(sel) + np.asarray(grid.lo)
    qb = reflect_cells(grid, cb, lam)

    def Wd(p, q):
        return F.weights(q[None, :, :] - p[:, None, :])

    B = 2.0 * F.S * np.eye(len(cb)) - Wd(cb, cb) - Wd(qb, qb) + Wd(cb, qb) + Wd(qb, cb)
    B = 0.5 * (B + B.T)
    return ReducedSystem(lam, t, cb, qb, B, 2.0 * F.mass)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def export_triplets(F, extra=None):
    """Triplet rows ``(i, j, value)`` of the nonzero entries of ``A`` and a JSON header."""
    i, j = np.nonzero(F.A)
    rows = list(zip(i.tolist(), j.tolist(), F.A[i, j].tolist()))
    header = {
        "h": F.h,
        "N": F.dim,
        "n": F.n,
        "mask_hash": F.mask.hash(),
        "kernel": F.kernel.spec(),
        "S": F.S,
    }
    if extra:
        header.update(extra)
    return rows, json.dumps(header, sort_keys=True)
