"""Quadrature of the translation-invariant cell stencil.

For cells of side ``h`` offset by the integer vector ``k`` the pair weight is
``W(k) = int Phi_k(s) J(s) ds`` where ``Phi_k`` is the product of 1D tents
``max(h - |s_d - k_d h|, 0)``.  Splitting space into lattice squares
``Q_a = prod [a_d h, (a_d + 1) h]`` gives ``W(k) = h^N sum_b B[k + b, b]`` over
``b in {-1, 0}^N`` with the square moments

    B[a, b] = int_{Q_a} prod_d psi_{b_d}(xi_d) J(s) ds,  psi_{-1}(x) = x, psi_0(x) = 1 - x,

``xi`` the local coordinate of ``s`` in ``Q_a``.  Squares touching the origin
are integrated after a Duffy split and a power substitution that removes the
``|s|^{-alpha}`` singularity; squares crossed by a profile breakpoint sphere
are split along it; all others use a tensor Gauss rule.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from nlsym.errors import UnsupportedError

GAUSS_FAR = 20
GAUSS_PIECE = 24
GRADED_LEVELS = 14
GRADED_N = 16
CHUNK = 4096


@lru_cache(maxsize=None)
def _gauss01(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


def _rule(a, b, n=GAUSS_PIECE):
    x, w = _gauss01(n)
    return a + (b - a) * x, (b - a) * w


@lru_cache(maxsize=None)
def _graded01():
    # composite Gauss on [0, 1], geometrically refined towards 0
    xs, ws = [], []
    edges = [0.0] + [2.0 ** (-k) for k in range(GRADED_LEVELS, -1, -1)]
    for lo, hi in zip(edges, edges[1:]):
        x, w = _rule(lo, hi, GRADED_N)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _graded(c):
    x, w = _graded01()
    return c * x, c * w


def _pieces(lo, hi, cuts):
    pts = sorted({float(c) for c in cuts if lo < c < hi})
    return list(zip([lo, *pts], [*pts, hi]))


def b_vectors(dim):
    return [np.array(b) for b in itertools.product((-1, 0), repeat=dim)]


def _psi(b, xi):
    return xi if b == -1 else 1.0 - xi


def _moment_weights(xi, bs):
    """Array (..., len(bs)) of prod_d psi_{b_d}(xi_d)."""
    out = np.ones(xi.shape[:-1] + (len(bs),))
    for j, b in enumerate(bs):
        for d, bd in enumerate(b):
            out[..., j] *= _psi(bd, xi[..., d])
    return out


def _corner_moment_weights(eta, a, bs):
    """``_moment_weights`` on a corner square in terms of the corner distance ``eta``."""
    out = np.ones(eta.shape[:-1] + (len(bs),))
    for j, b in enumerate(bs):
        for d, bd in enumerate(b):
            vanishing = (a[d] == 0) == (bd == -1)
            out[..., j] *= eta[..., d] if vanishing else 1.0 - eta[..., d]
    return out


def check_cell_scheme(kernel):
    if kernel.singularity_order >= 1.0:
        raise UnsupportedError(
            f"singularity order {kernel.singularity_order} >= 1: indicator functions have infinite "
            "energy, so the piecewise-constant cell scheme does not apply (a nodal continuous "
            "finite-element scheme would be required and is not provided)"
        )


def _q(kernel):
    a = kernel.singularity_order
    return 1.0 / (1.0 - a) if a > 0 else 1.0


def _fill_underflow(f, u):
    """Replace integrand rows at nodes where ``u = w^q`` underflowed.

    After the substitution the integrand is bounded and smooth in ``w``, so
    the value at the smallest representable node stands in for the few nodes
    below it (their total weight is below 1e-6 of the first cell).
    """
    # subnormal u (and its Jacobian) has lost precision as well
    bad = (u < 1e-280) | ~np.all(np.isfinite(f), axis=-1)
    if not bad.any():
        return f
    good = np.flatnonzero(~bad)
    if len(good) == 0:
        raise FloatingPointError("corner quadrature underflowed at every node")
    f = f.copy()
    f[bad] = f[good[np.argmin(u[good])]]
    return f


def _pnorm_vec(v, p):
    v = np.abs(v)
    if p == 1:
        return v.sum(-1)
    if p == 2:
        return np.sqrt((v * v).sum(-1))
    return (v**p).sum(-1) ** (1.0 / p)


# ---------------------------------------------------------------------------
# squares touching the origin
# ---------------------------------------------------------------------------


def corner_integral(kernel, h, a, weight):
    """``int_{Q_a} weight(eta) J(s) ds`` for a square with a corner at the origin.

    ``eta = |s| / h`` componentwise is the local coordinate measured from the
    origin corner (passed instead of ``xi`` to avoid cancellation there);
    ``weight`` maps (..., N) to (..., m) and must vanish at ``eta = 0``.
    """
    dim = kernel.dim
    a = np.asarray(a)
    sgn = np.where(a == 0, 1.0, -1.0)
    q = _q(kernel)
    brk = kernel.breakpoints
    p = kernel.pnorm

    def w_nodes(u_cuts):
        # nodes/weights in w (u = w^q) on [0, 1] with cuts in u
        cuts = sorted(c for c in u_cuts if 0.0 < c < 1.0)
        wc = [c ** (1.0 / q) for c in cuts]
        edges = [0.0, *wc, 1.0]
        xs, ws = [], []
        x0, w0 = _graded(edges[1])
        xs.append(x0)
        ws.append(w0)
        for lo, hi in zip(edges[1:], edges[2:]):
            x, w = _rule(lo, hi)
            xs.append(x)
            ws.append(w)
        return np.concatenate(xs), np.concatenate(ws)

    if dim == 1:
        wn, ww = w_nodes([R / h for R in brk])
        u = wn**q
        jac = q * wn ** (q - 1.0)
        eta = u[:, None]
        with np.errstate(invalid="ignore", over="ignore"):
            f = weight(eta) * (kernel(sgn * eta * h) * jac)[:, None]
        return (_fill_underflow(f, u) * (ww * h)[:, None]).sum(axis=0)

    total = 0.0
    # two Duffy triangles: eta = (u, u v) and (u v, u)
    for tri in (0, 1):
        v_cuts = []
        for R in brk:
            r = R / h
            if r > 1.0:
                v_cuts.append((r**p - 1.0) ** (1.0 / p) if p != 1 else r - 1.0)
        for vlo, vhi in _pieces(0.0, 1.0, v_cuts):
            vn, vw = _rule(vlo, vhi)
            for v, wv in zip(vn, vw):
                scale = float(_pnorm_vec(np.array([1.0, v]), p))
                wn, ww = w_nodes([R / (h * scale) for R in brk])
                u = wn**q
                jac = q * wn ** (q - 1.0) * u
                if tri == 0:
                    eta = np.stack([u, u * v], axis=-1)
                else:
                    eta = np.stack([u * v, u], axis=-1)
                with np.errstate(invalid="ignore", over="ignore"):
                    f = weight(eta) * (kernel(sgn * eta * h) * jac)[:, None]
                total = total + (_fill_underflow(f, u) * (ww * (wv * h * h))[:, None]).sum(axis=0)
    return total


# ---------------------------------------------------------------------------
# squares crossed by a breakpoint sphere
# ---------------------------------------------------------------------------


def _crossing_radii(kernel, lo, hi):
    """Breakpoint radii strictly between the min and max p-norm over the square [lo, hi]."""
    nearest = np.where((lo < 0) & (hi > 0), 0.0, np.minimum(np.abs(lo), np.abs(hi)))
    farthest = np.maximum(np.abs(lo), np.abs(hi))
    pmin = float(_pnorm_vec(nearest, kernel.pnorm))
    pmax = float(_pnorm_vec(farthest, kernel.pnorm))
    return [R for R in kernel.breakpoints if pmin < R < pmax]


def _solve_other(R, s, p):
    """Nonnegative t with |(s, t)|_p = R, or None."""
    rest = R**p - abs(s) ** p
    if rest <= 0:
        return None
    return rest ** (1.0 / p)


def crossing_integral(kernel, h, a, weight, radii):
    """``int_{Q_a} weight(xi) J(s) ds`` split along the breakpoint spheres ``radii``."""
    a = np.asarray(a, dtype=float)
    lo, hi = a * h, (a + 1.0) * h
    p = kernel.pnorm
    if kernel.dim == 1:
        cuts = [c for R in radii for c in (R, -R)]
        total = 0.0
        for plo, phi in _pieces(lo[0], hi[0], cuts):
            s, w = _rule(plo, phi)
            xi = ((s - lo[0]) / h)[:, None]
            vals = kernel(s[:, None]) * w
            total = total + (weight(xi) * vals[:, None]).sum(axis=0)
        return total
    # integrate the variable along which the sphere may be tangent on the inside
    inner = 0 if (a[1] in (0.0, -1.0)) else 1
    outer = 1 - inner
    o_cuts = []
    for R in radii:
        o_cuts += [R, -R]
        for e in (lo[inner], hi[inner]):
            t = _solve_other(R, e, p)
            if t is not None:
                o_cuts += [t, -t]
    total = 0.0
    for olo, ohi in _pieces(lo[outer], hi[outer], o_cuts):
        on, ow = _rule(olo, ohi)
        for so, wo in zip(on, ow):
            i_cuts = []
            for R in radii:
                t = _solve_other(R, so, p)
                if t is not None:
                    i_cuts += [t, -t]
            xs, ws = [], []
            for ilo, ihi in _pieces(lo[inner], hi[inner], i_cuts):
                x, w = _rule(ilo, ihi)
                xs.append(x)
                ws.append(w)
            si = np.concatenate(xs)
            wi = np.concatenate(ws)
            s = np.empty((len(si), 2))
            s[:, inner] = si
            s[:, outer] = so
            xi = (s - lo) / h
            vals = kernel(s) * wi * wo
            total = total + (weight(xi) * vals[:, None]).sum(axis=0)
    return total


# ---------------------------------------------------------------------------
# square moments and the stencil table
# ---------------------------------------------------------------------------


def square_moments(kernel, h, squares):
    """Moments ``B[a, b]`` for every square index ``a`` (rows) and ``b`` (columns).

    Entries with ``a == b`` on a square touching the origin diverge and are
    returned as NaN; they are never needed for ``k != 0``.
    """
    squares = np.asarray(squares, dtype=np.int64).reshape(-1, kernel.dim)
    bs = b_vectors(kernel.dim)
    out = np.full((len(squares), len(bs)), np.nan)
    corner = np.all((squares == 0) | (squares == -1), axis=1)
    special = corner.copy()
    crossing = {}
    if kernel.breakpoints:
        for idx in np.flatnonzero(~corner):
            a = squares[idx].astype(float)
            radii = _crossing_radii(kernel, a * h, (a + 1) * h)
            if radii:
                crossing[idx] = radii
                special[idx] = True
    regular = np.flatnonzero(~special)
    xg, wg = _gauss01(GAUSS_FAR)
    grids = np.meshgrid(*([xg] * kernel.dim), indexing="ij")
    xi = np.stack([g.ravel() for g in grids], axis=-1)
    wt = np.prod(np.stack(np.meshgrid(*([wg] * kernel.dim), indexing="ij"), -1).reshape(-1, kernel.dim), axis=1)
    mw = _moment_weights(xi, bs) * (wt * h**kernel.dim)[:, None]
    for start in range(0, len(regular), CHUNK):
        sel = regular[start:start + CHUNK]
        s = (squares[sel][:, None, :] + xi[None, :, :]) * h
        out[sel] = kernel(s) @ mw
    for idx in np.flatnonzero(corner):
        a = squares[idx]
        keep = [j for j, b in enumerate(bs) if not np.array_equal(b, a)]

        def weight(eta, a=a, keep=keep):
            return _corner_moment_weights(eta, a, [bs[j] for j in keep])

        out[idx, keep] = corner_integral(kernel, h, a, weight)
    for idx, radii in crossing.items():
        out[idx] = crossing_integral(kernel, h, squares[idx], lambda x: _moment_weights(x, bs), radii)
    return out


def offset_weight(kernel, h, k):
    """Pair weight ``W(k)`` of two cells offset by the nonzero integer vector ``k``."""
    check_cell_scheme(kernel)
    k = np.asarray(k, dtype=np.int64)
    if not np.any(k):
        raise ValueError("offset must be nonzero")
    bs = b_vectors(kernel.dim)
    squares = np.array([k + b for b in bs])
    B = square_moments(kernel, h, squares)
    return float(h**kernel.dim * sum(B[j, j] for j in range(len(bs))))


def _symmetrize(table, kernel):
    table = 0.5 * (table + np.flip(table))
    if kernel.axis_symmetric:
        for axis in range(table.ndim):
            table = 0.5 * (table + np.flip(table, axis=axis))
        if table.ndim == 2 and table.shape[0] == table.shape[1]:
            table = 0.5 * (table + table.T)
    return table


def stencil_table(kernel, h, extent):
    """Array ``T`` with ``T[k + extent] = W(k)`` for ``|k_d| <= extent_d``; ``W(0) := 0``."""
    check_cell_scheme(kernel)
    extent = tuple(int(e) for e in np.broadcast_to(extent, (kernel.dim,)))
    axes = [np.arange(-e - 1, e + 1) for e in extent]
    sq = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    sq_shape = sq.shape[:-1]
    B = square_moments(kernel, h, sq.reshape(-1, kernel.dim)).reshape(sq_shape + (-1,))
    bs = b_vectors(kernel.dim)
    table = np.zeros(tuple(2 * e + 1 for e in extent))
    for j, b in enumerate(bs):
        # position of square k + b inside the square array is (k + e) + (b + 1)
        sl = tuple(slice(bd + 1, bd + 1 + 2 * e + 1) for bd, e in zip(b, extent))
        part = B[sl + (j,)]
        center = tuple(e for e in extent)
        part = part.copy()
        part[center] = 0.0
        table += part
    table *= h**kernel.dim
    table[tuple(extent)] = 0.0
    return _symmetrize(table, kernel)


# ---------------------------------------------------------------------------
# total off-diagonal weight of one cell
# ---------------------------------------------------------------------------


def _outside_box_mass(kernel, h):
    """``int_{R^N minus [-h, h]^N} J``."""
    if kernel.dim == 1:
        if kernel.radial:
            return 2.0 * kernel.radial_moment(0.0, h)
        pts = [R for R in kernel.breakpoints if R > h]
        from nlsym.kernels import _quad_pieces

        plus = _quad_pieces(lambda t: float(kernel(np.array([[t]]))[0]), h, math.inf, pts)[0]
        minus = _quad_pieces(lambda t: float(kernel(np.array([[-t]]))[0]), h, math.inf, pts)[0]
        return plus + minus
    p = kernel.pnorm

    if kernel.radial:
        def g(theta):
            e = np.array([math.cos(theta), math.sin(theta)])
            rho = h / np.abs(e).max()
            sc = float(_pnorm_vec(e, p))
            return sc**-2.0 * kernel.radial_moment(1.0, rho * sc)
    else:
        def g(theta):
            e = np.array([math.cos(theta), math.sin(theta)])
            rho = h / np.abs(e).max()
            sc = float(_pnorm_vec(e, p))
            pts = [R / sc for R in kernel.breakpoints if R / sc > rho]
            from nlsym.kernels import _quad_pieces

            return _quad_pieces(lambda r: r * float(kernel((r * e)[None, :])[0]), rho, math.inf, pts)[0]

    total = 0.0
    for j in range(8):
        total += integrate.quad(g, j * math.pi / 4, (j + 1) * math.pi / 4, epsabs=0.0,
                                epsrel=1e-12, limit=400)[0]
    return total


def total_weight(kernel, h):
    """``S = sum_{k != 0} W(k) = int (h^N - Phi_0) J``; the diagonal of the cell operator."""
    check_cell_scheme(kernel)
    dim = kernel.dim
    near = 0.0
    for a in itertools.product((-1, 0), repeat=dim):
        a = np.array(a)

        def weight(eta):
            # 1 - prod(1 - eta) without cancellation near the corner
            return (-np.expm1(np.log1p(-eta).sum(axis=-1)))[..., None]

        near += float(corner_integral(kernel, h, a, weight)[0])
    tail = _outside_box_mass(kernel, h)
    if not math.isfinite(tail):
        raise UnsupportedError("kernel tail is not integrable")
    return h**dim * (near + tail)
