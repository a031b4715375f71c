"""Property audits behind ``nlsym verify``: exact algebra, sign structure and quadrature oracles."""
from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import numpy as np
from scipy import integrate

from nlsym.assembly import form_value, reduce_antisymmetric, rho_restricted
from nlsym.errors import ConfigurationError
from nlsym.lattice import GridField, half_cells, reflect_field

__all__ = [
    "CheckResult",
    "check_matrix_structure",
    "check_positive_part_contraction",
    "check_antisymmetric_key_inequality",
    "check_reduced_sign_structure",
    "check_inverse_positivity",
    "check_pair_weight_oracle",
    "oracle_offset_weight_1d",
    "oracle_self_weight_1d",
    "run_all",
]


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: dict


def _scale(F):
    return max(F.S, 1e-300)


def check_matrix_structure(F, samples=1000, seed=0):
    """Exact symmetry, nonnegative weights and a nonnegative form on random vectors."""
    rng = np.random.default_rng(seed)
    sym = bool(np.array_equal(F.A, F.A.T))
    w_ok = bool(F.W.min(initial=0.0) >= 0.0)
    k_ok = bool(F.kappa.min(initial=0.0) >= -1e-12 * _scale(F))
    U = rng.standard_normal((samples, F.n))
    q = np.einsum("ij,jk,ik->i", U, F.A, U) / np.einsum("ij,ij->i", U, U)
    psd = bool(q.min() >= -1e-12 * _scale(F))
    # energy identity: u^T A u = 1/2 sum (u_i - u_j)^2 W_ij + sum u_i^2 kappa_i
    u = U[0]
    energy = 0.5 * np.sum((u[:, None] - u[None, :]) ** 2 * F.W) + np.sum(u * u * F.kappa)
    ident = bool(abs(energy - u @ F.A @ u) <= 1e-10 * _scale(F) * (u @ u))
    return CheckResult("matrix_structure", sym and w_ok and k_ok and psd and ident,
                       {"symmetric": sym, "weights_nonnegative": w_ok, "kappa_nonnegative": k_ok,
                        "min_rayleigh": float(q.min()), "energy_identity": ident})


def _random_support(F, rng, cells=16):
    """Grid-shaped selection of at most ``cells`` cells around the domain's first cell."""
    grid = F.mask.grid
    sel = np.zeros(grid.shape, dtype=bool)
    start = np.argwhere(F.mask.inside)[0]
    width = max(1, int(round(cells ** (1.0 / grid.dim))))
    sl = tuple(slice(max(s - 1, 0), max(s - 1, 0) + width) for s in start)
    sel[sl] = True
    return sel


def check_positive_part_contraction(F, samples=1000, seed=0, cells=16):
    """``rho(v^+, U') <= rho(v, U')`` and ``rho(v^-, U') <= rho(v, U')`` on random fields."""
    rng = np.random.default_rng(seed)
    grid = F.mask.grid
    sel = _random_support(F, rng, cells)
    worst = -math.inf
    for _ in range(samples):
        vals = np.zeros(grid.shape)
        vals[sel] = rng.standard_normal(sel.sum())
        v = GridField(grid, vals)
        r = rho_restricted(F, v, sel)
        rp = rho_restricted(F, GridField(grid, np.maximum(vals, 0)), sel)
        rm = rho_restricted(F, GridField(grid, np.maximum(-vals, 0)), sel)
        worst = max(worst, (rp - r) / _scale(F), (rm - r) / _scale(F))
    return CheckResult("positive_part_contraction", bool(worst <= 1e-12), {"worst_excess": worst})


def random_antisymmetric(F, lam, rng, cells=16):
    """``v = psi - psi o Q`` with random ``psi`` on a few cells; ``v`` is made ``>= 0`` on ``H`` minus ``U``.

    Returns ``(v, U)`` with ``U`` the ``H``-side cells where ``v`` may change sign.
    """
    grid = F.mask.grid
    side = half_cells(grid, lam)
    sel = _random_support(F, rng, cells)
    psi = np.zeros(grid.shape)
    psi[sel] = rng.standard_normal(sel.sum())
    psi_g = GridField(grid, psi)
    v = (psi_g - reflect_field(psi_g, lam)).values
    U = side & (rng.random(grid.shape) < 0.5) & (v != 0)
    fix = side & ~U & (v < 0)
    # flip the sign of the antisymmetric pair where v < 0 outside U
    v = v.copy()
    pos = np.argwhere(fix)
    if len(pos):
        refl = reflect_field(GridField(grid, fix.astype(float)), lam).values > 0
        v[fix] = -v[fix]
        v[refl] = -v[refl]
    return GridField(grid, v), U


def check_antisymmetric_key_inequality(F, samples=1000, seed=0, cells=16):
    """``J(w, w) <= -J(v, w)`` for ``w = 1_H v^-`` and antisymmetric ``v >= 0`` on ``H`` minus ``U``."""
    rng = np.random.default_rng(seed)
    grid = F.mask.grid
    ell = F.mask.ell
    worst = -math.inf
    nontrivial = 0
    for _ in range(samples):
        t = int(rng.integers(-int(2 * ell / grid.h) + 1, int(2 * ell / grid.h)))
        lam = t * grid.h / 2
        try:
            v, U = random_antisymmetric(F, lam, rng, cells)
        except ConfigurationError:
            continue
        side = half_cells(grid, lam)
        w = GridField(grid, np.where(side, np.maximum(-v.values, 0.0), 0.0))
        if not w.values.any():
            continue
        nontrivial += 1
        lhs = form_value(F, w, w)
        rhs = -form_value(F, v, w)
        scale = _scale(F) * float(np.abs(v.values).max()) ** 2
        worst = max(worst, (lhs - rhs) / scale)
    return CheckResult("antisymmetric_key_inequality", bool(worst <= 1e-12),
                       {"worst_excess": worst, "nontrivial_samples": nontrivial})


def check_reduced_sign_structure(F):
    """Off-diagonal entries of every reduced antisymmetric matrix are nonpositive."""
    h = F.h
    ell = F.mask.ell
    worst = -math.inf
    for t in range(1, int(round(2 * ell / h))):
        red = reduce_antisymmetric(F, t * h / 2)
        if red.n > 1:
            off = red.B - np.diag(np.diag(red.B))
            worst = max(worst, float(off.max()))
    passed = worst <= 0 or not F.kernel.strictly_monotone and worst <= 1e-14 * _scale(F)
    return CheckResult("reduced_sign_structure", bool(passed), {"max_offdiagonal": worst})


def check_inverse_positivity(F):
    inv = np.linalg.inv(F.A)
    offmax = float((F.A - np.diag(np.diag(F.A))).max(initial=-math.inf))
    return CheckResult("inverse_positivity", bool(inv.min() >= -1e-10 * abs(inv).max() and offmax <= 0),
                       {"min_inverse_entry": float(inv.min()), "max_offdiagonal": offmax})


def _quad(g, lo, hi):
    # near alpha = 1 QUADPACK may report roundoff at the singular end; the
    # comparison against the matrix is the judge of accuracy
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(g, lo, hi, epsabs=0.0, epsrel=1e-10, limit=500)[0]


def _J1d(kernel):
    return lambda s: float(kernel(np.array([[s]]))[0])


def oracle_offset_weight_1d(kernel, h, k):
    """``int tent_k(s) J(s) ds`` by adaptive quadrature (independent of the stencil code)."""
    a, b = (k - 1) * h, (k + 1) * h
    pts = [p for R in kernel.breakpoints for p in (R, -R) if a < p < b]
    pts.append(k * h)  # kink of the tent
    if a < 0 < b:
        pts.append(0.0)
    J = _J1d(kernel)

    def g(s):
        return (h - abs(s - k * h)) * J(s)

    edges = [a, *sorted(set(pts)), b]
    return sum(_quad(g, lo, hi) for lo, hi in zip(edges, edges[1:]))


def oracle_self_weight_1d(kernel, h):
    """``int (h - (h - |s|)^+) J(s) ds``: the diagonal of ``A`` for an isolated cell."""
    bps = sorted(R for R in kernel.breakpoints if 0 < R < np.inf)
    J = _J1d(kernel)

    def piecewise(g, a, b):
        edges = [a, *[R for R in bps if a < R < b], b]
        return sum(_quad(g, lo, hi) for lo, hi in zip(edges, edges[1:]))

    near = piecewise(lambda s: s * J(s), 0.0, h)
    top = max([h, *bps])
    far = piecewise(J, h, top) + _quad(J, top, np.inf)
    return 2.0 * near + 2.0 * h * far


def check_pair_weight_oracle(F, max_cells=8):
    """Entries of ``A`` against independent adaptive quadrature (1D, small grids)."""
    if F.dim != 1 or F.n > max_cells:
        return CheckResult("pair_weight_oracle", True, {"skipped": True})
    worst = 0.0
    diag = oracle_self_weight_1d(F.kernel, F.h)
    for i in range(F.n):
        for j in range(F.n):
            if i == j:
                ref = diag
            else:
                ref = -oracle_offset_weight_1d(F.kernel, F.h, int(F.mask.cells[j, 0] - F.mask.cells[i, 0]))
            worst = max(worst, abs(F.A[i, j] - ref) / max(abs(ref), 1e-300))
    return CheckResult("pair_weight_oracle", bool(worst <= 1e-6), {"max_relative_error": float(worst)})


def run_all(F, samples=1000, seed=0, oracle_cells=8):
    checks = [
        check_matrix_structure(F, samples, seed),
        check_positive_part_contraction(F, samples, seed),
        check_antisymmetric_key_inequality(F, samples, seed),
        check_inverse_positivity(F),
        check_pair_weight_oracle(F, oracle_cells),
    ]
    if F.kernel.strictly_monotone or F.kernel.profile_decreasing:
        checks.append(check_reduced_sign_structure(F))
    return checks
