"""Moving-plane harness for discrete solutions.

For a plane ``x_1 = lambda`` on the half-step grid, ``v_lambda = u o Q_lambda - u``
is an antisymmetric grid field.  The harness computes the difference
quotient coefficient ``c_lambda``, checks the antisymmetric supersolution
inequality cell by cell, certifies nonnegativity of ``v_lambda`` through the
reduced antisymmetric system (small volume or inverse positivity) or by direct
sign inspection, and records whether ``v_lambda`` is positive on the interior
of the half domain.  The sweep reports the smallest plane position down to
which that positivity holds.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import linalg

from nlsym.assembly import apply_operator, pv_apply, reduce_antisymmetric, reflect_cells
from nlsym.errors import CertificateImpossibleError, SolutionRejectedError, UnsupportedError
from nlsym.kernels import lambda1_lower_bound
from nlsym.lattice import (
    CellField,
    GridField,
    components,
    half_cells,
    interior_proxy,
    reflect_field,
    snap_index,
)
from nlsym.semilinear import verify_weak_residual

__all__ = [
    "Tolerances",
    "ReflectionFrame",
    "SupersolutionCheck",
    "SmallVolumeCertificate",
    "StrongMPResult",
    "BarrierCertificate",
    "PlaneRecord",
    "MovingPlaneReport",
    "make_frame",
    "v_lambda",
    "coefficient_c",
    "check_supersolution",
    "smallvolume_certificate",
    "strong_mp_check",
    "statement_S",
    "barrier_certificate",
    "strict_decrease_check",
    "symmetry_defect",
    "group_defect",
    "square_group",
    "interior_min",
    "moving_plane_sweep",
]


@dataclass(frozen=True)
class Tolerances:
    """Absolute zero threshold is ``zero * ||u||_inf``; ``positive`` applies after linear solves."""

    zero: float = 1e-10
    positive: float = 1e-8
    margin: float = 1e-10
    inverse: float = 1e-10
    residual_gate: float = 1e-8


@dataclass(frozen=True, eq=False)
class ReflectionFrame:
    """Plane ``x_1 = lam`` with its half space, half domain and reduced system."""

    lam: float
    t: int
    grid: object
    side: np.ndarray
    half: np.ndarray
    reduced: object

    @property
    def half_cells(self):
        return np.argwhere(self.half) + np.asarray(self.grid.lo)

    @property
    def empty(self):
        return not self.half.any()


def make_frame(F, lam):
    """Frame for the snapped plane nearest to ``lam``."""
    grid = F.mask.grid
    t = snap_index(grid.h, lam)
    lam = t * grid.h / 2.0
    side = half_cells(grid, lam)
    half = F.mask.inside & side
    reduced = reduce_antisymmetric(F, lam, half)
    return ReflectionFrame(lam, t, grid, side, half, reduced)


def _grid(u):
    return u.to_grid() if isinstance(u, CellField) else u


def v_lambda(u, frame):
    """``u o Q_lambda - u`` on the grid box; exactly antisymmetric about the plane."""
    g = _grid(u)
    return reflect_field(g, frame.lam) - g


def coefficient_c(u, frame, f):
    """Difference quotient ``[f(x, u(xbar)) - f(x, u(x))] / v(x)`` on the half domain.

    Returned as a grid-shaped array, zero off the half domain and where ``v = 0``.
    """
    g = _grid(u)
    ug = g.values
    ur = reflect_field(g, frame.lam).values
    pos = np.argwhere(frame.half)
    x = (pos + np.asarray(frame.grid.lo) + 0.5) * frame.grid.h
    uo = ug[tuple(pos.T)]
    ub = ur[tuple(pos.T)]
    v = ub - uo
    num = f(x, ub) - f(x, uo)
    c = np.zeros(frame.grid.shape)
    safe = v != 0
    vals = np.zeros(len(pos))
    vals[safe] = num[safe] / v[safe]
    c[tuple(pos.T)] = vals
    return c


class SupersolutionCheck(NamedTuple):
    vfield: GridField
    U: np.ndarray
    c: np.ndarray
    margins: np.ndarray
    min_margin: float
    scale: float
    boundary_ok: bool
    verdict: bool


def check_supersolution(F, frame, v, c, U=None, tol=None, scale=None):
    """Antisymmetric supersolution test on the cells of ``U`` (default: half domain).

    Margins are ``J(v, e_i) - h^N c_i v_i`` for every basis field ``e_i`` of
    ``U``; nonnegative test fields are conic combinations of these.  Margins
    are compared with ``tol.margin * scale``; by default the scale is the size
    of the two terms for ``v`` itself, callers holding a solution ``u`` pass
    its size instead.
    """
    tol = tol or Tolerances()
    U = frame.half if U is None else np.asarray(U, dtype=bool)
    if np.any(U & ~frame.side):
        raise ValueError("U must lie in the half space H")
    g = _grid(v)
    pos = np.argwhere(U)
    cells = pos + np.asarray(frame.grid.lo)
    vv = g.values[tuple(pos.T)]
    cc = np.asarray(c)[tuple(pos.T)]
    Av = apply_operator(F, g, cells)
    margins = Av - F.mass * cc * vv
    vmax = float(np.abs(g.values).max(initial=0.0))
    if scale is None:
        scale = F.S * vmax + F.mass * float(np.abs(cc * vv).max(initial=0.0))
    scale = scale if scale > 0 else 1.0
    rest = frame.side & ~U
    bmin = float(g.values[rest].min(initial=0.0))
    boundary_ok = bmin >= -tol.zero * max(vmax, 1.0)
    min_margin = float(margins.min(initial=0.0))
    verdict = boundary_ok and min_margin >= -tol.margin * scale
    return SupersolutionCheck(g, U, np.asarray(c), margins, min_margin, scale, bool(boundary_ok), bool(verdict))


class SmallVolumeCertificate(NamedTuple):
    holds: bool
    lambda_min_B: float
    c_plus_sup: float
    inverse_min_entry: float
    offdiag_max: float
    reason: str


def smallvolume_certificate(reduced, c):
    """Small-volume maximum principle on the reduced antisymmetric system.

    ``c`` is given per reduced unknown.  With ``M_B = 2 h^N I`` the reduced
    mass, an antisymmetric supersolution with coefficient ``c`` satisfies
    ``G a >= 0`` for ``G = B - M_B diag(c)``.  The certificate holds when
    ``sup c^+`` is below the smallest eigenvalue of ``(B, M_B)``; the minimal
    entry of ``G^{-1}`` is reported as the inverse-positivity witness.
    """
    B = reduced.B
    c = np.asarray(c, dtype=float)
    n = B.shape[0]
    if n == 0:
        return SmallVolumeCertificate(True, math.inf, 0.0, math.inf, -math.inf, "empty half domain")
    lam_min = float(linalg.eigvalsh(B, check_finite=False, subset_by_index=[0, 0])[0]) / reduced.mass
    c_plus = float(np.maximum(c, 0.0).max(initial=0.0))
    off = B - np.diag(np.diag(B))
    offmax = float(off.max()) if n > 1 else -math.inf
    G = B - reduced.mass * np.diag(c)
    reason = ""
    try:
        inv = linalg.solve(G, np.eye(n), assume_a="sym", check_finite=False)
        inv_min = float(inv.min()) if np.all(np.isfinite(inv)) else -math.inf
        if not np.all(np.isfinite(inv)):
            reason = "singular reduced operator"
    except (linalg.LinAlgError, ValueError):
        inv_min = -math.inf
        reason = "singular reduced operator"
    holds = c_plus < lam_min and not reason
    if not holds and not reason:
        reason = "sup c+ not below the reduced eigenvalue"
    return SmallVolumeCertificate(bool(holds), lam_min, c_plus, inv_min, offmax, reason)


class StrongMPResult(NamedTuple):
    dichotomy: str
    min_interior: float
    per_component: tuple


def interior_min(values, select):
    """Min of grid ``values`` over the interior proxy of ``select`` (``inf`` if empty)."""
    core = interior_proxy(select)
    return float(values[core].min()) if core.any() else math.inf


def strong_mp_check(frame, v, c=None, tol_zero=1e-10, tol_pos=1e-8, scale=1.0, per_component=False):
    """Classify a nonnegative antisymmetric ``v``: identically zero, strictly positive or violating.

    With ``per_component`` each connected component of the half domain may
    independently be zero or strictly positive (local strict monotonicity).
    """
    g = _grid(v)
    vals = g.values
    zero_tol = tol_zero * scale
    pos_tol = tol_pos * scale
    if float(np.abs(vals).max(initial=0.0)) <= zero_tol:
        return StrongMPResult("zero", 0.0, ())
    if not per_component:
        m = interior_min(vals, frame.half)
        return StrongMPResult("strictly_positive" if m > pos_tol else "violation", m, ())
    parts = []
    ok = True
    overall = math.inf
    for comp in components(frame.half):
        if float(np.abs(vals[comp]).max(initial=0.0)) <= zero_tol:
            parts.append(("zero", 0.0))
            continue
        m = interior_min(vals, comp)
        overall = min(overall, m)
        good = m > pos_tol
        ok &= good
        parts.append(("strictly_positive" if good else "violation", m))
    return StrongMPResult("strictly_positive" if ok else "violation", overall, tuple(parts))


class SStatement(NamedTuple):
    holds: bool
    min_value: float
    vacuous: bool


def statement_S(u, frame, tol_pos=1e-8):
    """Positivity of ``v_lambda`` on the interior proxy of the half domain."""
    core = interior_proxy(frame.half)
    if not core.any():
        return SStatement(True, math.inf, True)
    v = v_lambda(u, frame).values
    m = float(v[core].min())
    return SStatement(m > tol_pos, m, False)


# ---------------------------------------------------------------------------
# barrier for the strong maximum principle
# ---------------------------------------------------------------------------


def _smoothstep_bump(x0, r):
    """C^2 bump: 1 on the ball of radius r around x0, 0 outside radius 2r."""
    def f(p):
        d = np.linalg.norm(np.asarray(p, dtype=float) - x0, axis=-1)
        t = np.clip((d - r) / r, 0.0, 1.0)
        return 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t * t)

    return f


def _ball_nodes(center, radius, dim, n=24):
    """Quadrature nodes/weights on the Euclidean ball."""
    if dim == 1:
        x, w = np.polynomial.legendre.leggauss(n)
        return (center[0] + radius * x)[:, None], radius * w
    x, w = np.polynomial.legendre.leggauss(n)
    rr = radius * (x + 1) / 2
    wr = radius * w / 2
    th = np.pi * (x + 1)
    wt = np.pi * w
    R, T = np.meshgrid(rr, th, indexing="ij")
    pts = np.stack([center[0] + R * np.cos(T), center[1] + R * np.sin(T)], axis=-1).reshape(-1, 2)
    ww = (np.outer(wr * rr, wt)).ravel()
    return pts, ww


def _sample_ball(center, radius, dim, n=9):
    if dim == 1:
        return (center[0] + radius * np.linspace(-1, 1, 4 * n + 1))[:, None]
    g = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    keep = X**2 + Y**2 <= 1.0
    return np.stack([center[0] + radius * X[keep], center[1] + radius * Y[keep]], axis=-1)


class BarrierCertificate(NamedTuple):
    a: float
    C_a: float
    C: float
    reflected_mass: float
    kernel_gap: float
    r: float
    lower_bound: float


def barrier_certificate(frame, kernel, c_sup, x0, M, delta, samples=9):
    """Constructive step of the strong maximum principle on a frame.

    ``x0`` is a cell index in the half space, ``M`` an array of cell indices
    in the half space where ``v >= delta > 0``.  With a C^2 bump ``f`` around
    ``x0`` and ``w = f - f o Q + a (1_M - 1_{Q(M)})`` one has
    ``J(w, phi) <= C_a int phi`` on ``U_0 = B_{2r}(x0)`` with

        C_a = C + sup_{U_0} int_{Q(U_0)} J(x - y) dy - a inf_{U_0} int_M (J(x - y) - J(x - ybar)) dy,

    ``C`` an upper bound of ``[I f]`` on ``U_0``.  Returns the smallest
    ``a = 2^{j/8}`` with ``C_a <= -c_sup``.  The suprema and infima are taken
    over sample points of ``U_0``, so the certificate is numerical evidence.
    """
    if frame.t == 0:
        raise CertificateImpossibleError(
            "plane through the origin: the harness reaches lambda = 0 only as the end point of the "
            "sweep, where the reflection difference of the kernel is not used"
        )
    if not delta > 0:
        raise CertificateImpossibleError("witness set needs delta > 0")
    grid = frame.grid
    h = grid.h
    dim = grid.dim
    lam = frame.lam
    sgn = 1.0 if frame.t > 0 else -1.0
    x0c = (np.asarray(x0, dtype=float).reshape(dim) + 0.5) * h
    Mc = np.asarray(M, dtype=np.int64).reshape(-1, dim)
    if sgn * (x0c[0] - lam) <= 0:
        raise ValueError("x0 must lie in the half space H")
    lo_cells = Mc * h
    hi_cells = lo_cells + h
    if np.any(sgn * (np.where(sgn > 0, lo_cells[:, 0], hi_cells[:, 0]) - lam) < 0):
        raise ValueError("witness set M must lie in the half space H")
    # distance from x0 to the complement of H and to M
    d_plane = abs(x0c[0] - lam)
    gap = np.maximum(np.maximum(lo_cells - x0c, x0c - hi_cells), 0.0)
    d_M = float(np.linalg.norm(gap, axis=1).min())
    if d_M <= 0:
        raise ValueError("x0 must lie outside the closure of M")
    r = 0.24 * min(d_plane, d_M)
    bound = None
    for _ in range(60):
        vol = 4.0 * r if dim == 1 else math.pi * (2 * r) ** 2
        try:
            bound = lambda1_lower_bound(kernel, vol)
        except UnsupportedError:
            bound = None
        if bound is None or bound > c_sup:
            break
        r *= 0.5
    bump = _smoothstep_bump(x0c, r)
    support = (x0c - 2 * r, x0c + 2 * r)
    pts = _sample_ball(x0c, 2 * r, dim, samples)
    C = max(pv_apply(kernel, bump, p, 0.5 * r, support) for p in pts)
    # sup over U_0 of the kernel mass of Q(U_0)
    qc = x0c.copy()
    qc[0] = 2 * lam - x0c[0]
    qn, qw = _ball_nodes(qc, 2 * r, dim)
    refl = max(float(np.dot(kernel(p[None, :] - qn), qw)) for p in pts)
    # inf over U_0 of int_M (J(x - y) - J(x - ybar)) dy, Gauss on each witness cell
    xg, wg = np.polynomial.legendre.leggauss(12)
    xg = (xg + 1) / 2 * h
    wg = wg / 2 * h
    if dim == 1:
        local = xg[:, None]
        lw = wg
    else:
        X, Y = np.meshgrid(xg, xg, indexing="ij")
        local = np.stack([X.ravel(), Y.ravel()], -1)
        lw = np.outer(wg, wg).ravel()
    ys = (lo_cells[:, None, :] + local[None, :, :]).reshape(-1, dim)
    yw = np.tile(lw, len(lo_cells))
    ybar = ys.copy()
    ybar[:, 0] = 2 * lam - ys[:, 0]
    D = min(float(np.dot(kernel(p[None, :] - ys) - kernel(p[None, :] - ybar), yw)) for p in pts)
    if not D > 0:
        raise CertificateImpossibleError(f"kernel reflection gap over the witness set is {D:.3e} <= 0")
    base = C + refl
    j = -160
    while True:
        a = 2.0 ** (j / 8)
        Ca = base - a * D
        if Ca <= -c_sup:
            break
        j += 1
    return BarrierCertificate(a, Ca, C, refl, D, r, delta / a)


# ---------------------------------------------------------------------------
# symmetry conclusions
# ---------------------------------------------------------------------------


def strict_decrease_check(u, tol_pos=1e-8):
    """``u(2 lambda - x_1, x') - u(x) > tol`` on ``K_lambda = {x_1 / lambda >= 1 + h}`` for all planes.

    Planes run over the half-step grid strictly inside ``(-ell, ell)``, ``lambda != 0``.
    """
    mask = u.mask
    g = u.to_grid()
    h = mask.h
    if not np.any(u.values):
        return False
    x1 = mask.centers[:, 0]
    tmax = int(round(2 * (x1.max() + h / 2) / h))
    tmin = int(round(2 * (x1.min() - h / 2) / h))
    worst = math.inf
    for t in range(tmin + 1, tmax):
        if t == 0:
            continue
        lam = t * h / 2
        sel = x1 / lam >= 1.0 + h
        if not sel.any():
            continue
        cells = reflect_cells(mask.grid, mask.cells[sel], lam)
        ur = g.values[tuple((cells - np.asarray(mask.grid.lo)).T)]
        worst = min(worst, float((ur - u.values[sel]).min()))
    return bool(worst > tol_pos) if math.isfinite(worst) else False


def _transform_cells(cells, op):
    """Apply a signed coordinate permutation to cell indices (acting on centers)."""
    perm, signs = op
    c2 = 2 * cells + 1
    out = c2[:, perm] * np.asarray(signs)
    return (out - 1) // 2


def group_defect(u, ops):
    """``max_g ||u o g - u||_inf / ||u||_inf`` over signed coordinate permutations ``ops``."""
    mask = u.mask
    norm = float(np.abs(u.values).max(initial=0.0))
    if norm == 0:
        return 0.0
    g = u.to_grid().values
    lo = np.asarray(mask.grid.lo)
    shape = np.asarray(mask.grid.shape)
    worst = 0.0
    for op in ops:
        img = _transform_cells(mask.cells, op)
        ok = np.all((img >= lo) & (img < lo + shape), axis=1)
        vals = np.zeros(mask.n)
        vals[ok] = g[tuple((img[ok] - lo).T)]
        worst = max(worst, float(np.abs(vals - u.values).max()))
    return worst / norm


def symmetry_defect(u, axis=0):
    """``||u o R_axis - u||_inf / ||u||_inf`` for the reflection ``x_axis -> -x_axis``."""
    dim = u.mask.dim
    signs = [1] * dim
    signs[axis] = -1
    return group_defect(u, [(list(range(dim)), signs)])


def square_group(dim=2):
    """The signed permutations of coordinates (8 symmetries of the square in 2D)."""
    import itertools

    ops = []
    for perm in itertools.permutations(range(dim)):
        for signs in itertools.product((1, -1), repeat=dim):
            ops.append((list(perm), list(signs)))
    return ops


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


class PlaneRecord(NamedTuple):
    lam: float
    n_half: int
    min_v: float
    vacuous: bool
    S_lambda: bool
    certificate: str
    c_sup: float
    lambda_min_B: float
    inverse_min_entry: float
    margin_min: float
    margin_scaled: float
    supersolution_ok: bool
    boundary_min: float


@dataclass(frozen=True, eq=False)
class MovingPlaneReport:
    lambdas: tuple
    records: tuple
    mirrored: tuple
    c_inf: float
    lambda0: float | None
    lambda0_mirror: float | None
    symmetry_defect: float
    strict_decrease_ok: bool
    essinf_positive_ok: bool
    alternative: str
    violations: tuple
    residual: float
    notes: tuple = field(default=())

    def to_dict(self):
        def rec(r):
            d = r._asdict()
            return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}

        return {
            "lambda0": self.lambda0,
            "lambda0_mirror": self.lambda0_mirror,
            "c_inf": self.c_inf,
            "symmetry_defect": self.symmetry_defect,
            "strict_decrease_ok": self.strict_decrease_ok,
            "essinf_positive_ok": self.essinf_positive_ok,
            "alternative": self.alternative,
            "violations": list(self.violations),
            "residual": self.residual,
            "notes": list(self.notes),
            "records": [rec(r) for r in self.records],
            "mirrored": [rec(r) for r in self.mirrored],
        }


def _plane(F, u, f, t, tol, scale, form_scale):
    h = F.h
    frame = make_frame(F, t * h / 2)
    v = v_lambda(u, frame)
    c = coefficient_c(u, frame, f)
    S = statement_S(u, frame, tol.positive * scale)
    n_half = int(frame.half.sum())
    if n_half == 0:
        return PlaneRecord(frame.lam, 0, math.inf, True, True, "empty", 0.0, math.inf, math.inf,
                           0.0, 0.0, True, 0.0)
    chk = check_supersolution(F, frame, v, c, tol=tol, scale=form_scale)
    pos = np.argwhere(frame.half)
    cvals = c[tuple(pos.T)]
    cert = smallvolume_certificate(frame.reduced, cvals)
    vh = v.values[frame.half]
    bmin = float(v.values[frame.side & ~frame.half].min(initial=0.0))
    offdiag_ok = cert.offdiag_max <= 0
    if cert.holds and offdiag_ok and chk.verdict:
        kind = "small_volume"
    elif offdiag_ok and chk.verdict and cert.inverse_min_entry >= -tol.inverse and \
            float(linalg.eigvalsh(frame.reduced.B - frame.reduced.mass * np.diag(cvals),
                                  subset_by_index=[0, 0])[0]) > 0:
        kind = "inverse_positivity"
    elif float(vh.min()) >= -tol.zero * scale and bmin >= -tol.zero * scale:
        kind = "direct_sign"
    else:
        kind = "violation"
    return PlaneRecord(frame.lam, n_half, S.min_value, S.vacuous, S.holds, kind,
                       float(np.abs(cvals).max(initial=0.0)), cert.lambda_min_B, cert.inverse_min_entry,
                       chk.min_margin, chk.min_margin / chk.scale, chk.verdict, bmin)


def moving_plane_sweep(u, F, f, tol=None, threads=1, require_positive=None):
    """Sweep planes from the domain edge to the center on both sides of the origin.

    ``u`` must pass the residual gate.  For kernels without strict global
    monotonicity (truncated kernels) ``u`` must also be positive on the
    domain (``require_positive`` defaults to that case).
    """
    tol = tol or Tolerances()
    uv = u.values
    unorm = float(np.abs(uv).max(initial=0.0))
    res = verify_weak_residual(F, f, u)
    fu = f(F.mask.centers, uv)
    denom = F.S * unorm + F.mass * float(np.abs(fu).max(initial=0.0))
    scaled = res / (denom if denom > 0 else 1.0)
    if scaled > tol.residual_gate:
        raise SolutionRejectedError(f"scaled weak residual {scaled:.3e} exceeds {tol.residual_gate:.1e}")
    if require_positive is None:
        require_positive = not F.kernel.strictly_monotone
    scale = unorm if unorm > 0 else 1.0
    if unorm <= 0:
        return MovingPlaneReport((), (), (), 0.0, None, None, 0.0, False, False, "u ≡ 0", (), scaled,
                                 ("zero solution: every reflection difference vanishes",))
    if require_positive and float(uv.min()) <= tol.positive * scale:
        raise SolutionRejectedError("solution is not positive on the domain; the symmetry result "
                                    "for kernels without strict global monotonicity needs u > 0")
    h = F.h
    x1 = F.mask.centers[:, 0]
    t_hi = int(round(2 * (x1.max() + h / 2) / h)) - 1
    t_lo = int(round(2 * (x1.min() - h / 2) / h)) + 1
    upper = list(range(t_hi, 0, -1))
    lower = list(range(t_lo, 0))
    ts = upper + [0] + lower

    def run(t):
        return _plane(F, u, f, t, tol, scale, denom)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            recs = list(ex.map(run, ts))
    else:
        recs = [run(t) for t in ts]
    up = recs[: len(upper)]
    zero_rec = recs[len(upper)]
    down = recs[len(upper) + 1:]

    def lam0(rs):
        failing = [abs(r.lam) for r in rs if not r.S_lambda]
        return max(failing) if failing else 0.0

    violations = tuple(r.lam for r in recs if r.certificate == "violation")
    c_inf = max((r.c_sup for r in recs), default=0.0)
    sym = symmetry_defect(u, 0)
    strict = strict_decrease_check(u, tol.positive * scale)
    ess = True
    for comp in components(F.mask.inside):
        m = interior_min(u.to_grid().values, comp)
        if math.isfinite(m):
            ess &= m > tol.positive * scale
    notes = []
    if not F.mask.steiner_ok:
        notes.append("domain is not Steiner symmetric in x_1")
    return MovingPlaneReport(
        tuple(r.lam for r in up + [zero_rec]),
        tuple(up + [zero_rec]),
        tuple(down),
        c_inf,
        lam0(up),
        lam0(down),
        sym,
        strict,
        bool(ess),
        "u > 0",
        violations,
        scaled,
        tuple(notes),
    )
