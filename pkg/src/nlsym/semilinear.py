"""Nonlinearities f(x, u) and the discrete weak problem ``A u = M f(., u)``."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import linalg

from nlsym.lattice import CellField

__all__ = [
    "Nonlinearity",
    "SolveReport",
    "constant",
    "linear_plus_constant",
    "logistic",
    "custom_table",
    "nonlinearity_from_spec",
    "audit_lipschitz",
    "audit_monotone_symmetric",
    "solve_semilinear",
    "verify_weak_residual",
    "scaled_residual",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """``f(x, u)`` with a Lipschitz bound map ``K -> L(K)`` valid for ``|u| <= K``.

    ``symmetry_declared`` claims that ``f`` is even in ``x_1`` and nonincreasing
    in ``|x_1|``; it is audited on samples, never assumed silently.
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    lipschitz: Callable[[float], float]
    du: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    symmetry_declared: bool = True
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        return np.broadcast_to(np.asarray(self.func(x, u), dtype=float), u.shape).copy()

    def derivative(self, x, u):
        if self.du is None:
            return None
        u = np.asarray(u, dtype=float)
        return np.broadcast_to(np.asarray(self.du(np.asarray(x, dtype=float), u), dtype=float), u.shape).copy()

    def spec(self):
        return {"family": self.name, **self.params}


def constant(value):
    return Nonlinearity(lambda x, u: np.full_like(u, value), lambda K: 0.0,
                        lambda x, u: np.zeros_like(u), True, "constant", {"value": value})


def linear_plus_constant(slope, value):
    return Nonlinearity(lambda x, u: slope * u + value, lambda K: abs(slope),
                        lambda x, u: np.full_like(u, slope), True, "linear_plus_constant",
                        {"slope": slope, "value": value})


def logistic(rate, capacity, source=0.0):
    """``rate u (1 - u / capacity) + source``."""
    if capacity <= 0:
        raise ValueError("capacity must be positive")
    return Nonlinearity(
        lambda x, u: rate * u * (1.0 - u / capacity) + source,
        lambda K: abs(rate) * (1.0 + 2.0 * K / capacity),
        lambda x, u: rate * (1.0 - 2.0 * u / capacity),
        True,
        "logistic",
        {"rate": rate, "capacity": capacity, "source": source},
    )


def custom_table(u_values, f_values):
    """Piecewise-linear ``f(u)`` through the given nodes, constant beyond them."""
    us = np.asarray(u_values, dtype=float)
    fs = np.asarray(f_values, dtype=float)
    if us.ndim != 1 or us.shape != fs.shape or len(us) < 2 or np.any(np.diff(us) <= 0):
        raise ValueError("table needs at least two strictly increasing u nodes")
    slopes = np.diff(fs) / np.diff(us)
    L = float(np.abs(slopes).max())

    def du(x, u):
        k = np.clip(np.searchsorted(us, u, side="right") - 1, 0, len(slopes) - 1)
        inside = (u >= us[0]) & (u < us[-1])
        return np.where(inside, slopes[k], 0.0)

    return Nonlinearity(lambda x, u: np.interp(u, us, fs), lambda K: L, du, True, "custom_table",
                        {"u": us.tolist(), "f": fs.tolist()})


def nonlinearity_from_spec(block):
    get = block.get if isinstance(block, dict) else (lambda k, d=None: getattr(block, k, d))
    family = get("family")
    if family == "constant":
        return constant(get("value", 1.0))
    if family == "linear_plus_constant":
        return linear_plus_constant(get("slope", 0.0), get("value", 0.0))
    if family == "logistic":
        return logistic(get("rate", 1.0), get("capacity", 1.0), get("source", 0.0) or 0.0)
    if family == "custom_table":
        return custom_table(get("u"), get("f"))
    raise ValueError(f"unknown nonlinearity family {family!r}")


# ---------------------------------------------------------------------------
# audits
# ---------------------------------------------------------------------------


def audit_lipschitz(f, points, K, samples=1000, seed=0):
    """Sampled check of ``|f(x,u) - f(x,v)| <= L(K) |u - v|`` for ``|u|, |v| <= K``.

    Returns ``(ok, worst_ratio)`` where the ratio is relative to ``L(K)``.
    """
    rng = np.random.default_rng(seed)
    pts = np.asarray(points, dtype=float)
    x = pts[rng.integers(0, len(pts), samples)]
    u = rng.uniform(-K, K, samples)
    v = rng.uniform(-K, K, samples)
    L = f.lipschitz(K)
    diff = np.abs(f(x, u) - f(x, v))
    gap = np.abs(u - v)
    bound = L * gap
    ok = bool(np.all(diff <= bound * (1 + 1e-12) + 1e-14))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(gap > 0, diff / np.where(bound > 0, bound, np.inf), 0.0)
    return ok, float(np.nanmax(ratio)) if len(ratio) else 0.0


def audit_monotone_symmetric(f, points, u_values, s_grid=None):
    """Sampled check of ``f((s x_1, x'), u) >= f(x, u)`` for ``s in [-1, 1]``.

    Returns ``(ok, witness)``; the witness is the first failing ``(x, s, u)``.
    The grid of ``s`` is finite, so this is evidence, not a proof.
    """
    if s_grid is None:
        s_grid = np.linspace(-1.0, 1.0, 21)
    pts = np.asarray(points, dtype=float)
    for u in np.atleast_1d(u_values):
        uu = np.full(len(pts), float(u))
        base = f(pts, uu)
        for s in s_grid:
            moved = pts.copy()
            moved[:, 0] *= s
            val = f(moved, uu)
            bad = np.flatnonzero(val < base - 1e-14 * (1 + np.abs(base)))
            if len(bad):
                i = bad[0]
                return False, (pts[i].tolist(), float(s), float(u))
    return True, None


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------


class SolveReport(NamedTuple):
    u: CellField
    residual: float
    iterations: int
    nonneg: bool
    converged: bool
    method: str


def scaled_residual(F, f, u):
    """``||A u - M f(u)||_inf / (S ||u||_inf + h^N ||f(u)||_inf)`` (denominator 1 if zero)."""
    x = F.mask.centers
    fu = f(x, u)
    R = F.A @ u - F.mass * fu
    denom = F.S * np.abs(u).max(initial=0.0) + F.mass * np.abs(fu).max(initial=0.0)
    return float(np.abs(R).max(initial=0.0) / (denom if denom > 0 else 1.0))


def solve_semilinear(F, f, tol=1e-10, damping=1.0, max_iter=200, init=None):
    """Damped Newton for ``A u = M f(x, u)`` with a Picard fallback.

    Newton steps are backtracked from ``damping``; if no backtracked step
    lowers the residual, one Picard step ``u <- A^{-1} M f(x, u)`` is taken.
    Non-convergence is reported, not raised.
    """
    x = F.mask.centers
    A = F.A
    m = F.mass
    chol = linalg.cho_factor(A, lower=True, check_finite=False)

    def picard(u):
        return linalg.cho_solve(chol, m * f(x, u), check_finite=False)

    def resid(u):
        return A @ u - m * f(x, u)

    if init is None:
        u = picard(np.zeros(F.n))
    elif isinstance(init, CellField):
        u = init.values.copy()
    else:
        u = np.asarray(init, dtype=float).copy()
    method = "picard" if f.du is None else "newton"
    res = scaled_residual(F, f, u)
    it = 0
    while res > tol and it < max_iter:
        it += 1
        R = resid(u)
        nrm = np.abs(R).max()
        stepped = False
        d = f.derivative(x, u)
        if d is not None:
            try:
                step = linalg.solve(A - m * np.diag(d), -R, assume_a="sym", check_finite=False)
            except (linalg.LinAlgError, ValueError):
                log.info("singular Jacobian at iteration %d; falling back to Picard", it)
                step = None
            if step is not None and np.all(np.isfinite(step)):
                t = damping
                for _ in range(30):
                    trial = u + t * step
                    if np.abs(resid(trial)).max() < nrm:
                        u = trial
                        stepped = True
                        break
                    t *= 0.5
        if not stepped:
            u_new = picard(u)
            if np.array_equal(u_new, u):
                break
            u = u_new
            method = "newton+picard" if f.du is not None else "picard"
        res = scaled_residual(F, f, u)
    field_u = CellField(F.mask, u)
    return SolveReport(field_u, res, it, bool(u.min(initial=0.0) >= 0.0), res <= tol, method)


def verify_weak_residual(F, f, u, n_random=100, seed=0):
    """``max_phi |J(u, phi) - int f(x, u) phi|`` over basis fields and random nonnegative fields.

    Random fields are normalized to unit l1 norm, so the maximum equals the
    matrix residual ``||A u - M f(u)||_inf`` up to round-off.
    """
    uv = u.values if isinstance(u, CellField) else np.asarray(u, dtype=float)
    R = F.A @ uv - F.mass * f(F.mask.centers, uv)
    worst = float(np.abs(R).max(initial=0.0))
    rng = np.random.default_rng(seed)
    phis = rng.random((n_random, F.n))
    phis /= phis.sum(axis=1, keepdims=True)
    if n_random:
        worst = max(worst, float(np.abs(phis @ R).max()))
    return worst
