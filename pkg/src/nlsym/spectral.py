"""Smallest eigenvalue of the discrete form and its rearrangement lower bound."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg

from nlsym.errors import ConvergenceError, UnsupportedError
from nlsym.kernels import lambda1_lower_bound
from nlsym.lattice import CellField

__all__ = ["SpectralResult", "ScanRow", "lambda1_discrete", "small_volume_scan"]


@dataclass(frozen=True, eq=False)
class SpectralResult:
    lambda1_h: float
    eigvec: CellField
    residual: float
    analytic_bound: float | None
    iterations: int


class ScanRow(NamedTuple):
    volume: float
    lambda1_h: float
    bound: float
    ratio: float


def _bound(kernel, volume):
    try:
        return float(lambda1_lower_bound(kernel, volume))
    except UnsupportedError:
        return None


def lambda1_discrete(F, tol=1e-10, max_iter=10_000, residual_tol=1e-8):
    """Smallest eigenpair of ``A u = lambda M u`` by inverse iteration.

    Starts from the all-ones vector; stops once the relative change of the
    Rayleigh quotient is below ``tol`` and the residual
    ``||A u - lambda M u|| / ||u||`` is below ``residual_tol * ||A||``.
    """
    A = F.A
    m = F.mass
    n = A.shape[0]
    norm_A = float(np.abs(A).sum(axis=1).max())
    factor = linalg.cho_factor(A, lower=True, check_finite=False)
    x = np.ones(n) / np.sqrt(n)
    lam_old = np.inf
    lam = np.inf
    res = np.inf
    for it in range(1, max_iter + 1):
        y = linalg.cho_solve(factor, m * x, check_finite=False)
        y /= np.linalg.norm(y)
        Ay = A @ y
        lam = float(y @ Ay) / m
        res = float(np.linalg.norm(Ay - lam * m * y))
        x = y
        if abs(lam - lam_old) <= tol * abs(lam) and res <= residual_tol * norm_A:
            break
        lam_old = lam
    else:
        raise ConvergenceError(f"inverse iteration did not converge in {max_iter} steps", last=(lam, x, res))
    if x.sum() < 0:
        x = -x
    vec = CellField(F.mask, x)
    return SpectralResult(lam, vec, res, _bound(F.kernel, F.mask.volume), it)


def small_volume_scan(kernel, masks, assemble_fn=None):
    """Table of (volume, lambda1_h, bound, ratio) for a family of shrinking masks.

    ``bound`` and ``ratio`` are NaN for kernels without a closed-form bound.
    """
    from nlsym.assembly import assemble

    assemble_fn = assemble_fn or assemble
    rows = []
    for mask in masks:
        res = lambda1_discrete(assemble_fn(kernel, mask))
        bound = _bound(kernel, mask.volume)
        if bound is None:
            bound, ratio = np.nan, np.nan
        else:
            ratio = res.lambda1_h / bound if bound > 0 else np.inf
        rows.append(ScanRow(mask.volume, res.lambda1_h, bound, ratio))
    return rows
