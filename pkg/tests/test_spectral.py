import math

import numpy as np
import pytest
from scipy import linalg

from nlsym.assembly import assemble
from nlsym.errors import ConvergenceError
from nlsym.kernels import constant_kernel, fractional_kernel, truncated_fractional_kernel
from nlsym.lattice import interval, mask_from_domain
from nlsym.spectral import lambda1_discrete, small_volume_scan


def test_toy_eigenpair(toy_form):
    res = lambda1_discrete(toy_form)
    assert res.lambda1_h == pytest.approx(4.0, abs=1e-8)
    np.testing.assert_allclose(res.eigvec.values, [1 / math.sqrt(2)] * 2, atol=1e-8)
    assert res.analytic_bound is None


def test_single_cell():
    F = assemble(fractional_kernel(1, 0.5), mask_from_domain(interval(0.0, 0.5), 0.5))
    assert lambda1_discrete(F).lambda1_h == pytest.approx(F.kappa[0] / 0.5, rel=1e-12)


def test_matches_dense_eigensolver(frac_form):
    res = lambda1_discrete(frac_form)
    ref = linalg.eigh(frac_form.A, eigvals_only=True, subset_by_index=[0, 0])[0] / frac_form.mass
    assert res.lambda1_h == pytest.approx(ref, rel=1e-10)
    x = res.eigvec.values
    rq = x @ frac_form.A @ x / (frac_form.mass * x @ x)
    assert rq == pytest.approx(res.lambda1_h, rel=1e-12)
    assert res.residual <= 1e-8 * np.abs(frac_form.A).sum(axis=1).max()
    assert x.min() > 0


def test_nested_domains_monotone():
    k = fractional_kernel(1, 0.5)
    small = lambda1_discrete(assemble(k, mask_from_domain(interval(-0.5, 0.5), 1 / 32))).lambda1_h
    big = lambda1_discrete(assemble(k, mask_from_domain(interval(-1.0, 1.0), 1 / 32))).lambda1_h
    assert small >= big


def test_bound_chain_and_blowup():
    k = fractional_kernel(1, 0.5)
    masks = [mask_from_domain(interval(-L / 2, L / 2), L / 32) for L in (2.0, 1.0, 0.5)]
    rows = small_volume_scan(k, masks)
    assert len(rows) == 3
    np.testing.assert_allclose([r.bound for r in rows], [4.0, 4 * math.sqrt(2), 8.0], rtol=1e-12)
    assert all(r.lambda1_h >= (1 - 1e-2) * r.bound for r in rows)
    assert rows[0].lambda1_h < rows[1].lambda1_h < rows[2].lambda1_h


def test_resolution_doubling_changes_little():
    k = fractional_kernel(1, 0.5)
    a = lambda1_discrete(assemble(k, mask_from_domain(interval(-1, 1), 1 / 32))).lambda1_h
    b = lambda1_discrete(assemble(k, mask_from_domain(interval(-1, 1), 1 / 64))).lambda1_h
    assert abs(a - b) / b <= 0.02


def test_truncated_kernel_bound():
    k = truncated_fractional_kernel(1, 0.5, 1.0)
    rows = small_volume_scan(k, [mask_from_domain(interval(-0.25, 0.25), 1 / 64)])
    assert rows[0].lambda1_h >= rows[0].bound


def test_scan_without_closed_form_bound():
    k = constant_kernel(1, 1.0, 3.0)
    rows = small_volume_scan(k, [mask_from_domain(interval(0.0, 2.0), 1.0)])
    assert rows[0].lambda1_h == pytest.approx(4.0)
    assert math.isnan(rows[0].bound)


def test_iteration_cap_raises(frac_form):
    with pytest.raises(ConvergenceError) as info:
        lambda1_discrete(frac_form, tol=1e-16, max_iter=1)
    lam, vec, res = info.value.last
    assert lam > 0
