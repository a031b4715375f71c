"""End-to-end acceptance criteria A1-A10 with their tolerances and time budgets.

Each test is tagged with ``criterion``; a summary hook in ``conftest.py``
prints one PASS/FAIL line per criterion after the run.
"""
import math
import time

import numpy as np
import pytest

from nlsym.assembly import assemble, form_value, reduce_antisymmetric, rho_restricted
from nlsym.audit import random_antisymmetric
from nlsym.errors import CertificateImpossibleError
from nlsym.kernels import (
    check_monotonicity,
    default_sample_plan,
    fractional_constant,
    fractional_kernel,
    constant_kernel,
    truncated_fractional_kernel,
)
from nlsym.lattice import (
    CellField,
    GridField,
    ball_p,
    box,
    components,
    half_cells,
    interior_proxy,
    interval,
    mask_from_domain,
    union,
)
from nlsym.semilinear import constant, solve_semilinear
from nlsym.spectral import lambda1_discrete
from nlsym.symmetry import (
    barrier_certificate,
    group_defect,
    make_frame,
    moving_plane_sweep,
    smallvolume_certificate,
    square_group,
    strict_decrease_check,
    symmetry_defect,
    v_lambda,
)


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f}s, budget {self.seconds}s"


@pytest.mark.criterion(1, "fractional constant closed form")
def test_a1_fractional_constant():
    with Budget(1.0):
        assert abs(fractional_constant(1, 1.0) - 1 / math.pi) <= 1e-12
        assert abs(fractional_constant(2, 1.0) - 1 / (2 * math.pi)) <= 1e-12


@pytest.mark.criterion(2, "toy assembly oracle")
def test_a2_toy_assembly():
    with Budget(1.0):
        F = assemble(constant_kernel(1, 1.0, 3.0), mask_from_domain(interval(0.0, 2.0), 1.0))
        assert np.abs(F.A - np.array([[5.0, -1.0], [-1.0, 5.0]])).max() <= 1e-10
        assert abs(lambda1_discrete(F).lambda1_h - 4.0) <= 1e-8


@pytest.mark.criterion(3, "rearrangement bound chain")
def test_a3_bound_chain():
    with Budget(30.0):
        k = fractional_kernel(1, 0.5)
        bounds = [4.0, 4.0 * math.sqrt(2.0), 8.0]
        lams = []
        for length, bound in zip((2.0, 1.0, 0.5), bounds):
            F = assemble(k, mask_from_domain(interval(-length / 2, length / 2), length / 64))
            lam = lambda1_discrete(F).lambda1_h
            assert lam >= (1 - 1e-2) * bound
            lams.append(lam)
        assert lams[0] < lams[1] < lams[2]


@pytest.mark.criterion(4, "positive-part contraction and antisymmetric key inequality")
def test_a4_exact_algebra():
    with Budget(30.0):
        rng = np.random.default_rng(4)
        forms = [
            assemble(fractional_kernel(1, 0.5), mask_from_domain(interval(-1, 1), 1 / 8)),
            assemble(fractional_kernel(2, 0.5, p=1.0), mask_from_domain(box([-1, -1], [1, 1]), 0.5)),
        ]
        for F in forms:
            assert F.n <= 16
            grid = F.mask.grid
            sel = F.mask.inside
            worst_rho = -math.inf
            for _ in range(1000):
                vals = np.where(sel, rng.standard_normal(grid.shape), 0.0)
                r = rho_restricted(F, GridField(grid, vals), sel)
                rp = rho_restricted(F, GridField(grid, np.maximum(vals, 0)), sel)
                rm = rho_restricted(F, GridField(grid, np.maximum(-vals, 0)), sel)
                scale = F.S * float(np.abs(vals).max()) ** 2
                worst_rho = max(worst_rho, (rp - r) / scale, (rm - r) / scale)
            assert worst_rho <= 1e-12
            worst_key = -math.inf
            nontrivial = 0
            ts = np.arange(1 - 2 * int(F.mask.ell / F.h), 2 * int(F.mask.ell / F.h))
            for _ in range(1000):
                lam = int(rng.choice(ts)) * F.h / 2
                v, _u = random_antisymmetric(F, lam, rng, cells=16)
                w = GridField(grid, np.where(half_cells(grid, lam), np.maximum(-v.values, 0.0), 0.0))
                if not w.values.any():
                    continue
                nontrivial += 1
                scale = F.S * float(np.abs(v.values).max()) ** 2
                worst_key = max(worst_key, (form_value(F, w, w) + form_value(F, v, w)) / scale)
            assert nontrivial >= 500
            assert worst_key <= 1e-12


@pytest.mark.criterion(5, "inverse positivity of the reduced operator")
def test_a5_inverse_positivity():
    with Budget(60.0):
        rng = np.random.default_rng(5)
        cases = [
            assemble(fractional_kernel(1, 0.5), mask_from_domain(interval(-1, 1), 1 / 16)),
            assemble(fractional_kernel(2, 0.5, p=1.0), mask_from_domain(box([-1, -1], [1, 1]), 0.25)),
        ]
        for F in cases:
            assert check_monotonicity(F.kernel, "J2", default_sample_plan(F.kernel)).holds
        for trial in range(100):
            F = cases[trial % 2]
            grid = F.mask.grid
            t = int(rng.integers(0, int(2 * F.mask.ell / F.h)))
            lam = t * F.h / 2
            half = F.mask.inside & half_cells(grid, lam)
            U = half & (rng.random(grid.shape) < 0.6)
            if not U.any():
                U = half
            red = reduce_antisymmetric(F, lam, U)
            lam_min = smallvolume_certificate(red, np.zeros(red.n)).lambda_min_B
            c = np.minimum(rng.uniform(-3.0, 1.0, red.n) * lam_min, 0.9 * lam_min)
            cert = smallvolume_certificate(red, c)
            assert cert.holds
            assert cert.inverse_min_entry >= -1e-10
            if red.n > 1:
                assert cert.offdiag_max <= 0


def _sweep_checks(F, rep_solve, f, tol_defect):
    assert rep_solve.converged and rep_solve.residual <= 1e-10
    u = rep_solve.u
    assert u.values.min() >= 0
    rep = moving_plane_sweep(u, F, f)
    assert rep.lambda0 == 0.0 and rep.lambda0_mirror == 0.0
    assert rep.symmetry_defect <= tol_defect
    assert strict_decrease_check(u)
    assert rep.strict_decrease_ok and rep.essinf_positive_ok
    assert not rep.violations
    assert all(r.margin_scaled >= -1e-10 for r in rep.records + rep.mirrored if r.n_half)
    return rep


@pytest.mark.criterion(6, "end-to-end symmetry on the interval")
def test_a6_end_to_end():
    with Budget(120.0):
        F = assemble(fractional_kernel(1, 0.5), mask_from_domain(interval(-1, 1), 1 / 64))
        f = constant(1.0)
        rep = solve_semilinear(F, f, tol=1e-10)
        assert interior_proxy(F.mask.inside).any()
        _sweep_checks(F, rep, f, 1e-8)


@pytest.mark.criterion(7, "radial symmetry in 2D")
def test_a7_radial_2d():
    with Budget(300.0):
        f = constant(1.0)
        h = 1 / 24
        F = assemble(fractional_kernel(2, 0.5, p=1.0), mask_from_domain(box([-1, -1], [1, 1]), h))
        assert F.n <= 48 * 48
        u = solve_semilinear(F, f).u
        assert symmetry_defect(u, 0) <= 1e-6 and symmetry_defect(u, 1) <= 1e-6
        rep = moving_plane_sweep(u, F, f, threads=4)
        assert rep.lambda0 == 0.0 and not rep.violations
        D = assemble(fractional_kernel(2, 0.5), mask_from_domain(ball_p([0, 0], 1.0), h))
        ud = solve_semilinear(D, f).u
        ops = square_group()
        assert len(ops) == 8
        assert group_defect(ud, ops) <= 1e-3


@pytest.mark.criterion(8, "truncated kernel symmetry for positive solutions")
def test_a8_truncated():
    with Budget(120.0):
        k = truncated_fractional_kernel(1, 0.5, 1.0, strictness_radius=1.0)
        assert not check_monotonicity(k, "J2", default_sample_plan(k)).holds
        assert check_monotonicity(k, "J2prime", default_sample_plan(k)).holds
        F = assemble(k, mask_from_domain(interval(-1, 1), 1 / 64))
        f = constant(1.0)
        rep = solve_semilinear(F, f, tol=1e-10)
        assert rep.u.values.min() > 0
        _sweep_checks(F, rep, f, 1e-8)


@pytest.mark.criterion(9, "long-range positivity on two components")
def test_a9_two_components():
    with Budget(60.0):
        mask = mask_from_domain(union(interval(-2, -1), interval(1, 2)), 1 / 32)
        F = assemble(fractional_kernel(1, 0.5), mask)
        rep = solve_semilinear(F, constant(1.0))
        assert rep.converged and rep.nonneg
        g = rep.u.to_grid().values
        comps = components(mask.inside)
        assert len(comps) == 2
        for comp in comps:
            core = interior_proxy(comp)
            assert core.any() and g[core].min() > 0


@pytest.mark.criterion(10, "barrier certificate")
def test_a10_barrier():
    with Budget(30.0):
        F = assemble(fractional_kernel(1, 0.5), mask_from_domain(interval(-1, 1), 1 / 16))
        u = solve_semilinear(F, constant(1.0)).u
        frame = make_frame(F, 0.25)
        v = v_lambda(u, frame)
        M = np.array([[12], [13]])
        delta = float(v.values[tuple((M - np.asarray(frame.grid.lo)).T)].min())
        assert delta > 0
        cert = barrier_certificate(frame, F.kernel, 1.0, x0=[6], M=M, delta=delta)
        assert math.isfinite(cert.a) and cert.a > 0 and cert.C_a <= -1.0
        with pytest.raises(CertificateImpossibleError):
            barrier_certificate(make_frame(F, 0.0), F.kernel, 1.0, x0=[6], M=M, delta=delta)
