import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsym.lattice import CellField
from nlsym.semilinear import (
    Nonlinearity,
    audit_lipschitz,
    audit_monotone_symmetric,
    constant,
    custom_table,
    linear_plus_constant,
    logistic,
    nonlinearity_from_spec,
    scaled_residual,
    solve_semilinear,
    verify_weak_residual,
)


def test_toy_constant_source(toy_form):
    rep = solve_semilinear(toy_form, constant(1.0))
    np.testing.assert_allclose(rep.u.values, [0.25, 0.25], atol=1e-14)
    assert rep.converged and rep.nonneg and rep.residual <= 1e-10


def test_linear_below_spectrum_gives_zero(toy_form):
    rep = solve_semilinear(toy_form, linear_plus_constant(1.0, 0.0))
    assert rep.converged
    np.testing.assert_array_equal(rep.u.values, [0.0, 0.0])


def test_constant_source_nonnegative(frac_solution, frac_form):
    u = frac_solution.u.values
    assert u.min() > 0
    # exact solution of the linear system
    np.testing.assert_allclose(frac_form.A @ u, frac_form.mass * np.ones(frac_form.n), atol=1e-13)


def test_symmetric_data_give_symmetric_solution(frac_solution):
    u = frac_solution.u.values
    assert np.abs(u - u[::-1]).max() <= 1e-12 * u.max()


def test_logistic_newton(frac_form):
    f = logistic(2.0, 1.0, source=1.0)
    rep = solve_semilinear(frac_form, f, tol=1e-12)
    assert rep.converged and rep.method == "newton"
    assert scaled_residual(frac_form, f, rep.u.values) <= 1e-12


def test_custom_table_picard_fallback(frac_form):
    f = custom_table([0.0, 0.5, 2.0], [1.0, 1.5, 1.0])
    rep = solve_semilinear(frac_form, f, tol=1e-11)
    assert rep.converged and rep.nonneg


def test_nonconvergence_is_reported(frac_form):
    f = logistic(2.0, 1.0, source=1.0)
    rep = solve_semilinear(frac_form, f, tol=1e-30, max_iter=2)
    assert not rep.converged and rep.iterations == 2


def test_weak_residual_examples(toy_form):
    f = constant(1.0)
    zero = CellField(toy_form.mask, [0.0, 0.0])
    assert verify_weak_residual(toy_form, f, zero) == pytest.approx(toy_form.mass)
    u = solve_semilinear(toy_form, f).u
    assert verify_weak_residual(toy_form, f, u) <= 1e-14


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-6, 1e-1))
def test_weak_residual_linear_in_perturbation(eps):
    from nlsym.assembly import assemble
    from nlsym.kernels import constant_kernel
    from nlsym.lattice import interval, mask_from_domain

    F = assemble(constant_kernel(1, 1.0, 3.0), mask_from_domain(interval(0.0, 2.0), 1.0))
    f = constant(1.0)
    u = np.array([0.25, 0.25])
    u[0] += eps
    slope = np.abs(F.A[:, 0]).max()
    assert verify_weak_residual(F, f, u) == pytest.approx(slope * eps, rel=1e-8)


def test_lipschitz_audit(rng):
    pts = rng.uniform(-1, 1, (50, 1))
    ok, ratio = audit_lipschitz(logistic(3.0, 2.0), pts, K=4.0, samples=1000)
    assert ok and ratio <= 1.0
    bad = Nonlinearity(lambda x, u: u**3, lambda K: 1.0)
    ok, ratio = audit_lipschitz(bad, pts, K=2.0)
    assert not ok and ratio > 1.0


def test_symmetry_audit(rng):
    pts = rng.uniform(-1, 1, (40, 2))
    ok, _ = audit_monotone_symmetric(constant(1.0), pts, [0.0, 1.0])
    assert ok
    radial = Nonlinearity(lambda x, u: 1.0 - x[..., 0] ** 2 + 0 * u, lambda K: 0.0)
    assert audit_monotone_symmetric(radial, pts, [0.5])[0]
    tilted = Nonlinearity(lambda x, u: x[..., 0] + 0 * u, lambda K: 0.0)
    ok, witness = audit_monotone_symmetric(tilted, pts, [0.5])
    assert not ok and witness is not None


def test_from_spec():
    f = nonlinearity_from_spec({"family": "linear_plus_constant", "slope": 2.0, "value": 1.0})
    assert f(np.zeros((1, 1)), np.array([3.0]))[0] == 7.0
    g = nonlinearity_from_spec({"family": "custom_table", "u": [0, 1], "f": [0, 2]})
    assert g(np.zeros((1, 1)), np.array([0.5]))[0] == 1.0
    with pytest.raises(ValueError):
        nonlinearity_from_spec({"family": "cubic"})


def test_table_validation():
    with pytest.raises(ValueError):
        custom_table([0.0, 0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        logistic(1.0, 0.0)


def test_deterministic_solve(frac_form):
    f = logistic(2.0, 1.0, source=1.0)
    a = solve_semilinear(frac_form, f).u.values
    b = solve_semilinear(frac_form, f).u.values
    assert a.tobytes() == b.tobytes()
