"""Even interaction kernels J on R^N minus the origin.

A kernel is stored as a vectorized pointwise evaluator plus optional analytic
metadata: a radial profile ``k`` in some ``|.|_p`` norm, the near-origin
singularity order, a truncation radius and a closed-form tail integral.  The
analytic fast paths are always cross-checked against evaluator-based
quadrature in the test-suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate

from nlsym.errors import DomainError, UnsupportedError

__all__ = [
    "PowerPiece",
    "PiecewisePowerProfile",
    "Kernel",
    "IntegrabilityReport",
    "MonotonicityReport",
    "pnorm",
    "unit_ball_volume",
    "fractional_constant",
    "fractional_kernel",
    "truncated_fractional_kernel",
    "constant_kernel",
    "two_power_kernel",
    "radial_profile_kernel",
    "kernel_from_evaluator",
    "kernel_from_spec",
    "eval_kernel",
    "tail_mass",
    "shell_tail_mass",
    "euclidean_shell_integral",
    "check_J1",
    "check_monotonicity",
    "default_sample_plan",
    "rearrangement_threshold",
    "lambda1_lower_bound",
]

OVERFLOW = 1e300


def pnorm(z, p):
    """``|z|_p`` over the last axis."""
    a = np.abs(np.asarray(z, dtype=float))
    if a.shape[-1] == 1:
        return a[..., 0]
    if p == 1:
        return a.sum(axis=-1)
    if p == 2:
        return np.sqrt((a * a).sum(axis=-1))
    return (a**p).sum(axis=-1) ** (1.0 / p)


def unit_ball_volume(dim, p=2.0):
    """Lebesgue measure of the unit ``|.|_p`` ball in R^dim."""
    return (2.0 * math.gamma(1.0 + 1.0 / p)) ** dim / math.gamma(1.0 + dim / p)


def fractional_constant(N, alpha):
    """Normalisation constant of the kernel of the fractional Laplacian of order ``alpha``."""
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    return (
        alpha
        * (2.0 - alpha)
        * math.pi ** (-N / 2.0)
        * 2.0 ** (alpha - 2.0)
        * math.gamma((N + alpha) / 2.0)
        / math.gamma(2.0 - alpha / 2.0)
    )


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerPiece:
    """``k(t) = coef * t**(-exponent)`` for ``lo < t <= hi``."""

    lo: float
    hi: float
    coef: float
    exponent: float


def _power_moment(coef, q, a, b):
    # int_a^b coef * t**(q-1) dt, with b possibly inf
    if b <= a:
        return 0.0
    if q == 0.0:
        if math.isinf(b):
            return math.inf
        return coef * math.log(b / a)
    if math.isinf(b):
        return coef * (-(a**q)) / q if q < 0 else math.inf
    if a == 0.0:
        return coef * b**q / q if q > 0 else math.inf
    return coef * (b**q - a**q) / q


class PiecewisePowerProfile:
    """Radial profile made of power laws on consecutive radius intervals.

    Covers every family used here: pure powers, constants, variable order
    (two different powers inside/outside the unit sphere) and truncations.
    Beyond the last piece the profile is zero.
    """

    def __init__(self, pieces: Sequence[PowerPiece]):
        pieces = tuple(pieces)
        if not pieces or pieces[0].lo != 0.0:
            raise ValueError("profile pieces must start at radius 0")
        for left, right in zip(pieces, pieces[1:]):
            if left.hi != right.lo:
                raise ValueError("profile pieces must be contiguous")
        for pc in pieces:
            if pc.coef <= 0 or pc.hi <= pc.lo:
                raise ValueError(f"invalid profile piece {pc}")
        self.pieces = pieces

    @property
    def support_radius(self):
        hi = self.pieces[-1].hi
        return None if math.isinf(hi) else hi

    @property
    def breakpoints(self):
        return tuple(pc.hi for pc in self.pieces if not math.isinf(pc.hi))

    @property
    def strictly_decreasing(self):
        """Strictly decreasing on its support (jumps down to zero allowed)."""
        if any(pc.exponent <= 0 for pc in self.pieces):
            return False
        for left, right in zip(self.pieces, self.pieces[1:]):
            at_left = left.coef * left.hi ** (-left.exponent)
            at_right = right.coef * right.lo ** (-right.exponent)
            if at_right > at_left:
                return False
        return True

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for pc in self.pieces:
            sel = (t > pc.lo) & (t <= pc.hi)
            if np.any(sel):
                with np.errstate(over="ignore"):  # +inf near a singular origin is the intended value
                    out[sel] = pc.coef * t[sel] ** (-pc.exponent)
        return out

    def moment(self, m, a, b=math.inf):
        """``int_a^b t**m k(t) dt`` in closed form (``inf`` when divergent)."""
        total = 0.0
        for pc in self.pieces:
            lo, hi = max(a, pc.lo), min(b, pc.hi)
            if hi > lo:
                total += _power_moment(pc.coef, m - pc.exponent + 1.0, lo, hi)
        return total

    def describe(self):
        """Pieces as ``[lo, hi, coef, exponent]``; an unbounded ``hi`` is written as ``None``."""
        return [[pc.lo, pc.hi if math.isfinite(pc.hi) else None, pc.coef, pc.exponent] for pc in self.pieces]


# ---------------------------------------------------------------------------
# kernel container
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Kernel:
    """Even nonnegative kernel ``J``.

    ``evaluator`` maps an array of points with trailing axis ``dim`` to kernel
    values.  ``profile`` is set when ``J(z) = profile(|z|_p)``;
    ``tail_integral(R)`` returns the mass of ``J`` outside the ``|.|_p`` ball
    of radius ``R``.  ``strictness_radius`` is the declared radius within
    which the kernel is strictly monotone in ``|z_1|`` (needed for truncated
    kernels); it is never inferred from samples.
    """

    dim: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    profile: PiecewisePowerProfile | Callable | None = None
    pnorm: float = 2.0
    singularity_order: float = 0.0
    truncation_radius: float | None = None
    tail_integral: Callable[[float], float] | None = None
    strictness_radius: float | None = None
    profile_decreasing: bool = False
    strictly_monotone: bool = False
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, z):
        return self.evaluator(np.asarray(z, dtype=float))

    @property
    def radial(self):
        return self.profile is not None

    @property
    def axis_symmetric(self):
        """Invariant under sign flips and permutations of coordinates."""
        return self.profile is not None

    @property
    def piecewise(self):
        return isinstance(self.profile, PiecewisePowerProfile)

    @property
    def breakpoints(self):
        if self.piecewise:
            return self.profile.breakpoints
        if self.truncation_radius is not None:
            return (self.truncation_radius,)
        return ()

    def radial_moment(self, m, a, b=math.inf):
        """``int_a^b t**m k(t) dt`` for the radial profile."""
        if self.profile is None:
            raise UnsupportedError("kernel has no radial profile")
        if self.piecewise:
            return self.profile.moment(m, a, b)
        pts = [x for x in self.breakpoints if a < x < b]
        return _quad_pieces(lambda t: t**m * float(self.profile(t)), a, b, pts)[0]

    def spec(self):
        return {"name": self.name, "dim": self.dim, "p": self.pnorm, **self.params}


def _quad_pieces(fn, a, b, points=()):
    """Adaptive quadrature of ``fn`` on [a, b] (b may be inf) split at ``points``."""
    edges = [a, *sorted(p for p in points if a < p < b), b]
    val = err = 0.0
    for lo, hi in zip(edges, edges[1:]):
        v, e = integrate.quad(fn, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400)
        val += v
        err += e
    return val, err


def _radial_kernel(dim, profile, p, singularity_order, name, params, strictness_radius=None):
    def evaluator(z, _profile=profile, _p=p):
        return _profile(pnorm(z, _p))

    truncation = None
    tail = None
    decreasing = False
    if isinstance(profile, PiecewisePowerProfile):
        truncation = profile.support_radius
        decreasing = profile.strictly_decreasing
        vol = unit_ball_volume(dim, p)

        def tail(R, _profile=profile, _dim=dim, _vol=vol):
            return _dim * _vol * _profile.moment(_dim - 1.0, R, math.inf)

    strict = decreasing and truncation is None
    if strictness_radius is None and decreasing and truncation is not None:
        strictness_radius = truncation * dim ** (-1.0 / p)
    return Kernel(
        dim=dim,
        evaluator=evaluator,
        profile=profile,
        pnorm=p,
        singularity_order=singularity_order,
        truncation_radius=truncation,
        tail_integral=tail,
        strictness_radius=strictness_radius,
        profile_decreasing=decreasing,
        strictly_monotone=strict,
        name=name,
        params=params,
    )


def _check_dim(dim):
    if dim not in (1, 2):
        raise DomainError(f"dimension must be 1 or 2, got {dim}")


def _constant_value(dim, alpha, constant):
    if constant == "paper":
        return fractional_constant(dim, alpha)
    if constant == "unit":
        return 1.0
    raise ValueError(f"constant must be 'paper' or 'unit', got {constant!r}")


def fractional_kernel(dim, alpha, constant="unit", p=2.0):
    """``J(z) = c |z|_p^{-dim-alpha}``; ``p != 2`` gives the anisotropic family."""
    _check_dim(dim)
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    c = _constant_value(dim, alpha, constant)
    prof = PiecewisePowerProfile([PowerPiece(0.0, math.inf, c, dim + alpha)])
    name = "fractional" if p == 2.0 else "anisotropic"
    return _radial_kernel(dim, prof, p, alpha, name, {"alpha": alpha, "constant": constant})


def truncated_fractional_kernel(dim, alpha, radius, constant="unit", p=2.0, strictness_radius=None):
    """``J(z) = c 1{|z|_p <= radius} |z|_p^{-dim-alpha}``."""
    _check_dim(dim)
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    if radius <= 0:
        raise DomainError("truncation radius must be positive")
    c = _constant_value(dim, alpha, constant)
    prof = PiecewisePowerProfile([PowerPiece(0.0, float(radius), c, dim + alpha)])
    return _radial_kernel(
        dim,
        prof,
        p,
        alpha,
        "truncated_fractional",
        {"alpha": alpha, "constant": constant, "truncation_radius": radius},
        strictness_radius,
    )


def constant_kernel(dim, value, radius, p=2.0):
    """Zero-order kernel ``J = value`` on the closed ``|.|_p`` ball of ``radius``."""
    _check_dim(dim)
    prof = PiecewisePowerProfile([PowerPiece(0.0, float(radius), float(value), 0.0)])
    return _radial_kernel(
        dim, prof, p, 0.0, "radial_profile",
        {"profile": "constant", "value": value, "truncation_radius": radius},
    )


def two_power_kernel(dim, alpha, beta, coef=1.0, p=2.0, truncation_radius=None):
    """Variable-order kernel: order ``alpha`` inside the unit sphere, ``beta`` outside."""
    _check_dim(dim)
    if not (0.0 <= alpha < 2.0 and 0.0 < beta < 2.0):
        raise DomainError("need 0 <= alpha < 2 and 0 < beta < 2")
    outer = math.inf if truncation_radius is None else float(truncation_radius)
    if outer <= 1.0:
        pieces = [PowerPiece(0.0, outer, coef, dim + alpha)]
    else:
        pieces = [PowerPiece(0.0, 1.0, coef, dim + alpha), PowerPiece(1.0, outer, coef, dim + beta)]
    prof = PiecewisePowerProfile(pieces)
    params = {"profile": "two_power", "alpha": alpha, "beta": beta, "coef": coef}
    if truncation_radius is not None:
        params["truncation_radius"] = truncation_radius
    return _radial_kernel(dim, prof, p, alpha, "radial_profile", params)


def radial_profile_kernel(dim, profile, p=2.0, singularity_order=None, *, decreasing=False,
                          truncation_radius=None, strictness_radius=None):
    """Kernel ``J(z) = profile(|z|_p)`` for a piecewise-power or arbitrary callable profile."""
    _check_dim(dim)
    if isinstance(profile, PiecewisePowerProfile):
        order = singularity_order
        if order is None:
            order = max(profile.pieces[0].exponent - dim, 0.0)
        return _radial_kernel(dim, profile, p, order, "radial_profile",
                              {"profile": profile.describe()}, strictness_radius)
    kern = _radial_kernel(dim, profile, p, singularity_order or 0.0, "radial_profile",
                          {"profile": getattr(profile, "__name__", "callable")}, strictness_radius)
    return Kernel(
        **{
            **kern.__dict__,
            "profile_decreasing": decreasing,
            "strictly_monotone": decreasing and truncation_radius is None,
            "truncation_radius": truncation_radius,
        }
    )


def kernel_from_evaluator(dim, fn, singularity_order=0.0, *, pnorm=2.0, strictness_radius=None,
                          strictly_monotone=False, truncation_radius=None, name="evaluator"):
    """Kernel known only pointwise; no closed-form bounds are available for it."""
    _check_dim(dim)
    return Kernel(
        dim=dim,
        evaluator=lambda z: np.asarray(fn(z), dtype=float),
        pnorm=pnorm,
        singularity_order=singularity_order,
        truncation_radius=truncation_radius,
        strictness_radius=strictness_radius,
        strictly_monotone=strictly_monotone,
        name=name,
    )


def kernel_from_spec(block, dim):
    """Build a kernel from a config block (mapping or object with attributes)."""
    get = block.get if isinstance(block, dict) else (lambda k, d=None: getattr(block, k, d))
    family = get("family")
    alpha = get("alpha")
    p = get("p", 2.0) or 2.0
    constant = get("constant", "unit") or "unit"
    if family == "fractional":
        return fractional_kernel(dim, alpha, constant, 2.0)
    if family == "anisotropic":
        return fractional_kernel(dim, alpha, constant, p)
    if family == "truncated_fractional":
        return truncated_fractional_kernel(dim, alpha, get("truncation_radius"), constant, p)
    if family == "radial_profile":
        prof = get("profile", "power")
        trunc = get("truncation_radius")
        if prof == "constant":
            return constant_kernel(dim, get("value", 1.0), trunc, p)
        if prof == "two_power":
            return two_power_kernel(dim, alpha, get("beta"), get("value", 1.0) or 1.0, p, trunc)
        if prof == "power":
            if trunc is None:
                return fractional_kernel(dim, alpha, constant, p)
            return truncated_fractional_kernel(dim, alpha, trunc, constant, p)
        raise ValueError(f"unknown radial profile {prof!r}")
    raise ValueError(f"unknown kernel family {family!r}")


# ---------------------------------------------------------------------------
# pointwise evaluation and integrals
# ---------------------------------------------------------------------------


def _as_point(kernel, z):
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.shape != (kernel.dim,):
        raise DomainError(f"expected a point in R^{kernel.dim}, got shape {z.shape}")
    return z


def eval_kernel(kernel, z):
    """``J(z)`` at a single nonzero point."""
    z = _as_point(kernel, z)
    if not np.any(z):
        raise DomainError("kernel singular at origin")
    return float(kernel(z[None, :])[0])


def tail_mass(kernel, R):
    """Mass of ``J`` outside the ``|.|_p`` ball of radius ``R``; ``inf`` if divergent."""
    if not R > 0:
        raise DomainError(f"radius must be positive, got {R}")
    if kernel.truncation_radius is not None and R >= kernel.truncation_radius:
        return 0.0
    if kernel.tail_integral is not None:
        return float(kernel.tail_integral(R))
    return shell_tail_mass(kernel, R).value


class TailMass(NamedTuple):
    value: float
    error: float
    infinite: bool


def _direction(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def _annulus_integral(kernel, a, b, power=0.0, norm=None):
    """``int_{a <= |z| <= b} |z|^power J(z) dz`` by evaluator quadrature, ``|.|`` the given norm."""
    norm = kernel.pnorm if norm is None else norm
    pts = kernel.breakpoints
    if kernel.dim == 1:
        def f(t):
            return t**power * (float(kernel(np.array([[t]]))[0]) + float(kernel(np.array([[-t]]))[0]))

        return _quad_pieces(f, a, b, [x for x in pts if a < x < b])

    def inner(theta):
        e = _direction(theta)
        scale = float(pnorm(e, norm))
        lo, hi = a / scale, b / scale

        def g(rho):
            return rho ** (power + 1.0) * float(kernel((rho * e)[None, :])[0]) * scale**power

        brk = []
        if kernel.radial:
            kscale = float(pnorm(e, kernel.pnorm))
            brk = [x / kscale for x in pts]
        return _quad_pieces(g, lo, hi, [x for x in brk if lo < x < hi])

    val = err = 0.0
    for q in range(4):
        v, e = integrate.quad(lambda th: inner(th)[0], q * math.pi / 2, (q + 1) * math.pi / 2,
                              epsabs=0.0, epsrel=1e-10, limit=200)
        val += v
        err += e
    return val, err


def shell_tail_mass(kernel, R, max_shells=400):
    """Evaluator-based tail mass over dyadic shells with a geometric remainder estimate."""
    if not R > 0:
        raise DomainError(f"radius must be positive, got {R}")
    total = err = 0.0
    shells = []
    for m in range(max_shells):
        a, b = R * 2.0**m, R * 2.0 ** (m + 1)
        if kernel.truncation_radius is not None and a >= kernel.truncation_radius:
            return TailMass(total, err, False)
        s, e = _annulus_integral(kernel, a, b)
        shells.append(s)
        total += s
        err += e
        if len(shells) >= 8:
            recent = shells[-8:]
            if all(y >= (1.0 - 1e-3) * x for x, y in zip(recent, recent[1:])):
                return TailMass(math.inf, math.inf, True)
            q = shells[-1] / shells[-2] if shells[-2] > 0 else 0.0
            remainder = shells[-1] * q / (1.0 - q) if q < 1 else math.inf
            if remainder <= 1e-13 * total:
                return TailMass(total + remainder, err + remainder * 1e-2, False)
    if shells[-1] > 1e-12 * total:
        return TailMass(math.inf, math.inf, True)
    return TailMass(total, err, False)


def euclidean_shell_integral(kernel, a, b, power=0.0):
    """``int_{a <= |z|_2 <= b} |z|_2^power J(z) dz`` (b may be inf)."""
    if kernel.profile is not None and (kernel.dim == 1 or kernel.pnorm == 2.0):
        n = kernel.dim
        return n * unit_ball_volume(n, 2.0) * kernel.radial_moment(power + n - 1.0, a, b)
    if kernel.profile is not None:
        # |z|_2 = t, J = k(t |e|_p): substitute s = t |e|_p in the radial integral
        def g(theta):
            sc = float(pnorm(_direction(theta), kernel.pnorm))
            return sc ** (-(power + 2.0)) * kernel.radial_moment(power + 1.0, a * sc, b * sc)

        return 4.0 * integrate.quad(g, 0.0, math.pi / 2, epsabs=0.0, epsrel=1e-11, limit=200)[0]
    if math.isinf(b):
        return shell_tail_mass_euclidean(kernel, a, power)
    return _annulus_integral(kernel, a, b, power, norm=2.0)[0]


def shell_tail_mass_euclidean(kernel, a, power=0.0, max_shells=400):
    total = 0.0
    prev = None
    for m in range(max_shells):
        s = _annulus_integral(kernel, a * 2.0**m, a * 2.0 ** (m + 1), power, norm=2.0)[0]
        total += s
        if prev is not None and prev > 0 and s / prev < 1 and s * (s / prev) / (1 - s / prev) < 1e-13 * total:
            return total
        prev = s
    return math.inf


class IntegrabilityReport(NamedTuple):
    second_moment_inner: float
    tail_mass: float
    mass_divergence_trend: tuple
    verdict_J1: bool


def check_J1(kernel, M=16):
    """Integrability test: finite second moment / tail, divergent total mass."""
    if M < 8:
        raise DomainError("need at least 8 dyadic shells")
    second = euclidean_shell_integral(kernel, 0.0, 1.0, power=2.0)
    tail = euclidean_shell_integral(kernel, 1.0, math.inf)
    shells = tuple(
        float(euclidean_shell_integral(kernel, 2.0 ** (-(m + 1)), 2.0 ** (-m))) for m in range(M + 1)
    )

    def finite(x):
        return math.isfinite(x) and x < OVERFLOW

    last = shells[-(M // 2 + 1):]
    diverges = all(s > 0 for s in last) and all(y >= (1.0 - 1e-3) * x for x, y in zip(last, last[1:]))
    return IntegrabilityReport(float(second), float(tail), shells, bool(finite(second) and finite(tail) and diverges))


class MonotonicityReport(NamedTuple):
    mode: str
    holds: bool
    witness: tuple | None
    checked: int
    violations: int


def check_monotonicity(kernel, mode, samples):
    """Audit monotonicity of ``J(s, z')`` in ``|s|`` on a sample plan.

    ``samples`` is a sequence of ``(s, t, zprime)`` with ``|s| < |t|``;
    ``zprime`` has ``dim - 1`` entries.  Mode ``"J2"`` demands strict decrease
    on every pair, ``"J2prime"`` weak decrease everywhere and strict decrease
    for ``|z'|, |t| <= r0`` with ``r0`` the kernel's declared strictness
    radius.  The first violating pair is returned as ``witness``.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("empty sample plan")
    if mode not in ("J2", "J2prime"):
        raise ValueError(f"mode must be 'J2' or 'J2prime', got {mode!r}")
    r0 = kernel.strictness_radius
    if mode == "J2prime" and r0 is None:
        raise ValueError("kernel declares no strictness radius r0")
    witness = None
    violations = 0
    for s, t, zp in samples:
        zp = np.atleast_1d(np.asarray(zp, dtype=float)) if kernel.dim > 1 else np.zeros(0)
        if not abs(s) < abs(t):
            raise ValueError(f"sample requires |s| < |t|, got s={s}, t={t}")
        js = float(kernel(np.concatenate([[s], zp])[None, :])[0])
        jt = float(kernel(np.concatenate([[t], zp])[None, :])[0])
        if mode == "J2":
            ok = js > jt
        else:
            strict = abs(t) <= r0 and (zp.size == 0 or float(np.linalg.norm(zp)) <= r0)
            ok = js > jt if strict else js >= jt
        if not ok:
            violations += 1
            if witness is None:
                witness = (float(s), float(t), tuple(zp.tolist()), js, jt)
    return MonotonicityReport(mode, violations == 0, witness, len(samples), violations)


def default_sample_plan(kernel, n=16, extent=None):
    """Deterministic grid of ``(s, t, z')`` pairs with ``|s| < |t|``, avoiding the origin."""
    if extent is None:
        base = kernel.truncation_radius or kernel.strictness_radius or 1.0
        extent = 2.0 * base
    vals = np.linspace(extent / n, extent, n)
    if kernel.strictness_radius is not None:
        vals = np.union1d(vals, np.linspace(kernel.strictness_radius / n, kernel.strictness_radius, n))
    vals = np.union1d(vals, [0.0])
    zps = [()] if kernel.dim == 1 else [(z,) for z in np.linspace(0.0, extent, max(n // 4, 2))]
    plan = []
    for zp in zps:
        for i, s in enumerate(vals):
            for t in vals[i + 1:]:
                if s == 0.0 and not any(zp):
                    continue  # the origin is not in the kernel's domain
                plan.append((float(s), float(t), zp))
                plan.append((float(-s), float(-t), zp))
    return plan


# ---------------------------------------------------------------------------
# rearrangement bound
# ---------------------------------------------------------------------------


def _ray_directions(dim, n=24):
    if dim == 1:
        return [np.array([1.0]), np.array([-1.0])], np.array([1.0, 1.0])
    x, w = np.polynomial.legendre.leggauss(n)
    dirs, weights = [], []
    for q in range(8):
        lo, hi = q * math.pi / 4, (q + 1) * math.pi / 4
        th = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        dirs.extend(_direction(t) for t in th)
        weights.extend(0.5 * (hi - lo) * w)
    return dirs, np.asarray(weights)


def _ray_radius(kernel, e, c):
    """Largest radius along direction ``e`` with ``J >= c`` (kernel decreasing along rays)."""
    def J(rho):
        return float(kernel((rho * e)[None, :])[0])

    lo, hi = 1e-12, 1.0
    if J(lo) < c:
        return 0.0
    while J(hi) >= c:
        lo, hi = hi, hi * 2.0
        if hi > 1e12:
            return math.inf
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if J(mid) >= c:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1.0 < 1e-15:
            break
    return lo


def _superlevel_volume(kernel, c, dirs, weights):
    radii = np.array([_ray_radius(kernel, e, c) for e in dirs])
    if kernel.dim == 1:
        return float(radii.sum()), radii
    return float(0.5 * np.dot(weights, radii**2)), radii


def rearrangement_threshold(kernel, r):
    """Decreasing rearrangement ``d(r) = sup{c >= 0 : |{J >= c}| >= r}``."""
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    if kernel.profile is not None:
        if not kernel.profile_decreasing:
            raise UnsupportedError("closed-form rearrangement needs a strictly decreasing profile")
        rho = (r / unit_ball_volume(kernel.dim, kernel.pnorm)) ** (1.0 / kernel.dim)
        if kernel.truncation_radius is not None and rho > kernel.truncation_radius:
            return 0.0
        return float(kernel.profile(np.array([rho]))[0])
    dirs, weights = _ray_directions(kernel.dim)
    # |{J >= c}| is nonincreasing in c: bisection in log c
    lo, hi = 1e-300, 1.0
    while _superlevel_volume(kernel, hi, dirs, weights)[0] >= r:
        lo, hi = hi, hi * 10.0
        if hi > 1e300:
            return math.inf
    if _superlevel_volume(kernel, lo, dirs, weights)[0] < r:
        return 0.0
    lo = max(lo, hi / 10.0) if lo > 1e-300 else lo
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if _superlevel_volume(kernel, mid, dirs, weights)[0] >= r:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1.0 < 1e-13:
            break
    return lo


def lambda1_lower_bound(kernel, r):
    """Lower bound ``int_{J < d(r)} J`` for the Poincare constant of any set of volume ``r``."""
    d = rearrangement_threshold(kernel, r)
    if d == 0.0:
        return 0.0
    if kernel.profile is not None:
        rho = (r / unit_ball_volume(kernel.dim, kernel.pnorm)) ** (1.0 / kernel.dim)
        return tail_mass(kernel, rho)
    dirs, weights = _ray_directions(kernel.dim)
    radii = _superlevel_volume(kernel, d, dirs, weights)[1]
    total = 0.0
    for e, w, rho in zip(dirs, weights, radii):
        def g(t, e=e):
            return float(kernel((t * e)[None, :])[0]) * t ** (kernel.dim - 1)

        total += w * integrate.quad(g, rho, math.inf, epsabs=0.0, epsrel=1e-10, limit=400)[0]
    return float(total)
