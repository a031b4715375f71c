"""Uniform cell grids, rasterized domains, cell fields and grid-aligned reflections.

A cell is labelled by its integer index vector ``m``; its center is
``(m + 1/2) h``.  Reflection planes ``x_1 = lambda`` are restricted to
``lambda in (h/2) Z`` and stored as the integer ``t = 2 lambda / h``, so that
the reflection acts on indices as ``m_1 -> t - 1 - m_1`` with no rounding.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import ndimage

from nlsym.errors import ConfigurationError, DomainError

__all__ = [
    "Grid",
    "DomainMask",
    "CellField",
    "GridField",
    "Domain",
    "interval",
    "box",
    "ball_p",
    "union",
    "domain_from_spec",
    "grid_for_domain",
    "rasterize",
    "mask_from_domain",
    "snap_lambda",
    "snap_index",
    "reflect_field",
    "half_cells",
    "interior_proxy",
    "components",
]


def _round_half_away(x):
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


@dataclass(frozen=True)
class Grid:
    """Box of ``shape`` cells of side ``h`` whose first cell has index ``lo``."""

    dim: int
    h: float
    lo: tuple
    shape: tuple
    padding: int = 8

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DomainError(f"dimension must be 1 or 2, got {self.dim}")
        if not self.h > 0:
            raise DomainError("grid spacing must be positive")
        if len(self.lo) != self.dim or len(self.shape) != self.dim:
            raise DomainError("lo/shape must have one entry per dimension")

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def bbox(self):
        lo = np.asarray(self.lo, dtype=float) * self.h
        return lo, lo + np.asarray(self.shape, dtype=float) * self.h

    def indices(self):
        """Integer cell indices of the whole box, shape ``shape + (dim,)``."""
        axes = [np.arange(l, l + n) for l, n in zip(self.lo, self.shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def centers(self):
        return (self.indices() + 0.5) * self.h

    def center_of(self, m):
        return (np.asarray(m, dtype=float) + 0.5) * self.h

    def key(self):
        return (self.dim, float(self.h), tuple(self.lo), tuple(self.shape))


@dataclass(frozen=True, eq=False)
class DomainMask:
    """Cells of a grid whose centers lie in the domain."""

    grid: Grid
    inside: np.ndarray
    cells: np.ndarray = field(init=False)
    flat: np.ndarray = field(init=False)

    def __post_init__(self):
        inside = np.asarray(self.inside, dtype=bool)
        if inside.shape != tuple(self.grid.shape):
            raise DomainError("mask shape does not match grid")
        inside.setflags(write=False)
        object.__setattr__(self, "inside", inside)
        pos = np.argwhere(inside)
        cells = pos + np.asarray(self.grid.lo)[None, :]
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        flat = np.ravel_multi_index(tuple(pos.T), inside.shape) if len(pos) else np.zeros(0, int)
        object.__setattr__(self, "flat", flat)

    @property
    def dim(self):
        return self.grid.dim

    @property
    def h(self):
        return self.grid.h

    @property
    def n(self):
        return len(self.cells)

    @property
    def volume(self):
        return self.n * self.h**self.dim

    @property
    def centers(self):
        return (self.cells + 0.5) * self.h

    @property
    def ell(self):
        """Discrete ``sup_Omega x_1``: max inside center plus half a cell."""
        return float(self.centers[:, 0].max() + self.h / 2)

    def steiner(self, axis=0):
        """Exact Steiner symmetry check of the mask in ``x_axis`` on cell centers.

        Every line parallel to the axis must meet the mask in a run of cells
        symmetric about the plane ``x_axis = 0``.
        """
        ins = np.moveaxis(self.inside, axis, 0)
        lo = self.grid.lo[axis]
        n = ins.shape[0]
        idx = np.arange(lo, lo + n)
        rows = ins.reshape(n, -1)
        for col in rows.T:
            if not col.any():
                continue
            ms = idx[col]
            a, b = ms.min(), ms.max()
            if a != -b - 1 or len(ms) != b - a + 1:
                return False
        return True

    @property
    def steiner_ok(self):
        return self.steiner(0)

    def hash(self):
        sha = hashlib.sha256()
        sha.update(repr(self.grid.key()).encode())
        sha.update(np.packbits(self.inside).tobytes())
        return sha.hexdigest()[:16]

    def index_of(self):
        """Map from grid position to row index in ``cells`` (``-1`` outside)."""
        out = np.full(self.grid.shape, -1, dtype=np.int64)
        out[tuple((self.cells - np.asarray(self.grid.lo)).T)] = np.arange(self.n)
        return out

    def submask(self, select):
        """Mask of the inside cells with ``select`` true (grid-shaped bool array)."""
        return DomainMask(self.grid, self.inside & np.asarray(select, dtype=bool))

    def same(self, other):
        return self is other or (
            self.grid.key() == other.grid.key() and np.array_equal(self.inside, other.inside)
        )


@dataclass(frozen=True, eq=False)
class GridField:
    """Real values on every cell of a grid box, zero beyond it."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != tuple(self.grid.shape):
            raise DomainError("field shape does not match grid")
        object.__setattr__(self, "values", vals)

    def __add__(self, other):
        return GridField(self.grid, self.values + other.values)

    def __sub__(self, other):
        return GridField(self.grid, self.values - other.values)

    def __neg__(self):
        return GridField(self.grid, -self.values)

    def restrict(self, mask):
        return CellField(mask, self.values[mask.inside])


@dataclass(frozen=True, eq=False)
class CellField:
    """Values on the inside cells of a mask (order of ``mask.cells``), zero elsewhere."""

    mask: DomainMask
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.mask.n,):
            raise DomainError(f"expected {self.mask.n} values, got shape {vals.shape}")
        object.__setattr__(self, "values", vals)

    def to_grid(self):
        vals = np.zeros(self.mask.grid.shape)
        vals[self.mask.inside] = self.values
        return GridField(self.mask.grid, vals)

    def at(self, point):
        """Value at an arbitrary point (zero outside the domain)."""
        g = self.mask.grid
        m = np.floor(np.asarray(point, dtype=float) / g.h).astype(int) - np.asarray(g.lo)
        if np.any(m < 0) or np.any(m >= np.asarray(g.shape)):
            return 0.0
        return float(self.to_grid().values[tuple(m)])


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Domain:
    """Open set given by a vectorized membership predicate and a bounding box."""

    dim: int
    predicate: Callable[[np.ndarray], np.ndarray]
    lower: tuple
    upper: tuple
    description: dict = field(default_factory=dict)

    def __call__(self, x):
        return np.asarray(self.predicate(np.asarray(x, dtype=float)), dtype=bool)


def interval(a, b):
    if not a < b:
        raise DomainError("empty interval")
    return Domain(1, lambda x: (x[..., 0] > a) & (x[..., 0] < b), (a,), (b,),
                  {"shape": "interval", "lower": [a], "upper": [b]})


def box(lower, upper):
    lower = tuple(float(v) for v in lower)
    upper = tuple(float(v) for v in upper)
    if len(lower) != len(upper) or any(l >= u for l, u in zip(lower, upper)):
        raise DomainError("invalid box bounds")
    lo, hi = np.asarray(lower), np.asarray(upper)
    return Domain(len(lower), lambda x: np.all((x > lo) & (x < hi), axis=-1), lower, upper,
                  {"shape": "box", "lower": list(lower), "upper": list(upper)})


def ball_p(center, radius, p=2.0):
    center = tuple(float(v) for v in center)
    c = np.asarray(center)
    if not radius > 0:
        raise DomainError("radius must be positive")

    def pred(x):
        d = np.abs(x - c)
        if p == 1:
            r = d.sum(-1)
        elif p == 2:
            r = np.sqrt((d * d).sum(-1))
        else:
            r = (d**p).sum(-1) ** (1.0 / p)
        return r < radius

    return Domain(len(center), pred, tuple(c - radius), tuple(c + radius),
                  {"shape": "ball_p", "center": list(center), "radius": radius, "p": p})


def union(*parts):
    if not parts:
        raise DomainError("empty union")
    dims = {d.dim for d in parts}
    if len(dims) != 1:
        raise DomainError("union of domains with different dimensions")
    lower = tuple(np.min([d.lower for d in parts], axis=0))
    upper = tuple(np.max([d.upper for d in parts], axis=0))

    def pred(x):
        out = np.zeros(x.shape[:-1], dtype=bool)
        for d in parts:
            out |= d(x)
        return out

    return Domain(parts[0].dim, pred, lower, upper,
                  {"shape": "union", "parts": [d.description for d in parts]})


def domain_from_spec(block):
    """Domain from a config mapping with ``shape`` and its parameters."""
    shape = block["shape"]
    if shape == "interval":
        return interval(*block["bounds"]) if "bounds" in block else interval(block["lower"][0], block["upper"][0])
    if shape == "box":
        return box(block["lower"], block["upper"])
    if shape == "ball_p":
        return ball_p(block["center"], block["radius"], block.get("p", 2.0))
    if shape == "union":
        return union(*(domain_from_spec(part) for part in block["parts"]))
    raise ConfigurationError(f"unknown domain shape {shape!r}")


def grid_for_domain(domain, h, padding=8, reflect_room=True):
    """Grid box holding the domain, ``padding`` exterior layers and all its x_1-reflections.

    With ``reflect_room`` the box is widened in ``x_1`` by the domain's
    ``x_1``-width on both sides, so ``Q_lambda(Omega)`` stays inside for every
    plane meeting the domain.
    """
    lo, hi = [], []
    for axis in range(domain.dim):
        a, b = domain.lower[axis], domain.upper[axis]
        extra = (b - a) if (reflect_room and axis == 0) else 0.0
        lo.append(math.floor((a - extra) / h + 1e-9) - padding)
        hi.append(math.ceil((b + extra) / h - 1e-9) + padding)
    shape = tuple(u - l for l, u in zip(lo, hi))
    return Grid(domain.dim, float(h), tuple(lo), shape, padding)


def rasterize(predicate, grid):
    """Cells whose centers satisfy ``predicate`` (vectorized over centers)."""
    centers = grid.centers()
    inside = np.asarray(predicate(centers.reshape(-1, grid.dim)), dtype=bool).reshape(grid.shape)
    if not inside.any():
        raise DomainError("empty mask: no cell center lies in the domain")
    pad = grid.padding
    if pad > 0:
        core = np.zeros(grid.shape, dtype=bool)
        core[tuple(slice(pad, n - pad) for n in grid.shape)] = True
        if np.any(inside & ~core):
            raise ConfigurationError("domain reaches the padding layers; enlarge the bounding box")
    return DomainMask(grid, inside)


def mask_from_domain(domain, h, padding=8):
    return rasterize(domain, grid_for_domain(domain, h, padding))


# ---------------------------------------------------------------------------
# reflections
# ---------------------------------------------------------------------------


def snap_index(h, lam):
    """Integer ``t`` with ``t h / 2`` the nearest half-step to ``lam`` (ties away from zero)."""
    return _round_half_away(2.0 * lam / h)


def snap_lambda(grid, lam):
    """Nearest element of ``(h/2) Z``; reflections at snapped planes permute cells."""
    h = grid.h if isinstance(grid, Grid) else float(grid)
    return snap_index(h, lam) * h / 2.0


def _as_grid_field(u):
    if isinstance(u, CellField):
        return u.to_grid()
    if isinstance(u, GridField):
        return u
    raise TypeError("expected a CellField or GridField")


def reflect_field(u, lam, axis=0):
    """``u o Q_lambda`` as a field on the full grid box.

    ``Q_lambda`` reflects coordinate ``axis`` at the plane through ``lam``;
    ``lam`` is snapped first.  Raises when the reflected support leaves the box.
    """
    g = _as_grid_field(u)
    grid = g.grid
    t = snap_index(grid.h, lam)
    n = grid.shape[axis]
    lo = grid.lo[axis]
    # new position i holds old position j = t - 1 - 2 lo - i
    shift = t - 1 - 2 * lo
    src = np.moveaxis(g.values, axis, 0)
    nz = np.flatnonzero(np.any(src.reshape(n, -1) != 0, axis=1))
    if len(nz):
        images = shift - nz
        if images.min() < 0 or images.max() >= n:
            raise ConfigurationError("reflected support leaves the grid box; increase padding")
    out = np.zeros_like(src)
    i = np.arange(n)
    j = shift - i
    ok = (j >= 0) & (j < n)
    out[i[ok]] = src[j[ok]]
    return GridField(grid, np.moveaxis(out, 0, axis))


def half_cells(grid, lam, axis=0):
    """Grid-shaped boolean array of cells in ``H_lambda``.

    ``H_lambda = {x_axis > lambda}`` for ``lambda >= 0`` and ``{x_axis < lambda}``
    otherwise.
    """
    t = snap_index(grid.h, lam)
    m = grid.indices()[..., axis]
    if t >= 0:
        return 2 * m + 1 > t
    return 2 * m + 1 < t


def interior_proxy(select):
    """Cells whose full ``3^N`` neighbourhood lies in ``select``."""
    select = np.asarray(select, dtype=bool)
    structure = np.ones((3,) * select.ndim, dtype=bool)
    return ndimage.binary_erosion(select, structure=structure, border_value=0)


def components(select):
    """Connected components (face-adjacent) of a boolean grid array."""
    labels, count = ndimage.label(np.asarray(select, dtype=bool))
    return [labels == k for k in range(1, count + 1)]
