"""Uniform cell-centered grids on a box, nodal fields, and discrete norms.

The spatial domain is an axis-aligned box; nodes sit at cell centers so the
cells tile the box exactly and every integral over the box becomes a plain
weighted sum with weight h^N.  Fields are nodal value vectors and represent
functions that vanish identically outside the box (homogeneous exterior
condition); no ghost values are ever stored or read.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class GridError(ValueError):
    """Raised for inconsistent grid construction or field/domain mismatches."""


@dataclass(frozen=True)
class GridDomain:
    """Cell-centered uniform grid over the box prod_i (o_i, o_i + extent_i).

    The spacing h is required to be identical across axes (node_count * h
    equals the extent exactly on each axis).  ``coords`` has shape (M, N) with
    M the total node count; all nodes lie strictly inside the box.  The
    origins default to zero; translating a box leaves every pairwise kernel
    unchanged (they depend only on node distances).
    """

    extents: tuple[float, ...]
    counts: tuple[int, ...]
    origins: tuple[float, ...] = ()
    coords: np.ndarray = field(compare=False, repr=False, default=None)
    h: float = field(compare=False, default=0.0)

    def __post_init__(self):
        if len(self.extents) != len(self.counts) or not self.extents:
            raise GridError("extents and counts must be non-empty and of equal length")
        if len(self.extents) > 2:
            raise GridError("only N = 1 or 2 supported")
        if not self.origins:
            object.__setattr__(self, "origins", (0.0,) * len(self.extents))
        if len(self.origins) != len(self.extents):
            raise GridError("origins must match extents")
        if any(e <= 0 for e in self.extents):
            raise GridError(f"extents must be positive, got {self.extents}")
        if any(c < 2 for c in self.counts):
            raise GridError(f"need at least 2 nodes per axis, got {self.counts}")
        spacings = [e / c for e, c in zip(self.extents, self.counts)]
        h = spacings[0]
        if any(abs(sp - h) > 1e-12 * h for sp in spacings[1:]):
            raise GridError(f"non-uniform spacing request: per-axis h = {spacings}")
        axes = [o + (np.arange(c) + 0.5) * h for o, c in zip(self.origins, self.counts)]
        if len(axes) == 1:
            coords = axes[0][:, None]
        else:
            X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
            coords = np.column_stack([X.ravel(), Y.ravel()])
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "h", h)

    @property
    def ndim(self) -> int:
        return len(self.extents)

    @property
    def node_count(self) -> int:
        return self.coords.shape[0]

    @property
    def cell_measure(self) -> float:
        """Quadrature weight of one cell, h^N."""
        return self.h ** self.ndim

    @property
    def box_measure(self) -> float:
        """Measure of the whole box (exact: node_count * cell_measure)."""
        return float(np.prod(self.extents))


@dataclass(frozen=True)
class GridField:
    """One real value per node of a GridDomain; zero outside the box."""

    domain: GridDomain
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.domain.node_count,):
            raise GridError(
                f"value count {vals.shape} does not match node count {self.domain.node_count}"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def scaled(self, factor: float) -> "GridField":
        return GridField(self.domain, factor * self.values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class FieldPair:
    """A pair (u, v) of fields on one shared domain."""

    u: GridField
    v: GridField

    def __post_init__(self):
        if self.u.domain != self.v.domain:
            raise GridError("field pair must share one domain")

    @property
    def domain(self) -> GridDomain:
        return self.u.domain

    def scaled(self, factor: float) -> "FieldPair":
        return FieldPair(self.u.scaled(factor), self.v.scaled(factor))


def build_grid(
    extents: Sequence[float] | float,
    counts: Sequence[int] | int,
    origins: Sequence[float] | float | None = None,
) -> GridDomain:
    """Build a uniform cell-centered grid; scalars are promoted to 1-D."""
    if np.isscalar(extents):
        extents = [float(extents)]
    if np.isscalar(counts):
        counts = [int(counts)]
    if origins is None:
        origins = ()
    elif np.isscalar(origins):
        origins = [float(origins)]
    return GridDomain(
        tuple(float(e) for e in extents),
        tuple(int(c) for c in counts),
        tuple(float(o) for o in origins),
    )


PRESETS = ("constant", "sine", "bump", "indicator")


def sample_field(
    grid: GridDomain,
    preset: str,
    amplitude: float = 1.0,
    subbox_lo: float = 0.25,
    subbox_hi: float = 0.75,
) -> GridField:
    """Evaluate ``amplitude * profile`` at the grid nodes.

    Presets: "constant"; "sine" (first homogeneous-boundary mode per axis);
    "bump" (smooth, compactly supported inside the box); "indicator"
    (characteristic function of the central sub-box scaled by the
    ``subbox_lo``/``subbox_hi`` fractions per axis).
    """
    x = grid.coords
    if preset == "constant":
        profile = np.ones(grid.node_count)
    elif preset == "sine":
        profile = np.ones(grid.node_count)
        for ax, (ori, ext) in enumerate(zip(grid.origins, grid.extents)):
            profile = profile * np.sin(np.pi * (x[:, ax] - ori) / ext)
    elif preset == "bump":
        rho2 = np.zeros(grid.node_count)
        for ax, (ori, ext) in enumerate(zip(grid.origins, grid.extents)):
            rho2 += ((x[:, ax] - ori - 0.5 * ext) / (0.5 * ext)) ** 2
        profile = np.zeros(grid.node_count)
        inside = rho2 < 1.0
        profile[inside] = np.exp(1.0 - 1.0 / (1.0 - rho2[inside]))
    elif preset == "indicator":
        profile = np.ones(grid.node_count)
        for ax, (ori, ext) in enumerate(zip(grid.origins, grid.extents)):
            xi = (x[:, ax] - ori) / ext
            profile = profile * ((xi >= subbox_lo) & (xi < subbox_hi))
    else:
        raise GridError(f"unknown preset {preset!r}; choose one of {PRESETS}")
    return GridField(grid, amplitude * profile)


def discrete_norm(u: GridField, r: float) -> float:
    """Discrete L^r norm (sum |u_i|^r h^N)^(1/r); max |u_i| for r = inf."""
    if np.isinf(r):
        return u.max_abs()
    if r < 1.0:
        raise GridError(f"norm exponent must satisfy r >= 1, got {r}")
    hN = u.domain.cell_measure
    return float(np.sum(np.abs(u.values) ** r) * hN) ** (1.0 / r)


def inner(u: GridField, w: GridField) -> float:
    """Discrete L^2 pairing sum u_i w_i h^N on a shared domain."""
    if u.domain != w.domain:
        raise GridError("inner product requires a shared domain")
    return float(np.sum(u.values * w.values) * u.domain.cell_measure)
