"""Staggered rectilinear (Yee) grid: DOF layouts, the mutually adjoint curl
pair, discrete inner products, and the tangential-boundary (PEC) masking that
realizes the discrete analogue of the n x u = 0 test-function class.

Conventions
-----------
Cells are indexed (i, j, k) with i the fastest axis in file formats. Electric
degrees of freedom live on cell edges, magnetic ones on cell faces:

    ex[i, j, k] at ((i+1/2)dx, j dy, k dz)         shape (nx,   ny+1, nz+1)
    ey[i, j, k] at (i dx, (j+1/2)dy, k dz)         shape (nx+1, ny,   nz+1)
    ez[i, j, k] at (i dx, j dy, (k+1/2)dz)         shape (nx+1, ny+1, nz)
    hx[i, j, k] at (i dx, (j+1/2)dy, (k+1/2)dz)    shape (nx+1, ny,   nz)
    hy[i, j, k] at ((i+1/2)dx, j dy, (k+1/2)dz)    shape (nx,   ny+1, nz)
    hz[i, j, k] at ((i+1/2)dx, (j+1/2)dy, k dz)    shape (nx,   ny,   nz+1)

Tangential electric edges on the six boundary faces are masked (held at
exactly zero); `curl_h` zeroes its output on those same edges, which makes
the two curls exact transposes of each other in the discrete inner product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolationError

# Relative roundoff budget for the discrete membership criterion: a pair
# (e, h) is accepted when |inner(curl_e e, h) - inner(e, curl_h h)| stays
# below this factor times the defect scale.
V0_RELATIVE_TOL = 1e-13

_DETERMINISTIC = True


def set_deterministic(flag: bool) -> None:
    """Select the fixed-order reduction mode for inner products.

    When enabled (the default), reductions use numpy's pairwise summation in
    a fixed traversal order, so repeated runs produce bitwise-identical
    results. When disabled, BLAS dot products may be used instead.
    """
    global _DETERMINISTIC
    _DETERMINISTIC = bool(flag)


def deterministic_reductions() -> bool:
    return _DETERMINISTIC


def _dot(a: np.ndarray, b: np.ndarray) -> float:
    if _DETERMINISTIC:
        return float(np.sum(a * b))
    return float(a.ravel() @ b.ravel())


@dataclass(frozen=True)
class Grid:
    """Uniform rectilinear grid over [0, Lx] x [0, Ly] x [0, Lz]."""

    n: tuple[int, int, int]
    extent: tuple[float, float, float]
    spacing: tuple[float, float, float]

    @property
    def dv(self) -> float:
        dx, dy, dz = self.spacing
        return dx * dy * dz

    @property
    def edge_shapes(self) -> tuple[tuple[int, int, int], ...]:
        nx, ny, nz = self.n
        return ((nx, ny + 1, nz + 1), (nx + 1, ny, nz + 1), (nx + 1, ny + 1, nz))

    @property
    def face_shapes(self) -> tuple[tuple[int, int, int], ...]:
        nx, ny, nz = self.n
        return ((nx + 1, ny, nz), (nx, ny + 1, nz), (nx, ny, nz + 1))

    @property
    def cell_shape(self) -> tuple[int, int, int]:
        return self.n

    @property
    def node_shape(self) -> tuple[int, int, int]:
        nx, ny, nz = self.n
        return (nx + 1, ny + 1, nz + 1)

    @property
    def num_edge_dofs(self) -> int:
        return sum(int(np.prod(s)) for s in self.edge_shapes)

    @property
    def num_face_dofs(self) -> int:
        return sum(int(np.prod(s)) for s in self.face_shapes)

    def axis_coords(self, axis: int, staggered: bool) -> np.ndarray:
        """1D DOF coordinates along `axis`: cell centers if staggered,
        nodes otherwise."""
        d = self.spacing[axis]
        if staggered:
            return (np.arange(self.n[axis]) + 0.5) * d
        return np.arange(self.n[axis] + 1) * d

    def edge_coords(self, comp: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-axis 1D coordinates of the edge DOFs of component `comp`."""
        return tuple(self.axis_coords(ax, staggered=(ax == comp)) for ax in range(3))

    def face_coords(self, comp: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-axis 1D coordinates of the face DOFs of component `comp`."""
        return tuple(self.axis_coords(ax, staggered=(ax != comp)) for ax in range(3))


def build_grid(n: tuple[int, int, int], extent: tuple[float, float, float]) -> Grid:
    """Build a grid with ni cells and physical size Li along each axis."""
    n = tuple(int(v) for v in n)
    extent = tuple(float(v) for v in extent)
    if len(n) != 3 or len(extent) != 3:
        raise ConfigurationError("grid requires three cell counts and three extents")
    if any(v < 2 for v in n):
        raise ConfigurationError(f"grid needs at least 2 cells per axis, got n={n}")
    if any(v <= 0.0 for v in extent):
        raise ConfigurationError(f"grid extent must be positive, got extent={extent}")
    spacing = tuple(extent[i] / n[i] for i in range(3))
    return Grid(n=n, extent=extent, spacing=spacing)


class _Field3:
    """Three component arrays plus elementwise arithmetic."""

    __slots__ = ("x", "y", "z")

    def __init__(self, x: np.ndarray, y: np.ndarray, z: np.ndarray):
        self.x = np.asarray(x, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        self.z = np.asarray(z, dtype=np.float64)

    @property
    def components(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.x, self.y, self.z)

    def copy(self):
        return type(self)(self.x.copy(), self.y.copy(), self.z.copy())

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(c))) if c.size else 0.0
                   for c in self.components)

    def all_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(c))) for c in self.components)

    def _binary(self, other, op):
        if isinstance(other, _Field3):
            if type(other) is not type(self):
                raise ContractViolationError(
                    f"layout mismatch: {type(self).__name__} vs {type(other).__name__}")
            return type(self)(op(self.x, other.x), op(self.y, other.y),
                              op(self.z, other.z))
        return type(self)(op(self.x, other), op(self.y, other), op(self.z, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    def __rmul__(self, other):
        return self._binary(other, np.multiply)

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __neg__(self):
        return type(self)(-self.x, -self.y, -self.z)


class EdgeField(_Field3):
    """Electric-type field on the edge layout (V/m)."""

    @classmethod
    def zeros(cls, g: Grid) -> "EdgeField":
        return cls(*(np.zeros(s) for s in g.edge_shapes))


class FaceField(_Field3):
    """Magnetic-type field on the face layout (A/m)."""

    @classmethod
    def zeros(cls, g: Grid) -> "FaceField":
        return cls(*(np.zeros(s) for s in g.face_shapes))


def check_layout(f: _Field3, g: Grid) -> None:
    """Raise unless the component shapes match the grid's layout for f's type."""
    if isinstance(f, EdgeField):
        expected = g.edge_shapes
    elif isinstance(f, FaceField):
        expected = g.face_shapes
    else:
        raise ContractViolationError(f"not a grid field: {type(f).__name__}")
    shapes = tuple(c.shape for c in f.components)
    if shapes != expected:
        raise ContractViolationError(
            f"layout mismatch: {type(f).__name__} shapes {shapes} != {expected}")


def pack(f: _Field3) -> np.ndarray:
    """Flatten to one vector (x, then y, then z component, C order)."""
    return np.concatenate([c.ravel() for c in f.components])


def _unpack(vec: np.ndarray, shapes, cls):
    sizes = [int(np.prod(s)) for s in shapes]
    if vec.size != sum(sizes):
        raise ContractViolationError(
            f"packed vector of size {vec.size} does not match layout {shapes}")
    parts = np.split(np.asarray(vec, dtype=np.float64), np.cumsum(sizes)[:-1])
    return cls(*(p.reshape(s) for p, s in zip(parts, shapes)))


def unpack_edge(vec: np.ndarray, g: Grid) -> EdgeField:
    return _unpack(vec, g.edge_shapes, EdgeField)


def unpack_face(vec: np.ndarray, g: Grid) -> FaceField:
    return _unpack(vec, g.face_shapes, FaceField)


# ---------------------------------------------------------------------------
# PEC masking
# ---------------------------------------------------------------------------

def apply_pec_mask(e: EdgeField) -> EdgeField:
    """Zero all tangential edge entries on the six boundary faces, in place."""
    ex, ey, ez = e.components
    ex[:, 0, :] = 0.0
    ex[:, -1, :] = 0.0
    ex[:, :, 0] = 0.0
    ex[:, :, -1] = 0.0
    ey[0, :, :] = 0.0
    ey[-1, :, :] = 0.0
    ey[:, :, 0] = 0.0
    ey[:, :, -1] = 0.0
    ez[0, :, :] = 0.0
    ez[-1, :, :] = 0.0
    ez[:, 0, :] = 0.0
    ez[:, -1, :] = 0.0
    return e


def is_pec_conforming(e: EdgeField) -> bool:
    """True iff every tangential boundary entry is exactly zero."""
    ex, ey, ez = e.components
    return (
        not ex[:, 0, :].any() and not ex[:, -1, :].any()
        and not ex[:, :, 0].any() and not ex[:, :, -1].any()
        and not ey[0, :, :].any() and not ey[-1, :, :].any()
        and not ey[:, :, 0].any() and not ey[:, :, -1].any()
        and not ez[0, :, :].any() and not ez[-1, :, :].any()
        and not ez[:, 0, :].any() and not ez[:, -1, :].any()
    )


# ---------------------------------------------------------------------------
# Curl pair
# ---------------------------------------------------------------------------

def curl_e(e: EdgeField, g: Grid, *, check: bool = True) -> FaceField:
    """Circulation-per-area curl, edge layout -> face layout.

    Second-order centered stencil. Requires a PEC-conforming input unless
    `check` is disabled (diagnostics deliberately probe non-conforming data).
    """
    check_layout(e, g)
    if check and not is_pec_conforming(e):
        raise ContractViolationError(
            "curl_e requires a PEC-conforming edge field "
            "(nonzero tangential boundary entry found)")
    dx, dy, dz = g.spacing
    ex, ey, ez = e.components
    cx = (ez[:, 1:, :] - ez[:, :-1, :]) / dy - (ey[:, :, 1:] - ey[:, :, :-1]) / dz
    cy = (ex[:, :, 1:] - ex[:, :, :-1]) / dz - (ez[1:, :, :] - ez[:-1, :, :]) / dx
    cz = (ey[1:, :, :] - ey[:-1, :, :]) / dx - (ex[:, 1:, :] - ex[:, :-1, :]) / dy
    return FaceField(cx, cy, cz)


def curl_h(h: FaceField, g: Grid) -> EdgeField:
    """Adjoint curl, face layout -> edge layout.

    Output rows on masked (tangential boundary) edges are forced to zero, so
    that curl_h is the exact transpose of curl_e on the masked subspace.
    """
    check_layout(h, g)
    dx, dy, dz = g.spacing
    hx, hy, hz = h.components
    out = EdgeField.zeros(g)
    out.x[:, 1:-1, 1:-1] = (
        (hz[:, 1:, 1:-1] - hz[:, :-1, 1:-1]) / dy
        - (hy[:, 1:-1, 1:] - hy[:, 1:-1, :-1]) / dz)
    out.y[1:-1, :, 1:-1] = (
        (hx[1:-1, :, 1:] - hx[1:-1, :, :-1]) / dz
        - (hz[1:, :, 1:-1] - hz[:-1, :, 1:-1]) / dx)
    out.z[1:-1, 1:-1, :] = (
        (hy[1:, 1:-1, :] - hy[:-1, 1:-1, :]) / dx
        - (hx[1:-1, 1:, :] - hx[1:-1, :-1, :]) / dy)
    return out


# ---------------------------------------------------------------------------
# Inner products and the discrete membership criterion
# ---------------------------------------------------------------------------

def inner(a: _Field3, b: _Field3, g: Grid) -> float:
    """Discrete L2 product: sum of entrywise products times the cell volume."""
    if type(a) is not type(b):
        raise ContractViolationError(
            f"layout mismatch in inner product: {type(a).__name__} vs "
            f"{type(b).__name__}")
    check_layout(a, g)
    check_layout(b, g)
    acc = 0.0
    for ca, cb in zip(a.components, b.components):
        acc += _dot(ca, cb)
    return acc * g.dv


def norm(a: _Field3, g: Grid) -> float:
    return float(np.sqrt(inner(a, a, g)))


def adjointness_defect(e: EdgeField, h: FaceField, g: Grid) -> float:
    """inner(curl_e e, h) - inner(e, curl_h h).

    Zero to roundoff exactly when the integration-by-parts identity holds
    without boundary term, i.e. when e belongs to the discrete analogue of
    the tangentially vanishing test class.
    """
    return inner(curl_e(e, g, check=False), h, g) - inner(e, curl_h(h, g), g)


def adjointness_scale(e: EdgeField, h: FaceField, g: Grid) -> float:
    """Scale against which the adjointness defect is judged."""
    return (norm(e, g) * norm(curl_h(h, g), g)
            + norm(h, g) * norm(curl_e(e, g, check=False), g)
            + np.finfo(np.float64).tiny)


def satisfies_v0_criterion(e: EdgeField, h: FaceField, g: Grid) -> bool:
    """Discrete membership test for the no-boundary-term test class."""
    return abs(adjointness_defect(e, h, g)) <= V0_RELATIVE_TOL * adjointness_scale(e, h, g)


# ---------------------------------------------------------------------------
# Companion mimetic operators (exact-sequence tests and Gauss diagnostics)
# ---------------------------------------------------------------------------

def nodal_gradient(phi: np.ndarray, g: Grid) -> EdgeField:
    """Forward-difference gradient, nodal scalars -> edge layout.

    Not part of the solver surface; a nodal scalar vanishing on the boundary
    yields a PEC-conforming gradient, and curl_e of it is identically zero.
    """
    if phi.shape != g.node_shape:
        raise ContractViolationError(
            f"nodal scalar shape {phi.shape} != {g.node_shape}")
    dx, dy, dz = g.spacing
    gx = (phi[1:, :, :] - phi[:-1, :, :]) / dx
    gy = (phi[:, 1:, :] - phi[:, :-1, :]) / dy
    gz = (phi[:, :, 1:] - phi[:, :, :-1]) / dz
    return EdgeField(gx, gy, gz)


def cell_divergence(h: FaceField, g: Grid) -> np.ndarray:
    """Natural cell-centered divergence of a face field."""
    check_layout(h, g)
    dx, dy, dz = g.spacing
    hx, hy, hz = h.components
    return ((hx[1:, :, :] - hx[:-1, :, :]) / dx
            + (hy[:, 1:, :] - hy[:, :-1, :]) / dy
            + (hz[:, :, 1:] - hz[:, :, :-1]) / dz)


def nodal_divergence(u: EdgeField, g: Grid) -> np.ndarray:
    """Nodal divergence of an edge field on interior nodes (zero on the
    boundary), the negative adjoint of `nodal_gradient` on masked scalars."""
    check_layout(u, g)
    dx, dy, dz = g.spacing
    ux, uy, uz = u.components
    out = np.zeros(g.node_shape)
    out[1:-1, 1:-1, 1:-1] = (
        (ux[1:, 1:-1, 1:-1] - ux[:-1, 1:-1, 1:-1]) / dx
        + (uy[1:-1, 1:, 1:-1] - uy[1:-1, :-1, 1:-1]) / dy
        + (uz[1:-1, 1:-1, 1:] - uz[1:-1, 1:-1, :-1]) / dz)
    return out
