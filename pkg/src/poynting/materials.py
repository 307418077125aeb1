"""Material tensor fields (permittivity, permeability, conductivity) with
admissibility validation, constitutive application, and the conduction /
impressed-current decomposition of the total current.

Tensors are stored as per-cell diagonal triples, shape (3, nx, ny, nz).
Full symmetric 3x3 input is accepted for parsing and validation but rejected
by the steppers: off-diagonal entries couple components stored at different
staggered locations, and any interpolation there would break the exact
operator symmetry that the machine-precision energy identity rests on.

Cell-to-DOF sampling rule (fixed): a DOF takes the arithmetic mean of the
values in all cells adjacent to it, clamped at the boundary. Edge DOFs
average up to four cells (the component's transverse neighbors), face DOFs
up to two (the neighbors along the face normal).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (AdmissibilityError, CoercivityError, ConfigurationError,
                     ContractViolationError, UnsupportedLayoutError)
from .mesh import EdgeField, FaceField, Grid, apply_pec_mask, check_layout

_TENSOR_NAMES = ("eps", "mu", "sigma")


@dataclass(frozen=True)
class CurrentSpec:
    """Impressed-current preset: a separable space envelope times a temporal
    profile. `constant` holds the envelope steady; `gaussian-pulse` modulates
    it with exp(-(t-t_center)^2 / (2 tau^2)), optionally times a sinusoidal
    carrier cos(2 pi freq (t - t_center))."""

    preset: str = "zero"
    amplitude: tuple[float, float, float] = (0.0, 0.0, 1.0)
    t_center: float = 0.0
    tau: float = 1.0
    freq: float = 0.0

    def __post_init__(self):
        if self.preset not in ("zero", "constant", "gaussian-pulse"):
            raise ConfigurationError(f"unknown current preset '{self.preset}'")
        if self.preset == "gaussian-pulse" and self.tau <= 0.0:
            raise ConfigurationError("gaussian-pulse needs tau > 0")


class CurrentSource:
    """Grid-bound evaluator for a CurrentSpec.

    The space envelope of each component c is amplitude[c] times the product
    of sin(pi x_a / L_a) over the three axes, sampled at that component's DOF
    coordinates; it vanishes on the boundary, so the source is PEC-conforming
    by construction.
    """

    def __init__(self, spec: CurrentSpec, g: Grid):
        self.spec = spec
        self.grid = g
        if spec.preset == "zero" or all(a == 0.0 for a in spec.amplitude):
            self._envelope = None
        else:
            env = EdgeField.zeros(g)
            for comp, arr in enumerate(env.components):
                cx, cy, cz = g.edge_coords(comp)
                sx = np.sin(np.pi * cx / g.extent[0])
                sy = np.sin(np.pi * cy / g.extent[1])
                sz = np.sin(np.pi * cz / g.extent[2])
                arr[...] = (spec.amplitude[comp]
                            * sx[:, None, None] * sy[None, :, None] * sz[None, None, :])
            self._envelope = apply_pec_mask(env)

    def temporal(self, t: float) -> float:
        s = self.spec
        if s.preset == "zero":
            return 0.0
        if s.preset == "constant":
            return 1.0
        arg = (t - s.t_center) / s.tau
        val = float(np.exp(-0.5 * arg * arg))
        if s.freq != 0.0:
            val *= float(np.cos(2.0 * np.pi * s.freq * (t - s.t_center)))
        return val

    def at(self, t: float) -> EdgeField:
        if self._envelope is None:
            return EdgeField.zeros(self.grid)
        return self._envelope * self.temporal(t)

    @property
    def is_zero(self) -> bool:
        return self._envelope is None


@dataclass
class MaterialSet:
    """Per-cell diagonal tensor triples plus the impressed-current spec."""

    eps: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    j1: CurrentSpec = field(default_factory=CurrentSpec)
    # Retained full 3x3 input, (nx, ny, nz, 3, 3); None for diagonal sets.
    full: dict | None = None

    @property
    def is_diagonal(self) -> bool:
        return self.full is None

    @classmethod
    def homogeneous(cls, g: Grid,
                    eps: tuple[float, float, float] = (1.0, 1.0, 1.0),
                    mu: tuple[float, float, float] = (1.0, 1.0, 1.0),
                    sigma: tuple[float, float, float] = (0.0, 0.0, 0.0),
                    j1: CurrentSpec | None = None) -> "MaterialSet":
        def expand(triple):
            out = np.empty((3,) + g.cell_shape)
            for c in range(3):
                out[c].fill(float(triple[c]))
            return out

        return cls(eps=expand(eps), mu=expand(mu), sigma=expand(sigma),
                   j1=j1 if j1 is not None else CurrentSpec())

    @classmethod
    def from_full_tensors(cls, g: Grid, eps: np.ndarray, mu: np.ndarray,
                          sigma: np.ndarray,
                          j1: CurrentSpec | None = None) -> "MaterialSet":
        """Accept per-cell symmetric 3x3 tensors, shape (nx, ny, nz, 3, 3).

        Sets with any nonzero off-diagonal entry are flagged; they validate
        but cannot be stepped.
        """
        full = {}
        diags = {}
        for name, arr in zip(_TENSOR_NAMES, (eps, mu, sigma)):
            arr = np.asarray(arr, dtype=np.float64)
            if arr.shape != g.cell_shape + (3, 3):
                raise ContractViolationError(
                    f"{name}: expected shape {g.cell_shape + (3, 3)}, got {arr.shape}")
            if not np.allclose(arr, np.swapaxes(arr, -1, -2), rtol=0.0, atol=0.0):
                raise AdmissibilityError(f"{name}: tensor field is not symmetric")
            diags[name] = np.moveaxis(np.diagonal(arr, axis1=-2, axis2=-1), -1, 0).copy()
            off = arr - _diag_embed(diags[name])
            if np.any(off != 0.0):
                full[name] = arr
        return cls(eps=diags["eps"], mu=diags["mu"], sigma=diags["sigma"],
                   j1=j1 if j1 is not None else CurrentSpec(),
                   full=full or None)


def _diag_embed(diag3: np.ndarray) -> np.ndarray:
    out = np.zeros(diag3.shape[1:] + (3, 3))
    for c in range(3):
        out[..., c, c] = diag3[c]
    return out


@dataclass(frozen=True)
class TensorStats:
    name: str
    min_entry: float
    max_entry: float


@dataclass(frozen=True)
class ValidationReport:
    mode: str
    eps: TensorStats
    mu: TensorStats
    sigma: TensorStats
    eps_star: float | None = None
    mu_star: float | None = None


def _check_shape(m: MaterialSet, g: Grid) -> None:
    want = (3,) + g.cell_shape
    for name in _TENSOR_NAMES:
        arr = getattr(m, name)
        if arr.shape != want:
            raise ContractViolationError(
                f"{name}: expected per-cell diagonal triples {want}, got {arr.shape}")


def _entry_field(m: MaterialSet, name: str) -> np.ndarray:
    """Eigenvalues per cell: (3, nx, ny, nz) for diagonal input, computed
    spectra for full input."""
    if m.full is not None and name in m.full:
        eig = np.linalg.eigvalsh(m.full[name])
        return np.moveaxis(eig, -1, 0)
    return getattr(m, name)


def _min_cell(entries: np.ndarray) -> tuple[int, int, int]:
    _, i, j, k = np.unravel_index(int(np.argmin(entries)), entries.shape)
    return (int(i), int(j), int(k))


def validate(m: MaterialSet, g: Grid, mode: str = "weak",
             eps_star: float | None = None,
             mu_star: float | None = None) -> ValidationReport:
    """Check the admissibility conditions; raise on violation.

    In `weak` mode all diagonal entries (eigenvalues, for full input) must be
    finite and non-negative. In `uniqueness` mode the permittivity and
    permeability must additionally stay above the caller-supplied positive
    lower bounds eps_star and mu_star.
    """
    if mode not in ("weak", "uniqueness"):
        raise ConfigurationError(f"unknown validation mode '{mode}'")
    _check_shape(m, g)
    stats = {}
    entries = {}
    for name in _TENSOR_NAMES:
        if not np.all(np.isfinite(getattr(m, name))):
            raise AdmissibilityError(f"{name}: non-finite entry")
        ent = _entry_field(m, name)
        st = TensorStats(name, float(ent.min()), float(ent.max()))
        if st.min_entry < 0.0:
            raise AdmissibilityError(
                f"{name}: negative entry {st.min_entry:g} at cell {_min_cell(ent)}")
        stats[name] = st
        entries[name] = ent
    if mode == "uniqueness":
        if eps_star is None or mu_star is None or eps_star <= 0.0 or mu_star <= 0.0:
            raise ConfigurationError(
                "uniqueness mode requires positive eps_star and mu_star")
        if stats["eps"].min_entry < eps_star:
            raise CoercivityError(
                f"eps: entry {stats['eps'].min_entry:g} at cell "
                f"{_min_cell(entries['eps'])} below eps_star={eps_star:g}")
        if stats["mu"].min_entry < mu_star:
            raise CoercivityError(
                f"mu: entry {stats['mu'].min_entry:g} at cell "
                f"{_min_cell(entries['mu'])} below mu_star={mu_star:g}")
    return ValidationReport(mode=mode, eps=stats["eps"], mu=stats["mu"],
                            sigma=stats["sigma"],
                            eps_star=eps_star, mu_star=mu_star)


# ---------------------------------------------------------------------------
# Cell-to-DOF sampling and constitutive application
# ---------------------------------------------------------------------------

def _to_nodes(arr: np.ndarray, axis: int) -> np.ndarray:
    """Average cell values onto the n+1 node planes of one axis, clamping so
    that boundary nodes copy the single adjacent cell."""
    lo = np.take(arr, [0], axis=axis)
    hi = np.take(arr, [-1], axis=axis)
    mid = 0.5 * (np.take(arr, range(0, arr.shape[axis] - 1), axis=axis)
                 + np.take(arr, range(1, arr.shape[axis]), axis=axis))
    return np.concatenate([lo, mid, hi], axis=axis)


def sample_on_edges(cell_triples: np.ndarray, g: Grid) -> EdgeField:
    """Sample per-cell diagonal triples at the edge DOF locations."""
    comps = []
    for c in range(3):
        v = cell_triples[c]
        for ax in range(3):
            if ax != c:
                v = _to_nodes(v, ax)
        comps.append(v)
    return EdgeField(*comps)


def sample_on_faces(cell_triples: np.ndarray, g: Grid) -> FaceField:
    """Sample per-cell diagonal triples at the face DOF locations."""
    comps = []
    for c in range(3):
        comps.append(_to_nodes(cell_triples[c], c))
    return FaceField(*comps)


def apply_tensor(t: np.ndarray, f: EdgeField | FaceField, g: Grid):
    """Apply a per-cell diagonal tensor field to a grid field.

    The tensor is sampled at the field's DOF locations (see module docstring
    for the fixed rule) and applied entrywise; the resulting operator is
    linear, self-adjoint, and non-negative for admissible tensors.
    """
    t = np.asarray(t, dtype=np.float64)
    if t.shape != (3,) + g.cell_shape:
        raise ContractViolationError(
            f"tensor triples of shape {(3,) + g.cell_shape} expected, got {t.shape}")
    check_layout(f, g)
    if isinstance(f, EdgeField):
        return sample_on_edges(t, g) * f
    return sample_on_faces(t, g) * f


@dataclass(frozen=True)
class SampledMaterials:
    """Material tensors pre-sampled at the DOF locations of one grid."""

    eps_edge: EdgeField
    sigma_edge: EdgeField
    mu_face: FaceField
    inv_mu_face: FaceField

    @classmethod
    def build(cls, m: MaterialSet, g: Grid) -> "SampledMaterials":
        if not m.is_diagonal:
            raise UnsupportedLayoutError(
                "unsupported layout: off-diagonal material tensors cannot be "
                "applied on the staggered grid")
        mu_face = sample_on_faces(m.mu, g)
        with np.errstate(divide="ignore"):
            inv = FaceField(*(1.0 / c for c in mu_face.components))
        return cls(eps_edge=sample_on_edges(m.eps, g),
                   sigma_edge=sample_on_edges(m.sigma, g),
                   mu_face=mu_face,
                   inv_mu_face=inv)

    def require_invertible(self) -> None:
        """Steppers divide by the sampled permittivity and permeability;
        both must be strictly positive at every DOF."""
        if min(float(c.min()) for c in self.eps_edge.components) <= 0.0:
            raise CoercivityError(
                "stepping requires strictly positive permittivity at every edge DOF")
        if min(float(c.min()) for c in self.mu_face.components) <= 0.0:
            raise CoercivityError(
                "stepping requires strictly positive permeability at every face DOF")


def ohm_current(m: MaterialSet, e: EdgeField, g: Grid, t: float,
                source: CurrentSource | None = None) -> EdgeField:
    """Total current j = sigma e + j1(t) on the edge layout."""
    if not m.is_diagonal:
        raise UnsupportedLayoutError(
            "unsupported layout: off-diagonal conductivity cannot be applied "
            "on the staggered grid")
    j = apply_tensor(m.sigma, e, g)
    src = source if source is not None else CurrentSource(m.j1, g)
    if not src.is_zero:
        j = j + src.at(t)
    return j


# ---------------------------------------------------------------------------
# File loading (per-cell triples, 9 columns, x-fastest cell order)
# ---------------------------------------------------------------------------

def load_material_file(path: str, g: Grid, j1: CurrentSpec | None = None) -> MaterialSet:
    """Load per-cell diagonal triples from a CSV or flat binary file.

    Layout: one row of 9 reals per cell (eps_x eps_y eps_z mu_x mu_y mu_z
    sigma_x sigma_y sigma_z), cells in row-major order with x fastest.
    Files ending in .csv or .txt are parsed as delimited text; anything else
    is read as little-endian float64.
    """
    nx, ny, nz = g.cell_shape
    ncells = nx * ny * nz
    ext = os.path.splitext(path)[1].lower()
    if ext in (".csv", ".txt"):
        data = np.loadtxt(path, delimiter=",", dtype=np.float64)
        data = np.atleast_2d(data)
    else:
        raw = np.fromfile(path, dtype="<f8")
        if raw.size != ncells * 9:
            raise ConfigurationError(
                f"material file {path}: expected {ncells * 9} values, got {raw.size}")
        data = raw.reshape(ncells, 9)
    if data.shape != (ncells, 9):
        raise ConfigurationError(
            f"material file {path}: expected {ncells} rows x 9 columns, "
            f"got {data.shape}")

    def to_cells(cols: np.ndarray) -> np.ndarray:
        # column-of-cells (x fastest) -> (3, nx, ny, nz)
        return cols.T.reshape(3, nz, ny, nx).transpose(0, 3, 2, 1).copy()

    return MaterialSet(eps=to_cells(data[:, 0:3]),
                       mu=to_cells(data[:, 3:6]),
                       sigma=to_cells(data[:, 6:9]),
                       j1=j1 if j1 is not None else CurrentSpec())
