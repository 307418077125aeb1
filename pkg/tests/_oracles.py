"""Independent oracles for the test suite: dense operator assembly by
explicit index walking, naive summation loops, and closed forms. These
deliberately avoid the production code paths (vectorized slicing) so that
agreement is evidence, not tautology."""

import numpy as np


def edge_shapes(n):
    nx, ny, nz = n
    return [(nx, ny + 1, nz + 1), (nx + 1, ny, nz + 1), (nx + 1, ny + 1, nz)]


def face_shapes(n):
    nx, ny, nz = n
    return [(nx + 1, ny, nz), (nx, ny + 1, nz), (nx, ny, nz + 1)]


class DofIndexer:
    """Flat index of (component, i, j, k), matching the packed layout."""

    def __init__(self, shapes):
        self.shapes = shapes
        sizes = [int(np.prod(s)) for s in shapes]
        self.offsets = [0, sizes[0], sizes[0] + sizes[1]]
        self.total = sum(sizes)

    def __call__(self, comp, i, j, k):
        return self.offsets[comp] + int(
            np.ravel_multi_index((i, j, k), self.shapes[comp]))


def edge_is_masked(n, comp, i, j, k):
    nx, ny, nz = n
    if comp == 0:
        return j in (0, ny) or k in (0, nz)
    if comp == 1:
        return i in (0, nx) or k in (0, nz)
    return i in (0, nx) or j in (0, ny)


def masked_edge_vector(n):
    eidx = DofIndexer(edge_shapes(n))
    out = np.zeros(eidx.total, dtype=bool)
    for comp, shape in enumerate(edge_shapes(n)):
        for i in range(shape[0]):
            for j in range(shape[1]):
                for k in range(shape[2]):
                    out[eidx(comp, i, j, k)] = edge_is_masked(n, comp, i, j, k)
    return out


def assemble_curl_e(n, spacing):
    """Dense circulation matrix, face rows by edge columns."""
    dx, dy, dz = spacing
    nx, ny, nz = n
    eidx = DofIndexer(edge_shapes(n))
    fidx = DofIndexer(face_shapes(n))
    C = np.zeros((fidx.total, eidx.total))
    # x faces: d ez / dy - d ey / dz
    for i in range(nx + 1):
        for j in range(ny):
            for k in range(nz):
                row = fidx(0, i, j, k)
                C[row, eidx(2, i, j + 1, k)] += 1.0 / dy
                C[row, eidx(2, i, j, k)] -= 1.0 / dy
                C[row, eidx(1, i, j, k + 1)] -= 1.0 / dz
                C[row, eidx(1, i, j, k)] += 1.0 / dz
    # y faces: d ex / dz - d ez / dx
    for i in range(nx):
        for j in range(ny + 1):
            for k in range(nz):
                row = fidx(1, i, j, k)
                C[row, eidx(0, i, j, k + 1)] += 1.0 / dz
                C[row, eidx(0, i, j, k)] -= 1.0 / dz
                C[row, eidx(2, i + 1, j, k)] -= 1.0 / dx
                C[row, eidx(2, i, j, k)] += 1.0 / dx
    # z faces: d ey / dx - d ex / dy
    for i in range(nx):
        for j in range(ny):
            for k in range(nz + 1):
                row = fidx(2, i, j, k)
                C[row, eidx(1, i + 1, j, k)] += 1.0 / dx
                C[row, eidx(1, i, j, k)] -= 1.0 / dx
                C[row, eidx(0, i, j + 1, k)] -= 1.0 / dy
                C[row, eidx(0, i, j, k)] += 1.0 / dy
    return C


def assemble_curl_h(n, spacing):
    """Dense adjoint curl: transpose of the circulation matrix with masked
    edge rows zeroed."""
    C = assemble_curl_e(n, spacing)
    out = C.T.copy()
    out[masked_edge_vector(n), :] = 0.0
    return out


def naive_inner(a_comps, b_comps, dv):
    """Triple-loop inner product."""
    total = 0.0
    for a, b in zip(a_comps, b_comps):
        for i in range(a.shape[0]):
            for j in range(a.shape[1]):
                for k in range(a.shape[2]):
                    total += a[i, j, k] * b[i, j, k]
    return total * dv


def _adjacent_cells(idx, ncells):
    return [c for c in (idx - 1, idx) if 0 <= c < ncells]


def naive_sample_edge(cell_triples, n):
    """Clamped mean over the transverse-adjacent cells of each edge DOF."""
    nx, ny, nz = n
    out = []
    for comp, shape in enumerate(edge_shapes(n)):
        arr = np.zeros(shape)
        for i in range(shape[0]):
            for j in range(shape[1]):
                for k in range(shape[2]):
                    ii = [i] if comp == 0 else _adjacent_cells(i, nx)
                    jj = [j] if comp == 1 else _adjacent_cells(j, ny)
                    kk = [k] if comp == 2 else _adjacent_cells(k, nz)
                    vals = [cell_triples[comp, a, b, c]
                            for a in ii for b in jj for c in kk]
                    arr[i, j, k] = sum(vals) / len(vals)
        out.append(arr)
    return out


def naive_sample_face(cell_triples, n):
    """Clamped mean over the two normal-adjacent cells of each face DOF."""
    nx, ny, nz = n
    out = []
    for comp, shape in enumerate(face_shapes(n)):
        arr = np.zeros(shape)
        for i in range(shape[0]):
            for j in range(shape[1]):
                for k in range(shape[2]):
                    ii = _adjacent_cells(i, nx) if comp == 0 else [i]
                    jj = _adjacent_cells(j, ny) if comp == 1 else [j]
                    kk = _adjacent_cells(k, nz) if comp == 2 else [k]
                    vals = [cell_triples[comp, a, b, c]
                            for a in ii for b in jj for c in kk]
                    arr[i, j, k] = sum(vals) / len(vals)
        out.append(arr)
    return out


def dense_midpoint_matrix(n, spacing, eps_edge_vec, sig_edge_vec,
                          inv_mu_face_vec, dt):
    """Eliminated midpoint system assembled from the dense curl pair."""
    C = assemble_curl_e(n, spacing)
    Ct = assemble_curl_h(n, spacing)
    mask = masked_edge_vector(n)
    K = Ct @ (inv_mu_face_vec[:, None] * C)
    A = np.diag((2.0 / dt) * eps_edge_vec + sig_edge_vec) + 0.5 * dt * K
    # Restrict to the masked subspace: identity on masked entries.
    A[mask, :] = 0.0
    A[:, mask] = 0.0
    A[mask, mask] = 1.0
    return A


def fine_grid_steklov_oracle(samples, dt, lam_subcells, refine=64):
    """Steklov mean via trapezoid on a refined grid.

    The fine step is dt/refine and lam = lam_subcells * (dt/refine), so every
    interpolant kink and both integration endpoints are fine-grid nodes and
    trapezoid is exact.
    """
    n = len(samples)
    h = dt / refine
    lam = lam_subcells * h
    fine_n = (n - 1) * refine + 1
    vals = np.zeros(fine_n)
    for m in range(fine_n):
        pos = m / refine
        k = min(int(np.floor(pos)), n - 2)
        s = pos - k
        vals[m] = samples[k] * (1.0 - s) + samples[k + 1] * s
    cum = np.zeros(fine_n)
    cum[1:] = np.cumsum(0.5 * h * (vals[1:] + vals[:-1]))
    out = np.zeros(n)
    for i in range(n):
        a = i * refine
        # zero extension: the running integral is constant past the horizon
        out[i] = (cum[min(a + lam_subcells, fine_n - 1)] - cum[a]) / lam
    return out, lam
