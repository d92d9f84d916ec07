"""Simplices, barycentric interpolation and conforming simplicial meshes.

The degree-1 interpolant on a simplex S with vertices A_i is
pi(v)(P) = sum_i lambda_i(P) v(A_i).  Its sup error admits two bounds,

    classical = |D2v|_inf / 2 * diam^2
    refined   = |Dv|_inf / 2 * diam + |D2v|_inf / 4 * diam^2,

and neither dominates the other, so the useful bound is their minimum.
Subtracting half the first-order mismatch at the vertices,

    pi*(v)(P) = pi(v)(P) - 1/2 sum_i lambda_i(P) Dv(A_i).(A_i - P),

cancels the averaged-derivative remainder: pi* reproduces quadratics exactly
and satisfies the curvature-only bound |D2v|_inf / 4 * diam^2, half the
classical constant.  On a shared mesh face only face-vertex terms survive in
the correction and vertex data is global, so the two-sided values agree in
exact arithmetic; face_jumps measures the actual floating-point disagreement
rather than assuming it away.
"""

import numpy as np

from .fields import DomainError, ScalarField
from .quadrature import simplex_rule

__all__ = [
    "GeometryError",
    "Simplex",
    "Triangulation",
    "InterpBounds",
    "barycentric",
    "pi_interp",
    "pi_star_interp",
    "interp_error_bounds",
    "global_interp",
    "MeshInterpolant",
    "uniform_mesh",
    "write_mesh_text",
    "read_mesh_text",
    "face_jumps",
]

INSIDE_TOL = 1e-12  # slack on lambda_i >= 0 for closed-simplex membership


class GeometryError(ValueError):
    """Degenerate or non-conforming geometry."""


class Simplex:
    """Nondegenerate n-simplex in R^n, n in {1, 2, 3}.

    vertices is an (n+1, n) array.  Degeneracy is measured against the scale
    of the simplex: the volume must exceed 1e-12 * diameter^n.
    """

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] + 1:
            raise GeometryError(f"need n+1 vertices in R^n, got shape {v.shape}")
        n = v.shape[1]
        if n not in (1, 2, 3):
            raise GeometryError(f"dim must be 1, 2 or 3, got {n}")
        self.vertices = v.copy()
        self.vertices.flags.writeable = False
        self.dim = n

        diffs = v[None, :, :] - v[:, None, :]
        self.diameter = float(np.sqrt((diffs**2).sum(axis=2).max()))
        edge = v[1:] - v[0]
        self.volume = float(abs(np.linalg.det(edge)) / np.prod(range(1, n + 1)))
        if self.diameter <= 0.0 or self.volume <= 1e-12 * self.diameter**n:
            raise GeometryError(
                f"degenerate simplex: volume {self.volume:.3e} vs "
                f"diameter^{n} {self.diameter**n:.3e}"
            )
        # rows of the inverse affine matrix give barycentric coordinates
        affine = np.vstack([np.ones(n + 1), v.T])
        self._bary_matrix = np.linalg.inv(affine)

    @property
    def centroid(self):
        return self.vertices.mean(axis=0)

    @property
    def barycentric_gradients(self):
        """Constant gradients of the barycentric coordinates, shape (n+1, n)."""
        return self._bary_matrix[:, 1:]

    def barycentric(self, point):
        point = np.atleast_1d(np.asarray(point, dtype=float))
        if point.size != self.dim:
            raise ValueError(f"point has dim {point.size}, simplex has {self.dim}")
        return self._bary_matrix @ np.concatenate([[1.0], point])

    def barycentric_many(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        ones = np.ones((len(points), 1))
        return np.hstack([ones, points]) @ self._bary_matrix.T

    def contains(self, point, tol=INSIDE_TOL):
        return bool(np.min(self.barycentric(point)) >= -tol)

    def random_points(self, rng, count):
        """Uniform samples inside the simplex (flat Dirichlet weights)."""
        w = rng.exponential(size=(count, self.dim + 1))
        w /= w.sum(axis=1, keepdims=True)
        return w @ self.vertices

    def __repr__(self):
        return f"Simplex(dim={self.dim}, diam={self.diameter:.3g})"


def barycentric(s, point):
    """Barycentric coordinates of a point: solve sum lambda_i A_i = P, sum = 1."""
    return s.barycentric(point)


def _inside_or_raise(s, point, tol=INSIDE_TOL):
    lam = s.barycentric(point)
    if np.min(lam) < -tol:
        raise DomainError(
            f"point {np.atleast_1d(point).tolist()} lies outside the element "
            f"(min barycentric coordinate {np.min(lam):.3e})"
        )
    return lam


def pi_interp(s, v, point):
    """Degree-1 interpolation sum_i lambda_i(P) v(A_i); exact for affine v."""
    lam = _inside_or_raise(s, point)
    vals = v.value_at(s.vertices)
    return float(lam @ vals)


def pi_star_interp(s, v, point):
    """Corrected interpolant: pi minus half the vertex-gradient mismatch.

    pi*(v)(P) = pi(v)(P) - 1/2 sum_i lambda_i(P) Dv(A_i).(A_i - P).
    Reproduces polynomials of degree <= 2 exactly.
    """
    lam = _inside_or_raise(s, point)
    point = np.atleast_1d(np.asarray(point, dtype=float))
    vals = v.value_at(s.vertices)
    grads = v.grad_at(s.vertices)
    correction = 0.5 * float(lam @ np.sum(grads * (s.vertices - point), axis=1))
    return float(lam @ vals) - correction


class InterpBounds:
    """The three sup-error bounds on one simplex, plus their minimum."""

    __slots__ = ("classical", "refined", "corrected", "combined")

    def __init__(self, classical, refined, corrected):
        self.classical = classical
        self.refined = refined
        self.corrected = corrected
        self.combined = min(classical, refined)

    def __repr__(self):
        return (
            f"InterpBounds(classical={self.classical:.3e}, refined={self.refined:.3e},"
            f" corrected={self.corrected:.3e}, combined={self.combined:.3e})"
        )


def interp_error_bounds(s, d1_inf, d2_inf):
    """Error bounds for pi (classical/refined/combined) and pi* (corrected).

    d1_inf and d2_inf bound the operator norms of Dv and D2v over the
    simplex; certified inputs give certified bounds.
    """
    if d1_inf < 0 or d2_inf < 0:
        raise ValueError("operator-norm bounds must be nonnegative")
    h = s.diameter
    return InterpBounds(
        classical=d2_inf / 2.0 * h**2,
        refined=d1_inf / 2.0 * h + d2_inf / 4.0 * h**2,
        corrected=d2_inf / 4.0 * h**2,
    )


# --------------------------------------------------------------- meshes


class Triangulation:
    """Conforming simplicial mesh: shared vertex table plus index tuples."""

    def __init__(self, vertices, elements):
        self.vertices = np.asarray(vertices, dtype=float)
        self.elements = np.asarray(elements, dtype=int)
        if self.vertices.ndim != 2:
            raise GeometryError("vertices must be an (N, n) array")
        self.dim = self.vertices.shape[1]
        if self.elements.ndim != 2 or self.elements.shape[1] != self.dim + 1:
            raise GeometryError(
                f"elements must be (M, {self.dim + 1}) vertex indices"
            )
        if self.elements.min(initial=0) < 0 or self.elements.max(initial=-1) >= len(self.vertices):
            raise GeometryError("element index out of range")
        self.simplices = [Simplex(self.vertices[e]) for e in self.elements]
        self.mesh_size = max(s.diameter for s in self.simplices)

    def __len__(self):
        return len(self.simplices)

    def face_counts(self):
        """Map from sorted (n-1)-face vertex tuples to adjacent element ids."""
        faces = {}
        for k, elem in enumerate(self.elements):
            for drop in range(self.dim + 1):
                face = tuple(sorted(np.delete(elem, drop)))
                faces.setdefault(face, []).append(k)
        return faces

    def check_conforming(self):
        """Every face must bound one element (boundary) or two (interior)."""
        for face, owners in self.face_counts().items():
            if len(owners) > 2:
                raise GeometryError(f"face {face} shared by {len(owners)} elements")

    def boundary_vertex_mask(self):
        """Vertices lying on a boundary face (a face owned by one element)."""
        mask = np.zeros(len(self.vertices), dtype=bool)
        for face, owners in self.face_counts().items():
            if len(owners) == 1:
                mask[list(face)] = True
        return mask

    def locate(self, point, tol=INSIDE_TOL):
        """Containing element of a point: brute-force scan, lowest index wins.

        Returns (element index, barycentric coordinates).
        """
        point = np.atleast_1d(np.asarray(point, dtype=float))
        for k, s in enumerate(self.simplices):
            lam = s.barycentric(point)
            if np.min(lam) >= -tol:
                return k, lam
        raise DomainError(f"point {point.tolist()} lies outside the mesh")


class MeshInterpolant:
    """Global piecewise interpolant pi_h or (with corrected=True) pi*_h.

    Vertex values, and gradients when corrected, are taken once at
    construction; evaluation is per element, so face points follow the
    point-location tie rule (lowest element index).
    """

    def __init__(self, mesh, v, corrected=False):
        self.mesh = mesh
        self.corrected = corrected
        self.vertex_values = v.value_at(mesh.vertices)
        self.vertex_grads = v.grad_at(mesh.vertices) if corrected else None

    def eval_on_element(self, k, bary):
        """Values at barycentric points of element k; bary is (Q, n+1)."""
        bary = np.asarray(bary, dtype=float)
        idx = self.mesh.elements[k]
        verts = self.mesh.vertices[idx]
        out = bary @ self.vertex_values[idx]
        if self.corrected:
            points = bary @ verts
            grads = self.vertex_grads[idx]
            # 1/2 sum_i lambda_i g_i . (A_i - P)
            dots = np.einsum("in,qn->qi", grads, -points) + (grads * verts).sum(axis=1)
            out = out - 0.5 * np.einsum("qi,qi->q", bary, dots)
        return out

    def __call__(self, point):
        k, lam = self.mesh.locate(point)
        return float(self.eval_on_element(k, lam.reshape(1, -1))[0])


def global_interp(mesh, v, corrected=False):
    """Interpolate a field over a whole mesh; see MeshInterpolant."""
    return MeshInterpolant(mesh, v, corrected=corrected)


def face_jumps(mesh, interp, samples_per_face=8, rng=None):
    """Largest inter-element disagreement across interior faces.

    Samples points on every interior face and evaluates the interpolant from
    both adjacent elements.  Reports the measured jump; roundoff-level output
    is the expected confirmation that the interpolant is continuous.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    worst = 0.0
    for face, owners in mesh.face_counts().items():
        if len(owners) != 2:
            continue
        corners = mesh.vertices[list(face)]
        w = rng.exponential(size=(samples_per_face, len(face)))
        w /= w.sum(axis=1, keepdims=True)
        points = w @ corners
        for p in points:
            vals = []
            for k in owners:
                lam = np.clip(mesh.simplices[k].barycentric(p), 0.0, None)
                lam /= lam.sum()
                vals.append(float(interp.eval_on_element(k, lam.reshape(1, -1))[0]))
            worst = max(worst, abs(vals[0] - vals[1]))
    return worst


def uniform_mesh(bounds, dim, subdivisions):
    """Uniform mesh of a box: intervals, squares split in 2, cubes in 6.

    `bounds` is a per-axis (lo, hi) sequence (a single pair is fine in 1D).
    The splits all use the same orientation, which keeps faces conforming;
    mesh_size equals the cell diagonal.
    """
    if dim not in (1, 2, 3):
        raise GeometryError(f"dim must be 1, 2 or 3, got {dim}")
    if subdivisions < 1:
        raise ValueError(f"subdivisions must be >= 1, got {subdivisions}")
    bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
    if bounds.shape != (dim, 2):
        raise ValueError(f"need {dim} (lo, hi) pairs, got shape {bounds.shape}")
    k = subdivisions
    axes = [np.linspace(lo, hi, k + 1) for lo, hi in bounds]

    if dim == 1:
        vertices = axes[0].reshape(-1, 1)
        elements = [(i, i + 1) for i in range(k)]
        return Triangulation(vertices, elements)

    if dim == 2:
        xs, ys = np.meshgrid(axes[0], axes[1], indexing="ij")
        vertices = np.column_stack([xs.ravel(), ys.ravel()])
        vid = lambda i, j: i * (k + 1) + j
        elements = []
        for i in range(k):
            for j in range(k):
                a, b = vid(i, j), vid(i + 1, j)
                c, d = vid(i + 1, j + 1), vid(i, j + 1)
                elements.append((a, b, c))  # lower-right triangle
                elements.append((a, c, d))  # upper-left triangle
        return Triangulation(vertices, elements)

    xs, ys, zs = np.meshgrid(axes[0], axes[1], axes[2], indexing="ij")
    vertices = np.column_stack([xs.ravel(), ys.ravel(), zs.ravel()])
    vid = lambda i, j, l: (i * (k + 1) + j) * (k + 1) + l
    # Kuhn split: one tetrahedron per monotone corner-to-corner path
    paths = [
        (0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0),
    ]
    elements = []
    for i in range(k):
        for j in range(k):
            for l in range(k):
                corner = np.array([i, j, l])
                for perm in paths:
                    cell = [corner.copy()]
                    for axis in perm:
                        nxt = cell[-1].copy()
                        nxt[axis] += 1
                        cell.append(nxt)
                    elements.append(tuple(vid(*c) for c in cell))
    return Triangulation(vertices, elements)


def write_mesh_text(mesh):
    """Plain-text mesh dump: 'v x [y [z]]' lines then 'e i0 .. in' lines."""
    lines = []
    for p in mesh.vertices:
        coords = " ".join(format(c, ".17g") for c in p)
        lines.append(f"v {coords}")
    for e in mesh.elements:
        lines.append("e " + " ".join(str(i) for i in e))
    return "\n".join(lines) + "\n"


def read_mesh_text(text):
    """Inverse of write_mesh_text."""
    vertices, elements = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tag, *rest = line.split()
        if tag == "v":
            vertices.append([float(c) for c in rest])
        elif tag == "e":
            elements.append([int(i) for i in rest])
        else:
            raise ValueError(f"line {lineno}: unknown record {tag!r}")
    if not vertices or not elements:
        raise ValueError("mesh text needs both vertex and element records")
    return Triangulation(np.array(vertices), np.array(elements))
