"""Lagrange finite elements for a model reaction-diffusion problem.

Solves -diffusion*Laplace(u) + reaction*u = f with homogeneous Dirichlet data
on meshed boxes in one and two dimensions, in P1 or P2 spaces.  The point is
not the solver, which is deliberately desk scale, but the error-estimate
chain around it: with continuity C and ellipticity alpha for the bilinear
form, the quasi-optimality constant C/alpha multiplies an interpolation
bound, and the three interpolation bounds (classical curvature-only, refined
slope+curvature, corrected) give three right-hand sides.  The corrected
chain carries half the classical constant, which buys a sqrt(2) coarser
mesh for the same tolerance; mesh_savings does that arithmetic.

C and alpha are inputs with documented defaults, reported rather than
certified: C = 1 + diffusion, and alpha the better of min(diffusion,
reaction) and diffusion/(1 + poincare^2).  Pass explicit values when the
defaults are too loose, e.g. for reaction much larger than diffusion.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import cg

from .fields import ScalarField
from .quadrature import simplex_rule
from .simplex import global_interp

__all__ = [
    "SolverError",
    "EllipticProblem",
    "FemSolution",
    "EstimateReport",
    "poincare_constant",
    "assemble_and_solve",
    "l2_norm_error",
    "h1_seminorm_error",
    "cea_gap",
    "estimate_report",
    "mesh_savings",
    "sine_problem",
]

DENSE_DOF_LIMIT = 2000       # dense LU below, conjugate gradient above
RESIDUAL_RTOL = 1e-10        # relative residual accepted from either solver


class SolverError(RuntimeError):
    """The discrete system could not be solved to tolerance."""


def poincare_constant(bounds):
    """Poincare constant of a box with zero boundary values.

    For the box with side lengths L_i the first Dirichlet eigenvalue of the
    Laplacian is pi^2 sum(1/L_i^2), and the constant in |v| <= c |grad v|
    is its inverse square root.
    """
    bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
    lengths = bounds[:, 1] - bounds[:, 0]
    if np.any(lengths <= 0):
        raise ValueError("box bounds must satisfy lo < hi on every axis")
    return 1.0 / (math.pi * math.sqrt(float(np.sum(1.0 / lengths**2))))


class EllipticProblem:
    """Model problem -diffusion*Laplace(u) + reaction*u = f, u = 0 on the boundary.

    box gives the domain bounds used for the default ellipticity constant;
    it defaults to the unit box.  exact_solution, when present, marks a
    manufactured problem and enables the error reports.
    """

    def __init__(
        self,
        dim,
        rhs,
        diffusion=1.0,
        reaction=0.0,
        exact_solution=None,
        box=None,
        continuity=None,
        ellipticity=None,
    ):
        if dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {dim}")
        if diffusion <= 0:
            raise ValueError(f"diffusion must be positive, got {diffusion}")
        if reaction < 0:
            raise ValueError(f"reaction must be nonnegative, got {reaction}")
        self.dim = dim
        self.rhs = rhs
        self.diffusion = float(diffusion)
        self.reaction = float(reaction)
        self.exact_solution = exact_solution
        if box is None:
            box = [(0.0, 1.0)] * dim
        self.box = np.atleast_2d(np.asarray(box, dtype=float))
        self.poincare = poincare_constant(self.box)

        if continuity is None:
            continuity = 1.0 + self.diffusion
        if ellipticity is None:
            ellipticity = max(
                self.diffusion / (1.0 + self.poincare**2),
                min(self.diffusion, self.reaction),
            )
        self.continuity = float(continuity)
        self.ellipticity = float(ellipticity)
        if self.ellipticity <= 0:
            raise ValueError("ellipticity constant must be positive")
        if self.continuity < self.ellipticity:
            raise ValueError(
                f"continuity {self.continuity} below ellipticity {self.ellipticity}"
            )

    @property
    def stability_factor(self):
        """Quasi-optimality factor C/alpha in front of interpolation bounds."""
        return self.continuity / self.ellipticity


# ------------------------------------------------------- Lagrange bases


def _edge_pairs(dim):
    return list(itertools.combinations(range(dim + 1), 2))


def _basis(space, dim, bary):
    """Shape values and barycentric derivatives at quadrature points.

    Returns N of shape (Q, nloc) and D of shape (Q, nloc, dim+1) with
    D[q, l, i] = d(shape_l)/d(lambda_i); physical gradients follow by
    composing with the constant barycentric gradients of each element.
    """
    bary = np.asarray(bary, dtype=float)
    nq, nv = bary.shape
    if space == "P1":
        N = bary.copy()
        D = np.broadcast_to(np.eye(nv), (nq, nv, nv)).copy()
        return N, D
    pairs = _edge_pairs(dim)
    nloc = nv + len(pairs)
    N = np.empty((nq, nloc))
    D = np.zeros((nq, nloc, nv))
    N[:, :nv] = bary * (2.0 * bary - 1.0)
    for i in range(nv):
        D[:, i, i] = 4.0 * bary[:, i] - 1.0
    for e, (i, j) in enumerate(pairs):
        N[:, nv + e] = 4.0 * bary[:, i] * bary[:, j]
        D[:, nv + e, i] = 4.0 * bary[:, j]
        D[:, nv + e, j] = 4.0 * bary[:, i]
    return N, D


def _dof_tables(mesh, space):
    """Global DOF coordinates, element DOF indices, boundary DOF mask."""
    if space == "P1":
        return mesh.vertices, mesh.elements.copy(), mesh.boundary_vertex_mask()

    nv = len(mesh.vertices)
    pairs = _edge_pairs(mesh.dim)
    edges = {}
    elem_edges = np.empty((len(mesh.elements), len(pairs)), dtype=int)
    for k, elem in enumerate(mesh.elements):
        for e, (i, j) in enumerate(pairs):
            key = tuple(sorted((int(elem[i]), int(elem[j]))))
            elem_edges[k, e] = edges.setdefault(key, len(edges))
    mids = np.empty((len(edges), mesh.dim))
    for (i, j), idx in edges.items():
        mids[idx] = 0.5 * (mesh.vertices[i] + mesh.vertices[j])
    coords = np.vstack([mesh.vertices, mids])
    elem_dofs = np.hstack([mesh.elements, nv + elem_edges])

    bmask = np.zeros(nv + len(edges), dtype=bool)
    bmask[:nv] = mesh.boundary_vertex_mask()
    for face, owners in mesh.face_counts().items():
        if len(owners) == 1 and face in edges:
            bmask[nv + edges[face]] = True
    return coords, elem_dofs, bmask


class FemSolution:
    """Galerkin solution with its measured errors against the exact field.

    l2_error and interp_l2_error are NaN when no manufactured solution is
    attached; interp_l2_error compares the exact field with its plain
    vertex interpolant for P1 and the gradient-corrected one for P2.
    """

    def __init__(self, space, mesh, dof_values, elem_dofs, dof_coords, problem):
        self.space = space
        self.mesh = mesh
        self.dof_values = dof_values
        self.elem_dofs = elem_dofs
        self.dof_coords = dof_coords
        self.problem = problem
        self.l2_error = math.nan
        self.interp_l2_error = math.nan
        exact = problem.exact_solution
        if exact is not None:
            self.l2_error = l2_norm_error(mesh, self, exact)
            interp = global_interp(mesh, exact, corrected=(space == "P2"))
            self.interp_l2_error = l2_norm_error(mesh, interp, exact)

    def eval_on_element(self, k, bary):
        N, _ = _basis(self.space, self.mesh.dim, np.asarray(bary, dtype=float))
        return N @ self.dof_values[self.elem_dofs[k]]

    def grad_on_element(self, k, bary):
        _, D = _basis(self.space, self.mesh.dim, np.asarray(bary, dtype=float))
        G = np.einsum("qlb,bn->qln", D, self.mesh.simplices[k].barycentric_gradients)
        return np.einsum("qln,l->qn", G, self.dof_values[self.elem_dofs[k]])

    def __call__(self, point):
        k, lam = self.mesh.locate(point)
        return float(self.eval_on_element(k, lam.reshape(1, -1))[0])


def assemble_and_solve(problem, mesh, space="P1"):
    """Assemble and solve the discrete system; checks the relative residual.

    Dirichlet DOFs are found from the mesh topology and eliminated.  Dense
    LU handles systems up to DENSE_DOF_LIMIT unknowns, conjugate gradient
    the rest; either way the solve must reach RESIDUAL_RTOL or SolverError
    is raised rather than returning a silently bad solution.
    """
    space = str(space).upper()
    if space not in ("P1", "P2"):
        raise ValueError(f"space must be 'P1' or 'P2', got {space!r}")
    if mesh.dim != problem.dim:
        raise ValueError(f"mesh dim {mesh.dim} does not match problem dim {problem.dim}")
    mesh.check_conforming()

    coords, elem_dofs, bmask = _dof_tables(mesh, space)
    ndof = len(coords)
    free = ~bmask
    if not bmask.any() and problem.reaction == 0.0:
        raise SolverError("singular system: zero reaction and no boundary constraints")

    bary, w = simplex_rule(mesh.dim)
    verts = mesh.vertices[mesh.elements]
    vols = np.array([s.volume for s in mesh.simplices])
    G0 = np.stack([s.barycentric_gradients for s in mesh.simplices])
    N, D = _basis(space, mesh.dim, bary)

    grads = np.einsum("qlb,mbn->mqln", D, G0)
    local = problem.diffusion * np.einsum("q,mqln,mqkn->mlk", w, grads, grads)
    if problem.reaction:
        mass_ref = np.einsum("q,ql,qk->lk", w, N, N)
        local = local + problem.reaction * mass_ref[None, :, :]
    local = local * vols[:, None, None]

    pts = np.einsum("qb,mbn->mqn", bary, verts).reshape(-1, mesh.dim)
    fvals = problem.rhs.value_at(pts).reshape(len(vols), len(w))
    load = vols[:, None] * np.einsum("mq,q,ql->ml", fvals, w, N)

    nloc = elem_dofs.shape[1]
    rows = np.repeat(elem_dofs, nloc, axis=1).ravel()
    cols = np.tile(elem_dofs, (1, nloc)).ravel()
    A = coo_matrix((local.ravel(), (rows, cols)), shape=(ndof, ndof)).tocsr()
    b = np.zeros(ndof)
    np.add.at(b, elem_dofs.ravel(), load.ravel())

    A_ff = A[free][:, free]
    b_f = b[free]
    x = np.zeros(ndof)
    if free.any():
        n_free = int(free.sum())
        if n_free <= DENSE_DOF_LIMIT:
            try:
                x_f = lu_solve(lu_factor(A_ff.toarray()), b_f)
            except np.linalg.LinAlgError as exc:
                raise SolverError(f"dense factorization failed: {exc}") from exc
        else:
            x_f, info = cg(A_ff, b_f, rtol=1e-12, maxiter=10 * n_free)
            if info != 0:
                raise SolverError(f"conjugate gradient stopped with info={info}")
        resid = np.linalg.norm(A_ff @ x_f - b_f)
        scale = max(np.linalg.norm(b_f), np.linalg.norm(x_f), 1e-300)
        if not np.isfinite(x_f).all() or resid > RESIDUAL_RTOL * scale:
            raise SolverError(
                f"solver residual {resid:.3e} exceeds {RESIDUAL_RTOL:.0e} * {scale:.3e}"
            )
        x[free] = x_f
    return FemSolution(space, mesh, x, elem_dofs, coords, problem)


# ------------------------------------------------------------- L2 errors


def _element_values(approx, k, bary, pts):
    if hasattr(approx, "eval_on_element"):
        return np.asarray(approx.eval_on_element(k, bary), dtype=float)
    if isinstance(approx, ScalarField):
        return approx.value_at(pts)
    return np.array([float(approx(p)) for p in pts])


def l2_norm_error(mesh, approx, exact):
    """Elementwise Gauss quadrature of the squared mismatch, square-rooted.

    approx may be anything with eval_on_element(k, bary), a ScalarField, or
    a plain point callable; the rule is exact through degree 4, so P2-level
    integrands of polynomial fields carry no quadrature error.
    """
    bary, w = simplex_rule(mesh.dim)
    total = 0.0
    for k, s in enumerate(mesh.simplices):
        pts = bary @ s.vertices
        diff = exact.value_at(pts) - _element_values(approx, k, bary, pts)
        total += s.volume * float(w @ diff**2)
    return math.sqrt(max(total, 0.0))


def h1_seminorm_error(mesh, sol, exact):
    """Gradient mismatch in L2, a reported diagnostic with nothing asserted."""
    bary, w = simplex_rule(mesh.dim)
    total = 0.0
    for k, s in enumerate(mesh.simplices):
        pts = bary @ s.vertices
        diff = exact.grad_at(pts) - sol.grad_on_element(k, bary)
        total += s.volume * float(w @ np.sum(diff**2, axis=1))
    return math.sqrt(max(total, 0.0))


def cea_gap(sol, problem):
    """Measured quasi-optimality pair (lhs, rhs).

    lhs is |u - u_h| in L2; rhs is (C/alpha) times the measured L2 distance
    from u to its interpolant in the solution space, the chain a Galerkin
    solution can never beat by more than the constants allow.
    """
    if problem.exact_solution is None:
        raise ValueError("cea_gap needs a manufactured exact solution")
    return sol.l2_error, problem.stability_factor * sol.interp_l2_error


@dataclass(frozen=True)
class EstimateReport:
    """Measured errors next to the three a-priori right-hand sides."""

    h: float
    measured_solution_error: float
    measured_interp_error: float
    cea_rhs_classical: float
    cea_rhs_refined: float
    cea_rhs_corrected: float


def estimate_report(problem, mesh, space, d1_inf, d2_inf):
    """Solve and compare against the a-priori chains at mesh size h.

    d1_inf and d2_inf are the analytic sup norms of the exact solution's
    first and second derivatives over the domain; with sampled stand-ins
    the containment claims are only as good as the sampling.  The bounds
    all carry the stability factor C/alpha and sqrt of the domain measure:

        classical  (C/a) * d2/2 * h^2 * sqrt(mu)
        refined    (C/a) * (d1/2 * h + d2/4 * h^2) * sqrt(mu)
        corrected  (C/a) * d2/4 * h^2 * sqrt(mu)
    """
    if problem.exact_solution is None:
        raise ValueError("estimate_report needs a manufactured exact solution")
    if d1_inf < 0 or d2_inf < 0:
        raise ValueError("derivative sup norms must be nonnegative")
    sol = assemble_and_solve(problem, mesh, space)
    h = mesh.mesh_size
    sqrt_mu = math.sqrt(sum(s.volume for s in mesh.simplices))
    factor = problem.stability_factor
    return EstimateReport(
        h=h,
        measured_solution_error=sol.l2_error,
        measured_interp_error=sol.interp_l2_error,
        cea_rhs_classical=factor * (d2_inf / 2.0) * h**2 * sqrt_mu,
        cea_rhs_refined=factor * (d1_inf / 2.0 * h + d2_inf / 4.0 * h**2) * sqrt_mu,
        cea_rhs_corrected=factor * (d2_inf / 4.0) * h**2 * sqrt_mu,
    )


def mesh_savings(eps, d2_inf, C, alpha, dim):
    """Largest mesh sizes meeting a tolerance, classical versus corrected.

    Solving (C/alpha) * d2/2 * h^2 = eps and the corrected variant with the
    /4 constant gives h_corrected = sqrt(2) * h_classical for free, so a
    corrected build needs (1/sqrt(2))^dim as many nodes.
    """
    if eps <= 0 or d2_inf <= 0 or C <= 0 or alpha <= 0:
        raise ValueError("eps, d2_inf, C and alpha must all be positive")
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    h_classical = math.sqrt(2.0 * alpha * eps / (C * d2_inf))
    h_corrected = math.sqrt(4.0 * alpha * eps / (C * d2_inf))
    return {
        "h_classical": h_classical,
        "h_corrected": h_corrected,
        "node_factor": (1.0 / math.sqrt(2.0)) ** dim,
    }


def sine_problem(dim, diffusion=1.0, reaction=0.0):
    """Manufactured product-of-sines problem on the unit box.

    u = prod_i sin(pi x_i) satisfies -Laplace(u) = dim * pi^2 * u, so the
    right-hand side is (diffusion * dim * pi^2 + reaction) * u.  Derivative
    sup norms over the box are pi and pi^2 in both dimensions.
    """
    if dim == 1:
        u = lambda x: math.sin(math.pi * x[0])
        u_many = lambda pts: np.sin(math.pi * pts[:, 0])
        grad = lambda x: np.array([math.pi * math.cos(math.pi * x[0])])
        hess = lambda x: np.array([[-math.pi**2 * math.sin(math.pi * x[0])]])
    elif dim == 2:
        u = lambda x: math.sin(math.pi * x[0]) * math.sin(math.pi * x[1])
        u_many = lambda pts: np.sin(math.pi * pts[:, 0]) * np.sin(math.pi * pts[:, 1])
        grad = lambda x: math.pi * np.array(
            [
                math.cos(math.pi * x[0]) * math.sin(math.pi * x[1]),
                math.sin(math.pi * x[0]) * math.cos(math.pi * x[1]),
            ]
        )
        hess = lambda x: math.pi**2 * np.array(
            [
                [
                    -math.sin(math.pi * x[0]) * math.sin(math.pi * x[1]),
                    math.cos(math.pi * x[0]) * math.cos(math.pi * x[1]),
                ],
                [
                    math.cos(math.pi * x[0]) * math.cos(math.pi * x[1]),
                    -math.sin(math.pi * x[0]) * math.sin(math.pi * x[1]),
                ],
            ]
        )
    else:
        raise ValueError(f"dim must be 1 or 2, got {dim}")

    scale = diffusion * dim * math.pi**2 + reaction
    exact = ScalarField(dim, u, gradient=grad, hessian=hess, name=f"sine{dim}d",
                        value_many=u_many)
    rhs = ScalarField(
        dim,
        lambda x: scale * u(x),
        name=f"sine{dim}d rhs",
        value_many=lambda pts: scale * u_many(pts),
    )
    return EllipticProblem(
        dim, rhs, diffusion=diffusion, reaction=reaction, exact_solution=exact
    )
