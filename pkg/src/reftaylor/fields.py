"""Scalar fields with first and second derivative access.

Everything downstream (expansions, interpolation operators, finite element
error studies) consumes functions through one interface: a value, a gradient
seen as the linear map h -> Df(x).(h), and a Hessian seen as the symmetric
bilinear map (h, k) -> D2f(x).(h, k).  Analytic derivative callables are used
when supplied; missing ones fall back to central differences, which is fine
for diagnostics but too coarse for certified bound checks, so the built-in
test fields all carry analytic derivatives.

Domains are axis-aligned boxes.  Because boxes are convex, a segment lies in
the domain as soon as its endpoints do; the expansion routines still check
every node they touch so errors can name the offending point.
"""

import numpy as np

__all__ = [
    "Box",
    "DomainError",
    "ScalarField",
    "spectral_norm",
    "sampled_derivative_norms",
    "gradient_consistency_error",
    "hessian_symmetry_error",
]


class DomainError(ValueError):
    """A point fell outside the domain an operation needs it in."""


class Box:
    """Axis-aligned box given by per-axis (lo, hi) bounds."""

    def __init__(self, bounds):
        bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
        if bounds.ndim != 2 or bounds.shape[1] != 2:
            raise ValueError("bounds must be a sequence of (lo, hi) pairs")
        if np.any(bounds[:, 0] >= bounds[:, 1]):
            raise ValueError(f"every lo must be < hi, got {bounds.tolist()}")
        self.lo = bounds[:, 0].copy()
        self.hi = bounds[:, 1].copy()
        self.lo.flags.writeable = False
        self.hi.flags.writeable = False

    @property
    def dim(self):
        return self.lo.size

    @property
    def widths(self):
        return self.hi - self.lo

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    def measure(self):
        return float(np.prod(self.widths))

    def contains(self, x, tol=1e-12):
        """Membership test with a tolerance relative to each side length."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.size != self.dim:
            raise ValueError(f"point has dim {x.size}, box has dim {self.dim}")
        slack = tol * np.maximum(1.0, self.widths)
        return bool(np.all(x >= self.lo - slack) and np.all(x <= self.hi + slack))

    def __repr__(self):
        pairs = ", ".join(f"[{lo:g}, {hi:g}]" for lo, hi in zip(self.lo, self.hi))
        return f"Box({pairs})"


class ScalarField:
    """A twice differentiable scalar function on a box domain.

    Parameters
    ----------
    dim : int
        Number of variables.
    value : callable
        Point (array of shape (dim,)) to float.
    gradient : callable, optional
        Point to array of partial derivatives, shape (dim,).  Defaults to
        central differences of `value`.
    hessian : callable, optional
        Point to symmetric (dim, dim) matrix.  Defaults to central
        differences of the gradient with step 1e-5 * (1 + |x|).
    domain : Box or bounds sequence, optional
        Defaults to the whole space.
    value_many, gradient_many : callable, optional
        Vectorised evaluators taking an (N, dim) array; used by the mesh and
        finite element code when present, emulated by a loop otherwise.
    """

    def __init__(self, dim, value, gradient=None, hessian=None, domain=None,
                 name="", value_many=None, gradient_many=None):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = int(dim)
        self.name = name
        self._value = value
        self._gradient = gradient
        self._hessian = hessian
        self._value_many = value_many
        self._gradient_many = gradient_many
        if domain is None:
            self.domain = None
        elif isinstance(domain, Box):
            self.domain = domain
        else:
            self.domain = Box(domain)
        if self.domain is not None and self.domain.dim != self.dim:
            raise ValueError("domain dimension does not match field dimension")

    def _point(self, x):
        p = np.atleast_1d(np.asarray(x, dtype=float))
        if p.size != self.dim:
            raise ValueError(f"point has dim {p.size}, field has dim {self.dim}")
        return p

    def contains(self, x, tol=1e-12):
        if self.domain is None:
            return True
        return self.domain.contains(self._point(x), tol=tol)

    def value(self, x):
        return float(self._value(self._point(x)))

    def grad(self, x):
        x = self._point(x)
        if self._gradient is not None:
            g = np.asarray(self._gradient(x), dtype=float).reshape(self.dim)
            return g
        return self._fd_gradient(x)

    def hess(self, x):
        x = self._point(x)
        if self._hessian is not None:
            h = np.asarray(self._hessian(x), dtype=float).reshape(self.dim, self.dim)
            return h
        return self._fd_hessian(x)

    def d(self, x, h):
        """Df(x).(h), the first derivative applied to direction h."""
        h = np.atleast_1d(np.asarray(h, dtype=float))
        return float(np.dot(self.grad(x), h))

    def d2(self, x, h, k=None):
        """D2f(x).(h, k), the second derivative as a bilinear form (k defaults to h)."""
        h = np.atleast_1d(np.asarray(h, dtype=float))
        k = h if k is None else np.atleast_1d(np.asarray(k, dtype=float))
        return float(h @ self.hess(x) @ k)

    def value_at(self, points):
        """Values at an (N, dim) array of points."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        if self._value_many is not None:
            return np.asarray(self._value_many(points), dtype=float).reshape(len(points))
        return np.array([self._value(p) for p in points], dtype=float)

    def grad_at(self, points):
        """Gradients at an (N, dim) array of points, shape (N, dim)."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        if self._gradient_many is not None:
            out = np.asarray(self._gradient_many(points), dtype=float)
            return out.reshape(len(points), self.dim)
        return np.array([self.grad(p) for p in points], dtype=float)

    def _fd_gradient(self, x):
        g = np.empty(self.dim)
        for i in range(self.dim):
            step = 1e-5 * (1.0 + abs(x[i]))
            e = np.zeros(self.dim)
            e[i] = step
            g[i] = (self._value(x + e) - self._value(x - e)) / (2.0 * step)
        return g

    def _fd_hessian(self, x):
        step = 1e-5 * (1.0 + float(np.linalg.norm(x)))
        h = np.empty((self.dim, self.dim))
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = step
            h[:, j] = (self.grad(x + e) - self.grad(x - e)) / (2.0 * step)
        # symmetrise: the bilinear form is symmetric by definition
        return 0.5 * (h + h.T)

    def __repr__(self):
        label = self.name or "<anonymous>"
        return f"ScalarField({label}, dim={self.dim})"


def spectral_norm(mat, iters=50, tol=1e-10):
    """2-norm of a square matrix by power iteration on mat.T @ mat.

    Uses the Rayleigh quotient, which converges twice as fast as the iterate
    itself and is squeezed between the top two eigenvalues, so near-tied
    spectra (the slow case for the eigenvector) still give accurate norms.
    An estimator, not a certified bound.
    """
    a = np.asarray(mat, dtype=float)
    b = a.T @ a
    v = np.ones(b.shape[0])
    v[0] += 0.5  # avoid starting orthogonal to the top eigenvector
    v /= np.linalg.norm(v)
    prev = -1.0
    for _ in range(iters):
        w = b @ v
        rho = float(v @ w)  # converges to the top eigenvalue of b = |a|^2
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        done = abs(rho - prev) <= tol * (1.0 + abs(rho))
        prev = rho
        if done:
            break
    return float(np.sqrt(max(prev, 0.0)))


def sampled_derivative_norms(field, points):
    """Max gradient 2-norm and Hessian 2-norm over sample points.

    A sampled stand-in for sup-norm bounds; not certified, callers that need
    guarantees must pass analytic norms instead.
    """
    points = np.asarray(points, dtype=float).reshape(-1, field.dim)
    if len(points) == 0:
        raise ValueError("need at least one sample point")
    d1 = max(float(np.linalg.norm(field.grad(p))) for p in points)
    d2 = max(spectral_norm(field.hess(p)) for p in points)
    return d1, d2


def gradient_consistency_error(field, x, h, step=1e-5):
    """|central difference - Df(x).(h)| for the directional derivative."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = np.atleast_1d(np.asarray(h, dtype=float))
    fd = (field.value(x + step * h) - field.value(x - step * h)) / (2.0 * step)
    return abs(fd - field.d(x, h))


def hessian_symmetry_error(field, x, h, k):
    """|D2f(x).(h,k) - D2f(x).(k,h)|, relative to the magnitude of the form."""
    a = field.d2(x, h, k)
    b = field.d2(x, k, h)
    return abs(a - b) / (1.0 + abs(a))
