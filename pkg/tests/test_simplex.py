"""Simplex geometry, barycentric interpolation and uniform meshes."""

import math

import numpy as np
import pytest

from reftaylor.fields import DomainError, ScalarField
from reftaylor.simplex import (
    GeometryError,
    Simplex,
    Triangulation,
    barycentric,
    face_jumps,
    global_interp,
    interp_error_bounds,
    pi_interp,
    pi_star_interp,
    read_mesh_text,
    uniform_mesh,
    write_mesh_text,
)


def unit_triangle():
    return Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def quadratic_2d():
    return ScalarField(
        2,
        lambda x: 1 + 2 * x[0] - x[1] + 3 * x[0] * x[1] - x[0] ** 2,
        gradient=lambda x: np.array([2 + 3 * x[1] - 2 * x[0], -1 + 3 * x[0]]),
    )


def exp_sum(dim):
    return ScalarField(
        dim,
        lambda x: math.exp(np.sum(x)),
        gradient=lambda x: np.full(dim, math.exp(np.sum(x))),
    )


# ------------------------------------------------------------ geometry


def test_barycentric_centroid():
    lam = barycentric(unit_triangle(), [1 / 3, 1 / 3])
    np.testing.assert_allclose(lam, [1 / 3, 1 / 3, 1 / 3], atol=1e-14)


def test_barycentric_interior_point():
    lam = barycentric(unit_triangle(), [0.5, 0.25])
    np.testing.assert_allclose(lam, [0.25, 0.5, 0.25], atol=1e-14)


def test_barycentric_partition_of_unity():
    rng = np.random.default_rng(3)
    tri = Simplex(rng.normal(size=(4, 3)))
    for p in rng.normal(size=(20, 3)):
        lam = tri.barycentric(p)
        assert abs(lam.sum() - 1.0) <= 1e-12
        np.testing.assert_allclose(lam @ tri.vertices, p, atol=1e-12)


def test_barycentric_vertices_are_unit_rows():
    tri = unit_triangle()
    for i in range(3):
        lam = tri.barycentric(tri.vertices[i])
        want = np.zeros(3)
        want[i] = 1.0
        np.testing.assert_allclose(lam, want, atol=1e-14)


def test_simplex_measures():
    tri = unit_triangle()
    assert tri.diameter == pytest.approx(math.sqrt(2.0))
    assert tri.volume == pytest.approx(0.5)
    seg = Simplex([[1.0], [3.0]])
    assert seg.diameter == pytest.approx(2.0)
    assert seg.volume == pytest.approx(2.0)


def test_degenerate_simplex_rejected():
    with pytest.raises(GeometryError, match="degenerate"):
        Simplex([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(GeometryError):
        Simplex(np.zeros((3, 2)))


def test_contains_respects_tolerance():
    tri = unit_triangle()
    assert tri.contains([0.25, 0.25])
    assert tri.contains([0.0, -1e-13])
    assert not tri.contains([0.0, -1e-9])


def test_random_points_land_inside():
    tri = unit_triangle()
    pts = tri.random_points(np.random.default_rng(5), 200)
    for p in pts:
        assert tri.contains(p, tol=1e-9)


# ------------------------------------------------------- interpolation


def test_pi_reproduces_affine():
    tri = unit_triangle()
    f = ScalarField(2, lambda x: 3.0 - x[0] + 2 * x[1])
    rng = np.random.default_rng(11)
    for p in tri.random_points(rng, 25):
        assert pi_interp(tri, f, p) == pytest.approx(f.value(p), abs=1e-13)


def test_pi_square_at_centroid():
    # v = x^2: interpolant averages the vertex values 0, 1, 0
    tri = unit_triangle()
    f = ScalarField(2, lambda x: x[0] ** 2)
    got = pi_interp(tri, f, [1 / 3, 1 / 3])
    assert got == pytest.approx(1 / 3, abs=1e-14)
    assert got - f.value([1 / 3, 1 / 3]) == pytest.approx(2 / 9, abs=1e-14)


def test_pi_star_square_at_centroid():
    tri = unit_triangle()
    f = ScalarField(2, lambda x: x[0] ** 2, gradient=lambda x: np.array([2 * x[0], 0.0]))
    assert pi_star_interp(tri, f, [1 / 3, 1 / 3]) == pytest.approx(1 / 9, abs=1e-14)


def test_pi_star_reproduces_quadratics():
    rng = np.random.default_rng(19)
    for dim in (1, 2, 3):
        verts = rng.normal(size=(dim + 1, dim))
        try:
            s = Simplex(verts)
        except GeometryError:
            continue
        c0 = rng.normal()
        c1 = rng.normal(size=dim)
        A = rng.normal(size=(dim, dim))
        A = 0.5 * (A + A.T)
        f = ScalarField(
            dim,
            lambda x, c0=c0, c1=c1, A=A: c0 + c1 @ x + x @ A @ x,
            gradient=lambda x, c1=c1, A=A: c1 + 2.0 * A @ x,
        )
        scale = 1.0 + max(abs(f.value(v)) for v in s.vertices)
        for p in s.random_points(rng, 30):
            err = abs(pi_star_interp(s, f, p) - f.value(p))
            assert err <= 1e-10 * scale


def test_interp_outside_element_raises():
    tri = unit_triangle()
    f = ScalarField(2, lambda x: x[0])
    with pytest.raises(DomainError, match="outside"):
        pi_interp(tri, f, [0.7, 0.7])
    with pytest.raises(DomainError, match="outside"):
        pi_star_interp(tri, f, [-0.1, 0.2])


# --------------------------------------------------------- error bounds


def test_bounds_unit_diameter_example():
    # diam 1, |D2v| = 2, |Dv| = 0: curvature-only data, refined halves classical
    seg = Simplex([[0.0], [1.0]])
    b = interp_error_bounds(seg, 0.0, 2.0)
    assert b.classical == pytest.approx(1.0)
    assert b.refined == pytest.approx(0.5)
    assert b.corrected == pytest.approx(0.5)
    assert b.combined == pytest.approx(0.5)


def test_corrected_is_half_classical():
    rng = np.random.default_rng(23)
    for _ in range(10):
        seg = Simplex([[0.0], [float(rng.uniform(0.1, 5.0))]])
        d1, d2 = rng.uniform(0.0, 4.0), rng.uniform(0.1, 4.0)
        b = interp_error_bounds(seg, d1, d2)
        assert b.corrected == pytest.approx(0.5 * b.classical, rel=1e-15)


def test_combined_picks_smaller_bound():
    seg = Simplex([[0.0], [1.0]])
    b = interp_error_bounds(seg, 10.0, 2.0)  # large slope: classical wins
    assert b.combined == b.classical == pytest.approx(1.0)
    b = interp_error_bounds(seg, 0.1, 2.0)  # small slope: refined wins
    assert b.combined == b.refined == pytest.approx(0.55)


def test_bounds_reject_negative_norms():
    with pytest.raises(ValueError, match="nonnegative"):
        interp_error_bounds(unit_triangle(), -1.0, 2.0)
    with pytest.raises(ValueError, match="nonnegative"):
        interp_error_bounds(unit_triangle(), 1.0, -2.0)


def test_measured_errors_sit_under_bounds():
    # exp(x+y) on the unit triangle with analytic sup norms over the element
    tri = unit_triangle()
    f = exp_sum(2)
    d1 = math.sqrt(2.0) * math.e
    d2 = 2.0 * math.e
    b = interp_error_bounds(tri, d1, d2)
    rng = np.random.default_rng(29)
    pts = tri.random_points(rng, 400)
    err_pi = max(abs(pi_interp(tri, f, p) - f.value(p)) for p in pts)
    err_star = max(abs(pi_star_interp(tri, f, p) - f.value(p)) for p in pts)
    assert err_pi <= b.classical
    assert err_pi <= b.combined
    assert err_star <= b.corrected


# --------------------------------------------------------------- meshes


def test_uniform_interval_mesh():
    m = uniform_mesh([(0.0, 1.0)], 1, 4)
    assert len(m) == 4
    assert m.mesh_size == pytest.approx(0.25)
    m.check_conforming()


def test_uniform_square_mesh_counts():
    for k in (1, 2, 5):
        m = uniform_mesh([(0.0, 1.0), (0.0, 1.0)], 2, k)
        assert len(m) == 2 * k * k
        assert m.mesh_size == pytest.approx(math.sqrt(2.0) / k)
        m.check_conforming()


def test_uniform_cube_mesh_counts():
    m = uniform_mesh([(0.0, 1.0)] * 3, 3, 2)
    assert len(m) == 6 * 2**3
    assert m.mesh_size == pytest.approx(math.sqrt(3.0) / 2)
    m.check_conforming()
    assert sum(s.volume for s in m.simplices) == pytest.approx(1.0)


def test_mesh_covers_box_volume():
    m = uniform_mesh([(0.0, 2.0), (-1.0, 1.0)], 2, 3)
    assert sum(s.volume for s in m.simplices) == pytest.approx(4.0)


def test_zero_subdivisions_rejected():
    with pytest.raises(ValueError, match="subdivisions"):
        uniform_mesh([(0.0, 1.0)], 1, 0)


def test_nonconforming_mesh_detected():
    # duplicating an element makes its shared vertex bound three segments
    verts = [[0.0], [1.0], [2.0]]
    elems = [[0, 1], [0, 1], [1, 2]]
    m = Triangulation(verts, elems)
    with pytest.raises(GeometryError, match="shared by 3"):
        m.check_conforming()


def test_boundary_vertex_mask():
    m = uniform_mesh([(0.0, 1.0), (0.0, 1.0)], 2, 2)
    mask = m.boundary_vertex_mask()
    on_edge = np.any(
        (np.abs(m.vertices) < 1e-14) | (np.abs(m.vertices - 1.0) < 1e-14), axis=1
    )
    np.testing.assert_array_equal(mask, on_edge)


def test_locate_prefers_lowest_index():
    m = uniform_mesh([(0.0, 1.0), (0.0, 1.0)], 2, 1)
    k, lam = m.locate([0.5, 0.5])  # on the shared diagonal of both triangles
    assert k == 0
    assert abs(lam.sum() - 1.0) <= 1e-12
    m1 = uniform_mesh([(0.0, 1.0)], 1, 4)
    k, _ = m1.locate([0.25])  # endpoint shared by elements 0 and 1
    assert k == 0


def test_locate_outside_raises():
    m = uniform_mesh([(0.0, 1.0)], 1, 4)
    with pytest.raises(DomainError, match="outside"):
        m.locate([1.5])


# --------------------------------------------------- global interpolants


def test_global_interp_matches_elementwise():
    m = uniform_mesh([(0.0, 1.0), (0.0, 1.0)], 2, 3)
    f = exp_sum(2)
    I = global_interp(m, f)
    Istar = global_interp(m, f, corrected=True)
    rng = np.random.default_rng(31)
    for p in rng.random((25, 2)):
        k, _ = m.locate(p)
        s = m.simplices[k]
        assert I(p) == pytest.approx(pi_interp(s, f, p), abs=1e-13)
        assert Istar(p) == pytest.approx(pi_star_interp(s, f, p), abs=1e-13)


def test_global_pi_star_quadratic_exactness():
    m = uniform_mesh([(0.0, 1.0), (0.0, 1.0)], 2, 3)
    f = quadratic_2d()
    I = global_interp(m, f, corrected=True)
    rng = np.random.default_rng(37)
    scale = 1.0 + np.max(np.abs(f.value_at(m.vertices)))
    for p in rng.random((50, 2)):
        assert abs(I(p) - f.value(p)) <= 1e-10 * scale


def test_interpolants_match_vertex_values():
    m = uniform_mesh([(0.0, 1.0), (0.0, 1.0)], 2, 2)
    f = exp_sum(2)
    for interp in (global_interp(m, f), global_interp(m, f, corrected=True)):
        for p in m.vertices:
            assert interp(p) == pytest.approx(f.value(p), abs=1e-12)


def test_face_jumps_stay_at_roundoff():
    # measured two-sided disagreement, plain and corrected; the correction
    # restricted to a face uses face-vertex data only, so both stay tiny
    m = uniform_mesh([(0.0, 1.0), (0.0, 1.0)], 2, 3)
    f = exp_sum(2)
    assert face_jumps(m, global_interp(m, f)) <= 1e-12
    assert face_jumps(m, global_interp(m, f, corrected=True)) <= 1e-12


def test_corrected_interp_agrees_across_shared_diagonal():
    # v = xy on the two-triangle unit square, probed along the diagonal
    m = uniform_mesh([(0.0, 1.0), (0.0, 1.0)], 2, 1)
    f = ScalarField(
        2,
        lambda x: x[0] * x[1],
        gradient=lambda x: np.array([x[1], x[0]]),
    )
    I = global_interp(m, f, corrected=True)
    ts = np.linspace(0.0, 1.0, 100)
    for t in ts:
        p = np.array([t, t])
        vals = []
        for k in range(2):
            lam = np.clip(m.simplices[k].barycentric(p), 0.0, None)
            lam /= lam.sum()
            vals.append(float(I.eval_on_element(k, lam.reshape(1, -1))[0]))
        assert abs(vals[0] - vals[1]) <= 1e-13


def test_corrected_mesh_interp_beats_plain_on_smooth_field():
    m = uniform_mesh([(0.0, 1.0), (0.0, 1.0)], 2, 4)
    f = exp_sum(2)
    I = global_interp(m, f)
    Istar = global_interp(m, f, corrected=True)
    rng = np.random.default_rng(41)
    pts = rng.random((300, 2))
    err = max(abs(I(p) - f.value(p)) for p in pts)
    err_star = max(abs(Istar(p) - f.value(p)) for p in pts)
    assert err_star < 0.5 * err


# ------------------------------------------------------------ mesh i/o


def test_mesh_text_roundtrip():
    for m in (
        uniform_mesh([(0.0, 1.0)], 1, 3),
        uniform_mesh([(0.0, 2.0), (0.0, 1.0)], 2, 2),
        uniform_mesh([(0.0, 1.0)] * 3, 3, 1),
    ):
        back = read_mesh_text(write_mesh_text(m))
        np.testing.assert_allclose(back.vertices, m.vertices, atol=0.0)
        np.testing.assert_array_equal(back.elements, m.elements)


def test_mesh_text_format():
    m = uniform_mesh([(0.0, 1.0)], 1, 2)
    lines = write_mesh_text(m).strip().splitlines()
    assert lines[0] == "v 0"
    assert lines[1] == "v 0.5"
    assert lines[3] == "e 0 1"
    assert lines[4] == "e 1 2"


def test_mesh_text_rejects_garbage():
    with pytest.raises(ValueError, match="unknown record"):
        read_mesh_text("v 0\nv 1\nq 0 1\n")
    with pytest.raises(ValueError, match="needs both"):
        read_mesh_text("v 0\nv 1\n")


def test_mesh_text_skips_comments_and_blanks():
    m = read_mesh_text("# interval\n\nv 0\nv 1\ne 0 1\n")
    assert len(m) == 1
    assert m.mesh_size == pytest.approx(1.0)
