"""Oracle tests for the pointwise geometry engine.

Oracle provenance markers used in comments below:
- [TRIVIAL]: forced by definitions (constant fields, identity frames).
- [DERIVED]: hand-derived closed forms (classical metrics with known
  Christoffel symbols and curvatures, dual coframes computed by hand,
  finite-difference cross-checks against an independent discretization).

Finite-difference comparisons use central differences with step 1e-6 and
scaled relative tolerance 1e-5; structural identities are held to
1e-9 .. 1e-12.
"""

import math

import numpy as np
import pytest

from paracr.errors import (
    DegenerateMetric,
    DegeneratePlane,
    OutsidePatch,
    SingularFrame,
    ValidationError,
    WrongDimension,
)
from paracr.expr import parse
from paracr.geometry import (
    Chart,
    CoordinateStructure,
    FrameStructure,
    HyperboloidStructure,
    PointFrame,
    d_one_form,
    d_two_form,
    gauss_jordan,
    invert_matrix,
    lie_bracket,
    lie_derivative_11,
    structure_arrays,
    third_metric_derivatives,
)
from paracr.jets import Dual, depth_of
from paracr.presets import (
    cosymplectic,
    flat3d,
    hyperboloid,
    p1,
    random_dim3_structure,
)


def sample_points(chart, rng, count):
    lo = np.array([b[0] for b in chart.box])
    hi = np.array([b[1] for b in chart.box])
    return [tuple(float(v) for v in lo + (hi - lo) * rng.random(len(lo)))
            for _ in range(count)]


def _tangent(v):
    return v.t if depth_of(v) == 1 else 0.0


def field_jacobian(fn, point):
    """jac[a][k] = d(component k)/d(coordinate a) of a vector field given
    as a callable point -> components, via one jet level."""
    m = len(point)
    jac = np.zeros((m, m))
    for a in range(m):
        ys = [Dual(x, 1.0 if i == a else 0.0) for i, x in enumerate(point)]
        out = fn(ys)
        jac[a] = [_tangent(c) for c in out]
    return jac


def frame_column(structure, col):
    return lambda xs: [row[col] for row in structure.frame_matrix(xs)]


def scaled_diff(got, want):
    got = np.asarray(got, dtype=float)
    want = np.asarray(want, dtype=float)
    scale = max(1.0, float(np.max(np.abs(want))) if want.size else 0.0)
    return float(np.max(np.abs(got - want))) / scale if got.size else 0.0


def zeros_structure(chart, g_rows):
    """Coordinate structure with the given metric and zero phi/xi/eta
    (only the metric side of the engine is exercised)."""
    coords = chart.coordinates
    m = chart.dim
    zero = parse("0", coords)
    g = [[parse(t, coords) for t in row] for row in g_rows]
    return CoordinateStructure(chart, g, [[zero] * m for _ in range(m)],
                               [zero] * m, [zero] * m)


BOX3 = ((-1.0, 1.0),) * 3


class TestGaussJordan:
    def test_float_inverse(self):
        # [TRIVIAL] A @ inv(A) == I for a well-conditioned matrix.
        A = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]]
        inv, det = invert_matrix(A, min_det=1e-10, exc=DegenerateMetric)
        prod = np.array(A) @ np.array(inv)
        assert np.max(np.abs(prod - np.eye(3))) < 1e-12
        assert abs(det - np.linalg.det(np.array(A))) < 1e-12

    def test_singular_raises(self):
        A = [[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0, 0.0, 1.0]]
        with pytest.raises(DegenerateMetric):
            invert_matrix(A, min_det=1e-10, exc=DegenerateMetric)

    def test_pivoting(self):
        # [TRIVIAL] zero leading pivot forces a row swap.
        A = [[0.0, 1.0], [1.0, 0.0]]
        inv, _ = invert_matrix(A, min_det=1e-10, exc=DegenerateMetric)
        assert np.max(np.abs(np.array(inv) - np.array(A))) < 1e-15

    def test_dual_inverse_matches_closed_form(self):
        # [DERIVED] A(x) = [[2+x, 1], [1, 2]], det = 3 + 2x,
        # inv = (1/det) [[2, -1], [-1, 2+x]]; value and x-derivative at
        # x = 0.2 from the closed form.
        x = Dual(0.2, 1.0)
        A = [[x + 2.0, 1.0], [1.0, 2.0]]
        inv, _ = invert_matrix(A, min_det=1e-10, exc=DegenerateMetric)
        det = 3.0 + 2.0 * 0.2
        ddet = 2.0
        closed = [[2.0 / det, -1.0 / det], [-1.0 / det, 2.2 / det]]
        dclosed = [[-2.0 * ddet / det ** 2, ddet / det ** 2],
                   [ddet / det ** 2, (det - 2.2 * ddet) / det ** 2]]
        for i in range(2):
            for j in range(2):
                entry = inv[i][j]
                assert abs(entry.p - closed[i][j]) < 1e-14
                assert abs(entry.t - dclosed[i][j]) < 1e-14

    def test_joint_solve(self):
        # [TRIVIAL] solving A X = B for two right-hand columns at once.
        A = [[3.0, 1.0], [1.0, 2.0]]
        B = [[1.0, 0.0], [0.0, 1.0]]
        X, _ = gauss_jordan(A, B, min_det=1e-10, exc=DegenerateMetric)
        prod = np.array(A) @ np.array(X)
        assert np.max(np.abs(prod - np.eye(2))) < 1e-14


class TestChartValidation:
    def test_even_dimension_rejected(self):
        with pytest.raises(ValidationError):
            Chart(("x", "y"), ((-1.0, 1.0), (-1.0, 1.0)))

    def test_dimension_one_rejected(self):
        with pytest.raises(ValidationError):
            Chart(("x",), ((-1.0, 1.0),))

    def test_empty_interval_rejected(self):
        with pytest.raises(ValidationError):
            Chart(("x", "y", "z"), ((-1.0, 1.0), (1.0, -1.0), (-1.0, 1.0)))

    def test_chart_shape(self):
        chart = Chart(("x", "y", "z"), BOX3)
        assert chart.dim == 3 and chart.n == 1


class TestFrameConversion:
    def test_identity_frame_recovers_hat_tensors(self):
        # [TRIVIAL] with E = I the coordinate tensors equal the
        # frame-basis constants.
        coords = ("x", "y", "z")
        chart = Chart(coords, BOX3)
        one, zero = parse("1", coords), parse("0", coords)
        E = [[one if i == j else zero for j in range(3)] for i in range(3)]
        g_hat = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
        phi_hat = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]
        s = FrameStructure(chart, E, g_hat, phi_hat,
                           [0.0, 0.0, 1.0], [0.0, 0.0, 1.0])
        g, phi, xi, eta = s.components((0.3, -0.1, 0.7))
        assert np.max(np.abs(np.array(g) - np.array(g_hat))) < 1e-15
        assert np.max(np.abs(np.array(phi) - np.array(phi_hat))) < 1e-15
        assert np.max(np.abs(np.array(xi) - [0, 0, 1])) < 1e-15
        assert np.max(np.abs(np.array(eta) - [0, 0, 1])) < 1e-15

    def test_constant_frame_against_numpy(self):
        # [DERIVED] numpy linear algebra as the independent oracle for a
        # constant non-orthogonal frame: g = inv(E)^T g_hat inv(E),
        # phi = E phi_hat inv(E).
        coords = ("x", "y", "z")
        chart = Chart(coords, BOX3)
        texts = [["1", "1", "0"], ["0", "1", "0"], ["0", "1", "1"]]
        E = [[parse(t, coords) for t in row] for row in texts]
        g_hat = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
        phi_hat = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]
        s = FrameStructure(chart, E, g_hat, phi_hat,
                           [0.0, 0.0, 1.0], [0.0, 0.0, 1.0])
        g, phi, xi, eta = s.components((0.0, 0.0, 0.0))
        En = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
        Einv = np.linalg.inv(En)
        assert np.max(np.abs(np.array(g) - Einv.T @ np.array(g_hat) @ Einv)) < 1e-13
        assert np.max(np.abs(np.array(phi) - En @ np.array(phi_hat) @ Einv)) < 1e-13
        assert np.max(np.abs(np.array(xi) - En @ [0.0, 0.0, 1.0])) < 1e-13
        assert np.max(np.abs(np.array(eta) - np.array([0.0, 0.0, 1.0]) @ Einv)) < 1e-13

    def test_p1_eta_coordinate_components(self):
        # [DERIVED] dual coframe by hand: the last frame covector must
        # kill the frame columns containing -2 x_a d/dz, which forces
        # eta = dz + 2 x_1 dy_1 + ... + 2 x_n dy_n.
        d = p1(2)
        rng = np.random.default_rng(7)
        for pt in sample_points(d.structure.chart, rng, 5):
            _, _, _, eta = d.structure.components(pt)
            want = [0.0, 0.0, 2 * pt[0], 2 * pt[1], 1.0]
            assert np.max(np.abs(np.array(eta) - want)) < 1e-12

    def test_singular_frame_raises(self):
        coords = ("x", "y", "z")
        chart = Chart(coords, BOX3)
        texts = [["x", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]
        E = [[parse(t, coords) for t in row] for row in texts]
        s = FrameStructure(chart, E, [[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0]],
                           [[0.0] * 3] * 3, [0.0, 0.0, 1.0], [0.0, 0.0, 1.0])
        with pytest.raises(SingularFrame):
            s.components((0.0, 0.5, 0.5))


ALL_PRESETS = [flat3d(), hyperboloid(1), p1(2), cosymplectic(1)]


class TestDerivativeArrays:
    @pytest.mark.parametrize("desc", ALL_PRESETS, ids=lambda d: d.name)
    def test_first_derivatives_against_fd(self, desc):
        # [DERIVED] central finite differences of the components as an
        # independent discretization of the jet-computed arrays.
        rng = np.random.default_rng(11)
        s = desc.structure
        m = s.chart.dim
        h = 1e-6
        for pt in sample_points(s.chart, rng, 2):
            arrays = structure_arrays(s, pt)
            for a in range(m):
                up = list(pt)
                dn = list(pt)
                up[a] += h
                dn[a] -= h
                pu = s.components(tuple(up))
                pd = s.components(tuple(dn))
                for got, hi, lo in (
                    (arrays.dg[a], pu[0], pd[0]),
                    (arrays.dphi[a], pu[1], pd[1]),
                    (arrays.dxi[a], pu[2], pd[2]),
                    (arrays.deta[a], pu[3], pd[3]),
                ):
                    fd = (np.array(hi, float) - np.array(lo, float)) / (2 * h)
                    assert scaled_diff(got, fd) < 1e-5

    @pytest.mark.parametrize("desc", ALL_PRESETS, ids=lambda d: d.name)
    def test_second_derivatives_against_fd(self, desc):
        rng = np.random.default_rng(13)
        s = desc.structure
        m = s.chart.dim
        h = 1e-6
        pt = sample_points(s.chart, rng, 1)[0]
        arrays = structure_arrays(s, pt)
        for a in range(m):
            up = list(pt)
            dn = list(pt)
            up[a] += h
            dn[a] -= h
            au = structure_arrays(s, tuple(up))
            ad = structure_arrays(s, tuple(dn))
            fd = (au.dg - ad.dg) / (2 * h)
            assert scaled_diff(arrays.d2g[a], fd) < 1e-5
            fd = (au.dphi - ad.dphi) / (2 * h)
            assert scaled_diff(arrays.d2phi[a], fd) < 1e-5
            fd = (au.dxi - ad.dxi) / (2 * h)
            assert scaled_diff(arrays.d2xi[a], fd) < 1e-5
            fd = (au.deta - ad.deta) / (2 * h)
            assert scaled_diff(arrays.d2eta[a], fd) < 1e-5

    def test_third_metric_derivatives_against_fd(self):
        s = flat3d().structure
        pt = (0.21, -0.4, 0.33)
        d3g = third_metric_derivatives(s, pt)
        h = 1e-5
        for a in range(3):
            up = list(pt)
            dn = list(pt)
            up[a] += h
            dn[a] -= h
            au = structure_arrays(s, tuple(up))
            ad = structure_arrays(s, tuple(dn))
            fd = (au.d2g - ad.d2g) / (2 * h)
            assert scaled_diff(d3g[a], fd) < 1e-5

    @pytest.mark.parametrize("desc", ALL_PRESETS, ids=lambda d: d.name)
    def test_mixed_partials_commute(self, desc):
        # The full second-derivative grid is evaluated without symmetry
        # shortcuts, so commutation is a real check on the jet engine.
        rng = np.random.default_rng(17)
        pt = sample_points(desc.structure.chart, rng, 1)[0]
        pf = PointFrame(desc.structure, pt)
        assert pf.mixed_partial_residual() < 1e-12


class TestChristoffel:
    def test_constant_metric_is_flat(self):
        # [TRIVIAL] constant coefficients: all Christoffel symbols and
        # the whole curvature tensor vanish.
        chart = Chart(("x", "y", "z"), BOX3)
        s = zeros_structure(chart, [["2", "1", "0"],
                                    ["1", "3", "0"],
                                    ["0", "0", "1"]])
        pf = PointFrame(s, (0.3, 0.1, -0.5))
        assert np.max(np.abs(pf.Gamma)) < 1e-12
        assert np.max(np.abs(pf.Riem)) < 1e-12

    def test_polar_style_metric(self):
        # [DERIVED] g = diag(1, x^2, 1) away from x = 0:
        # Gamma^x_yy = -x, Gamma^y_xy = Gamma^y_yx = 1/x, all others 0;
        # the metric is flat (polar coordinates on a plane, times a line).
        chart = Chart(("x", "y", "z"),
                      ((0.5, 1.5), (-1.0, 1.0), (-1.0, 1.0)))
        s = zeros_structure(chart, [["1", "0", "0"],
                                    ["0", "x^2", "0"],
                                    ["0", "0", "1"]])
        x = 0.8
        pf = PointFrame(s, (x, 0.2, -0.3))
        want = np.zeros((3, 3, 3))
        want[0, 1, 1] = -x
        want[1, 0, 1] = want[1, 1, 0] = 1.0 / x
        assert np.max(np.abs(pf.Gamma - want)) < 1e-12
        assert np.max(np.abs(pf.Riem)) < 1e-10

    def test_hyperbolic_plane_product(self):
        # [DERIVED] g = diag(1, sinh(x)^2, 1), the hyperbolic plane of
        # curvature -1 times a flat line: Gamma^x_yy = -sinh x cosh x,
        # Gamma^y_xy = cosh x / sinh x, sectional(d/dx, d/dy) = -1,
        # scalar curvature 2 * (-1) = -2.
        chart = Chart(("x", "y", "z"),
                      ((0.5, 1.5), (-1.0, 1.0), (-1.0, 1.0)))
        s = zeros_structure(chart, [["1", "0", "0"],
                                    ["0", "sinh(x)^2", "0"],
                                    ["0", "0", "1"]])
        x = 1.1
        pf = PointFrame(s, (x, 0.4, 0.2))
        want = np.zeros((3, 3, 3))
        want[0, 1, 1] = -math.sinh(x) * math.cosh(x)
        want[1, 0, 1] = want[1, 1, 0] = math.cosh(x) / math.sinh(x)
        assert np.max(np.abs(pf.Gamma - want)) < 1e-12
        assert abs(pf.sectional(np.array([1.0, 0, 0]),
                                np.array([0, 1.0, 0])) + 1.0) < 1e-9
        assert abs(pf.r + 2.0) < 1e-9

    @pytest.mark.parametrize("desc", ALL_PRESETS, ids=lambda d: d.name)
    def test_metric_compatibility_and_symmetry(self, desc):
        rng = np.random.default_rng(19)
        for pt in sample_points(desc.structure.chart, rng, 3):
            pf = PointFrame(desc.structure, pt)
            assert pf.nabla_g_residual() < 1e-9
            assert pf.gamma_symmetry_residual() < 1e-12
            assert pf.metric_symmetry_residual() < 1e-12
            assert pf.inverse_identity_residual() < 1e-12

    def test_gamma_derivative_against_fd(self):
        # [DERIVED] dGamma and d2Gamma against finite differences of
        # exactly computed lower orders.
        d = p1(2)
        pt = (0.3, -0.2, 0.1, 0.4, 1.0)
        pf = PointFrame(d.structure, pt)
        h = 1e-6
        m = 5
        for a in range(m):
            up = list(pt)
            dn = list(pt)
            up[a] += h
            dn[a] -= h
            fd = (PointFrame(d.structure, tuple(up)).Gamma
                  - PointFrame(d.structure, tuple(dn)).Gamma) / (2 * h)
            assert scaled_diff(pf.dGamma[a], fd) < 1e-5

    def test_gamma_second_derivative_against_fd(self):
        s = flat3d().structure
        pt = (0.2, -0.1, 0.35)
        pf = PointFrame(s, pt)
        h = 1e-5
        for a in range(3):
            up = list(pt)
            dn = list(pt)
            up[a] += h
            dn[a] -= h
            fd = (PointFrame(s, tuple(up)).dGamma
                  - PointFrame(s, tuple(dn)).dGamma) / (2 * h)
            assert scaled_diff(pf.d2Gamma[a], fd) < 1e-5


class TestCurvature:
    def test_flat3d_curvature_vanishes(self):
        rng = np.random.default_rng(23)
        d = flat3d()
        for pt in sample_points(d.structure.chart, rng, 5):
            pf = PointFrame(d.structure, pt)
            assert np.max(np.abs(pf.Riem)) < 1e-8
            assert np.max(np.abs(pf.Ric)) < 1e-9
            assert abs(pf.r) < 1e-9

    @pytest.mark.parametrize("n", [1, 2])
    def test_hyperboloid_constant_curvature(self, n):
        # [DERIVED] the induced metric has constant sectional curvature
        # -1: R(X,Y)Z = -(g(Y,Z) X - g(X,Z) Y), hence
        # Ric = -2n g, r = -2n(2n+1).
        rng = np.random.default_rng(29)
        d = hyperboloid(n)
        m = 2 * n + 1
        for pt in sample_points(d.structure.chart, rng, 3):
            pf = PointFrame(d.structure, pt)
            expect = -(np.einsum('by,kw->kwby', pf.g, np.eye(m))
                       - np.einsum('wy,kb->kwby', pf.g, np.eye(m)))
            assert np.max(np.abs(pf.Riem - expect)) < 1e-6
            assert np.max(np.abs(pf.Ric + 2 * n * pf.g)) < 1e-6
            assert abs(pf.r - d.targets["r"]) < 1e-6

    @pytest.mark.parametrize("n", [1, 2])
    def test_hyperboloid_star_contractions(self, n):
        # [DERIVED] for constant curvature -1 with the compatibility
        # identity, Ric*(Y,Z) = g(Y,Z) - eta(Y) eta(Z) and r* = 2n.
        rng = np.random.default_rng(31)
        d = hyperboloid(n)
        for pt in sample_points(d.structure.chart, rng, 2):
            pf = PointFrame(d.structure, pt)
            want = pf.g - np.outer(pf.eta, pf.eta)
            assert np.max(np.abs(pf.Ric_star - want)) < 1e-6
            assert abs(pf.r_star - d.targets["r_star"]) < 1e-6

    def test_riemann_derivative_against_fd(self):
        # [DERIVED] dRiem against finite differences on a structure with
        # genuinely nonconstant curvature.
        s = random_dim3_structure(1)
        pt = (0.25, -0.4, 0.15)
        pf = PointFrame(s, pt)
        h = 1e-6
        for a in range(3):
            up = list(pt)
            dn = list(pt)
            up[a] += h
            dn[a] -= h
            fd = (PointFrame(s, tuple(up)).Riem
                  - PointFrame(s, tuple(dn)).Riem) / (2 * h)
            assert scaled_diff(pf.dRiem[a], fd) < 1e-4

    def test_curvature_identities(self):
        rng = np.random.default_rng(37)
        for s in (random_dim3_structure(2), p1(2).structure,
                  hyperboloid(1).structure):
            for pt in sample_points(s.chart, rng, 2):
                pf = PointFrame(s, pt)
                assert pf.bianchi_residual() < 1e-7
                assert pf.riemann_skew_residual() < 1e-9


class TestFieldCalculus:
    def test_bracket_of_constant_fields_vanishes(self):
        # [TRIVIAL]
        X = np.array([1.0, 2.0, -1.0])
        Y = np.array([0.5, 0.0, 3.0])
        Z = np.zeros((3, 3))
        assert np.max(np.abs(lie_bracket(X, Z, Y, Z))) < 1e-15

    def test_coordinate_bracket_oracle(self):
        # [DERIVED] [x d/dy, d/dx] = -d/dy.
        X = np.array([0.0, 0.3, 0.0])   # at the point x = 0.3
        Xjac = np.zeros((3, 3))
        Xjac[0, 1] = 1.0                # d(X^y)/dx = 1
        Y = np.array([1.0, 0.0, 0.0])
        Yjac = np.zeros((3, 3))
        got = lie_bracket(X, Xjac, Y, Yjac)
        assert np.max(np.abs(got - [0.0, -1.0, 0.0])) < 1e-15

    def test_p1_frame_bracket_with_reeb(self):
        # [DERIVED] the frame field carrying -f d/dx_a has
        # [e_{n+a}, d/dz] = (df/dz) e_a; for the default
        # f = (1 + x_1^2 + x_2^2)/z this is -(1 + x_1^2 + x_2^2)/z^2 e_a.
        d = p1(2)
        s = d.structure
        rng = np.random.default_rng(41)
        for pt in sample_points(s.chart, rng, 3):
            E = np.array(s.frame_matrix(pt), float)
            fz = -(1.0 + pt[0] ** 2 + pt[1] ** 2) / pt[4] ** 2
            for a in range(2):
                fn = frame_column(s, 2 + a)
                vals = np.array(fn(pt), float)
                jac = field_jacobian(fn, pt)
                xi = np.array([0.0, 0.0, 0.0, 0.0, 1.0])
                got = lie_bracket(vals, jac, xi, np.zeros((5, 5)))
                want = fz * E[:, a]
                assert np.max(np.abs(got - want)) < 1e-8

    def test_cosymplectic_frame_brackets(self):
        # [DERIVED] for the default potential H = z (x_1^2 + ...):
        # [e_a, e_b] = 0 (symmetric third partials), [e_{n+a}, e_{n+b}] = 0,
        # and [e_a, d/dz] = 2 e_{n+a}.
        d = cosymplectic(2)
        s = d.structure
        pt = (0.3, -0.2, 0.4, 0.1, -0.5)
        E = np.array(s.frame_matrix(pt), float)
        cols = {}
        for c in range(5):
            fn = frame_column(s, c)
            cols[c] = (np.array(fn(pt), float), field_jacobian(fn, pt))
        for a in range(2):
            for b in range(2):
                got = lie_bracket(*cols[a], *cols[b])
                assert np.max(np.abs(got)) < 1e-10
                got = lie_bracket(*cols[2 + a], *cols[2 + b])
                assert np.max(np.abs(got)) < 1e-15
        for a in range(2):
            got = lie_bracket(*cols[a], *cols[4])
            assert np.max(np.abs(got - 2.0 * E[:, 2 + a])) < 1e-10

    def test_lie_derivative_of_tensor_constant_direction(self):
        # [DERIVED] for constant V = d/dz the Lie derivative of a (1,1)
        # tensor is the plain directional derivative of its components.
        d = flat3d()
        pt = (0.1, 0.5, 0.35)
        arrays = structure_arrays(d.structure, pt)
        V = np.array([0.0, 0.0, 1.0])
        got = lie_derivative_11(V, np.zeros((3, 3)), arrays.phi, arrays.dphi)
        assert np.max(np.abs(got - arrays.dphi[2])) < 1e-12

    def test_half_lie_derivative_equals_h(self):
        # Consistency: the cached h equals (1/2) L_xi phi evaluated
        # through the generic field-calculus path, and h(d/dz) = -d/dz.
        d = flat3d()
        pt = (0.4, -0.3, 0.25)
        pf = PointFrame(d.structure, pt)
        arrays = structure_arrays(d.structure, pt)
        L = lie_derivative_11(arrays.xi, arrays.dxi, arrays.phi, arrays.dphi)
        assert np.max(np.abs(0.5 * L - pf.h)) < 1e-12
        assert np.max(np.abs(pf.h @ [0.0, 0.0, 1.0] - [0.0, 0.0, -1.0])) < 1e-8


class TestExteriorDerivatives:
    def test_one_form_oracle(self):
        # [DERIVED] omega = x^2 dy has d(omega) = 2x dx ^ dy, which in the
        # halved antisymmetrization convention reads (d omega)[x][y] = x.
        jac = np.zeros((3, 3))
        jac[0, 1] = 2 * 0.7
        got = d_one_form(jac)
        want = np.zeros((3, 3))
        want[0, 1] = 0.7
        want[1, 0] = -0.7
        assert np.max(np.abs(got - want)) < 1e-15

    def test_two_form_oracle(self):
        # [DERIVED] T = x dy ^ dz (T[y][z] = x = -T[z][y]) has
        # dT = dx ^ dy ^ dz, i.e. (dT)[x][y][z] = 1/3 in the cyclic-mean
        # convention.
        jac = np.zeros((3, 3, 3))
        jac[0, 1, 2] = 1.0
        jac[0, 2, 1] = -1.0
        got = d_two_form(jac)
        assert abs(got[0, 1, 2] - 1.0 / 3.0) < 1e-15
        assert abs(got[1, 2, 0] - 1.0 / 3.0) < 1e-15
        assert abs(got[1, 0, 2] + 1.0 / 3.0) < 1e-15

    def test_flat3d_deta_closed_form(self):
        # [DERIVED] eta = sinh(2z) dx + cosh(2z) dy gives
        # d(eta)(d/dz, d/dx) = cosh(2z), d(eta)(d/dz, d/dy) = sinh(2z).
        d = flat3d()
        z = 0.45
        pf = PointFrame(d.structure, (0.2, -0.6, z))
        assert abs(pf.dEta[2, 0] - math.cosh(2 * z)) < 1e-12
        assert abs(pf.dEta[2, 1] - math.sinh(2 * z)) < 1e-12
        assert abs(pf.dEta[0, 1]) < 1e-12

    @pytest.mark.parametrize("desc", [flat3d(), hyperboloid(1), p1(2)],
                             ids=lambda d: d.name)
    def test_contact_identity(self, desc):
        # d(eta) coincides with the fundamental 2-form on these examples.
        rng = np.random.default_rng(43)
        for pt in sample_points(desc.structure.chart, rng, 3):
            pf = PointFrame(desc.structure, pt)
            assert np.max(np.abs(pf.dEta - pf.Phi)) < 1e-7

    def test_cosymplectic_both_forms_closed(self):
        rng = np.random.default_rng(47)
        d = cosymplectic(1)
        for pt in sample_points(d.structure.chart, rng, 3):
            pf = PointFrame(d.structure, pt)
            assert np.max(np.abs(pf.dEta)) < 1e-8
            assert np.max(np.abs(pf.dPhi)) < 1e-8
            # positive control: the fundamental form itself is not small.
            assert np.max(np.abs(pf.Phi)) > 0.5

    @pytest.mark.parametrize("desc", ALL_PRESETS, ids=lambda d: d.name)
    def test_dd_eta_vanishes(self, desc):
        rng = np.random.default_rng(53)
        for pt in sample_points(desc.structure.chart, rng, 2):
            pf = PointFrame(desc.structure, pt)
            assert pf.dd_eta_residual() < 1e-8


class TestSectionalAndConformal:
    def test_flat_sectional_zero(self):
        d = flat3d()
        pf = PointFrame(d.structure, (0.3, 0.3, -0.2))
        rng = np.random.default_rng(59)
        done = 0
        while done < 10:
            X, Y = rng.standard_normal((2, 3))
            try:
                k = pf.sectional(X, Y)
            except DegeneratePlane:
                continue
            assert abs(k) < 1e-9
            done += 1

    @pytest.mark.parametrize("n", [1, 2])
    def test_hyperboloid_sectional(self, n):
        rng = np.random.default_rng(61)
        d = hyperboloid(n)
        m = 2 * n + 1
        pts = sample_points(d.structure.chart, rng, 4)
        for pt in pts:
            pf = PointFrame(d.structure, pt)
            done = 0
            while done < 5:
                X, Y = rng.standard_normal((2, m))
                try:
                    k = pf.sectional(X, Y)
                except DegeneratePlane:
                    continue
                assert abs(k + 1.0) < 1e-6
                done += 1

    def test_degenerate_plane_raises(self):
        pf = PointFrame(flat3d().structure, (0.0, 0.0, 0.0))
        with pytest.raises(DegeneratePlane):
            pf.sectional(np.array([1.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]))

    def test_hyperboloid_conformally_flat(self):
        # [DERIVED] constant-curvature spaces are conformally flat:
        # the dimension-appropriate obstruction tensor vanishes.
        pf = PointFrame(hyperboloid(2).structure, (0.1, -0.2, 0.3, 0.0, 0.2))
        assert pf.weyl_residual() < 1e-5
        assert pf.conformal_flatness() < 1e-5
        pf = PointFrame(hyperboloid(1).structure, (0.2, -0.1, 0.3))
        assert pf.cotton_residual() < 1e-5
        pf = PointFrame(flat3d().structure, (0.3, 0.1, -0.4))
        assert pf.cotton_residual() < 1e-10

    def test_nil_metric_not_conformally_flat(self):
        # [DERIVED] the nil metric dx^2 + (1+x^2) dy^2 - 2x dy dz + dz^2
        # (that is, dx^2 + dy^2 + (dz - x dy)^2) is a classical example
        # of a 3-metric that is NOT locally conformally flat; its
        # obstruction tensor must be far from zero.
        chart = Chart(("x", "y", "z"), BOX3)
        s = zeros_structure(chart, [["1", "0", "0"],
                                    ["0", "1 + x^2", "-x"],
                                    ["0", "-x", "1"]])
        pf = PointFrame(s, (0.3, 0.1, -0.2))
        assert pf.cotton_residual() > 1e-3

    def test_curved_product_not_conformally_flat(self):
        # [DERIVED] hyperbolic plane times flat 3-space is not
        # conformally flat (the factors' curvatures are not opposite),
        # so the 5-dimensional obstruction must be far from zero.
        chart = Chart(("x", "y", "z", "u", "v"),
                      ((0.5, 1.5),) + ((-1.0, 1.0),) * 4)
        zero = parse("0", chart.coordinates)
        rows = [["1", "0", "0", "0", "0"],
                ["0", "sinh(x)^2", "0", "0", "0"],
                ["0", "0", "1", "0", "0"],
                ["0", "0", "0", "1", "0"],
                ["0", "0", "0", "0", "1"]]
        g = [[parse(t, chart.coordinates) for t in row] for row in rows]
        s = CoordinateStructure(chart, g, [[zero] * 5 for _ in range(5)],
                                [zero] * 5, [zero] * 5)
        pf = PointFrame(s, (1.0, 0.2, 0.1, -0.3, 0.4))
        assert pf.weyl_residual() > 1e-2

    def test_wrong_dimension_raises(self):
        pf3 = PointFrame(flat3d().structure, (0.0, 0.0, 0.0))
        with pytest.raises(WrongDimension):
            pf3.weyl_residual()
        pf5 = PointFrame(hyperboloid(2).structure, (0.1, 0.0, 0.0, 0.0, 0.1))
        with pytest.raises(WrongDimension):
            pf5.cotton_residual()


class TestHyperboloid:
    @pytest.mark.parametrize("n", [1, 2])
    def test_quadric_residual(self, n):
        rng = np.random.default_rng(67)
        s = HyperboloidStructure(n)
        for pt in sample_points(s.chart, rng, 50):
            assert s.quadric_residual(pt) < 1e-10

    def test_outside_patch_raises(self):
        s = HyperboloidStructure(1)
        with pytest.raises(OutsidePatch):
            s.embed((0.0, 0.0, 1.2))

    @pytest.mark.parametrize("n", [1, 2])
    def test_structure_axioms(self, n):
        rng = np.random.default_rng(71)
        s = HyperboloidStructure(n)
        m = 2 * n + 1
        for pt in sample_points(s.chart, rng, 3):
            pf = PointFrame(s, pt)
            phi2 = pf.phi @ pf.phi
            assert np.max(np.abs(phi2 - np.eye(m)
                                 + np.outer(pf.xi, pf.eta))) < 1e-9
            assert abs(float(pf.eta @ pf.xi) - 1.0) < 1e-9
            compat = (np.einsum('ai,ab,bj->ij', pf.phi, pf.g, pf.phi)
                      + pf.g - np.outer(pf.eta, pf.eta))
            assert np.max(np.abs(compat)) < 1e-9

    @pytest.mark.parametrize("n", [1, 2])
    def test_reeb_covariant_derivative(self, n):
        # [DERIVED] with vanishing h the covariant derivative of the
        # Reeb field reduces to -phi.
        rng = np.random.default_rng(73)
        s = HyperboloidStructure(n)
        for pt in sample_points(s.chart, rng, 3):
            pf = PointFrame(s, pt)
            assert np.max(np.abs(pf.nabla_xi.T + pf.phi)) < 1e-7
            assert np.max(np.abs(pf.h)) < 1e-9


class TestDegeneracies:
    def test_degenerate_metric_raises(self):
        chart = Chart(("x", "y", "z"), BOX3)
        s = zeros_structure(chart, [["1", "0", "0"],
                                    ["0", "1", "0"],
                                    ["0", "0", "0"]])
        pf = PointFrame(s, (0.1, 0.1, 0.1))
        with pytest.raises(DegenerateMetric):
            pf.ginv
