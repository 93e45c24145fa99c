import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bhm.errors import ContractError, GeometryError
from bhm.geometry import (
    ArrayGeometry, Circle, Kite, TrigPolynomial, apply_M, apply_M_polar, apply_N, apply_N_polar, curve_eval,
    discretize, distance_to_curves, inside_any, polar_derivatives, spectral_diff, winding_number,
)
from bhm.jets import Jet3
from bhm.specfun import KernelKind, WaveParams, kernel_jet

P = WaveParams(2 * np.pi)


def poly_jet(shape=(), **parts):
    z = np.zeros(shape)
    base = {name: z for name in ("v", "x", "y", "xx", "xy", "yy", "xxx", "xxy", "xyy", "yyy")}
    base.update({k: np.full(shape, float(v)) for k, v in parts.items()})
    return Jet3(**base)


def test_kite_at_zero():
    node = curve_eval(Kite(), 0.0)
    assert node.point == pytest.approx([1.0, 0.0], abs=1e-15)


def test_kite_parametrization():
    t = np.linspace(0, 2 * np.pi, 7)
    x, _, _ = Kite().derivatives(t)
    assert x[:, 0] == pytest.approx(0.65 * np.cos(2 * t) + np.cos(t) - 0.65, abs=1e-15)
    assert x[:, 1] == pytest.approx(1.5 * np.sin(t), abs=1e-15)


def test_shifted_circle_at_zero():
    assert curve_eval(Circle((-2.0, -2.0), 1.0), 0.0).point == pytest.approx([-1.0, -2.0])


@settings(max_examples=20, deadline=None)
@given(t=st.floats(0, 2 * np.pi))
def test_circle_normal_is_radial(t):
    node = curve_eval(Circle(), t)
    assert node.normal == pytest.approx([np.cos(t), np.sin(t)], abs=1e-14)
    assert node.curvature == pytest.approx(1.0)


def test_circle_weights_sum_to_length():
    assert discretize(Circle(), 64).weights.sum() == pytest.approx(2 * np.pi, abs=1e-12)


def test_kite_length_self_convergence():
    a, b = discretize(Kite(), 128).length, discretize(Kite(), 256).length
    assert a == pytest.approx(b, abs=1e-10)


@pytest.mark.parametrize("n", [63, 8])
def test_bad_node_counts(n):
    with pytest.raises(GeometryError):
        discretize(Circle(), n)


def test_normals_point_outward_for_every_curve():
    curves = [Circle((0.3, -0.2), 0.7), Kite(), TrigPolynomial(((1.0, 0.0, 0.0, 1.0), (0.0, 0.15, 0.1, 0.0)))]
    for c in curves:
        nodes = discretize(c, 128)
        ahead = nodes.points + 1e-3 * nodes.normals
        assert not inside_any(ahead, [c]).any()
        assert winding_number(c, c.interior_point()) == 1


def test_spectral_derivative_of_trig_samples():
    t = 2 * np.pi * np.arange(32) / 32
    f = np.sin(3 * t) + np.cos(t)
    assert spectral_diff(f) == pytest.approx(3 * np.cos(3 * t) - np.sin(t), abs=1e-12)
    assert spectral_diff(f, order=2) == pytest.approx(-9 * np.sin(3 * t) - np.cos(t), abs=1e-11)


def test_distance_to_unit_circle():
    pts = np.array([[3.0, 0.0], [0.0, 0.0], [0.6, 0.8]])
    # sampled with 4096 nodes, so exact up to half a sample spacing
    assert distance_to_curves(pts, [Circle()]) == pytest.approx([2.0, 1.0, 0.0], abs=np.pi / 4096)


def test_moment_of_simple_fields():
    assert apply_M(poly_jet(v=1.0), np.array([1.0, 0.0])) == 0
    nu = 0.3
    sq = poly_jet(xx=2.0)
    assert apply_M(sq, np.array([1.0, 0.0]), nu) == pytest.approx(2.0)
    assert apply_M(sq, np.array([0.0, 1.0]), nu) == pytest.approx(2 * nu)


def test_force_of_low_order_fields():
    n = np.array([0.6, 0.8])
    assert apply_N(poly_jet(v=1.0), n, 0.5) == 0
    assert apply_N(poly_jet(x=1.0), n, 0.5) == 0


def test_force_needs_third_order():
    jet = poly_jet()
    jet = Jet3(**{**jet.__dict__, "xxx": None})
    with pytest.raises(ContractError):
        apply_N(jet, np.array([1.0, 0.0]), 0.0)


@pytest.mark.parametrize("radius", [1.0, 3.0, 10.0])
def test_polar_forms_agree_with_cartesian(radius):
    th = 2 * np.pi * np.arange(16) / 16 + 0.1
    pts = radius * np.stack([np.cos(th), np.sin(th)], axis=-1)
    normals = pts / radius
    for source in (np.zeros(2), np.array([0.3, -0.4])):
        jet = kernel_jet(KernelKind.HELMHOLTZ, P, pts, source)
        pd = polar_derivatives(jet, pts, radius)
        m_cart = apply_M(jet, normals, P.nu)
        n_cart = apply_N(jet, normals, np.full(16, 1 / radius), P.nu)
        scale = np.abs(n_cart).max()
        assert np.abs(apply_M_polar(pd, P.nu) - m_cart).max() <= 1e-8 * np.abs(m_cart).max()
        assert np.abs(apply_N_polar(pd, P.nu) - n_cart).max() <= 1e-8 * scale


def test_plane_wave_moment_by_finite_differences():
    d = np.array([np.cos(0.4), np.sin(0.4)])
    x = np.array([[2.0, 1.5]])
    n = x / np.linalg.norm(x)
    k, nu, h = P.kappa, P.nu, 1e-4
    f = lambda p: np.exp(1j * k * p @ d)  # noqa: E731
    ex, ey = np.array([h, 0]), np.array([0, h])
    p0 = x[0]
    fxx = (f(p0 + ex) - 2 * f(p0) + f(p0 - ex)) / h**2
    fyy = (f(p0 + ey) - 2 * f(p0) + f(p0 - ey)) / h**2
    fxy = (f(p0 + ex + ey) - f(p0 + ex - ey) - f(p0 - ex + ey) + f(p0 - ex - ey)) / (4 * h * h)
    fd = nu * (fxx + fyy) + (1 - nu) * (n[0, 0] ** 2 * fxx + 2 * n[0, 0] * n[0, 1] * fxy + n[0, 1] ** 2 * fyy)
    v = f(p0)
    jet = poly_jet((1,))
    jet = Jet3(v=np.array([v]), x=1j * k * d[0] * jet.v + np.array([1j * k * d[0] * v]),
               y=np.array([1j * k * d[1] * v]), xx=np.array([-(k * d[0]) ** 2 * v]),
               xy=np.array([-(k**2) * d[0] * d[1] * v]), yy=np.array([-(k * d[1]) ** 2 * v]),
               xxx=jet.v, xxy=jet.v, xyy=jet.v, yyy=jet.v)
    pd = polar_derivatives(jet, x, np.linalg.norm(x))
    assert apply_M_polar(pd, nu)[0] == pytest.approx(fd, rel=1e-5)
    assert apply_M(jet, n, nu)[0] == pytest.approx(-(k**2) * nu * v - (1 - nu) * k**2 * (n[0] @ d) ** 2 * v)


def test_array_geometry_layout():
    a = ArrayGeometry(10.0, 12.0, 8, 4, 6)
    assert np.linalg.norm(a.receivers, axis=1) == pytest.approx(np.full(8, 10.0))
    assert np.linalg.norm(a.sources, axis=1) == pytest.approx(np.full(4, 12.0))
    assert a.sources[0] == pytest.approx(12.0 * np.array([np.cos(np.pi / 4), np.sin(np.pi / 4)]))
    assert a.receiver_weight == pytest.approx(2 * np.pi * 10 / 8)
    assert a.direction_weight == pytest.approx(2 * np.pi / 6)


def test_array_must_enclose_the_grid():
    with pytest.raises(GeometryError):
        ArrayGeometry(8.0, 10.0).check_contains((-6, 6, -6, 6))
    ArrayGeometry().check_contains((-6, 6, -6, 6))
