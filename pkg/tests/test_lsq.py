import math

import numpy as np
import pytest

from gridgauge import (
    SingularStencilError,
    Stencil,
    apply_gradient,
    build_system,
)


def make_stencil(dx, dy):
    dx = tuple(float(v) for v in dx)
    dy = tuple(float(v) for v in dy)
    d = tuple(math.hypot(a, b) for a, b in zip(dx, dy))
    return Stencil(cell=0, neighbors=tuple(range(1, len(dx) + 1)), dx=dx, dy=dy, d=d)


def dense_oracle_coefficients(stencil, p):
    """Independent route: weighted over-determined solve by SVD, one
    unit-impulse right-hand side per neighbor."""
    a = np.column_stack([stencil.dx, stencil.dy])
    w = 1.0 / np.asarray(stencil.d) ** p
    wa = a * w[:, None]
    coeffs = []
    for k in range(len(stencil.dx)):
        e = np.zeros(len(stencil.dx))
        e[k] = 1.0
        sol, *_ = np.linalg.lstsq(wa, w * e, rcond=None)
        coeffs.append(sol)
    return np.asarray(coeffs)  # row k = (cx_k, cy_k)


def random_nonsingular_stencil(rng):
    while True:
        n = int(rng.integers(3, 10))
        dx = rng.uniform(-1.0, 1.0, n)
        dy = rng.uniform(-1.0, 1.0, n)
        if np.hypot(dx, dy).min() < 1e-3:
            continue
        st = make_stencil(dx, dy)
        try:
            build_system(st, 0)
            build_system(st, 1)
        except SingularStencilError:
            continue
        return st


CROSS = make_stencil([1, -1, 0, 0], [0, 0, 1, -1])


def test_cross_stencil_normal_matrix():
    system = build_system(CROSS, 0)
    assert (system.m11, system.m12, system.m22) == (2.0, 0.0, 2.0)
    assert system.cx == pytest.approx((0.5, -0.5, 0.0, 0.0), abs=1e-15)
    assert system.cy == pytest.approx((0.0, 0.0, 0.5, -0.5), abs=1e-15)


def test_unit_distance_weights_make_p_irrelevant():
    s0 = build_system(CROSS, 0)
    s1 = build_system(CROSS, 1)
    assert s0.m11 == s1.m11
    assert s0.cx == s1.cx
    assert s0.cy == s1.cy


def test_collinear_stencil_singular():
    st = make_stencil([1, 2, 3], [0, 0, 0])
    with pytest.raises(SingularStencilError):
        build_system(st, 0)


def test_nearly_collinear_stencil_singular():
    st = make_stencil([1, 2, 3], [0, 1e-8, 0])
    with pytest.raises(SingularStencilError):
        build_system(st, 0)


def test_bad_weight_exponent():
    with pytest.raises(ValueError):
        build_system(CROSS, 2)


def test_constant_field_zero_gradient_exactly():
    system = build_system(CROSS, 0)
    assert apply_gradient(system, [0.0, 0.0, 0.0, 0.0]) == (0.0, 0.0)


def test_length_mismatch():
    system = build_system(CROSS, 0)
    with pytest.raises(ValueError):
        apply_gradient(system, [1.0, 2.0])


@pytest.mark.parametrize("p", [0, 1])
def test_linear_exactness(p):
    rng = np.random.default_rng(7)
    for _ in range(20):
        st = random_nonsingular_stencil(rng)
        system = build_system(st, p)
        du = [3.0 * x - 2.0 * y for x, y in zip(st.dx, st.dy)]
        gx, gy = apply_gradient(system, du)
        assert gx == pytest.approx(3.0, rel=1e-12)
        assert gy == pytest.approx(-2.0, rel=1e-12)


@pytest.mark.parametrize("theta_deg", [30.0, 90.0, 137.0])
def test_rotation_equivariance(theta_deg):
    rng = np.random.default_rng(12)
    t = math.radians(theta_deg)
    ct, sn = math.cos(t), math.sin(t)
    for _ in range(10):
        st = random_nonsingular_stencil(rng)
        rot = make_stencil(
            [ct * x - sn * y for x, y in zip(st.dx, st.dy)],
            [sn * x + ct * y for x, y in zip(st.dx, st.dy)],
        )
        du = [1.7 * x + 0.4 * y for x, y in zip(st.dx, st.dy)]
        gx, gy = apply_gradient(build_system(st, 0), du)
        # same data attached to rotated offsets: gradient components rotate
        rx, ry = apply_gradient(build_system(rot, 0), du)
        assert rx == pytest.approx(ct * gx - sn * gy, abs=1e-10)
        assert ry == pytest.approx(sn * gx + ct * gy, abs=1e-10)


@pytest.mark.parametrize("p", [0, 1])
def test_oracle_equivalence_100_stencils(p):
    rng = np.random.default_rng(2024)
    for _ in range(100):
        st = random_nonsingular_stencil(rng)
        system = build_system(st, p)
        oracle = dense_oracle_coefficients(st, p)
        got = np.column_stack([system.cx, system.cy])
        scale = max(np.abs(oracle).max(), 1e-30)
        assert np.abs(got - oracle).max() <= 1e-9 * scale

        du = rng.uniform(-1.0, 1.0, st.n)
        gx, gy = apply_gradient(system, du)
        a = np.column_stack([st.dx, st.dy])
        w = 1.0 / np.asarray(st.d) ** p
        sol, *_ = np.linalg.lstsq(a * w[:, None], w * du, rcond=None)
        assert math.hypot(gx - sol[0], gy - sol[1]) <= 1e-9 * max(
            1.0, float(np.hypot(*sol))
        )


def test_normal_matrix_positive_definite_on_random_stencils():
    rng = np.random.default_rng(5)
    for _ in range(50):
        st = random_nonsingular_stencil(rng)
        system = build_system(st, 0)
        assert system.m11 > 0.0
        assert system.m22 > 0.0
        assert system.m11 * system.m22 - system.m12 ** 2 > 0.0
        assert system.condition >= 1.0


def test_unit_impulse_reproduction():
    # applying the coefficients to du = dx must give gradient (1, 0)
    rng = np.random.default_rng(3)
    for _ in range(10):
        st = random_nonsingular_stencil(rng)
        system = build_system(st, 0)
        gx, gy = apply_gradient(system, list(st.dx))
        assert gx == pytest.approx(1.0, abs=1e-12)
        assert gy == pytest.approx(0.0, abs=1e-12)
        gx, gy = apply_gradient(system, list(st.dy))
        assert gx == pytest.approx(0.0, abs=1e-12)
        assert gy == pytest.approx(1.0, abs=1e-12)
