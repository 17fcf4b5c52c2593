import math

import mpmath
import numpy as np
import pytest

from fracrd import models, transforms
from fracrd.mesh import Domain, build_grid, build_spectrum
from fracrd.stepper import (
    Scheme, SimulationAbort, Stepper, StepperState, etd1_step, etdcn_step, initial_state,
    integrate, pade11, phi1, phi2, step_count,
)


def single_mode(mu, n=1):
    """A spectrum table whose only mode has symbol ``mu`` (by scaling D)."""
    grid = build_grid(Domain((0.0,), (1.0,)), 4)
    base = build_spectrum(grid, "dirichlet", 2.0, 1.0)
    return grid, build_spectrum(grid, "dirichlet", 2.0, mu / base.symbol[0, 0])


def const_reaction(value, n_species=1):
    return models.custom(lambda w: np.full_like(w, value), n_species)



def test_etd1_single_mode_oracle():
    mu, tau, F = mpmath.mpf(2), mpmath.mpf("0.5"), mpmath.mpf(3)
    expected = mpmath.e ** (-1) + F * (1 - mpmath.e ** (-mu * tau)) / mu
    assert float(expected) == pytest.approx(1.316060, abs=1e-6)
    grid, spec = single_mode(2.0)
    st = Stepper(spec, models.zero(), 0.5, Scheme.ETD1)
    c = np.zeros((1, 4))
    c[0, 0] = 1.0
    forcing = np.zeros((1, 4))
    forcing[0, 0] = 3.0
    out = st.kernels.lincomb(st.e, c, st.w, forcing)
    assert out[0, 0] == pytest.approx(float(expected), rel=1e-14)


def test_etd1_pure_decay():
    _, spec = single_mode(2.0)
    grid = build_grid(Domain((0.0,), (1.0,)), 4)
    phi = transforms.inverse(np.eye(4)[:1], spec.bcs)
    res = integrate(phi, spec, models.zero(), 0.5, 1, Scheme.ETD1)
    c = transforms.forward(res.fields, spec.bcs)
    assert c[0, 0] == pytest.approx(math.exp(-1.0), rel=1e-14)


def test_zero_mode_linear_growth():
    grid = build_grid(Domain((0.0,), (1.0,)), 8)
    spec = build_spectrum(grid, "neumann", 1.5, 1.0)
    for scheme in Scheme:
        res = integrate(np.full((1, 8), 0.25), spec, const_reaction(0.5), 0.1, 4, scheme)
        np.testing.assert_allclose(res.fields, 0.25 + 0.4 * 0.5, rtol=1e-13)


def test_etdcn_heun_limit():
    # mu = 0 mode with f(u) = u: two-stage step gives 1 + tau + tau^2/2
    grid = build_grid(Domain((0.0,), (1.0,)), 8)
    spec = build_spectrum(grid, "neumann", 1.5, 1.0)
    for scheme in (Scheme.ETDCN, Scheme.ETDCN_EXP):
        res = integrate(np.ones((1, 8)), spec, models.linear(1.0), 0.1, 1, scheme)
        np.testing.assert_allclose(res.fields, 1.105, rtol=1e-13)


def test_pade_values():
    assert pade11(0.0) == 1.0
    assert pade11(2.0) == 0.0
    c = np.logspace(-6, 6, 2001)
    assert np.all(np.abs(pade11(np.concatenate([[0.0], c]))) <= 1.0)
    assert pade11(1e6) == pytest.approx(-1.0, abs=1e-5)


@pytest.mark.parametrize("z", [0.0, 1e-12, 1e-9, 1e-5, 0.05, 0.099, 0.1, 0.5, 3.0, 40.0, 1e4])
def test_phi_functions_accuracy(z):
    with mpmath.workdps(60):
        mz = mpmath.mpf(z)
        if z == 0:
            p1, p2 = mpmath.mpf(1), mpmath.mpf("0.5")
        else:
            p1 = (1 - mpmath.e ** (-mz)) / mz
            p2 = (mpmath.e ** (-mz) - 1 + mz) / mz ** 2
        p1, p2 = float(p1), float(p2)
    assert phi1(z) == pytest.approx(p1, rel=1e-14)
    assert phi2(z) == pytest.approx(p2, rel=1e-13)


def _eigen_setup(bc="dirichlet", alpha=1.5):
    grid = build_grid(Domain((0.0, 0.0), (2.0, 1.0)), (8, 6))
    spec = build_spectrum(grid, bc, alpha, 0.3)
    c0 = np.zeros((1, 8, 6))
    c0[0, 2, 1] = 1.0
    c0[0, 5, 3] = -0.5
    return grid, spec, c0


def test_linear_exactness_etd1():
    _, spec, c0 = _eigen_setup()
    u0 = transforms.inverse(c0, spec.bcs)
    N, tau = 20, 0.25
    res = integrate(u0, spec, models.zero(), tau, N, Scheme.ETD1)
    expected = transforms.inverse(np.exp(-spec.symbol * N * tau) * c0, spec.bcs)
    np.testing.assert_allclose(res.fields, expected, atol=1e-12)


def test_linear_exactness_etdcn_pade_power():
    _, spec, c0 = _eigen_setup("neumann")
    u0 = transforms.inverse(c0, spec.bcs)
    N, tau = 20, 0.25
    res = integrate(u0, spec, models.zero(), tau, N, Scheme.ETDCN)
    expected = transforms.inverse(pade11(tau * spec.symbol) ** N * c0, spec.bcs)
    np.testing.assert_allclose(res.fields, expected, atol=1e-12)


def test_stiff_modes_bounded():
    grid = build_grid(Domain((0.0,), (1.0,)), 256)
    spec = build_spectrum(grid, "dirichlet", 2.0, 1.0)
    u0 = np.random.default_rng(1).standard_normal((1, 256))
    for scheme in Scheme:
        res = integrate(u0, spec, models.zero(), 10.0, 50, scheme)
        # orthonormal transforms: the coefficient norm is the field norm
        assert np.linalg.norm(res.fields) <= np.linalg.norm(u0) * (1 + 1e-12)


def test_mode_independence():
    _, spec, c0 = _eigen_setup()
    u0 = transforms.inverse(c0, spec.bcs)
    res = integrate(u0, spec, models.linear(0.3), 0.1, 10, Scheme.ETDCN)
    c = transforms.forward(res.fields, spec.bcs)
    mask = c0 == 0
    assert np.abs(c[mask]).max() < 1e-13


def test_mass_conservation_neumann():
    grid = build_grid(Domain((0.0, 0.0), (3.0, 2.0)), (16, 12))
    spec = build_spectrum(grid, "neumann", 1.4, (0.5, 0.2))
    # f1 = -u v, f2 = +u v: sum over species is zero pointwise
    swap = models.custom(lambda w: np.stack([-w[0] * w[1], w[0] * w[1]]), 2)
    rng = np.random.default_rng(3)
    u0 = 0.5 + 0.1 * rng.standard_normal((2, 16, 12))
    mass0 = u0.sum() * grid.cell_volume
    for scheme in Scheme:
        res = integrate(u0, spec, swap, 0.05, 40, scheme)
        mass = res.fields.sum() * grid.cell_volume
        assert abs(mass - mass0) <= 1e-12 * abs(mass0)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_coexistence_fixed_point(scheme):
    p = models.PredPreyParams()
    grid = build_grid(Domain((0.0, 0.0), (900.0, 300.0)), (32, 16))
    spec = build_spectrum(grid, "neumann", 1.5, (1.0, 1.0))
    us, vs = models.coexistence_steady_state(p)
    u0 = np.stack([np.full(grid.shape, us), np.full(grid.shape, vs)])
    res = integrate(u0, spec, models.predprey(p), 0.5, 100, scheme)
    assert np.abs(res.fields - u0).max() < 1e-8


def test_zero_steps_returns_input():
    grid, spec, _ = _eigen_setup()
    u0 = np.random.default_rng(0).standard_normal((1, 8, 6))
    res = integrate(u0, spec, models.linear(1.0), 0.1, 0)
    assert np.array_equal(res.fields, u0)
    assert res.state.k == 0


def test_step_count():
    assert step_count(1.0, 0.25) == 4
    assert step_count(400.0, 0.5) == 800
    assert step_count(10.0, 1 / 32) == 320
    assert step_count(0.0, 0.1) == 0
    with pytest.raises(ValueError, match="integer"):
        step_count(1.0, 0.3)
    with pytest.raises(ValueError):
        step_count(1.0, 0.0)


def test_deterministic_and_time_index():
    grid, spec, _ = _eigen_setup("neumann")
    u0 = 0.5 + 0.1 * np.random.default_rng(5).standard_normal((1, 8, 6))
    times = []
    sink = lambda k, t, i, f: times.append((k, t))
    a = integrate(u0, spec, models.fisher(), 0.1, 30, snapshot_every=10, sink=sink)
    b = integrate(u0, spec, models.fisher(), 0.1, 30)
    assert np.array_equal(a.fields, b.fields)
    assert times == [(k, k * 0.1) for k in (0, 10, 20, 30)]
    assert a.state.t == 30 * 0.1


def test_sink_views_readonly():
    grid, spec, _ = _eigen_setup("neumann")
    seen = []

    def sink(k, t, i, f):
        seen.append(k)
        with pytest.raises(ValueError):
            f[0, 0] = 1.0

    integrate(np.ones((1, 8, 6)), spec, models.fisher(), 0.1, 5, sink=sink)
    assert seen == [0, 5]


def test_abort_on_nonfinite_reaction():
    grid, spec, _ = _eigen_setup("neumann")
    blowup = models.custom(lambda w: np.where(w > 1.5, np.inf, w * w), 1)
    with pytest.raises(SimulationAbort) as info:
        integrate(np.ones((1, 8, 6)), spec, blowup, 0.5, 50, Scheme.ETD1)
    assert info.value.step > 0 and info.value.species == 0
    assert "step" in str(info.value)


def test_species_mismatch():
    grid, spec, _ = _eigen_setup()
    with pytest.raises(ValueError):
        Stepper(spec, models.predprey(), 0.1)


def test_single_step_helpers():
    _, spec, c0 = _eigen_setup()
    st = StepperState(0, 0.2, c0, spec)
    s1 = etd1_step(st, models.zero())
    assert s1.k == 1 and s1.t == pytest.approx(0.2)
    np.testing.assert_allclose(s1.coeffs, np.exp(-0.2 * spec.symbol) * c0)
    s2 = etdcn_step(st, models.zero())
    np.testing.assert_allclose(s2.coeffs, pade11(0.2 * spec.symbol) * c0)
    assert initial_state(transforms.inverse(c0, spec.bcs), spec, 0.2).coeffs.shape == c0.shape


def test_backends_agree_bitwise():
    from fracrd.kernels import available_backends

    grid = build_grid(Domain((0.0, 0.0), (900.0, 300.0)), (32, 16))
    cfg_fields = models.ic_condition_b(grid, *models.coexistence_steady_state(models.PredPreyParams()))
    spec = build_spectrum(grid, "neumann", 1.5, (1.0, 1.0))
    outs = [integrate(np.stack(cfg_fields), spec, models.predprey(backend=b), 0.5, 20, backend=b).fields
            for b in available_backends()]
    for o in outs[1:]:
        assert np.array_equal(o, outs[0])
