import itertools

import numpy as np
import pytest

from fracrd import operator
from fracrd.mesh import Domain, build_grid, build_spectrum

KINDS = ("dirichlet", "neumann")


def spectrum(n, bcs, alpha, lo=0.0, hi=1.0, D=1.0):
    d = len(bcs)
    grid = build_grid(Domain((lo,) * d, (hi,) * d), (n,) * d)
    return grid, build_spectrum(grid, bcs, alpha, D)


def test_dirichlet_eigenfunction_classical():
    grid, spec = spectrum(16, ["dirichlet"], 2.0)
    phi = np.sin(2 * np.pi * grid.nodes[0])
    np.testing.assert_allclose(operator.apply(phi, spec), -4 * np.pi ** 2 * phi, atol=1e-10)


@pytest.mark.parametrize("alpha", [1.1, 1.5, 2.0])
def test_constant_in_neumann_kernel(alpha):
    _, spec = spectrum(8, ["neumann", "neumann"], alpha)
    assert np.abs(operator.apply(np.full((8, 8), 3.0), spec)).max() < 1e-10


def test_matches_dense_oracle_1d(rng):
    _, spec = spectrum(8, ["dirichlet"], 1.5)
    f = rng.standard_normal(8)
    A = operator.dense_oracle(spec)
    np.testing.assert_allclose(operator.apply(f, spec), A @ f, atol=1e-10)


def test_dense_classical_spectrum():
    _, spec = spectrum(8, ["dirichlet"], 2.0, hi=2.0)
    eig = np.sort(np.linalg.eigvalsh(operator.dense_oracle(spec)))
    expected = np.sort(-(np.arange(1, 9) * np.pi / 2.0) ** 2)
    np.testing.assert_allclose(eig, expected, atol=1e-10)


def test_dense_neumann_single_zero_eigenvalue():
    _, spec = spectrum(6, ["neumann", "neumann"], 1.5)
    eig = np.linalg.eigvalsh(operator.dense_oracle(spec))
    assert np.count_nonzero(np.abs(eig) < 1e-10) == 1


def test_dense_power_law_between_alphas():
    _, s15 = spectrum(8, ["neumann"], 1.5)
    _, s2 = spectrum(8, ["neumann"], 2.0)
    e15 = np.sort(np.abs(np.linalg.eigvalsh(operator.dense_oracle(s15))))
    e2 = np.sort(np.abs(np.linalg.eigvalsh(operator.dense_oracle(s2))))
    np.testing.assert_allclose(e15, e2 ** 0.75, atol=1e-10)


def test_dense_is_symmetric_nsd():
    _, spec = spectrum(5, ["dirichlet", "neumann"], 1.3)
    A = operator.dense_oracle(spec)
    np.testing.assert_allclose(A, A.T, atol=1e-10)
    assert np.linalg.eigvalsh(A).max() < 1e-10


def test_dense_size_guard():
    _, spec = spectrum(65, ["neumann", "neumann"], 1.5)
    with pytest.raises(ValueError, match="4096"):
        operator.dense_oracle(spec)


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("alpha", [1.1, 1.5, 2.0])
def test_oracle_equivalence_all_bcs(rng, d, alpha):
    for bcs in itertools.product(KINDS, repeat=d):
        for n in (4, 16):
            _, spec = spectrum(n, bcs, alpha, hi=3.0, D=0.7)
            f = rng.standard_normal((n,) * d)
            dense = (operator.dense_oracle(spec) @ f.ravel()).reshape(f.shape)
            scale = spec.symbol.max() * np.abs(f).max()
            assert np.abs(operator.apply(f, spec) - dense).max() <= 1e-10 * scale


def test_self_adjoint_and_nsd(rng):
    grid, spec = spectrum(12, ["dirichlet", "neumann"], 1.4)
    w = grid.cell_volume
    for _ in range(100):
        f, g = rng.standard_normal((2, 12, 12))
        Af, Ag = operator.apply(f, spec), operator.apply(g, spec)
        lhs, rhs = w * np.sum(Af * g), w * np.sum(f * Ag)
        bound = w * np.linalg.norm(Af) * np.linalg.norm(g)
        assert abs(lhs - rhs) <= 1e-10 * bound
        assert w * np.sum(Af * f) <= 1e-10 * w * np.sum(f * f)


def test_alpha_continuity(rng):
    grid, _ = spectrum(16, ["dirichlet"], 2.0, hi=4.0)
    f = rng.standard_normal(16)
    target = operator.apply(f, build_spectrum(grid, ["dirichlet"], 2.0))
    gaps = [np.abs(operator.apply(f, build_spectrum(grid, ["dirichlet"], a)) - target).max()
            for a in (1.9, 1.99, 1.999)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_shape_mismatch_and_nan():
    _, spec = spectrum(8, ["neumann"], 1.5)
    with pytest.raises(ValueError, match="shape"):
        operator.apply(np.zeros(7), spec)
    bad = np.zeros(8)
    bad[0] = np.inf
    with pytest.raises(ValueError, match="non-finite"):
        operator.apply(bad, spec)


def test_multi_species_needs_index(rng):
    grid = build_grid(Domain((0.0,), (1.0,)), 8)
    spec = build_spectrum(grid, "neumann", 1.5, (1.0, 2.0))
    f = rng.standard_normal(8)
    with pytest.raises(ValueError):
        operator.apply(f, spec)
    np.testing.assert_allclose(operator.apply(f, spec, species=1), 2 * operator.apply(f, spec, species=0),
                               atol=1e-12)
