import numpy as np
import pytest
from hypothesis import given, strategies as st

from nepwave.lattice import Lattice, LatticeError, laplacian, region_values, zero_field


def test_single_node_laplacian():
    lat = Lattice.chain(1, [], [0])
    assert laplacian(np.array([2 + 1j]), lat)[0] == -2 * (2 + 1j)


def test_three_node_constant_interior_vanishes():
    lat = Lattice.chain(3, [], [1])
    out = laplacian(np.ones(3, complex), lat)
    assert out[1] == 0
    assert out[0] == out[2] == -1


def test_2d_stencil_center_and_corner():
    lat = Lattice((3, 3), [], [4])
    out = laplacian(np.ones(9, complex), lat).reshape(3, 3)
    assert out[1, 1] == 0
    assert out[0, 0] == -2
    assert out[0, 1] == -1


def test_laplacian_shape_mismatch():
    with pytest.raises(ValueError):
        laplacian(np.zeros(4, complex), Lattice.chain(5, [], [0]))


def test_region_values():
    psi = np.arange(9) + 0j
    assert region_values(psi, []).shape == (0,)
    assert region_values(psi, [4]).tolist() == [4]
    assert region_values(psi, [1, 3]).tolist() == [1, 3]
    with pytest.raises(IndexError):
        region_values(psi, [9])


def test_validation_errors():
    with pytest.raises(LatticeError):
        Lattice((0, 3), [], [0])
    with pytest.raises(LatticeError):
        Lattice.chain(5, [1], [])
    with pytest.raises(LatticeError):
        Lattice.chain(5, [1, 1], [2])
    with pytest.raises(LatticeError):
        Lattice.chain(5, [1], [7])
    with pytest.raises(LatticeError):
        Lattice.chain(5, [1], [2], blocked_sites=[2])
    with pytest.raises(LatticeError):
        Lattice.chain(5, [1], [2], blocked_sites=[1])


def test_inputs_may_share_output_nodes():
    lat = Lattice.chain(5, [1, 2], [2])
    assert lat.input_sites == (1, 2)


def test_roundtrip_dict():
    lat = Lattice((2, 3), [0, 5], [2], {4}, (1, 0))
    assert Lattice.from_dict(lat.to_dict()) == lat


def _matrix(lat):
    n = lat.size
    return np.stack([laplacian(np.eye(n)[j].astype(complex), lat) for j in range(n)], axis=1)


@given(rows=st.integers(1, 4), cols=st.integers(1, 6))
def test_laplacian_matrix_real_symmetric(rows, cols):
    lat = Lattice((rows, cols), [], [0])
    L = _matrix(lat)
    assert np.all(L.imag == 0)
    assert np.array_equal(L, L.T)
    deg = 2 if rows == 1 else 4
    assert np.all(np.diag(L) == -deg)


def test_neighbor_table_matches_stencil():
    lat = Lattice((3, 4), [], [0])
    L = _matrix(lat).real
    for i in range(lat.size):
        nb = sorted(j for j in lat.neighbors[i] if j >= 0)
        assert nb == sorted(np.flatnonzero((L[i] == 1)).tolist())


@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_laplacian_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    lat = Lattice((3, 5), [], [0])
    x = rng.normal(size=15) + 1j * rng.normal(size=15)
    y = rng.normal(size=15) + 1j * rng.normal(size=15)
    lhs = laplacian(a * x + b * y, lat)
    rhs = a * laplacian(x, lat) + b * laplacian(y, lat)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_batched_laplacian(rng):
    lat = Lattice((2, 3), [], [0])
    psi = rng.normal(size=(4, 6)) + 0j
    out = laplacian(psi, lat)
    for b in range(4):
        assert np.array_equal(out[b], laplacian(psi[b], lat))


def test_blocked_sites_do_not_change_stencil():
    a = Lattice.chain(5, [0], [4])
    b = Lattice.chain(5, [0], [4], blocked_sites=[2])
    assert np.array_equal(_matrix(a), _matrix(b))


def test_zero_field():
    lat = Lattice((2, 2), [], [0])
    assert zero_field(lat, (3,)).shape == (3, 4)
