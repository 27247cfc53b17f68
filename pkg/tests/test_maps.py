import numpy as np
import pytest

from nclp.algebra import Element, full_matrix_algebra, make_algebra, random_element, trace
from nclp.lp import lp_norm
from nclp.maps import LinearMap, embed_matrix_block


def test_from_function_is_exact(mixed_spec, rng):
    u = Element(mixed_spec, [np.eye(c.n) * 1j for c in mixed_spec.corners])
    T = LinearMap.from_function(mixed_spec, mixed_spec, 2.0, lambda x: u @ x)
    x = random_element(mixed_spec, rng)
    assert (T(x) - u @ x).max_abs() < 1e-14


def test_shape_and_exponent_validation(mixed_spec):
    with pytest.raises(ValueError):
        LinearMap(mixed_spec, mixed_spec, 2.0, np.eye(3))
    with pytest.raises(ValueError):
        LinearMap(mixed_spec, mixed_spec, 0.5, np.eye(mixed_spec.dim))


def test_wrong_algebra_rejected(mixed_spec, rng):
    T = LinearMap.identity(mixed_spec, 1.0)
    with pytest.raises(ValueError):
        T(random_element(full_matrix_algebra(2), rng))


def test_compose_and_inverse(mixed_spec, rng):
    t = LinearMap.transpose_map(mixed_spec, 1.5)
    assert np.allclose((t @ t).matrix, np.eye(mixed_spec.dim))
    assert t.is_bijective()
    assert np.allclose(t.inverse().matrix, t.matrix)


def test_singular_inverse_raises(mixed_spec):
    zero = LinearMap(mixed_spec, mixed_spec, 1.0, np.zeros((mixed_spec.dim, mixed_spec.dim)))
    with pytest.raises(ValueError):
        zero.inverse()
    assert zero.rank() == 0


def test_adjoint_for_weighted_pairing(rng):
    src = make_algebra([(2, [0.5, 2.0])])
    tgt = make_algebra([(1, [3.0]), (2, [0.7])])
    T = LinearMap(src, tgt, 2.0, rng.normal(size=(tgt.dim, src.dim)) + 1j * rng.normal(size=(tgt.dim, src.dim)))
    Tstar = LinearMap(tgt, src, 2.0, T.adjoint_matrix())
    x, y = random_element(src, rng), random_element(tgt, rng)
    assert trace(y.H @ T(x)) == pytest.approx(trace(Tstar(y).H @ x), rel=1e-12)


@pytest.mark.parametrize("p", [1.0, 2.5])
def test_embed_matrix_block_is_isometric(rng, p):
    spec = make_algebra([(1, [1.0]), (3, [0.4])])
    gamma = embed_matrix_block(spec, 2, p)
    a = random_element(full_matrix_algebra(3), rng)
    assert lp_norm(gamma(a), p) == pytest.approx(lp_norm(a, p), rel=1e-12)
    with pytest.raises(ValueError):
        embed_matrix_block(spec, 3, p)
