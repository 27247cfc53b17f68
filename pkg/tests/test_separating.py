import numpy as np
import pytest

from nclp.algebra import Element, full_matrix_algebra, make_algebra, random_algebra, random_element
from nclp.lp import lp_norm
from nclp.maps import LinearMap
from nclp.separating import (DecompositionError, NotSeparatingError, build_yeadon_map, decompose_bijective,
                             extract_yeadon, inverse_analysis, is_jordan, is_separating, jordan_split,
                             kernel_summand, random_bijective_separating, random_disjoint_pair,
                             random_yeadon_triple, separating_norm)


def test_identity_triple(mixed_spec):
    tri = extract_yeadon(LinearMap.identity(mixed_spec, 2.0))
    one = Element.identity(mixed_spec)
    assert (tri.w - one).max_abs() < 1e-12
    assert (tri.B - one).max_abs() < 1e-12
    assert tri.kind == "both" or tri.kind == "direct"


def test_transpose_is_anti_direct():
    tri = extract_yeadon(LinearMap.transpose_map(full_matrix_algebra(2), 1.0))
    assert tri.kind == "anti-direct"


def test_non_separating_map_detected():
    spec = full_matrix_algebra(2)
    # x -> tr(x) 1 sends the disjoint units e11, e22 to the same element
    T = LinearMap.from_function(spec, spec, 1.0, lambda x: complex(np.trace(x.data[0])) * Element.identity(spec))
    res = is_separating(T)
    assert not res.separating
    assert res.witness is not None
    with pytest.raises(NotSeparatingError):
        extract_yeadon(T)


def test_random_disjoint_pair_is_disjoint(mixed_spec, rng):
    for _ in range(10):
        x, y = random_disjoint_pair(mixed_spec, rng)
        assert (x.H @ y).max_abs() < 1e-12 and (x @ y.H).max_abs() < 1e-12


def test_invalid_triple_rejected(mixed_spec, rng):
    J = LinearMap.identity(mixed_spec, 2.0)
    w = random_element(mixed_spec, rng)  # not a partial isometry
    with pytest.raises(ValueError):
        build_yeadon_map(w, Element.identity(mixed_spec), J, 2.0)


@pytest.mark.parametrize("kind", ["direct", "anti", "mixed"])
def test_round_trip_and_norm(rng, kind):
    for _ in range(5):
        src = random_algebra(rng, max_n=3, max_dim=10)
        tri = random_yeadon_triple(src, rng, 1.5, kind=kind)
        T = build_yeadon_map(tri.w, tri.B, tri.J, 1.5)
        assert is_separating(T).separating
        got = extract_yeadon(T)
        assert (got.B - tri.B).max_abs() < 1e-9
        # the exact norm dominates every sampled ratio and is attained on a corner unit
        norm = separating_norm(T)
        for _ in range(10):
            x = random_element(src, rng)
            assert lp_norm(T(x), 1.5) <= norm * lp_norm(x, 1.5) * (1 + 1e-10)
        best = max(lp_norm(T(Element.corner_projection(src, [k])), 1.5)
                   / lp_norm(Element.corner_projection(src, [k]), 1.5) for k in range(len(src.corners)))
        assert best == pytest.approx(norm, rel=1e-10)


def test_jordan_split_of_direct_sum():
    spec = make_algebra([(3, [1.0]), (2, [1.0])])
    J = LinearMap.from_function(spec, spec, 1.0, lambda x: Element(spec, [x.data[0], x.data[1].T]))
    assert is_jordan(J)
    sp = jordan_split(J)
    assert (sp.e - Element.corner_projection(spec, [0])).max_abs() < 1e-8
    assert (sp.f - Element.corner_projection(spec, [1])).max_abs() < 1e-8


def test_decompose_recovers_planted(rng):
    for _ in range(10):
        src = random_algebra(rng, max_n=3, max_dim=18)
        pb = random_bijective_separating(src, rng, 2.0)
        split = decompose_bijective(pb.T)
        assert split.direct_corners == sorted(pb.alpha_corners)
        assert split.anti_corners == sorted(pb.beta_corners)
        assert split.checks["reassembly"] < 1e-10


def test_decompose_rejects_non_bijective(mixed_spec):
    zero = LinearMap(mixed_spec, mixed_spec, 1.0, np.zeros((mixed_spec.dim,) * 2))
    with pytest.raises(DecompositionError):
        decompose_bijective(zero)


def test_inverse_of_central_anti_part_matches(rng):
    src = make_algebra([(2, [1.0]), (3, [0.5])])
    for _ in range(5):
        pb = random_bijective_separating(src, rng, 1.5, anti_w="central")
        rep = inverse_analysis(pb.T)
        assert rep.separating and rep.j_inverse_matches and rep.twisted_matches


def test_inverse_jordan_part_is_twisted_on_anti_direct_summand():
    # T(x) = diag(1, i) x^T on M_2: T^{-1} is separating, yet its Jordan part is
    # Ad(v*) o J^{-1} with v = J^{-1}(w*) non-central, so J' != J^{-1}
    spec = full_matrix_algebra(2)
    d = np.diag([1.0, 1j])
    T = LinearMap.from_function(spec, spec, 1.0, lambda x: Element(spec, [d @ x.data[0].T]))
    rep = inverse_analysis(T)
    assert rep.separating
    assert not rep.j_inverse_matches
    assert rep.residuals["JprimeJ_minus_id"] > 1
    assert rep.twisted_matches
    assert rep.residuals["twist_residual"] < 1e-12


def test_generic_anti_part_always_twisted(rng):
    for _ in range(8):
        src = random_algebra(rng, max_n=3, max_dim=18)
        pb = random_bijective_separating(src, rng, 2.0, anti_w="generic")
        rep = inverse_analysis(pb.T)
        assert rep.separating and rep.twisted_matches


def test_kernel_summand(rng):
    spec = make_algebra([(1, [1.0]), (2, [1.0, 2.0])])
    # kill the middle corner, keep the others
    def fn(x):
        return Element(spec, [x.data[0], np.zeros((2, 2)), x.data[2]])
    ks = kernel_summand(LinearMap.from_function(spec, spec, 1.0, fn))
    assert ks.kernel_corners == [1]
    assert ks.checks["nullity"] == ks.checks["dim_M0"] == 4
