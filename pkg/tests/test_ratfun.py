import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poisson_rat.errors import (
    DuplicatePole,
    EmptyInput,
    EvalAtPole,
    RepeatedRoot,
    SamplingExhausted,
    UnsupportedOrder,
    ZeroResidue,
)
from poisson_rat.ratfun import (
    PolynomialPair,
    RationalMap,
    evaluate,
    evaluate_derivative,
    from_polynomial_pair,
    make_rational_map,
    random_instance,
    sample_external_points,
    to_polynomial_pair,
    upper_half_plane_check,
)


def test_minimal_instance():
    w = make_rational_map([0], [1])
    assert w.N == 1


def test_canonical_ordering_permutes_residues():
    w = make_rational_map([1, -1, 1j], [10, 20, 30])
    np.testing.assert_array_equal(w.poles, [-1, 1j, 1])
    np.testing.assert_array_equal(w.residues, [20, 30, 10])


@pytest.mark.parametrize("poles,residues,exc", [
    ([0, 1e-16], [1, 1], DuplicatePole),
    ([0, 1], [1, 0], ZeroResidue),
    ([], [], EmptyInput),
])
def test_construction_errors(poles, residues, exc):
    with pytest.raises(exc):
        make_rational_map(poles, residues)


def test_immutable():
    w = make_rational_map([0, 1], [1, 2])
    with pytest.raises(ValueError):
        w.poles[0] = 5


class TestEval:
    def test_single_term(self):
        assert evaluate(make_rational_map([0], [1]), 2) == -0.5

    def test_symmetric_cancellation(self):
        assert evaluate(make_rational_map([1, -1], [1, 1]), 0) == 0

    def test_direct_substitution(self):
        # 1/(-1-2) + 1/(1-2) = -4/3
        assert evaluate(make_rational_map([1, -1], [1, 1]), 2) == pytest.approx(-4 / 3, abs=1e-15)

    def test_at_pole(self):
        with pytest.raises(EvalAtPole):
            evaluate(make_rational_map([0.5], [1]), 0.5)

    def test_vectorized(self):
        w = random_instance(3, 4)
        pts = np.array([3.0, 2.5j, -3 + 1j])
        np.testing.assert_allclose(evaluate(w, pts), [evaluate(w, z) for z in pts])


class TestDerivative:
    def test_first_order(self):
        assert evaluate_derivative(make_rational_map([0], [1]), 2, 1) == pytest.approx(0.25)

    def test_second_order_sign(self):
        # w = -1/z, so w'' = -2/z^3 = -0.25 at z = 2
        w = make_rational_map([0], [1])
        h = 1e-4
        fd = (evaluate(w, 2 + h) - 2 * evaluate(w, 2) + evaluate(w, 2 - h)) / h**2
        assert fd == pytest.approx(-0.25, rel=1e-6)
        assert evaluate_derivative(w, 2, 2) == pytest.approx(-0.25, abs=1e-15)

    def test_unsupported_order(self):
        with pytest.raises(UnsupportedOrder):
            evaluate_derivative(make_rational_map([0], [1]), 2, 3)

    def test_at_pole(self):
        with pytest.raises(EvalAtPole):
            evaluate_derivative(make_rational_map([1], [1]), 1, 1)

    @pytest.mark.parametrize("seed", range(5))
    def test_central_differences(self, seed):
        w = random_instance(4, seed)
        z = sample_external_points(w, 1, seed)[0]
        h = 1e-5
        for step in (h, 1j * h):
            fd = (evaluate(w, z + step) - evaluate(w, z - step)) / (2 * step)
            d1 = evaluate_derivative(w, z, 1)
            assert abs(fd - d1) <= 1e-6 * abs(d1)


class TestPolynomialPair:
    def test_single_pole(self):
        pp = to_polynomial_pair(make_rational_map([0], [1]))
        np.testing.assert_allclose(pp.p, [0, 1])
        np.testing.assert_allclose(pp.q, [1])

    def test_two_poles(self):
        # p = z^2 - 1, q = (z + 1) + (z - 1) = 2z
        pp = to_polynomial_pair(make_rational_map([1, -1], [1, 1]))
        np.testing.assert_allclose(pp.p, [-1, 0, 1])
        np.testing.assert_allclose(pp.q, [0, 2])

    def test_inverse_single(self):
        w = from_polynomial_pair(PolynomialPair((1,), (0, 1)))
        np.testing.assert_allclose(w.poles, [0], atol=1e-15)
        np.testing.assert_allclose(w.residues, [1])

    def test_inverse_two(self):
        w = from_polynomial_pair(PolynomialPair((0, 2), (-1, 0, 1)))
        np.testing.assert_allclose(w.poles, [-1, 1], atol=1e-14)
        np.testing.assert_allclose(w.residues, [1, 1], atol=1e-14)

    def test_repeated_root(self):
        with pytest.raises(RepeatedRoot):
            from_polynomial_pair(PolynomialPair((1,), (0, 0, 1)))

    def test_validation(self):
        with pytest.raises(ValueError):
            PolynomialPair((1, 1, 1), (0, 1))
        with pytest.raises(ValueError):
            PolynomialPair((1,), (0, 2))

    @settings(max_examples=40, deadline=None)
    @given(N=st.integers(1, 8), seed=st.integers(0, 10_000))
    def test_round_trip(self, N, seed):
        w = random_instance(N, seed)
        back = from_polynomial_pair(to_polynomial_pair(w))
        np.testing.assert_allclose(back.poles, w.poles, rtol=1e-10, atol=1e-10)
        np.testing.assert_allclose(back.residues, w.residues, rtol=1e-10, atol=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(N=st.integers(1, 6), seed=st.integers(0, 10_000))
    def test_eval_matches_quotient(self, N, seed):
        w = random_instance(N, seed)
        pp = to_polynomial_pair(w)
        for z in sample_external_points(w, 4, seed):
            a, b = evaluate(w, z), pp(z)
            assert abs(a - b) <= 1e-11 * abs(a)


class TestRandomInstance:
    def test_deterministic(self):
        a, b = random_instance(1, 7, 0.5), random_instance(1, 7, 0.5)
        assert a == b

    def test_separation(self):
        w = random_instance(4, 1, 0.3)
        d = np.abs(w.poles[:, None] - w.poles[None, :])
        assert d[~np.eye(4, dtype=bool)].min() >= 0.3
        assert np.all(np.abs(w.poles) <= 2)
        assert np.all((np.abs(w.residues) >= 0.3) & (np.abs(w.residues) <= 2))

    def test_exhausted(self):
        # 50 disks of radius 0.5 do not fit in |z| <= 2.5
        with pytest.raises(SamplingExhausted):
            random_instance(50, 1, 1.0)

    def test_external_points_avoid_poles(self):
        w = random_instance(5, 3)
        pts = sample_external_points(w, 3, 3)
        for a in pts:
            assert np.min(np.abs(w.poles - a)) >= 0.3


@pytest.mark.parametrize("seed", range(5))
def test_upper_half_plane(seed):
    rng = np.random.default_rng(seed)
    w = RationalMap(rng.uniform(-2, 2, 4), rng.uniform(0.1, 2, 4))
    pts = rng.uniform(-3, 3, 50) + 1j * rng.uniform(1e-3, 3, 50)
    assert upper_half_plane_check(w, pts)


def test_json_round_trip_exact():
    w = random_instance(5, 11)
    text = w.to_json()
    assert set(json.loads(text)) == {"poles", "residues"}
    assert RationalMap.from_json(text) == w
