"""Divergence properties: hand-computed values, identities, and edge cases."""

import math

import numpy as np
import pytest

from sipsolve import DiscreteMeasure, b_divergence, h_func, kl_divergence


class TestHFunc:
    def test_zero_at_equal_masses(self):
        assert h_func(1.0, 1.0) == 0.0
        assert h_func(3.7, 3.7) == pytest.approx(0.0, abs=1e-15)

    def test_zero_mass_limit(self):
        # continuous extension: h(0, r) = r exactly
        assert h_func(0.0, 2.0) == 2.0

    def test_hand_value(self):
        # 2*log(2) - 2 + 1 computed by hand
        assert h_func(2.0, 1.0) == pytest.approx(0.3862943611198906, abs=1e-15)

    def test_nonnegative_on_random_pairs(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            rho, rho_p = rng.uniform(0.0, 5.0), rng.uniform(1e-6, 5.0)
            assert h_func(rho, rho_p) >= 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            h_func(-0.1, 1.0)
        with pytest.raises(ValueError):
            h_func(1.0, 0.0)
        with pytest.raises(ValueError):
            h_func(math.nan, 1.0)


class TestKl:
    def test_zero_on_identical(self):
        p = np.array([0.2, 0.3, 0.5])
        assert kl_divergence(p, p) == 0.0

    def test_hand_value(self):
        # 0.5*log(2) + 0.5*log(2/3) computed by hand
        got = kl_divergence([0.5, 0.5], [0.25, 0.75])
        assert got == pytest.approx(0.14384103622589042, abs=1e-15)

    def test_infinite_off_support(self):
        assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_zero_atoms_ignored(self):
        assert kl_divergence([0.0, 1.0], [0.5, 0.5]) == pytest.approx(
            math.log(2.0)
        )

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            kl_divergence([0.5, 0.6], [0.5, 0.5])
        with pytest.raises(ValueError):
            kl_divergence([0.5, 0.5], [0.5, 0.6])

    def test_nonnegative_on_random_pairs(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            n = int(rng.integers(2, 20))
            p = rng.random(n)
            q = rng.random(n) + 1e-9
            assert kl_divergence(p / p.sum(), q / q.sum()) >= 0.0


class TestBDivergence:
    def test_zero_on_identical(self):
        lam = np.array([0.1, 2.0, 0.7])
        assert b_divergence(lam, lam) == 0.0

    def test_hand_value_uniform_masses(self):
        # uniform 4-atom vectors with masses 3 and 2: shape term vanishes,
        # leaving 3*log(3/2) - 1 by hand
        lam = np.full(4, 0.75)
        gam = np.full(4, 0.5)
        assert b_divergence(lam, gam) == pytest.approx(
            0.21639532432449355, abs=1e-14
        )

    def test_infinite_when_not_absolutely_continuous(self):
        assert b_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_zero_candidate_atoms_allowed(self):
        # lam may vanish where gam does not; those atoms contribute gam
        got = b_divergence([0.0, 1.0], [0.5, 1.0])
        assert got == pytest.approx(0.5)

    def test_matches_kl_for_probability_pairs(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n = int(rng.integers(2, 30))
            p = rng.random(n) + 1e-9
            q = rng.random(n) + 1e-9
            p, q = p / p.sum(), q / q.sum()
            assert abs(b_divergence(p, q) - kl_divergence(p, q)) <= 1e-12

    def test_mass_shape_decomposition(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            n = int(rng.integers(2, 40))
            lam = rng.random(n) * rng.uniform(0.05, 4.0)
            gam = rng.random(n) * rng.uniform(0.05, 4.0) + 1e-9
            rho, rho_p = lam.sum(), gam.sum()
            b = b_divergence(lam, gam)
            split = rho * kl_divergence(lam / rho, gam / rho_p) + h_func(
                rho, rho_p
            )
            assert b == pytest.approx(split, rel=1e-10, abs=1e-12)

    def test_mass_weighted_pinsker(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            n = int(rng.integers(2, 40))
            lam = rng.random(n) * rng.uniform(0.05, 4.0)
            gam = rng.random(n) * rng.uniform(0.05, 4.0) + 1e-9
            bound = np.abs(lam - gam).sum() ** 2 / (
                2.0 * max(lam.sum(), gam.sum())
            )
            assert b_divergence(lam, gam) - bound >= -1e-10

    def test_convex_in_first_argument(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            n = int(rng.integers(2, 40))
            a = rng.random(n) * 2.0
            b = rng.random(n) * 2.0
            gam = rng.random(n) + 1e-9
            t = rng.random()
            mixed = b_divergence(t * a + (1.0 - t) * b, gam)
            combo = t * b_divergence(a, gam) + (1.0 - t) * b_divergence(b, gam)
            assert mixed <= combo + 1e-10

    def test_three_point_identity(self):
        # b(lam, gam) = b(lam, u) - b(gam, u) - <log(gam/u), lam - gam>
        rng = np.random.default_rng(6)
        for _ in range(300):
            n = int(rng.integers(2, 40))
            lam = rng.random(n) * 2.0 + 1e-9
            gam = rng.random(n) * 2.0 + 1e-9
            u = rng.random(n) + 1e-9
            lhs = b_divergence(lam, gam)
            rhs = (
                b_divergence(lam, u)
                - b_divergence(gam, u)
                - float(np.log(gam / u) @ (lam - gam))
            )
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)

    def test_rejects_negative_weights(self):
        with pytest.raises(ValueError):
            b_divergence([-0.1, 0.5], [0.5, 0.5])


class TestDiscreteMeasure:
    def test_mass_and_normalize(self):
        m = DiscreteMeasure([1.0, 3.0])
        assert m.mass == 4.0
        assert np.allclose(m.normalized().weights, [0.25, 0.75])

    def test_weights_read_only(self):
        m = DiscreteMeasure([1.0, 2.0])
        with pytest.raises(ValueError):
            m.weights[0] = 5.0

    def test_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            DiscreteMeasure([1.0, -1.0])
        with pytest.raises(ValueError):
            DiscreteMeasure([1.0, math.inf])
        with pytest.raises(ValueError):
            DiscreteMeasure([])

    def test_zero_measure_cannot_normalize(self):
        with pytest.raises(ValueError):
            DiscreteMeasure([0.0, 0.0]).normalized()
