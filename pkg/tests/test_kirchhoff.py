import math

import numpy as np
import pytest

from fracwell import (
    KirchhoffFn, check_hypotheses, k_antideriv, k_eval, scaling_suite,
)
from fracwell.kirchhoff import KirchhoffError


class TestEvaluation:
    def test_affine_power_value(self):
        K = KirchhoffFn.affine_power(1.0, 1.0, 1.0)
        assert k_eval(K, 2.0) == pytest.approx(3.0)
        assert k_eval(K, 0.0) == pytest.approx(1.0)

    def test_log1p_vanishes_at_zero(self):
        assert k_eval(KirchhoffFn.log1p(), 0.0) == 0.0

    def test_negative_argument_rejected(self):
        with pytest.raises(KirchhoffError):
            k_eval(KirchhoffFn.constant(), -0.1)

    def test_array_evaluation(self):
        K = KirchhoffFn.affine_power(2.0, 3.0, 2.0)
        z = np.array([0.0, 1.0, 2.0])
        assert np.allclose(k_eval(K, z), 2.0 + 3.0 * z ** 2)

    def test_invalid_kind(self):
        with pytest.raises(KirchhoffError, match="unknown Kirchhoff kind"):
            KirchhoffFn(kind="quadratic")


class TestAntiderivative:
    def test_affine_closed_form(self):
        K = KirchhoffFn.affine_power(1.0, 1.0, 1.0)
        assert k_antideriv(K, 2.0) == pytest.approx(4.0)

    def test_zero_argument(self):
        for K in (KirchhoffFn.constant(), KirchhoffFn.log1p()):
            assert k_antideriv(K, 0.0) == 0.0

    def test_log1p_closed_form(self):
        assert k_antideriv(KirchhoffFn.log1p(), 1.0) == pytest.approx(2 * math.log(2) - 1)

    def test_table_exact_for_piecewise_linear(self):
        # an affine coefficient tabulated on its own breakpoints integrates exactly
        z = np.linspace(0.0, 10.0, 21)
        K_exact = KirchhoffFn.affine_power(2.0, 0.5, 1.0, beta=1.0)
        K_tab = KirchhoffFn.from_table(z, k_eval(K_exact, z), beta=1.0)
        for zz in (0.0, 0.3, 2.75, 10.0):
            assert k_antideriv(K_tab, zz) == pytest.approx(k_antideriv(K_exact, zz), rel=1e-14)
        # beyond the table the coefficient extends as a constant
        assert k_antideriv(K_tab, 12.0) == pytest.approx(
            k_antideriv(K_tab, 10.0) + k_eval(K_tab, 10.0) * 2.0, rel=1e-14)

    def test_consistency_with_derivative(self):
        rng = np.random.default_rng(1)
        for K in (KirchhoffFn.affine_power(1.0, 2.0, 1.7, beta=2.0),
                  KirchhoffFn.log1p(beta=1.0)):
            for _ in range(100):
                z = float(np.exp(rng.uniform(np.log(1e-3), np.log(1e3))))
                d = 1e-6 * (1.0 + z)
                fd = (k_antideriv(K, z + d) - k_antideriv(K, z - d)) / (2 * d)
                assert fd == pytest.approx(k_eval(K, z), rel=1e-6)


class TestHypotheses:
    def test_affine_with_matching_beta(self):
        rep = check_hypotheses(KirchhoffFn.affine_power(1.0, 1.0, 2.0, beta=2.0))
        assert rep.both_ok

    def test_affine_with_too_small_beta(self):
        # K(z)/z = 1/z + z has a minimum at z = 1: not monotone
        rep = check_hypotheses(KirchhoffFn.affine_power(1.0, 1.0, 2.0, beta=2.0), beta=1.0)
        assert rep.monotone_ok and not rep.homogeneity_ok

    def test_log1p(self):
        rep = check_hypotheses(KirchhoffFn.log1p(beta=1.0))
        assert rep.both_ok

    def test_constant_boundary_case(self):
        assert check_hypotheses(KirchhoffFn.constant(2.0)).both_ok

    def test_empty_sample_rejected(self):
        with pytest.raises(KirchhoffError, match="two samples"):
            check_hypotheses(KirchhoffFn.constant(), count=1)


class TestScalingSuite:
    def _all_ok(self, checks):
        return all(c.ok for c in checks if c.applicable)

    def test_constant_coefficient_equality_case(self):
        # constant K with beta 0: the antiderivative sandwich is an equality
        checks = {c.name: c for c in scaling_suite(KirchhoffFn.constant(1.0), 0.0, 0.5, 3.0)}
        assert checks["khat_between"].ok
        assert abs(checks["khat_between"].residual) <= 1e-12
        assert self._all_ok(checks.values())

    def test_affine_upper_scale_example(self):
        # K(t) = 1 + t, beta 1, mu 2, z 1: K(2) = 3 <= 2 * K(1) = 4
        K = KirchhoffFn.affine_power(1.0, 1.0, 1.0, beta=1.0)
        checks = {c.name: c for c in scaling_suite(K, 1.0, 2.0, 1.0)}
        assert checks["k_scale_upper"].applicable and checks["k_scale_upper"].ok
        assert not checks["k_scale_lower"].applicable

    def test_mu_one_degenerate_equalities(self):
        K = KirchhoffFn.log1p(beta=1.0)
        for c in scaling_suite(K, 1.0, 1.0, 2.5):
            assert c.ok
            if c.name in ("k_scale_lower", "k_scale_upper",
                          "khat_scale_lower", "khat_scale_upper"):
                assert abs(c.residual) <= 1e-12

    def test_negative_mu_rejected(self):
        with pytest.raises(KirchhoffError):
            scaling_suite(KirchhoffFn.constant(), 0.0, -1.0, 1.0)

    @pytest.mark.parametrize("family", ["affine", "log1p"])
    def test_thousand_random_pairs(self, family):
        rng = np.random.default_rng(42 if family == "affine" else 43)
        violations = 0
        for _ in range(1000):
            if family == "affine":
                c = rng.uniform(0.2, 3.0)
                K = KirchhoffFn.affine_power(
                    a=rng.uniform(0.1, 5.0), b=rng.uniform(0.1, 5.0), c=c,
                    beta=c * rng.uniform(1.0, 1.5))
            else:
                K = KirchhoffFn.log1p(beta=rng.uniform(1.0, 3.0))
            mu = float(np.exp(rng.uniform(np.log(1e-3), np.log(1e3))))
            z = float(np.exp(rng.uniform(np.log(1e-6), np.log(1e6))))
            violations += sum(
                1 for chk in scaling_suite(K, K.beta, mu, z) if chk.applicable and not chk.ok
            )
        assert violations == 0


def test_antiderivative_midpoint_convexity():
    # Khat is convex exactly when K is non-decreasing
    rng = np.random.default_rng(7)
    K = KirchhoffFn.affine_power(1.0, 2.0, 1.3, beta=1.3)
    for _ in range(200):
        x = float(np.exp(rng.uniform(np.log(1e-3), np.log(1e3))))
        y = float(np.exp(rng.uniform(np.log(1e-3), np.log(1e3))))
        mid = k_antideriv(K, 0.5 * (x + y))
        avg = 0.5 * (k_antideriv(K, x) + k_antideriv(K, y))
        assert mid <= avg * (1 + 1e-12)


def test_beta_validation():
    with pytest.raises(KirchhoffError):
        KirchhoffFn.constant().__class__(kind="log1p", beta=-0.5)
