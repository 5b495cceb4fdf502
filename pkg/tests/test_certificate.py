import dataclasses

import numpy as np
import pytest

from etdwave.certificate import (
    NEG_DEF_TOL,
    CertificateParams,
    FeasibilityReport,
    SearchOptions,
    audit,
    certificate_matrix,
    cholesky_negative_definite,
    decompose_certificate_matrix,
    find_feasible,
    is_negative_definite,
    max_decay_rate,
    minimal_lambda2,
    zero_decay_conditions,
)

# Reference parameter point with a positive (1,1) entry: alpha*eps*delta =
# 0.2 outweighs lambda1 = 0.1, so the matrix cannot be negative definite.
REFERENCE_POINT = CertificateParams(
    alpha=1.0, epsilon=0.8, delta=0.25, lambda1=0.1, lambda2=1.0, gamma=0.02, c_omega=1.0
)


def random_params(rng, delta_zero=False):
    """Wide log-uniform tuple; both feasible and infeasible cases occur."""
    return CertificateParams(
        alpha=10 ** rng.uniform(-1, 1),
        epsilon=10 ** rng.uniform(-2, 1),
        delta=0.0 if delta_zero else 10 ** rng.uniform(-3, 0),
        lambda1=10 ** rng.uniform(-3, 1),
        lambda2=10 ** rng.uniform(-2, 2),
        gamma=10 ** rng.uniform(-3, 0),
        c_omega=10 ** rng.uniform(-0.5, 0.5),
    )


class TestCertificateMatrix:
    def test_reference_entries(self):
        # direct substitution: eps=0.8, delta=0.25, l1=0.1, l2=1, g=0.02
        m = certificate_matrix(REFERENCE_POINT)
        assert m[0, 0] == pytest.approx(0.1, rel=1e-12)
        assert m[1, 1] == pytest.approx(0.07, rel=1e-12)
        assert m[2, 2] == pytest.approx(-1.0, rel=1e-12)
        assert m[3, 3] == pytest.approx(-0.43, rel=1e-12)
        assert m[0, 1] == pytest.approx(0.2, rel=1e-12)
        assert m[0, 2] == pytest.approx(0.4, rel=1e-12)
        assert m[1, 2] == pytest.approx(0.5, rel=1e-12)

    def test_zero_decay_entries(self):
        p = CertificateParams(
            alpha=1.0, epsilon=0.5, delta=0.0, lambda1=0.05, lambda2=5.0, gamma=0.04
        )
        assert p.gamma_bar == pytest.approx(0.2, rel=1e-12)
        m = certificate_matrix(p)
        assert m[0, 0] == pytest.approx(-0.05, rel=1e-12)
        assert m[1, 1] == pytest.approx(-0.3, rel=1e-12)
        assert m[3, 3] == pytest.approx(-0.25, rel=1e-12)
        assert m[0, 1] == 0.0

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            m = certificate_matrix(random_params(rng))
            assert np.array_equal(m, m.T)

    def test_zeroed_entries(self):
        m = certificate_matrix(REFERENCE_POINT)
        for i, j in ((0, 3), (1, 3), (2, 3)):
            assert m[i, j] == 0.0 and m[j, i] == 0.0

    @pytest.mark.parametrize("field", ["alpha", "epsilon", "lambda1", "lambda2", "gamma", "c_omega"])
    def test_rejects_nonpositive(self, field):
        with pytest.raises(ValueError, match=field):
            dataclasses.replace(REFERENCE_POINT, **{field: 0.0})

    def test_rejects_negative_delta(self):
        with pytest.raises(ValueError, match="delta"):
            dataclasses.replace(REFERENCE_POINT, delta=-0.1)

    def test_gamma_recoverable_from_gamma_bar(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            p = random_params(rng)
            assert p.gamma_bar / p.lambda2 == pytest.approx(p.gamma, rel=1e-12)


class TestDecomposition:
    def test_poincare_term(self):
        _, poincare, _ = decompose_certificate_matrix(
            dataclasses.replace(REFERENCE_POINT, lambda1=1.0, c_omega=1.0)
        )
        assert np.array_equal(poincare, np.diag([-1.0, 0.0, 0.0, 1.0]))

    def test_trigger_term(self):
        _, _, trig = decompose_certificate_matrix(
            dataclasses.replace(REFERENCE_POINT, gamma=0.02)
        )
        assert np.array_equal(trig, np.diag([0.0, 0.02, -1.0, 0.02]))

    def test_recomposition_exact(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            p = random_params(rng)
            dynamics, poincare, trig = decompose_certificate_matrix(p)
            recomposed = dynamics + p.lambda1 * poincare + p.lambda2 * trig
            assert np.array_equal(recomposed, certificate_matrix(p))


class TestNegativeDefinite:
    def test_negative_identity(self):
        feasible, margin = is_negative_definite(-np.eye(4))
        assert feasible and margin == pytest.approx(-1.0, rel=1e-12)

    def test_zero_eigenvalue_rejected(self):
        feasible, margin = is_negative_definite(np.diag([-1.0, -1.0, -1.0, 0.0]))
        assert not feasible and margin == pytest.approx(0.0, abs=1e-15)

    def test_reference_point_infeasible(self):
        # a symmetric matrix with a positive diagonal entry has a positive
        # Rayleigh quotient, so the reference point cannot be feasible
        feasible, margin = is_negative_definite(certificate_matrix(REFERENCE_POINT))
        assert not feasible and margin > 0.0

    def test_rejects_asymmetric(self):
        m = -np.eye(4)
        m[0, 1] = 1e-3
        with pytest.raises(ValueError, match="symmetric"):
            is_negative_definite(m)

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError, match="square"):
            is_negative_definite(np.zeros((3, 4)))

    def test_cholesky_agreement(self):
        rng = np.random.default_rng(3)
        for i in range(1000):
            a = rng.normal(size=(4, 4))
            m = (a + a.T) / 2.0
            if i % 2:
                # shift spectrum to produce negative definite cases too
                m -= (np.linalg.eigvalsh(m)[-1] + rng.uniform(0.1, 2.0)) * np.eye(4)
            margin = np.linalg.eigvalsh(m)[-1]
            if abs(margin) < 1e-9:  # pragma: no cover - measure-zero band
                continue
            assert cholesky_negative_definite(m) == (margin < 0.0)

    def test_scaling_does_not_change_boolean(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            m = certificate_matrix(random_params(rng))
            for scale in (3.7, 0.013, 850.0):
                assert is_negative_definite(scale * m)[0] == is_negative_definite(m)[0]


class TestZeroDecayConditions:
    def test_all_satisfied(self):
        p = CertificateParams(
            alpha=1.0, epsilon=0.5, delta=0.0, lambda1=0.05, lambda2=5.0, gamma=0.04
        )
        report = zero_decay_conditions(p)
        assert report.multipliers_positive
        assert report.velocity_residual == pytest.approx(0.3, rel=1e-12)
        assert report.gradient_residual == pytest.approx(0.25, rel=1e-12)
        assert report.schur_min_eig > 0.0
        assert report.all_satisfied

    def test_velocity_condition_fails(self):
        # epsilon above alpha: the velocity diagonal cannot be made negative
        p = CertificateParams(
            alpha=1.0, epsilon=1.2, delta=0.0, lambda1=0.05, lambda2=1e6, gamma=1e-12
        )
        report = zero_decay_conditions(p)
        assert report.velocity_residual < 0.0
        assert not report.all_satisfied

    def test_gradient_condition_fails(self):
        p = CertificateParams(
            alpha=1.0, epsilon=0.05, delta=0.0, lambda1=0.1, lambda2=1e6, gamma=1e-12
        )
        report = zero_decay_conditions(p)
        assert report.gradient_residual < 0.0
        assert not report.all_satisfied

    def test_requires_zero_delta(self):
        with pytest.raises(ValueError, match="delta"):
            zero_decay_conditions(REFERENCE_POINT)

    def test_matches_eigenvalue_predicate(self):
        rng = np.random.default_rng(2024)
        checked = 0
        for _ in range(1000):
            p = random_params(rng, delta_zero=True)
            feasible, margin = is_negative_definite(certificate_matrix(p))
            if abs(margin) < 1e-9:
                continue
            assert zero_decay_conditions(p).all_satisfied == feasible
            checked += 1
        assert checked > 900


class TestMinimalLambda2:
    def test_threshold_is_sharp(self):
        alpha, epsilon, gamma_bar, lambda1 = 1.0, 0.5, 0.1, 0.05
        lo = minimal_lambda2(alpha, epsilon, gamma_bar, lambda1)
        for factor, expect in ((1.01, True), (0.99, False)):
            lambda2 = factor * lo
            p = CertificateParams(
                alpha=alpha, epsilon=epsilon, delta=0.0, lambda1=lambda1,
                lambda2=lambda2, gamma=gamma_bar / lambda2,
            )
            assert zero_decay_conditions(p).all_satisfied is expect

    def test_rejects_invalid_window(self):
        with pytest.raises(ValueError):
            minimal_lambda2(1.0, 0.95, 0.1, 0.05)


class TestSearch:
    @pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0, 2.0, 10.0])
    def test_universal_feasibility(self, alpha):
        report = find_feasible(alpha)
        assert report.feasible
        assert report.max_eigenvalue < -NEG_DEF_TOL
        assert report.search_iterations > 0

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(ValueError, match="alpha"):
            find_feasible(0.0)
        with pytest.raises(ValueError, match="alpha"):
            find_feasible(-1.0)
        with pytest.raises(ValueError, match="c_omega"):
            find_feasible(1.0, c_omega=0.0)

    def test_example_tuple_is_admissible(self):
        p = CertificateParams(
            alpha=1.0, epsilon=0.5, delta=0.01, lambda1=0.05, lambda2=5.0, gamma=0.04
        )
        feasible, margin = is_negative_definite(certificate_matrix(p))
        assert feasible and margin < 0.0

    def test_zero_decay_always_feasible(self):
        for alpha in (0.1, 1.0, 10.0):
            params = find_feasible(alpha).params
            at_zero = dataclasses.replace(params, delta=0.0)
            feasible, _ = is_negative_definite(certificate_matrix(at_zero))
            assert feasible
            assert certificate_matrix(at_zero)[0, 0] == -params.lambda1 < 0.0

    def test_deterministic(self):
        assert find_feasible(1.0).params == find_feasible(1.0).params

    def test_max_decay_rate_positive(self):
        delta_star, params = max_decay_rate(1.0)
        assert delta_star > 0.0
        assert params.delta == delta_star
        feasible, margin = is_negative_definite(certificate_matrix(params))
        assert feasible and margin < -NEG_DEF_TOL

    def test_max_decay_rate_exceeds_backed_off(self):
        delta_star, _ = max_decay_rate(1.0)
        assert find_feasible(1.0).params.delta < delta_star

    def test_delta_feasibility_monotone(self):
        # with multipliers frozen at a feasible point, shrinking delta
        # preserves feasibility (the decay perturbation is psd for eps<=alpha)
        _, params = max_decay_rate(1.0)
        for fraction in (0.75, 0.5, 0.25, 0.0):
            smaller = dataclasses.replace(params, delta=fraction * params.delta)
            assert is_negative_definite(certificate_matrix(smaller))[0]

    def test_delta_resolution_option(self):
        coarse = max_decay_rate(1.0, options=SearchOptions(delta_resolution=1e-2))[0]
        fine = max_decay_rate(1.0, options=SearchOptions(delta_resolution=1e-4))[0]
        assert abs(coarse - fine) < 2e-2
        assert fine >= coarse - 1e-12


class TestReports:
    def test_audit_feasible_tuple(self):
        report = audit(find_feasible(1.0).params)
        assert report.feasible and report.max_eigenvalue < 0.0

    def test_kv_serialization(self):
        report = find_feasible(1.0)
        kv = dict(line.split("=", 1) for line in report.to_kv().strip().splitlines())
        for key in ("alpha", "epsilon", "delta", "lambda1", "lambda2", "gamma",
                    "c_omega", "margin", "feasible"):
            assert key in kv
        assert kv["feasible"] == "true"
        assert float(kv["margin"]) == report.max_eigenvalue
        assert float(kv["gamma"]) == report.params.gamma

    def test_dict_serialization(self):
        d = find_feasible(1.0).to_dict()
        assert d["feasible"] is True
        assert d["margin"] < 0.0

    def test_inconsistent_report_rejected(self):
        with pytest.raises(ValueError, match="margin"):
            FeasibilityReport(params=REFERENCE_POINT, max_eigenvalue=0.5, feasible=True)
