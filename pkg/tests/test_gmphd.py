import numpy as np
import pytest

from longtrack import gmphd
from longtrack.errors import NoEstimateError, NumericalError
from longtrack.gmphd import (
    ClutterModel,
    GaussianComponent,
    birth_components,
    default_motion_model,
    max_weight_estimate,
    predict,
    prune_and_merge,
    update,
)


def kalman_step(mean, cov, z, model):
    """Textbook predict + update, the oracle for the single-target reduction."""
    mp = model.F @ mean
    pp = model.Q + model.F @ cov @ model.F.T
    s = model.R + model.H @ pp @ model.H.T
    gain = pp @ model.H.T @ np.linalg.inv(s)
    mu = mp + gain @ (z - model.H @ mp)
    pu = (np.eye(4) - gain @ model.H) @ pp
    return mu, 0.5 * (pu + pu.T)


class TestBirth:
    def test_one_component_per_measurement(self):
        assert len(birth_components([(1.0, 2.0)])) == 1
        assert len(birth_components([(0, 0)] * 5)) == 5
        assert birth_components([]) == []

    def test_zero_velocity_mean(self):
        comp = birth_components([(10.0, 20.0)])[0]
        assert np.allclose(comp.mean, [10.0, 20.0, 0.0, 0.0])

    def test_weight_and_cov(self):
        comp = birth_components([(0, 0)], birth_cov=(4, 4, 9, 9),
                                birth_weight=0.25)[0]
        assert comp.weight == 0.25
        assert np.allclose(comp.cov, np.diag([4, 4, 9, 9]))


class TestPredict:
    def test_identity_dynamics_keeps_components(self):
        model = default_motion_model(p_survival=1.0)
        model.F = np.eye(4)
        model.Q = np.zeros((4, 4))
        comp = GaussianComponent(0.5, np.array([1., 2., 3., 4.]),
                                 np.diag([1., 1., 1., 1.]))
        out = predict([comp], model)
        assert len(out) == 1
        assert out[0].weight == 0.5
        assert np.allclose(out[0].mean, comp.mean)
        assert np.allclose(out[0].cov, comp.cov)

    def test_survival_scales_weight(self):
        model = default_motion_model(p_survival=0.99)
        comp = GaussianComponent(1.0, np.zeros(4), np.eye(4))
        assert predict([comp], model)[0].weight == pytest.approx(0.99)

    def test_constant_velocity_mean(self):
        model = default_motion_model()
        comp = GaussianComponent(1.0, np.array([0., 0., 2., 3.]), np.eye(4))
        out = predict([comp], model)
        assert np.allclose(out[0].mean, [2., 3., 2., 3.])

    def test_births_appended_unchanged(self):
        model = default_motion_model()
        births = birth_components([(5.0, 6.0)])
        out = predict([], model, births)
        assert len(out) == 1
        assert np.allclose(out[0].mean, [5., 6., 0., 0.])
        assert out[0].weight == births[0].weight


class TestUpdate:
    def test_kalman_oracle_single_component(self):
        model = default_motion_model(p_survival=1.0, p_detect=1.0)
        clutter = ClutterModel(0.0, 1.0)
        comp = GaussianComponent(1.0, np.array([3., 4., 0., 0.]),
                                 np.diag([25., 25., 25., 25.]))
        z = np.array([5.5, 2.5])
        predicted = predict([comp], model)
        posterior = update(predicted, [z], model, clutter)
        # missed-detection copy has weight 0 when p_d = 1
        live = [c for c in posterior if c.weight > 0]
        assert len(live) == 1
        assert live[0].weight == pytest.approx(1.0, abs=1e-12)
        mu, pu = kalman_step(comp.mean, comp.cov, z, model)
        assert np.abs(live[0].mean - mu).max() < 1e-9
        assert np.abs(live[0].cov - pu).max() < 1e-9

    def test_no_measurements_scales_by_miss_probability(self):
        model = default_motion_model(p_detect=0.9)
        comps = [GaussianComponent(w, np.zeros(4), np.eye(4))
                 for w in (0.2, 0.7)]
        out = update(comps, [], model, ClutterModel(4.0, 100.0))
        assert [c.weight for c in out] == pytest.approx([0.02, 0.07])

    def test_identical_components_get_equal_weights(self):
        model = default_motion_model()
        comps = [GaussianComponent(0.4, np.array([1., 1., 0., 0.]), np.eye(4))
                 for _ in range(2)]
        out = update(comps, [np.array([1.5, 0.5])], model,
                     ClutterModel(4.0, 100.0))
        updated = out[2:]
        assert updated[0].weight == pytest.approx(updated[1].weight)

    def test_singular_innovation_raises_with_index(self):
        model = default_motion_model()
        model.R = np.zeros((2, 2))
        bad = GaussianComponent(1.0, np.zeros(4), np.zeros((4, 4)))
        with pytest.raises(NumericalError, match="component 0"):
            update([bad], [np.zeros(2)], model, ClutterModel(0.0, 1.0))

    def test_exact_normalization_without_clutter(self):
        model = default_motion_model(p_detect=1.0)
        comp = GaussianComponent(1.0, np.zeros(4), np.eye(4))
        out = update([comp], [np.array([0.1, -0.2])], model,
                     ClutterModel(0.0, 1.0))
        assert sum(c.weight for c in out) == pytest.approx(1.0, abs=1e-12)


class TestPruneAndMerge:
    def test_weak_components_pruned(self):
        comps = [GaussianComponent(0.5, np.zeros(4), np.eye(4)),
                 GaussianComponent(1e-6, np.ones(4), np.eye(4))]
        out = prune_and_merge(comps, 1e-5, 4.0, 100)
        assert len(out) == 1
        assert out[0].weight == pytest.approx(0.5)

    def test_identical_components_merge(self):
        mean = np.array([1., 2., 0., 0.])
        comps = [GaussianComponent(0.3, mean.copy(), np.eye(4))
                 for _ in range(2)]
        out = prune_and_merge(comps, 1e-5, 4.0, 100)
        assert len(out) == 1
        assert out[0].weight == pytest.approx(0.6)
        assert np.allclose(out[0].mean, mean)
        assert np.allclose(out[0].cov, np.eye(4))

    def test_far_components_stay_separate(self):
        comps = [GaussianComponent(0.3, np.zeros(4), np.eye(4)),
                 GaussianComponent(0.4, np.array([100., 0., 0., 0.]),
                                   np.eye(4))]
        out = prune_and_merge(comps, 1e-5, 4.0, 100)
        assert len(out) == 2

    def test_weight_conserved_pre_cap(self, rng):
        for _ in range(50):
            n = rng.integers(1, 20)
            comps = []
            for _ in range(n):
                a = rng.standard_normal((4, 4))
                comps.append(GaussianComponent(
                    float(rng.uniform(0, 2)),
                    rng.uniform(-50, 50, 4),
                    a @ a.T + 0.5 * np.eye(4)))
            kept = [c for c in comps if c.weight >= 1e-5]
            out = prune_and_merge(comps, 1e-5, 4.0, 10**9)
            assert sum(c.weight for c in out) == pytest.approx(
                sum(c.weight for c in kept), abs=1e-9)

    def test_cap_keeps_heaviest(self):
        comps = [GaussianComponent(w, np.array([100. * i, 0., 0., 0.]),
                                   np.eye(4))
                 for i, w in enumerate((0.1, 0.9, 0.5))]
        out = prune_and_merge(comps, 1e-5, 4.0, 2)
        assert [c.weight for c in out] == [0.9, 0.5]

    def test_merged_moments_match(self):
        c1 = GaussianComponent(0.6, np.array([0., 0., 0., 0.]), np.eye(4))
        c2 = GaussianComponent(0.2, np.array([1., 0., 0., 0.]), np.eye(4))
        out = prune_and_merge([c1, c2], 1e-5, 10.0, 100)
        assert len(out) == 1
        w = 0.8
        mean = (0.6 * c1.mean + 0.2 * c2.mean) / w
        cov = (0.6 * (c1.cov + np.outer(mean - c1.mean, mean - c1.mean))
               + 0.2 * (c2.cov + np.outer(mean - c2.mean, mean - c2.mean))) / w
        assert np.allclose(out[0].mean, mean)
        assert np.allclose(out[0].cov, cov)


class TestMaxWeightEstimate:
    def test_picks_heaviest(self):
        comps = [GaussianComponent(w, np.array([float(i), 0., 0., 0.]),
                                   np.eye(4))
                 for i, w in enumerate((0.2, 0.7, 0.1))]
        (x, y), w = max_weight_estimate(comps)
        assert (x, y, w) == (1.0, 0.0, 0.7)

    def test_single_component(self):
        comps = birth_components([(3.5, 4.5)])
        (x, y), _ = max_weight_estimate(comps)
        assert (x, y) == (3.5, 4.5)

    def test_scaling_invariance(self):
        comps = [GaussianComponent(w, np.array([float(i), 0., 0., 0.]),
                                   np.eye(4))
                 for i, w in enumerate((0.2, 0.7, 0.1))]
        scaled = [GaussianComponent(3 * c.weight, c.mean, c.cov)
                  for c in comps]
        assert max_weight_estimate(scaled)[0] == max_weight_estimate(comps)[0]

    def test_empty_mixture_raises(self):
        with pytest.raises(NoEstimateError):
            max_weight_estimate([])

    def test_tie_breaks_to_lowest_index(self):
        comps = [GaussianComponent(0.5, np.array([1., 0., 0., 0.]), np.eye(4)),
                 GaussianComponent(0.5, np.array([2., 0., 0., 0.]), np.eye(4))]
        assert max_weight_estimate(comps)[0] == (1.0, 0.0)


class TestFilterCycles:
    def test_kalman_reduction_over_sequence(self, rng):
        model = default_motion_model(p_survival=1.0, p_detect=1.0)
        clutter = ClutterModel(0.0, 1.0)
        mean = np.array([10., 20., 1., -1.])
        cov = np.diag([25., 25., 25., 25.])
        mixture = [GaussianComponent(1.0, mean.copy(), cov.copy())]
        k_mean, k_cov = mean.copy(), cov.copy()
        truth = mean.copy()
        for _ in range(50):
            truth = model.F @ truth
            z = truth[:2] + rng.normal(0, 3, 2)
            mixture = prune_and_merge(
                update(predict(mixture, model), [z], model, clutter),
                1e-5, 4.0, 100)
            k_mean, k_cov = kalman_step(k_mean, k_cov, z, model)
            (x, y), w = max_weight_estimate(mixture)
            assert abs(x - k_mean[0]) < 1e-9
            assert abs(y - k_mean[1]) < 1e-9
            assert w == pytest.approx(1.0, abs=1e-9)

    def test_weights_finite_and_covs_positive_definite(self, rng):
        model = default_motion_model()
        clutter = ClutterModel(4.0, 640 * 480)
        mixture = birth_components([(100.0, 100.0)])
        pos = np.array([100.0, 100.0])
        for step in range(1000):
            pos = pos + rng.normal(0, 2, 2)
            births = birth_components([pos + rng.normal(0, 1, 2)])
            predicted = predict(mixture, model, births)
            posterior = update(predicted, [pos], model, clutter)
            mixture = prune_and_merge(posterior, 1e-5, 4.0, 100)
            for c in mixture:
                assert np.isfinite(c.weight) and c.weight >= 0
                assert np.abs(c.cov - c.cov.T).max() < 1e-9
                assert np.linalg.eigvalsh(c.cov).min() > 1e-12
