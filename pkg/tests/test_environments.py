import numpy as np
import pytest

from impactbandits.environments import (
    BumpModel,
    PiecewiseLinearTwoArmModel,
    ScaledGaussianModel,
    TableModel,
    action_step,
    env_step,
    impact_update,
    initial_impact_state,
    instantaneous_utility,
    make_bump_instance,
)
from impactbandits.errors import InfeasibleInstance
from impactbandits.simplex import MetaArm


def direct_frequencies(history, gamma):
    """Eq.-style oracle: explicit weighted sums over the whole history."""
    t = history.shape[0]
    weights = gamma ** np.arange(t - 1, -1, -1, dtype=np.float64)
    if gamma == 0.0:
        weights = np.zeros(t)
        weights[-1] = 1.0
    return weights @ history / weights.sum()


def random_strategy(rng, K):
    raw = rng.random(K) + 1e-3
    return raw / raw.sum()


def replay(history, gamma):
    state = initial_impact_state(history.shape[1], gamma)
    for row in history:
        state = impact_update(state, MetaArm(row, validate=False))
    return state


class TestImpactState:
    def test_zero_discount_tracks_current_strategy(self):
        rng = np.random.default_rng(0)
        state = initial_impact_state(3, 0.0)
        for _ in range(20):
            p = random_strategy(rng, 3)
            state = impact_update(state, MetaArm(p, validate=False))
            assert np.array_equal(state.frequencies(), p)

    def test_hand_computed_two_round_history(self):
        state = initial_impact_state(2, 0.5)
        state = impact_update(state, MetaArm([1.0, 0.0]))
        state = impact_update(state, MetaArm([0.0, 1.0]))
        f = state.frequencies()
        assert f[0] == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert f[1] == pytest.approx(2.0 / 3.0, abs=1e-15)

    def test_constant_deployment_is_a_fixed_point(self):
        p = np.array([0.3, 0.2, 0.5])
        state = initial_impact_state(3, 0.7)
        for _ in range(40):
            state = impact_update(state, MetaArm(p))
            assert np.allclose(state.frequencies(), p, atol=1e-12)

    @pytest.mark.parametrize("gamma", [0.0, 0.2, 0.9])
    def test_incremental_matches_direct_summation(self, gamma):
        rng = np.random.default_rng(7)
        T, K = 10_000, 3
        history = np.vstack([random_strategy(rng, K) for _ in range(T)])
        state = initial_impact_state(K, gamma)
        check_at = set(range(1, 101)) | set(range(100, T + 1, 100))
        for t in range(1, T + 1):
            state = impact_update(state, MetaArm(history[t - 1], validate=False))
            if t in check_at:
                direct = direct_frequencies(history[:t], gamma)
                assert np.max(np.abs(state.frequencies() - direct)) < 1e-10

    def test_frequencies_stay_on_simplex(self):
        rng = np.random.default_rng(1)
        for gamma in (0.0, 0.4, 0.95):
            state = initial_impact_state(4, gamma)
            for _ in range(200):
                state = impact_update(
                    state, MetaArm(random_strategy(rng, 4), validate=False)
                )
                f = state.frequencies()
                assert abs(f.sum() - 1.0) < 1e-9
                assert np.all(f >= 0.0) and np.all(f <= 1.0)

    def test_convergence_after_constant_block(self):
        # After s constant rounds, |f - p| shrinks by gamma^s (1-g^t)/(1-g^(t+s)).
        rng = np.random.default_rng(5)
        for _ in range(100):
            gamma = rng.choice([0.2, 0.4, 0.6, 0.9])
            t = int(rng.integers(1, 300))
            s = int(rng.integers(1, 51))
            K = int(rng.integers(2, 5))
            history = np.vstack([random_strategy(rng, K) for _ in range(t)])
            state = replay(history, gamma)
            p = random_strategy(rng, K)
            gap0 = state.frequencies() - p
            for _ in range(s):
                state = impact_update(state, MetaArm(p, validate=False))
            gap = state.frequencies() - p
            bound = gamma**s * (1 - gamma**t) / (1 - gamma ** (t + s))
            assert np.max(np.abs(gap)) < gamma**s + 1e-12
            assert np.max(np.abs(gap - bound * gap0)) < 1e-10

    def test_dimension_mismatch(self):
        state = initial_impact_state(2, 0.5)
        with pytest.raises(ValueError):
            impact_update(state, MetaArm([1.0, 0.0, 0.0], validate=False))


class TestRewardModels:
    def test_lockin_instance_values(self):
        model = PiecewiseLinearTwoArmModel(0.2)
        assert model.mean(0, 0.8) == pytest.approx(1.0, abs=1e-12)
        assert model.mean(1, 0.2) == pytest.approx(0.5, abs=1e-12)
        assert model.mean(0, 1.0) == pytest.approx(0.8, abs=1e-12)

    def test_gaussian_peak_is_one(self):
        model = ScaledGaussianModel([0.45, 0.55])
        assert model.mean(0, 0.45) == 1.0
        assert model.mean(1, 0.55) == 1.0

    def test_bump_values(self):
        model = BumpModel([0.3, 0.7], eps_bump=0.1, lipschitz=[1.0, 1.0])
        assert model.mean(0, 0.3) == pytest.approx(0.6, abs=1e-12)
        assert model.mean(0, 0.45) == pytest.approx(0.5, abs=1e-12)

    def test_input_domain_enforced(self):
        model = ScaledGaussianModel([0.5])
        with pytest.raises(ValueError):
            model.mean(0, 1.2)

    @pytest.mark.parametrize(
        "model",
        [
            ScaledGaussianModel([0.45, 0.55]),
            PiecewiseLinearTwoArmModel(0.2),
            BumpModel([0.25, 0.75], eps_bump=0.25),
            TableModel(
                [
                    ([0.0, 0.3, 1.0], [0.1, 0.8, 0.4]),
                    ([0.0, 0.5, 1.0], [0.9, 0.2, 0.3]),
                ]
            ),
        ],
        ids=["gaussian", "lockin", "bump", "table"],
    )
    def test_range_and_lipschitz_on_mesh(self, model):
        xs = np.linspace(0.0, 1.0, 1001)
        for k in range(model.K):
            ys = model.mean_curve(k, xs)
            assert np.all(ys >= -1e-12) and np.all(ys <= 1.0 + 1e-12)
            steps = np.abs(np.diff(ys))
            assert np.all(steps <= model.lipschitz[k] * np.diff(xs) + 1e-9)


class TestBumpInstances:
    def test_two_arm_quarter_grid_placements(self):
        rng = np.random.default_rng(0)
        seen = set()
        for _ in range(40):
            model = make_bump_instance(2, "1/4", rng)
            seen.add(tuple(model.pstars))
        assert seen == {(0.25, 0.75), (0.75, 0.25)}

    def test_four_arm_eighth_grid_count(self):
        # sum (2j-1)/8 = 1  =>  sum j = 6 over 4 arms, C(5,3) = 10 placements.
        rng = np.random.default_rng(1)
        seen = set()
        for _ in range(600):
            model = make_bump_instance(4, "1/8", rng)
            assert np.isclose(model.pstars.sum(), 1.0)
            for p in model.pstars:
                j = (p * 8 + 1) / 2
                assert abs(j - round(j)) < 1e-12
            seen.add(tuple(np.round(model.pstars * 8).astype(int)))
        assert len(seen) == 10

    def test_infeasible_third_grid(self):
        with pytest.raises(InfeasibleInstance):
            make_bump_instance(2, "1/3", np.random.default_rng(0))


class TestEnvStep:
    def test_degenerate_activation(self):
        model = ScaledGaussianModel([0.5, 0.5])
        state = initial_impact_state(2, 0.0)
        act, rew = np.random.default_rng(0), np.random.default_rng(1)
        deployed = MetaArm([1.0, 0.0])
        for _ in range(200):
            obs, state = env_step(model, state, deployed, act, rew)
            assert obs.activated[0] and not obs.activated[1]
            assert obs.rewards[1] == 0.0

    def test_zero_discount_matches_action_path(self):
        model = ScaledGaussianModel([0.47, 0.53])
        deployments = [
            MetaArm(p)
            for p in ([0.3, 0.7], [0.5, 0.5], [0.9, 0.1], [0.25, 0.75])
        ]
        act1, rew1 = np.random.default_rng(42), np.random.default_rng(43)
        act2, rew2 = np.random.default_rng(42), np.random.default_rng(43)
        state = initial_impact_state(2, 0.0)
        rng = np.random.default_rng(9)
        for t in range(1, 1001):
            deployed = deployments[int(rng.integers(len(deployments)))]
            obs_h, state = env_step(model, state, deployed, act1, rew1)
            obs_a = action_step(model, deployed, t, act2, rew2)
            assert np.array_equal(obs_h.activated, obs_a.activated)
            assert np.array_equal(obs_h.rewards, obs_a.rewards)
            assert np.array_equal(obs_h.impact, obs_a.impact)

    def test_reward_frequency_tracks_mean(self):
        model = ScaledGaussianModel([0.45, 0.55])
        p = MetaArm([0.3, 0.7])
        state = initial_impact_state(2, 0.0)
        act, rew = np.random.default_rng(5), np.random.default_rng(6)
        hits = np.zeros(2)
        pulls = np.zeros(2)
        N = 20_000
        for _ in range(N):
            obs, state = env_step(model, state, p, act, rew)
            pulls += obs.activated
            hits += obs.rewards
        means = model.means(p.probs)
        for k in range(2):
            rate = hits[k] / pulls[k]
            stderr = np.sqrt(means[k] * (1 - means[k]) / pulls[k])
            assert abs(rate - means[k]) < 4 * stderr + 1e-9


class TestInstantaneousUtility:
    def test_constant_deployment_gives_fixed_utility(self):
        model = ScaledGaussianModel([0.45, 0.55])
        p = MetaArm([0.4, 0.6])
        expected = float(p.probs @ model.means(p.probs))
        state = initial_impact_state(2, 0.6)
        for _ in range(30):
            state = impact_update(state, p)
            assert instantaneous_utility(model, state, p) == pytest.approx(
                expected, abs=1e-12
            )

    def test_lockin_instance_after_full_commitment(self):
        model = PiecewiseLinearTwoArmModel(0.2)
        one_hot = MetaArm([1.0, 0.0])
        state = initial_impact_state(2, 0.5)
        for _ in range(200):
            state = impact_update(state, one_hot)
        assert instantaneous_utility(model, state, one_hot) == pytest.approx(
            0.8, abs=1e-9
        )

    def test_uniform_on_constant_model(self):
        xs = [0.0, 1.0]
        model = TableModel([(xs, [0.6, 0.6]), (xs, [0.6, 0.6])])
        state = initial_impact_state(2, 0.3)
        p = MetaArm([0.5, 0.5])
        state = impact_update(state, p)
        assert instantaneous_utility(model, state, p) == pytest.approx(0.6)
