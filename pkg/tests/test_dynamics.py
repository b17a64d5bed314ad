import math

import numpy as np
import pytest

from epidyn import (
    ConfigError,
    ConstantLikelihood,
    DiscreteConcepts,
    GaussianPeakLikelihood,
    KnowledgeFunction,
    KnowledgeSetting,
    PopulationState,
    Sample,
    SimulationConfig,
    agent_streams,
    draw_individual,
    draw_sample,
    draw_social,
    experience_kernel,
    grid_setting,
    least_squares_update,
    run,
    step,
)


def rng_for(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def two_agent_state(a=2.0, b=6.0, n_exp=5):
    setting = grid_setting(n_exp)
    return PopulationState(
        [
            KnowledgeFunction.constant(setting, a),
            KnowledgeFunction.constant(setting, b),
        ]
    )


class TestDrawSocial:
    def test_single_agent_echoes_own_table(self):
        setting = grid_setting(4)
        k = KnowledgeFunction(setting, [1.0, 2.0, 3.0, 4.0])
        state = PopulationState([k])
        rng = rng_for(1)
        for _ in range(50):
            e, c = draw_social(0, state, np.array([[1.0]]), rng)
            assert c[0] == k.values[e, 0]

    def test_point_mass_row_sources_one_agent_uniform_experiences(self):
        # degenerate row always picks agent 0; experience counts should pass
        # a 3-sigma multinomial check over 10^4 draws
        state = two_agent_state(3.0, -7.0, n_exp=5)
        learning = np.array([[1.0, 0.0], [1.0, 0.0]])
        rng = rng_for(2)
        n = 10_000
        counts = np.zeros(5)
        for _ in range(n):
            e, c = draw_social(1, state, learning, rng)
            counts[e] += 1
            assert c[0] == 3.0  # only agent 0's table can be sourced
        expect = n / 5
        sigma = math.sqrt(n * 0.2 * 0.8)
        assert np.all(np.abs(counts - expect) <= 3 * sigma)

    def test_consensus_state_returns_shared_concept(self):
        state = two_agent_state(4.0, 4.0)
        rng = rng_for(3)
        for _ in range(20):
            e, c = draw_social(0, state, np.full((2, 2), 0.5), rng)
            assert c[0] == 4.0

    def test_zero_concepts_are_reported(self):
        setting = grid_setting(2)
        state = PopulationState([KnowledgeFunction.zero(setting)])
        rng = rng_for(4)
        e, c = draw_social(0, state, np.array([[1.0]]), rng)
        assert np.all(c == 0.0)


class TestDrawIndividual:
    def test_newborn_falls_back_to_uniform_experiences(self):
        setting = grid_setting(5)
        state = PopulationState([KnowledgeFunction.zero(setting)])
        rng = rng_for(5)
        n = 10_000
        counts = np.zeros(5)
        cs = []
        for _ in range(n):
            e, c = draw_individual(0, state, sigma_e=1.0, sigma_c=0.1, rng=rng)
            counts[e] += 1
            cs.append(c[0])
        sigma = math.sqrt(n * 0.2 * 0.8)
        assert np.all(np.abs(counts - n / 5) <= 3 * sigma)
        # concepts hover around the origin with spread sigma_c
        cs = np.asarray(cs)
        assert abs(cs.mean()) <= 3 * 0.1 / math.sqrt(n) + 1e-3
        assert cs.std() == pytest.approx(0.1, rel=0.05)

    def test_narrow_experience_kernel_concentrates(self):
        setting = grid_setting(5)
        values = np.zeros((5, 1))
        values[2, 0] = 1.0  # only experience index 2 conceptualized
        state = PopulationState([KnowledgeFunction(setting, values)])
        rng = rng_for(6)
        hits = sum(
            draw_individual(0, state, sigma_e=1e-3, sigma_c=0.1, rng=rng)[0] == 2
            for _ in range(300)
        )
        assert hits == 300

    def test_narrow_concept_kernel_recovers_current_value(self):
        setting = grid_setting(3)
        state = PopulationState([KnowledgeFunction.constant(setting, 2.5)])
        rng = rng_for(7)
        for _ in range(50):
            _, c = draw_individual(0, state, sigma_e=1.0, sigma_c=1e-9, rng=rng)
            assert c[0] == pytest.approx(2.5, abs=1e-6)

    def test_discrete_concepts_weighted_by_proximity(self):
        setting = KnowledgeSetting(
            [[0.0], [1.0]], DiscreteConcepts([[0.0], [1.0], [5.0]])
        )
        state = PopulationState(
            [KnowledgeFunction(setting, [[1.0], [1.0]])]
        )
        rng = rng_for(8)
        draws = np.array(
            [
                draw_individual(0, state, sigma_e=1.0, sigma_c=0.5, rng=rng)[1][0]
                for _ in range(2000)
            ]
        )
        # weights at distance 0, 1, 4 with sigma_c = 0.5
        w = np.exp(-np.array([1.0, 0.0, 16.0]) / (2 * 0.25))
        p1 = w[1] / w.sum()
        got = (draws == 1.0).mean()
        assert got == pytest.approx(p1, abs=3 * math.sqrt(p1 * (1 - p1) / 2000))

    def test_draws_stay_inside_box(self):
        setting = KnowledgeSetting(
            np.arange(1.0, 4.0)[:, None],
            __import__("epidyn").BoxConcepts([-0.2], [0.2]),
        )
        state = PopulationState([KnowledgeFunction.constant(setting, 0.19)])
        rng = rng_for(9)
        for _ in range(500):
            _, c = draw_individual(0, state, sigma_e=1.0, sigma_c=0.5, rng=rng)
            assert -0.2 <= c[0] <= 0.2


class TestDrawSample:
    def cfg(self, **kw):
        base = dict(tau=0.0, sample_size=50)
        base.update(kw)
        return SimulationConfig(**base)

    def test_tau_zero_draws_only_social(self):
        # with a newborn population, social draws are exactly zero while
        # individual draws are continuous and almost surely nonzero
        setting = grid_setting(5)
        state = PopulationState([KnowledgeFunction.zero(setting)] * 2)
        learning = np.full((2, 2), 0.5)
        sample = draw_sample(0, state, self.cfg(tau=0.0, sample_size=200), learning, rng_for(10))
        assert len(sample) == 200
        assert np.all(sample.concepts == 0.0)

    def test_tau_one_draws_only_individual(self):
        setting = grid_setting(5)
        state = PopulationState([KnowledgeFunction.zero(setting)] * 2)
        learning = np.full((2, 2), 0.5)
        sample = draw_sample(0, state, self.cfg(tau=1.0, sample_size=200), learning, rng_for(11))
        assert np.all(sample.concepts != 0.0)

    def test_individual_count_is_binomial(self):
        # total individual draws over many samples ~ Binomial(K*m, tau)
        setting = grid_setting(5)
        state = PopulationState([KnowledgeFunction.zero(setting)] * 2)
        learning = np.full((2, 2), 0.5)
        cfg = self.cfg(tau=0.02, sample_size=500)
        rng = rng_for(12)
        reps = 100
        total = 0
        for _ in range(reps):
            sample = draw_sample(0, state, cfg, learning, rng)
            total += int(np.count_nonzero(np.any(sample.concepts != 0.0, axis=1)))
        n, p = reps * 500, 0.02
        z = (total - n * p) / math.sqrt(n * p * (1 - p))
        assert abs(z) <= 3.0

    def test_drop_zero_social_filters_pairs(self):
        setting = grid_setting(5)
        values = np.zeros((5, 1))
        values[0, 0] = 3.0
        state = PopulationState([KnowledgeFunction(setting, values)] * 2)
        learning = np.full((2, 2), 0.5)
        cfg = self.cfg(tau=0.0, sample_size=300, drop_zero_social=True)
        sample = draw_sample(0, state, cfg, learning, rng_for(13))
        assert 0 < len(sample) < 300
        assert np.all(sample.concepts == 3.0)
        assert np.all(sample.experience_indices == 0)

    def test_sample_length_and_pairs_iteration(self):
        state = two_agent_state()
        sample = draw_sample(
            0, state, self.cfg(sample_size=7), np.full((2, 2), 0.5), rng_for(14)
        )
        assert len(sample) == 7
        assert len(list(sample.pairs())) == 7


class TestLeastSquaresUpdate:
    def test_mean_plus_retention(self):
        setting = grid_setting(2)
        k_prev = KnowledgeFunction(setting, [0.0, 9.0])
        sample = Sample([0, 0], [[4.0], [6.0]])
        k = least_squares_update(k_prev, sample)
        assert k.values[0, 0] == 5.0
        assert k.values[1, 0] == 9.0

    def test_observations_matching_prev_are_a_fixed_point(self):
        setting = grid_setting(3)
        k_prev = KnowledgeFunction(setting, [1.0, 2.0, 3.0])
        sample = Sample([0, 1, 2, 1], [[1.0], [2.0], [3.0], [2.0]])
        k = least_squares_update(k_prev, sample)
        assert np.array_equal(k.values, k_prev.values)

    def test_discrete_majority_vote_via_squared_distance(self):
        setting = KnowledgeSetting(
            [[0.0]], DiscreteConcepts([[0.0], [1.0], [2.0]])
        )
        k_prev = KnowledgeFunction(setting, [[0.0]])
        sample = Sample([0, 0, 0], [[1.0], [1.0], [2.0]])
        k = least_squares_update(k_prev, sample)
        # candidate sums of squared distances: 0 -> 6, 1 -> 1, 2 -> 2
        assert k.values[0, 0] == 1.0

    def test_discrete_tie_breaks_to_lowest_index(self):
        setting = KnowledgeSetting(
            [[0.0]], DiscreteConcepts([[0.0], [1.0], [3.0]])
        )
        k_prev = KnowledgeFunction(setting, [[0.0]])
        # mean of observations is 2, equidistant from 1 and 3
        sample = Sample([0, 0], [[1.0], [3.0]])
        k = least_squares_update(k_prev, sample)
        assert k.values[0, 0] == 1.0

    def test_empty_sample_returns_previous(self):
        k_prev = KnowledgeFunction(grid_setting(2), [1.0, 2.0])
        sample = Sample(np.empty(0, dtype=int), np.empty((0, 1)))
        assert least_squares_update(k_prev, sample) is k_prev

    def test_means_clamped_to_box(self):
        setting = KnowledgeSetting(
            [[0.0]], __import__("epidyn").BoxConcepts([-1.0], [1.0])
        )
        k_prev = KnowledgeFunction(setting, [[0.0]])
        sample = Sample([0], [[1.0]])
        assert least_squares_update(k_prev, sample).values[0, 0] == 1.0


class TestStep:
    def test_consensus_is_absorbing_exactly(self):
        setting = grid_setting(5)
        state = PopulationState([KnowledgeFunction.constant(setting, 3.7)] * 4)
        cfg = SimulationConfig(tau=0.0, sample_size=20)
        gamma = np.ones((4, 4))
        out = step(state, cfg, gamma, ConstantLikelihood(1.0), agent_streams(0, 0, 4))
        assert np.array_equal(out.values, state.values)
        assert out.t == state.t + 1

    def test_single_agent_is_absorbing(self):
        state = PopulationState([KnowledgeFunction.constant(grid_setting(3), -2.0)])
        cfg = SimulationConfig(tau=0.0, sample_size=10)
        out = step(state, cfg, np.array([[1.0]]), ConstantLikelihood(1.0), agent_streams(0, 0, 1))
        assert np.array_equal(out.values, state.values)

    def test_values_remain_in_population_envelope(self):
        # pure social learning can never escape current min/max per component
        rng = np.random.default_rng(15)
        setting = grid_setting(4)
        values = rng.uniform(-10, 10, size=(5, 4, 1))
        state = PopulationState.from_values(setting, values)
        cfg = SimulationConfig(tau=0.0, sample_size=30)
        gamma = rng.uniform(0.1, 1.0, size=(5, 5))
        rngs = agent_streams(3, 0, 5)
        for _ in range(10):
            lo, hi = state.values.min(axis=0), state.values.max(axis=0)
            state = step(state, cfg, gamma, ConstantLikelihood(1.0), rngs)
            assert np.all(state.values >= lo - 1e-12)
            assert np.all(state.values <= hi + 1e-12)

    def test_mean_consensus_distance_decreases(self):
        # two-agent symmetric blend: averaged over replicates the distance
        # to shared knowledge shrinks every step over t in [0, 20]
        from epidyn import consensus_distance

        gamma = np.array([[0.5, 0.5], [0.5, 0.5]])
        cfg = SimulationConfig(tau=0.0, sample_size=50, c_min=0.1, horizon=20, replicates=100)
        state = two_agent_state()
        result = run(cfg, gamma, ConstantLikelihood(1.0), state)
        means = result.trace.mean_column("d_consensus")
        assert np.all(np.diff(means) < 0.0)

    def test_step_equals_per_agent_least_squares(self):
        # the batched refit inside step must match drawing the same samples
        # from cloned streams and applying the single-agent update
        from epidyn import compute_credibility, compute_social_learning

        rng = np.random.default_rng(44)
        setting = grid_setting(6)
        values = rng.uniform(-10, 10, size=(4, 6, 1))
        state = PopulationState.from_values(setting, values)
        gamma = rng.uniform(0.1, 1.0, size=(4, 4))
        cfg = SimulationConfig(tau=0.3, sample_size=25, c_min=0.05)
        landscape = ConstantLikelihood(0.9)

        out = step(state, cfg, gamma, landscape, agent_streams(21, 5, 4))

        cred = compute_credibility(state.functions, landscape, cfg.c_min)
        learning = compute_social_learning(gamma, cred)
        kernel = experience_kernel(setting, cfg.sigma_e)
        rngs = agent_streams(21, 5, 4)
        for i in range(4):
            sample = draw_sample(i, state, cfg, learning, rngs[i], kernel=kernel)
            expected = least_squares_update(state.functions[i], sample)
            assert np.array_equal(out.functions[i].values, expected.values)

    def test_rejects_mismatched_shapes(self):
        state = two_agent_state()
        cfg = SimulationConfig()
        with pytest.raises(ConfigError):
            step(state, cfg, np.ones((3, 3)), ConstantLikelihood(1.0), agent_streams(0, 0, 2))
        with pytest.raises(ConfigError):
            step(state, cfg, np.ones((2, 2)), ConstantLikelihood(1.0), agent_streams(0, 0, 3))


class TestRun:
    def small_cfg(self, **kw):
        base = dict(tau=0.0, sample_size=10, horizon=5, replicates=3, seed=42)
        base.update(kw)
        return SimulationConfig(**base)

    def test_identical_seeds_reproduce_bitwise(self):
        state = two_agent_state()
        gamma = np.array([[0.7, 0.3], [0.3, 0.7]])
        a = run(self.small_cfg(), gamma, ConstantLikelihood(1.0), state)
        b = run(self.small_cfg(), gamma, ConstantLikelihood(1.0), state)
        assert np.array_equal(a.trace.rows, b.trace.rows, equal_nan=True)
        assert np.array_equal(a.final_values, b.final_values)

    def test_first_replicate_stream_independent_of_count(self):
        state = two_agent_state()
        gamma = np.array([[0.7, 0.3], [0.3, 0.7]])
        one = run(self.small_cfg(replicates=1), gamma, ConstantLikelihood(1.0), state)
        two = run(self.small_cfg(replicates=2), gamma, ConstantLikelihood(1.0), state)
        assert np.array_equal(one.trace.replicate(0), two.trace.replicate(0), equal_nan=True)

    def test_trace_covers_initial_state_and_every_step(self):
        state = two_agent_state()
        gamma = np.full((2, 2), 0.5)
        result = run(self.small_cfg(horizon=7), gamma, ConstantLikelihood(1.0), state)
        assert list(result.trace.times) == list(range(8))
        assert result.trace.rows.shape == (3 * 8, 5)

    def test_observer_sees_every_recorded_state(self):
        seen = []
        state = two_agent_state()
        run(
            self.small_cfg(replicates=2, horizon=4),
            np.full((2, 2), 0.5),
            ConstantLikelihood(1.0),
            state,
            observer=lambda r, s: seen.append((r, s.t)),
        )
        assert seen == [(r, t) for r in range(2) for t in range(5)]

    def test_parallel_matches_sequential(self):
        state = two_agent_state()
        gamma = np.array([[0.7, 0.3], [0.3, 0.7]])
        seq = run(self.small_cfg(replicates=4), gamma, ConstantLikelihood(1.0), state)
        par = run(self.small_cfg(replicates=4), gamma, ConstantLikelihood(1.0), state, n_jobs=2)
        assert np.array_equal(seq.trace.rows, par.trace.rows, equal_nan=True)

    def test_regression_to_learning_matrix_mean(self):
        # pure social sampling: per-experience sample means estimate the
        # learning-matrix blend of the population tables
        from epidyn import compute_credibility, compute_social_learning

        rng = rng_for(77)
        setting = grid_setting(5)
        values = np.array([[1.0, 2.0, 3.0, 4.0, 5.0], [5.0, 4.0, 3.0, 2.0, 1.0], [0.0, 0.0, 0.0, 0.0, 0.0]])
        state = PopulationState.from_values(setting, values)
        gamma = np.array([[1.0, 0.5, 0.2]] * 3)
        cred = compute_credibility(state.functions, ConstantLikelihood(1.0), 0.1)
        learning = compute_social_learning(gamma, cred)
        m = 100_000
        cfg = SimulationConfig(tau=0.0, sample_size=m)
        sample = draw_sample(0, state, cfg, learning, rng)
        blend = np.einsum("j,jel->el", learning[0], state.values)
        for e in range(5):
            sel = sample.experience_indices == e
            got = sample.concepts[sel].mean()
            # exact per-draw variance of the concept at e
            var = np.einsum("j,j->", learning[0], (state.values[:, e, 0] - blend[e, 0]) ** 2)
            se = math.sqrt(var / sel.sum())
            assert abs(got - blend[e, 0]) <= 3 * se


class TestConfigValidation:
    @pytest.mark.parametrize(
        "kw",
        [
            dict(tau=-0.1),
            dict(tau=1.1),
            dict(sample_size=0),
            dict(sigma_e=0.0),
            dict(sigma_c=-1.0),
            dict(c_min=-0.5),
            dict(horizon=0),
            dict(replicates=0),
            dict(metric_variant="median"),
        ],
    )
    def test_bad_fields_rejected(self, kw):
        with pytest.raises(ConfigError):
            SimulationConfig(**kw).validate()

    def test_all_violations_reported_together(self):
        with pytest.raises(ConfigError) as err:
            SimulationConfig(tau=2.0, sample_size=0, horizon=-1).validate()
        msg = str(err.value)
        assert "tau" in msg and "sample_size" in msg and "horizon" in msg

    def test_population_requires_shared_setting(self):
        a = KnowledgeFunction.constant(grid_setting(3), 1.0)
        b = KnowledgeFunction.constant(grid_setting(3), 1.0)
        with pytest.raises(ConfigError):
            PopulationState([a, b])

    def test_sample_shape_checked(self):
        with pytest.raises(ConfigError):
            Sample([0, 1], [[1.0]])


class TestStreams:
    def test_streams_are_agent_independent(self):
        # agent 1's draws do not depend on whether agent 0 drew first
        a0, a1 = agent_streams(9, 0, 2)
        b0, b1 = agent_streams(9, 0, 2)
        _ = a0.random(1000)
        assert np.array_equal(a1.random(5), b1.random(5))

    def test_kernel_is_symmetric_unit_diagonal(self):
        K = experience_kernel(grid_setting(6), 1.5)
        assert np.array_equal(K, K.T)
        assert np.all(np.diag(K) == 1.0)
