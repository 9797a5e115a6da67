import itertools
import math

import numpy as np
import pytest
from scipy.integrate import quad

from core.blocking import blocking_error
from core.estimators import b_term_raw, b_term_samples, estimate_energy, merge_estimates
from core.neumann import neumann_ground_state
from core.vmc import (acceptance_probability, dyson_gas, dyson_sweep, initial_configuration, log_weight,
                      move_log_ratio,
                      radial_histogram, run_chain, two_body_oracle)
from models.vmc_models import DysonPoint, EnergyEstimate, ParticleConfiguration, TorusGas
from utils.exceptions import AccuracyError, DomainError, SetupError


@pytest.fixture
def pair_gas():
    gas = TorusGas(1.0, 2, 0.01, 0.2)
    return gas, neumann_ground_state(gas.core_radius, gas.ell)


def estimate(a_term, b_term, std_error, n_samples, seed=0, acceptance=0.5):
    return EnergyEstimate(a_term=a_term, b_term=b_term, std_error=std_error, acceptance_rate=acceptance,
                          n_samples=n_samples, seed=seed)


@pytest.mark.unit
class TestWeights:

    def test_far_pair_has_unit_weight(self, pair_gas):
        gas, sol = pair_gas
        configuration = ParticleConfiguration([[0.1, 0.1, 0.1], [0.6, 0.6, 0.6]], 1.0)
        assert log_weight(configuration, sol, gas) == 0.0

    def test_overlap_has_zero_weight(self, pair_gas):
        gas, sol = pair_gas
        configuration = ParticleConfiguration([[0.5, 0.5, 0.5], [0.505, 0.5, 0.5]], 1.0)
        assert log_weight(configuration, sol, gas) == -math.inf
        assert not configuration.is_valid(gas.core_radius)

    def test_wrapped_pair_uses_minimum_image(self, pair_gas):
        gas, sol = pair_gas
        configuration = ParticleConfiguration([[0.02, 0.5, 0.5], [0.96, 0.5, 0.5]], 1.0)
        k = math.sqrt(sol.eigenvalue)
        c = gas.ell / math.sin(k * (gas.ell - gas.core_radius))
        expected = 2.0 * math.log(c * math.sin(k * (0.06 - gas.core_radius)) / 0.06)
        assert log_weight(configuration, sol, gas) == pytest.approx(expected, rel=1e-10)

    def test_detailed_balance_on_enumerated_moves(self):
        gas = TorusGas(1.0, 2, 0.05, 0.3)
        sol = neumann_ground_state(gas.core_radius, gas.ell)
        displacements = [np.array(d) * 0.04 for d in itertools.product((-1, 0, 1), repeat=3) if any(d)]
        checked = 0
        for offset in (0.02, 0.06, 0.1, 0.28, 0.32):
            state = np.array([[0.5, 0.5, 0.5], [0.5 + offset, 0.5, 0.5]])
            weight = math.exp(log_weight(ParticleConfiguration(state, 1.0), sol, gas))
            if weight == 0.0:
                continue
            for index in range(2):
                for d in displacements:
                    moved = state.copy()
                    moved[index] = (state[index] + d) % 1.0
                    forward = acceptance_probability(move_log_ratio(state, index, moved[index], sol, gas))
                    backward = acceptance_probability(move_log_ratio(moved, index, state[index], sol, gas))
                    moved_weight = math.exp(log_weight(ParticleConfiguration(moved, 1.0), sol, gas))
                    # the cube proposal is symmetric, so the flows need only the acceptances
                    assert weight * forward == pytest.approx(moved_weight * backward, rel=1e-10, abs=1e-300)
                    checked += 1
        assert checked == 4 * 2 * 26

    def test_move_ratio_is_weight_difference(self):
        gas = TorusGas(1.0, 4, 0.05, 0.3)
        sol = neumann_ground_state(gas.core_radius, gas.ell)
        positions = np.array([[0.1, 0.1, 0.1], [0.25, 0.1, 0.1], [0.1, 0.3, 0.1], [0.9, 0.9, 0.9]])
        trial = np.array([0.15, 0.2, 0.12])
        moved = positions.copy()
        moved[0] = trial
        before = log_weight(ParticleConfiguration(positions, 1.0), sol, gas)
        after = log_weight(ParticleConfiguration(moved, 1.0), sol, gas)
        assert move_log_ratio(positions, 0, trial, sol, gas) == pytest.approx(after - before, rel=1e-10, abs=1e-12)


@pytest.mark.unit
class TestChains:

    def test_free_gas_accepts_everything(self):
        gas = TorusGas(1.0, 4, 0.0, 0.3)
        chain = run_chain(gas, neumann_ground_state(0.0, 0.3), steps=200, burn_in=0, step_size=0.1, seed=2)
        assert chain.acceptance_rate == 1.0
        assert chain.n_samples == 200

    def test_same_seed_same_samples(self, pair_gas):
        gas, sol = pair_gas
        first = run_chain(gas, sol, steps=50, burn_in=20, step_size=0.1, seed=3)
        second = run_chain(gas, sol, steps=50, burn_in=20, step_size=0.1, seed=3)
        assert np.array_equal(first.samples, second.samples)
        assert first.step_size == second.step_size

    def test_samples_never_overlap_the_core(self):
        gas = TorusGas(1.0, 8, 0.05, 0.3)
        sol = neumann_ground_state(gas.core_radius, gas.ell)
        chain = run_chain(gas, sol, steps=300, burn_in=100, step_size=0.1, seed=1)
        assert all(chain.configuration(s, 1.0).is_valid(gas.core_radius) for s in range(chain.n_samples))

    def test_crowded_start_fails(self):
        gas = TorusGas(1.0, 9, 0.34, 0.45)
        with pytest.raises(SetupError):
            initial_configuration(gas)

    def test_initial_configuration_is_a_sublattice(self):
        configuration = initial_configuration(TorusGas(1.0, 8, 0.05, 0.3))
        assert configuration.n_particles == 8
        assert np.allclose(np.unique(configuration.positions), [0.25, 0.75])

    def test_step_size_and_solution_checked(self, pair_gas):
        gas, sol = pair_gas
        with pytest.raises(DomainError):
            run_chain(gas, sol, steps=10, burn_in=0, step_size=0.5)
        with pytest.raises(DomainError):
            run_chain(gas, neumann_ground_state(0.01, 0.3), steps=10, burn_in=0, step_size=0.1)

    def test_gas_validation(self):
        with pytest.raises(DomainError):
            TorusGas(1.0, 2, 0.2, 0.1)
        with pytest.raises(DomainError):
            TorusGas(1.0, 2, 0.01, 0.6)
        assert TorusGas(1.0, 2, 0.01, 0.5).ell == 0.5


@pytest.mark.unit
class TestEstimators:

    def test_free_gas_has_zero_energy(self):
        gas = TorusGas(1.0, 3, 0.0, 0.3)
        samples = np.random.default_rng(0).random((128, 3, 3))
        result = estimate_energy(samples, neumann_ground_state(0.0, 0.3), gas, minimum=64)
        assert result.a_term == 0.0
        assert result.b_term == 0.0
        assert result.std_error == 0.0

    def test_too_few_samples(self, pair_gas):
        gas, sol = pair_gas
        with pytest.raises(AccuracyError):
            estimate_energy(np.random.default_rng(0).random((10, 2, 3)), sol, gas, minimum=64)

    def test_two_particles_have_no_three_body_term(self, pair_gas):
        gas, sol = pair_gas
        samples = np.random.default_rng(1).random((1024, 2, 3))
        assert np.all(b_term_samples(samples, sol, gas) == 0.0)
        result = estimate_energy(samples, sol, gas, minimum=64)
        assert result.b_term == 0.0
        assert result.a_term > 0.0

    def test_symmetrized_weight_vanishes_for_isolated_pairs(self):
        gas = TorusGas(1.0, 3, 0.01, 0.1)
        sol = neumann_ground_state(gas.core_radius, gas.ell)
        # particles 0 and 1 interact, particle 2 is far from both and from their reflections
        samples = np.array([[[0.2, 0.2, 0.2], [0.25, 0.2, 0.2], [0.7, 0.7, 0.7]]])
        assert b_term_samples(samples, sol, gas)[0] == 0.0

    def test_merge_weights_by_sample_count(self):
        merged = merge_estimates([estimate(1.0, -0.5, 0.2, 100, seed=4), estimate(3.0, 0.5, 0.1, 300)])
        assert merged.a_term == pytest.approx(2.5)
        assert merged.b_term == pytest.approx(0.25)
        assert merged.std_error == pytest.approx(math.sqrt((0.25 * 0.2) ** 2 + (0.75 * 0.1) ** 2))
        assert merged.n_samples == 400
        assert merged.seed == 4

    def test_merge_needs_estimates(self):
        with pytest.raises(DomainError):
            merge_estimates([])

    def test_estimate_total_is_consistent(self):
        with pytest.raises(DomainError):
            EnergyEstimate(a_term=1.0, b_term=1.0, std_error=0.1, acceptance_rate=0.5,
                           n_samples=10, seed=0, total=3.0)


@pytest.mark.unit
class TestTwoBodyOracle:

    def test_rules_agree(self, pair_gas):
        gas, sol = pair_gas
        assert two_body_oracle(gas, sol, "quad") == pytest.approx(two_body_oracle(gas, sol, "simpson"), rel=1e-9)

    def test_free_pair(self):
        gas = TorusGas(1.0, 2, 0.0, 0.2)
        assert two_body_oracle(gas, neumann_ground_state(0.0, 0.2)) == 0.0

    def test_dilute_limit(self):
        core, ell = 1e-3, 0.1
        gas = TorusGas(1.0, 2, core, ell)
        energy = two_body_oracle(gas, neumann_ground_state(core, ell))
        assert energy == pytest.approx(8 * math.pi * core, rel=10 * core / ell)

    def test_needs_two_particles(self):
        gas = TorusGas(1.0, 3, 0.01, 0.2)
        with pytest.raises(DomainError):
            two_body_oracle(gas, neumann_ground_state(0.01, 0.2))
        with pytest.raises(DomainError):
            two_body_oracle(TorusGas(1.0, 2, 0.01, 0.2), neumann_ground_state(0.01, 0.2), "trapezoid")


@pytest.mark.unit
def test_dyson_gas_geometry():
    gas = dyson_gas(1e-6)
    assert gas.n_particles == 8
    assert gas.density == 8.0
    assert gas.core_radius == pytest.approx(0.005)
    assert gas.ell == 0.5
    with pytest.raises(DomainError):
        dyson_gas(0.0)


@pytest.mark.unit
def test_dyson_point_ratios():
    gas = dyson_gas(1e-6)
    reference = 4 * math.pi * gas.core_radius * 8.0 * 8
    point = DysonPoint(1e-6, gas, estimate(reference, 0.0, 0.01, 100))
    assert point.ratio_n == pytest.approx(1.0)
    assert point.ratio_pairs == pytest.approx(8 / 7)
    assert point.to_dict()["ratio_pairs"] == point.ratio_pairs


@pytest.mark.slow
def test_pair_distance_histogram(pair_gas):
    gas, sol = pair_gas
    chain = run_chain(gas, sol, steps=40_000, burn_in=1000, step_size=0.1, seed=5)
    samples = chain.samples[::10]
    counts, edges = radial_histogram(samples, gas, bins=10)
    excluded = 4.0 / 3.0 * math.pi * gas.ell ** 3 - quad(
        lambda r: 4 * math.pi * r * r * float(sol.f(r)) ** 2, gas.core_radius, gas.ell)[0]
    normalization = gas.volume - excluded
    for count, lo, hi in zip(counts, edges[:-1], edges[1:]):
        mass, _ = quad(lambda r: 4 * math.pi * r * r * float(sol.f(r)) ** 2, lo, hi)
        expected = len(samples) * mass / normalization
        assert abs(count - expected) <= 6.0 * math.sqrt(max(expected, 1.0))


@pytest.mark.slow
def test_two_body_energy_matches_oracle(pair_gas):
    gas, sol = pair_gas
    chain = run_chain(gas, sol, steps=250_000, burn_in=2000, step_size=0.1, seed=11)
    result = estimate_energy(chain, sol, gas, minimum=64)
    oracle = two_body_oracle(gas, sol)
    assert abs(result.total - oracle) <= 3.0 * result.std_error
    assert result.std_error / result.total < 0.02


@pytest.fixture(scope="module")
def dilute_points():
    return dyson_sweep([1e-4, 1e-5, 1e-6], steps=20_000, burn_in=500, seed=1)


@pytest.mark.slow
def test_dilute_sweep_approaches_the_two_body_law(dilute_points):
    for point in dilute_points:
        relative_error = point.estimate.std_error / point.estimate.total
        # ρ^{1/3}·core = (ρ·core³)^{1/3}
        assert 1.0 - 3.0 * relative_error <= point.ratio_pairs <= 1.0 + 10.0 * point.rho_core3 ** (1.0 / 3.0)


@pytest.mark.slow
def test_three_body_term_is_small(dilute_points):
    # ρ·core·ℓ² = (ρ·core³)^{1/3} at ℓ = ρ^{-1/3}
    fitted = max(abs(p.estimate.b_term) / (p.estimate.a_term * p.rho_core3 ** (1.0 / 3.0)) for p in dilute_points)
    assert fitted <= 10.0


@pytest.mark.slow
def test_error_shrinks_when_samples_double(pair_gas):
    gas, sol = pair_gas
    short = estimate_energy(run_chain(gas, sol, steps=2 ** 16, burn_in=1000, step_size=0.1, seed=21), sol, gas)
    long = estimate_energy(run_chain(gas, sol, steps=2 ** 17, burn_in=1000, step_size=0.1, seed=22), sol, gas)
    assert short.std_error / long.std_error == pytest.approx(math.sqrt(2.0), rel=0.25)


@pytest.mark.slow
def test_symmetrized_three_body_term_keeps_the_mean():
    gas = TorusGas(1.0, 4, 0.05, 0.3)
    sol = neumann_ground_state(gas.core_radius, gas.ell)
    chain = run_chain(gas, sol, steps=4000, burn_in=500, step_size=0.1, seed=9)
    symmetric = b_term_samples(chain.samples, sol, gas)
    raw = b_term_raw(chain.samples, sol, gas)
    difference = blocking_error(raw - symmetric, minimum=64)
    assert abs(difference.mean) <= 4.0 * difference.std_error + 1e-12
    assert np.var(symmetric) <= np.var(raw)
