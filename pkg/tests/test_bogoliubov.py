import math

import numpy as np
import pytest
from scipy.integrate import quad

from core.bogoliubov import coefficient_sequences, dispersion, excitation_levels, ground_state_energy
from core.lattice import bracket_sum, e_lambda
from core.neumann import neumann_ground_state
from core.spectrum import enumerate_excitations
from models.energy import EnergyRegime, EnergySummary
from models.lattice_result import BracketKind
from models.potential import RadialPotential
from utils.exceptions import DomainError

pytestmark = pytest.mark.unit


class TestDispersion:

    def test_free_particles(self):
        p = np.array([1.0, 2 * math.pi, 10.0])
        assert np.allclose(dispersion(p, BracketKind.gp(0.0)), p * p, rtol=1e-15)

    def test_phonon_slope(self):
        p = 1e-4
        value = float(dispersion(np.array([p]), BracketKind.gp(1.0))[0])
        assert value / p == pytest.approx(math.sqrt(16 * math.pi), rel=1e-6)

    def test_first_shell_value(self):
        value = float(dispersion(np.array([2 * math.pi]), BracketKind.gp(1.0))[0])
        assert value == pytest.approx(math.sqrt(16 * math.pi ** 4 + 64 * math.pi ** 3), rel=1e-14)
        assert value == pytest.approx(59.52, abs=0.01)

    def test_strictly_increasing(self):
        p = np.linspace(0.1, 100.0, 500)
        for kind in [BracketKind.gp(1.0), BracketKind.beta_regime(3.0)]:
            assert np.all(np.diff(dispersion(p, kind)) > 0)
        # V̂ of this soft sphere stays positive below p = 20
        low = np.linspace(0.1, 20.0, 200)
        kind = BracketKind.mean_field(RadialPotential.soft_sphere(2.0, 0.2))
        assert np.all(np.diff(dispersion(low, kind)) > 0)

    def test_zero_momentum_rejected(self):
        with pytest.raises(DomainError):
            dispersion(np.array([0.0, 1.0]), BracketKind.gp(1.0))

    def test_negative_vhat_rejected(self):
        kind = BracketKind.mean_field(lambda p: -np.ones_like(p))
        with pytest.raises(DomainError):
            dispersion(np.array([2 * math.pi]), kind)


class TestCoefficientSequences:

    def test_tau_vanishes_without_interaction(self):
        sequences = coefficient_sequences(4 * math.pi, vhat=RadialPotential.zero())
        assert len(sequences.tau) == 32
        assert all(tau == 0.0 for tau in sequences.tau.values())

    def test_tau_identity(self):
        potential = RadialPotential.soft_sphere(1.0, 0.1)
        sequences = coefficient_sequences(4 * math.pi, vhat=potential)
        for triple, tau in sequences.tau.items():
            assert tau < 0
            p = 2 * math.pi * math.sqrt(sum(c * c for c in triple))
            v = float(potential.fourier_transform(np.array([p]))[0])
            lhs = math.sqrt(p ** 4 + 2 * p * p * v)
            rhs = (p * p + v) * math.sqrt(1.0 - math.tanh(2 * tau) ** 2)
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_tau_constant_on_shells(self):
        sequences = coefficient_sequences(4 * math.pi, vhat=RadialPotential.soft_sphere(1.0, 0.1))
        assert sequences.tau[(1, 0, 0)] == sequences.tau[(0, 0, -1)]
        assert sequences.tau[(1, 1, 0)] == sequences.tau[(0, -1, 1)]

    def test_strong_coupling_rejected(self):
        with pytest.raises(DomainError):
            coefficient_sequences(2 * math.pi, vhat=lambda p: -30.0 * np.ones_like(p))

    def test_hard_core_rejected(self):
        with pytest.raises(DomainError, match="non-integrable"):
            coefficient_sequences(2 * math.pi, vhat=RadialPotential.hard_sphere(0.1))

    def test_needs_an_input(self):
        with pytest.raises(DomainError):
            coefficient_sequences(2 * math.pi)

    def test_eta_matches_direct_quadrature(self):
        a, ell, n = 1e-3, 0.2, 10
        solution = neumann_ground_state(a, ell)
        sequences = coefficient_sequences(2 * math.pi, solution=solution, n_particles=n)
        p = 2 * math.pi

        def integrand(r):
            return 4 * math.pi * r * r * (1.0 - float(solution.f(r))) * math.sin(p * r) / (p * r)

        core, _ = quad(integrand, 0.0, a, epsabs=1e-15, epsrel=1e-12)
        outside, _ = quad(integrand, a, ell, epsabs=1e-15, epsrel=1e-12, limit=200)
        assert len(sequences.eta) == 6
        for eta in sequences.eta.values():
            assert eta == pytest.approx(-n * (core + outside), abs=1e-8)
        assert sequences.eta_zero < 0
        assert not sequences.eta_zero_used

    def test_eta_needs_small_ball_and_particle_number(self):
        with pytest.raises(DomainError):
            coefficient_sequences(2 * math.pi, solution=neumann_ground_state(0.01, 0.6), n_particles=10)
        with pytest.raises(DomainError):
            coefficient_sequences(2 * math.pi, solution=neumann_ground_state(0.01, 0.2))

    def test_rows_cover_both_sequences(self):
        sequences = coefficient_sequences(2 * math.pi, vhat=RadialPotential.soft_sphere(1.0, 0.1),
                                          solution=neumann_ground_state(1e-3, 0.2), n_particles=10)
        rows = sequences.rows()
        assert len(rows) == 6
        assert all(row["tau"] != "" and row["eta"] != "" for row in rows)


class TestGroundStateEnergy:

    def test_gp_without_interaction(self):
        summary = ground_state_energy(EnergyRegime.gp(100, 0.0))
        assert (summary.leading, summary.finite_volume, summary.correction, summary.total) == (0, 0, 0, 0)

    def test_gp_assembly(self):
        summary = ground_state_energy(EnergyRegime.gp(10_000, 1.0), threads=1)
        assert summary.leading == pytest.approx(4 * math.pi * 9999, rel=1e-15)
        assert summary.finite_volume == e_lambda(threads=1).value
        assert summary.correction == bracket_sum(BracketKind.gp(1.0), threads=1).value
        assert summary.total == summary.leading + summary.finite_volume + summary.correction
        assert summary.regime_tag == "gp"

    def test_mean_field_assembly(self):
        potential = RadialPotential.soft_sphere(1.0, 0.1)
        summary = ground_state_energy(EnergyRegime.mean_field(100, potential), threads=1)
        vhat0 = 4 * math.pi / 3 * 0.1 ** 3
        assert summary.leading == pytest.approx(99 * vhat0 / 2, rel=1e-12)
        assert summary.finite_volume == 0.0
        assert summary.correction <= 0.0
        assert summary.regime_tag == "mean_field"

    @pytest.mark.slow
    def test_beta_regime_assembly(self):
        potential = RadialPotential.soft_sphere(0.5, 1.0)
        summary = ground_state_energy(EnergyRegime.scaled(10_000, 0.5, potential), threads=1)
        assert summary.finite_volume == 0.0
        assert summary.regime_tag == "beta(0.5)"
        born = summary.details["born_partials"]
        assert summary.leading == pytest.approx(9999 * born[-1] / 2, rel=1e-15)
        assert born[-1] < born[0]

    def test_summary_round_trip(self):
        summary = EnergySummary(1.0, 0.25, -0.5, "gp")
        assert EnergySummary.from_dict(summary.to_dict()) == summary
        with pytest.raises(DomainError):
            EnergySummary(1.0, 0.25, -0.5, "mean_field")


def test_excitation_levels_shift_the_spectrum():
    summary = EnergySummary(1.0, 0.0, 0.5, "gp")
    spectrum = enumerate_excitations(BracketKind.gp(0.0), 40.0)
    levels = excitation_levels(summary, spectrum)
    assert len(levels) == 7
    assert levels[0] == (1.5, {})
    assert all(energy == pytest.approx(1.5 + 4 * math.pi ** 2) for energy, _ in levels[1:])
