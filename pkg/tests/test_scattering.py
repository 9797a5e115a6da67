import math

import numpy as np
import pytest

from core.scattering import (fourier_coefficient, scale_potential, scattering_length,
                             soft_sphere_scattering_length)
from models.potential import PotentialKind, RadialPotential, ScaledRegime, parse_potential
from utils.exceptions import ConfigurationError, DomainError

pytestmark = pytest.mark.unit


@pytest.fixture
def soft():
    return RadialPotential.soft_sphere(2.0, 1.0)


@pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
def test_hard_sphere_length_is_radius(radius):
    solution = scattering_length(RadialPotential.hard_sphere(radius), r_max=10.0 * radius)
    assert solution.scattering_length == pytest.approx(radius, rel=1e-10)
    assert solution.converged


def test_zero_potential_has_trivial_solution():
    solution = scattering_length(RadialPotential.zero())
    assert solution.scattering_length == 0.0
    assert np.all(solution.profile == 1.0)


def test_soft_sphere_closed_form(soft):
    expected = 1.0 - math.tanh(1.0)
    assert soft_sphere_scattering_length(2.0, 1.0) == pytest.approx(expected, rel=1e-15)
    assert scattering_length(soft).scattering_length == pytest.approx(expected, abs=1e-8)


def test_profile_matches_asymptote_beyond_support(soft):
    solution = scattering_length(soft)
    a = solution.scattering_length
    outside = solution.radii >= 3.0
    r = solution.radii[outside]
    assert np.allclose(solution.profile[outside], 1.0 - a / r, atol=1e-7)
    assert np.all(solution.profile >= 0.0) and np.all(solution.profile <= 1.0)


def test_profile_at_origin_is_finite(soft):
    with np.errstate(invalid="raise"):
        solution = scattering_length(soft)
    assert solution.radii[0] == 0.0
    assert np.all(np.isfinite(solution.profile))
    assert solution.profile[0] == pytest.approx(1.0 / math.cosh(1.0), rel=1e-6)


def test_tabulated_constant_table_matches_soft_sphere():
    table = RadialPotential.tabulated([(0.0, 2.0), (1.0, 2.0)])
    assert table.support_radius == 1.0
    assert scattering_length(table).scattering_length == pytest.approx(1.0 - math.tanh(1.0), rel=1e-4)


def test_r_max_must_exceed_twice_support(soft):
    with pytest.raises(DomainError):
        scattering_length(soft, r_max=1.5)


def test_nonpositive_tolerance_rejected(soft):
    with pytest.raises(DomainError):
        scattering_length(soft, tol=0.0)


@pytest.mark.parametrize("n", [100, 10_000])
def test_gp_scaling_identity(soft, n):
    scaled = scale_potential(soft, ScaledRegime(n, 1.0))
    assert scaled.support_radius == pytest.approx(1.0 / n)
    a_scaled = scattering_length(scaled).scattering_length
    assert n * a_scaled == pytest.approx(1.0 - math.tanh(1.0), rel=1e-6)


def test_hard_sphere_scaling_shrinks_radius():
    scaled = scale_potential(RadialPotential.hard_sphere(1.0), ScaledRegime(50, 1.0))
    assert scaled.kind == PotentialKind.HARD_SPHERE
    assert scaled.radius == pytest.approx(1.0 / 50)


def test_beta_zero_divides_height(soft):
    scaled = scale_potential(soft, ScaledRegime(8, 0.0))
    assert scaled.height == pytest.approx(2.0 / 8)
    assert scaled.radius == 1.0


def test_born_bound_and_monotone_height():
    lengths = []
    for height in [0.5, 2.0, 10.0, 100.0]:
        potential = RadialPotential.soft_sphere(height, 1.0)
        a = scattering_length(potential).scattering_length
        assert a <= fourier_coefficient(potential, 0.0) / (8.0 * math.pi)
        lengths.append(a)
    assert np.all(np.diff(lengths) > 0)


def test_very_high_wall_approaches_radius():
    a = scattering_length(RadialPotential.soft_sphere(1e6, 1.0)).scattering_length
    assert a == pytest.approx(1.0, rel=1e-2)


def test_fourier_at_zero_is_volume_integral():
    potential = RadialPotential.soft_sphere(3.0, 0.5)
    expected = 3.0 * 4.0 / 3.0 * math.pi * 0.5 ** 3
    assert fourier_coefficient(potential, 0.0) == pytest.approx(expected, rel=1e-12)
    assert float(potential.fourier_transform(np.array([0.0]))[0]) == pytest.approx(expected, rel=1e-12)


def test_fourier_of_unit_ball_at_pi():
    # 4π(sin p - p cos p)/p³ at p = π
    value = fourier_coefficient(RadialPotential.soft_sphere(1.0, 1.0), math.pi)
    assert value == pytest.approx(4.0 / math.pi, abs=1e-9)


def test_fourier_quadrature_matches_closed_form():
    potential = RadialPotential.tabulated([(0.0, 3.0), (0.4, 1.0), (0.9, 0.5), (1.2, 0.0)])
    for p in [0.0, 0.1, 2.5, 17.0]:
        closed = float(potential.fourier_transform(np.array([p]))[0])
        assert fourier_coefficient(potential, p) == pytest.approx(closed, rel=1e-9, abs=1e-12)


def test_fourier_of_zero_potential():
    assert fourier_coefficient(RadialPotential.zero(), 3.0) == 0.0


def test_fourier_rejects_hard_sphere():
    with pytest.raises(DomainError, match="non-integrable potential"):
        fourier_coefficient(RadialPotential.hard_sphere(1.0), 0.0)


def test_parse_potential_mini_language(tmp_path):
    assert parse_potential("hard:1.5") == RadialPotential.hard_sphere(1.5)
    assert parse_potential("soft:2,1") == RadialPotential.soft_sphere(2.0, 1.0)
    assert parse_potential("zero").is_trivial
    table = tmp_path / "v.txt"
    table.write_text("# r v\n0.0 1.0\n0.5 1.0\n")
    loaded = parse_potential(f"table:{table}")
    assert loaded.kind == PotentialKind.TABULATED
    assert loaded.support_radius == 0.5


@pytest.mark.parametrize("text", ["soft:abc", "cube:1", "hard:"])
def test_parse_potential_rejects_malformed(text):
    with pytest.raises(ConfigurationError):
        parse_potential(text)


def test_negative_table_values_rejected():
    with pytest.raises(DomainError):
        RadialPotential.tabulated([(0.0, 1.0), (1.0, -0.5)])


def test_potential_dict_round_trip():
    potential = RadialPotential.tabulated([(0.0, 1.0), (0.5, 0.25)])
    assert RadialPotential.from_dict(potential.to_dict()) == potential
