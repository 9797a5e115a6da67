"""Domain types of the torus Monte Carlo: gas parameters, configurations, chains and estimates."""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from utils.exceptions import DomainError


@dataclass(frozen=True)
class TorusGas:
    """N hard spheres of radius ``core_radius`` in the torus [0, L)³, correlated up to ``ell``."""
    box_side: float
    n_particles: int
    core_radius: float
    ell: float

    def __post_init__(self):
        if self.box_side <= 0:
            raise DomainError(f"Box side must be positive, got {self.box_side}")
        if self.n_particles < 1:
            raise DomainError(f"N must be at least 1, got {self.n_particles}")
        if self.core_radius < 0:
            raise DomainError(f"Core radius must be non-negative, got {self.core_radius}")
        if not self.core_radius < self.ell:
            raise DomainError(f"Need core radius {self.core_radius:g} < ell {self.ell:g}")
        # ℓ = L/2 is allowed: the correlation ball still fits the minimum-image cell
        if self.ell > 0.5 * self.box_side:
            raise DomainError(f"ell {self.ell:g} exceeds L/2 = {0.5 * self.box_side:g}; minimum image breaks down")
        if self.density * self.core_radius ** 3 >= 1.0:
            raise DomainError(f"rho·core³ = {self.density * self.core_radius ** 3:g} is not dilute (must be < 1)")

    @property
    def density(self) -> float:
        return self.n_particles / self.box_side ** 3

    @property
    def volume(self) -> float:
        return self.box_side ** 3

    def to_dict(self) -> Dict[str, Any]:
        return {"N": self.n_particles, "L": self.box_side, "core": self.core_radius,
                "ell": self.ell, "rho": self.density}


def minimum_image(delta: np.ndarray, box_side: float) -> np.ndarray:
    """Shortest periodic representative of displacement vectors."""
    return delta - box_side * np.round(delta / box_side)


@dataclass
class ParticleConfiguration:
    """Positions of N particles in [0, L)³."""
    positions: np.ndarray
    box_side: float

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.ndim != 2 or self.positions.shape[1] != 3:
            raise DomainError(f"Positions must have shape (N, 3), got {self.positions.shape}")

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]

    def pair_distances(self) -> np.ndarray:
        """Minimum-image distances d_ij for i < j."""
        i, j = np.triu_indices(self.n_particles, k=1)
        delta = minimum_image(self.positions[i] - self.positions[j], self.box_side)
        return np.sqrt(np.sum(delta * delta, axis=-1))

    def is_valid(self, core_radius: float) -> bool:
        """True when no pair sits at distance <= core_radius."""
        if self.n_particles < 2 or core_radius == 0:
            return True
        return bool(np.all(self.pair_distances() > core_radius))


@dataclass
class ChainResult:
    """Production samples of one Metropolis chain, one per sweep."""
    samples: np.ndarray = field(repr=False)
    acceptance_rate: float
    step_size: float
    seed: int
    burn_in: int

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    def configuration(self, index: int, box_side: float) -> ParticleConfiguration:
        return ParticleConfiguration(self.samples[index], box_side)

    def to_dict(self) -> Dict[str, Any]:
        return {"n_samples": self.n_samples, "acceptance": self.acceptance_rate,
                "step_size": self.step_size, "seed": self.seed, "burn_in": self.burn_in}


@dataclass(frozen=True)
class EnergyEstimate:
    """Monte Carlo estimate of ⟨Ψ, H Ψ⟩/⟨Ψ, Ψ⟩ split into the A and B terms."""
    a_term: float
    b_term: float
    std_error: float
    acceptance_rate: float
    n_samples: int
    seed: int
    total: Optional[float] = None

    def __post_init__(self):
        total = self.a_term + self.b_term
        if self.total is None:
            object.__setattr__(self, "total", total)
        elif self.total != total:
            raise DomainError(f"total {self.total!r} differs from A + B = {total!r}")
        if not self.std_error >= 0:
            raise DomainError(f"std_error must be non-negative, got {self.std_error}")

    def to_dict(self) -> Dict[str, Any]:
        return {"A": self.a_term, "B": self.b_term, "total": self.total, "stderr": self.std_error,
                "acceptance": self.acceptance_rate, "n_samples": self.n_samples, "seed": self.seed}

    def csv_row(self, gas: TorusGas) -> Dict[str, Any]:
        """(N, L, core, ell, rho, A, B, total, stderr, acceptance, seed) row."""
        row = gas.to_dict()
        row.update({"A": self.a_term, "B": self.b_term, "total": self.total, "stderr": self.std_error,
                    "acceptance": self.acceptance_rate, "seed": self.seed})
        return row


CSV_COLUMNS = ("N", "L", "core", "ell", "rho", "A", "B", "total", "stderr", "acceptance", "seed")


@dataclass(frozen=True)
class DysonPoint:
    """One density of a dilute sweep at ℓ = ρ^{-1/3}."""
    rho_core3: float
    gas: TorusGas
    estimate: EnergyEstimate

    @property
    def reference(self) -> float:
        """4π·core·ρ·N."""
        return 4.0 * np.pi * self.gas.core_radius * self.gas.density * self.gas.n_particles

    @property
    def ratio_n(self) -> float:
        return self.estimate.total / self.reference

    @property
    def ratio_pairs(self) -> float:
        """Energy over 4π·core·ρ·(N-1), the pair count of a finite box."""
        n = self.gas.n_particles
        return self.ratio_n * n / (n - 1)

    @property
    def relative_error(self) -> float:
        return self.estimate.std_error / abs(self.estimate.total) if self.estimate.total else 0.0

    def to_dict(self) -> Dict[str, Any]:
        data = self.estimate.csv_row(self.gas)
        data.update({"rho_core3": self.rho_core3, "ratio_N": self.ratio_n,
                     "ratio_pairs": self.ratio_pairs, "relative_error": self.relative_error})
        return data


@dataclass
class ScalingReport:
    """Fitted ℓ-exponents of the three derivative expectations of the three-particle proxy."""
    ell_grid: List[float]
    values: Dict[str, List[float]]
    errors: Dict[str, List[float]]
    exponents: Dict[str, float]
    half_widths: Dict[str, float]
    prefactors: Dict[str, float] = field(default_factory=dict)
    fit_residuals: Dict[str, float] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.ell_grid) < 4:
            raise DomainError(f"A scaling fit needs at least 4 grid points, got {len(self.ell_grid)}")

    def rows(self) -> List[Dict[str, Any]]:
        rows = []
        for k, ell in enumerate(self.ell_grid):
            row: Dict[str, Any] = {"ell": ell}
            for name in self.values:
                row[name] = self.values[name][k]
                row[f"{name}_err"] = self.errors[name][k]
            rows.append(row)
        return rows

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        for name, exponent in self.exponents.items():
            data[f"{name}_exponent"] = exponent
            data[f"{name}_halfwidth"] = self.half_widths[name]
            if name in self.prefactors:
                data[f"{name}_prefactor"] = self.prefactors[name]
        data["warnings"] = "; ".join(self.warnings)
        return data

    def exponent_tuple(self) -> Tuple[float, ...]:
        return tuple(self.exponents[name] for name in self.values)
