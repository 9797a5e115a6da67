"""Lattice modes, assembled ground-state energies, Bogoliubov coefficients and excitation spectra."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from models.potential import RadialPotential
from utils.exceptions import DomainError

Triple = Tuple[int, int, int]
Occupation = Dict[Triple, int]


@dataclass(frozen=True, order=True)
class LatticeMode:
    """A momentum p = 2πn of the unit torus, n ∈ ℤ³ \\ {0}."""
    n: Triple

    def __post_init__(self):
        if len(self.n) != 3:
            raise DomainError(f"Lattice mode needs three components, got {self.n}")
        if tuple(self.n) == (0, 0, 0):
            raise DomainError("The zero mode is not an excitation mode")

    @property
    def norm2(self) -> int:
        return int(sum(c * c for c in self.n))

    @property
    def momentum(self) -> np.ndarray:
        return 2.0 * np.pi * np.asarray(self.n, dtype=float)

    @property
    def norm(self) -> float:
        return float(2.0 * np.pi * np.sqrt(self.norm2))

    def label(self) -> str:
        return "({},{},{})".format(*self.n)


def modes_within(cutoff: float) -> List[LatticeMode]:
    """All modes with 0 < |p| <= cutoff, ordered by |n|² then lexicographically."""
    n_max = int(np.floor(cutoff / (2.0 * np.pi)))
    axis = np.arange(-n_max, n_max + 1)
    n1, n2, n3 = np.meshgrid(axis, axis, axis, indexing="ij")
    triples = np.stack([n1.ravel(), n2.ravel(), n3.ravel()], axis=1)
    norm2 = np.sum(triples ** 2, axis=1)
    keep = (norm2 > 0) & (2.0 * np.pi * np.sqrt(norm2) <= cutoff * (1.0 + 1e-14))
    chosen = sorted((int(m), tuple(int(c) for c in t)) for m, t in zip(norm2[keep], triples[keep]))
    return [LatticeMode(t) for _, t in chosen]


class RegimeTag(Enum):
    """Interaction regime of an assembled energy."""
    GP = "gp"
    MEAN_FIELD = "mean_field"
    BETA = "beta"


@dataclass(frozen=True)
class EnergyRegime:
    """Inputs of a ground-state energy assembly."""
    tag: RegimeTag
    n_particles: int
    a: float = 0.0
    potential: Optional[RadialPotential] = None
    beta: float = 1.0

    def __post_init__(self):
        if self.n_particles < 1:
            raise DomainError(f"N must be at least 1, got {self.n_particles}")
        if self.tag == RegimeTag.GP and self.a < 0:
            raise DomainError(f"Scattering length must be non-negative, got {self.a}")
        if self.tag != RegimeTag.GP and self.potential is None:
            raise DomainError(f"The {self.tag.value} regime needs a potential")
        if self.potential is not None and self.potential.is_hard_core:
            raise DomainError("non-integrable potential: mean-field and β regimes need V̂")
        if self.tag == RegimeTag.BETA and not 0.0 < self.beta < 1.0:
            raise DomainError(f"beta must lie strictly between 0 and 1, got {self.beta}")

    @classmethod
    def gp(cls, n_particles: int, a: float) -> "EnergyRegime":
        return cls(RegimeTag.GP, int(n_particles), a=float(a))

    @classmethod
    def mean_field(cls, n_particles: int, potential: RadialPotential) -> "EnergyRegime":
        return cls(RegimeTag.MEAN_FIELD, int(n_particles), potential=potential, beta=0.0)

    @classmethod
    def scaled(cls, n_particles: int, beta: float, potential: RadialPotential) -> "EnergyRegime":
        return cls(RegimeTag.BETA, int(n_particles), potential=potential, beta=float(beta))

    @property
    def label(self) -> str:
        if self.tag == RegimeTag.BETA:
            return f"beta({self.beta:g})"
        return self.tag.value


@dataclass(frozen=True)
class EnergySummary:
    """Ground-state energy split into its leading, finite-volume and second-order parts."""
    leading: float
    finite_volume: float
    correction: float
    regime_tag: str
    total: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        total = self.leading + self.finite_volume + self.correction
        if self.total is None:
            object.__setattr__(self, "total", total)
        elif self.total != total:
            raise DomainError(f"total {self.total!r} differs from the sum of its parts {total!r}")
        if self.regime_tag != RegimeTag.GP.value and self.finite_volume != 0.0:
            raise DomainError(f"Regime {self.regime_tag} has no finite-volume term")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "leading": self.leading,
            "finite_volume": self.finite_volume,
            "correction": self.correction,
            "total": self.total,
            "regime": self.regime_tag,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EnergySummary":
        return cls(leading=data["leading"], finite_volume=data["finite_volume"],
                   correction=data["correction"], regime_tag=data["regime"], total=data.get("total"))


@dataclass
class CoefficientSequences:
    """τ_p from V̂ and η_p = -N ŵ(p) from a Neumann profile, keyed by mode triple."""
    tau: Dict[Triple, float] = field(default_factory=dict)
    eta: Dict[Triple, float] = field(default_factory=dict)
    # η at p = 0 is kept for export only
    eta_zero: Optional[float] = None
    eta_zero_used: bool = False

    def rows(self) -> List[Dict[str, Any]]:
        modes = sorted(set(self.tau) | set(self.eta), key=lambda t: (sum(c * c for c in t), t))
        return [{"mode": LatticeMode(t).label(), "tau": self.tau.get(t, ""), "eta": self.eta.get(t, "")}
                for t in modes]


def format_occupation(occupation: Occupation) -> str:
    """"n@(i,j,k)" items joined by ';', in lexicographic mode order."""
    return ";".join(f"{count}@({t[0]},{t[1]},{t[2]})" for t, count in sorted(occupation.items()))


def parse_occupation(text: str) -> Occupation:
    occupation: Occupation = {}
    for item in filter(None, text.split(";")):
        count, _, mode = item.partition("@")
        occupation[tuple(int(c) for c in mode.strip("()").split(","))] = int(count)
    return occupation


@dataclass
class ExcitationSpectrum:
    """All occupations of total excitation energy below a threshold, in ascending order."""
    entries: List[Tuple[Occupation, float]]
    threshold: float
    kind: str = "gp"

    def __post_init__(self):
        for occupation, energy in self.entries:
            if energy >= self.threshold:
                raise DomainError(f"Entry energy {energy} is not below the threshold {self.threshold}")
            if any(count <= 0 for count in occupation.values()):
                raise DomainError("Occupation numbers must be positive")
        energies = [energy for _, energy in self.entries]
        # equal energies may differ in the last bits and are ordered by occupation
        if any(b < a - 1e-11 * abs(a) for a, b in zip(energies[:-1], energies[1:])):
            raise DomainError("Spectrum entries must be sorted by energy")

    def __len__(self) -> int:
        return len(self.entries)

    def energies(self) -> np.ndarray:
        return np.array([energy for _, energy in self.entries])

    def keys(self) -> List[Tuple[Tuple[Triple, int], ...]]:
        """Hashable form of every occupation, for set comparisons."""
        return [tuple(sorted(occupation.items())) for occupation, _ in self.entries]

    def rows(self) -> List[Dict[str, Any]]:
        return [{"energy": energy, "modes": format_occupation(occupation)}
                for occupation, energy in self.entries]

    def to_dict(self) -> Dict[str, Any]:
        return {"threshold": self.threshold, "kind": self.kind, "n_entries": len(self.entries)}
