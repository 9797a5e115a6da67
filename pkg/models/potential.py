"""Radial two-body potentials and the scaled interaction regime."""
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Sequence, Tuple
import logging

import numpy as np

from utils.exceptions import ConfigurationError, DomainError

logger = logging.getLogger(__name__)

# Below this value of k * support the transform uses the sinc power series.
_SERIES_THRESHOLD = 0.2
_SINC_SERIES = (1.0, -1.0 / 6.0, 1.0 / 120.0, -1.0 / 5040.0, 1.0 / 362880.0)


class PotentialKind(Enum):
    """Shapes of radial potential supported by the toolkit."""
    HARD_SPHERE = "hard_sphere"
    SOFT_SPHERE = "soft_sphere"
    TABULATED = "tabulated"
    ZERO = "zero"


@dataclass(frozen=True)
class RadialPotential:
    """A repulsive, compactly supported radial interaction V(r)."""
    kind: PotentialKind
    radius: float = 0.0
    height: float = 0.0
    samples: Tuple[Tuple[float, float], ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.radius < 0:
            raise DomainError(f"Potential radius must be non-negative, got {self.radius}")
        if self.height < 0:
            raise DomainError(f"Potential height must be non-negative (repulsive), got {self.height}")
        if self.kind == PotentialKind.TABULATED:
            if not self.samples:
                raise DomainError("Tabulated potential needs at least one sample")
            radii = np.array([s[0] for s in self.samples], dtype=float)
            values = np.array([s[1] for s in self.samples], dtype=float)
            if np.any(radii < 0):
                raise DomainError("Tabulated radii must be non-negative")
            if np.any(np.diff(radii) <= 0):
                raise DomainError("Tabulated radii must be strictly increasing")
            if np.any(values < 0):
                raise DomainError("Tabulated potential has negative values; only repulsive potentials are supported")
            if not np.all(np.isfinite(values)):
                raise DomainError("Tabulated potential values must be finite")

    # Construction helpers

    @classmethod
    def hard_sphere(cls, radius: float) -> "RadialPotential":
        return cls(PotentialKind.HARD_SPHERE, radius=float(radius))

    @classmethod
    def soft_sphere(cls, height: float, radius: float) -> "RadialPotential":
        return cls(PotentialKind.SOFT_SPHERE, radius=float(radius), height=float(height))

    @classmethod
    def tabulated(cls, samples: Sequence[Tuple[float, float]]) -> "RadialPotential":
        return cls(PotentialKind.TABULATED,
                   samples=tuple((float(r), float(v)) for r, v in samples))

    @classmethod
    def zero(cls) -> "RadialPotential":
        return cls(PotentialKind.ZERO)

    @classmethod
    def parse(cls, text: str) -> "RadialPotential":
        """Parse ``hard:<r>``, ``soft:<h>,<r>``, ``table:<path>`` or ``zero``."""
        text = text.strip()
        name, _, args = text.partition(":")
        name = name.lower()
        try:
            if name == "zero" and not args:
                return cls.zero()
            if name == "hard":
                return cls.hard_sphere(float(args))
            if name == "soft":
                height, radius = (float(x) for x in args.split(","))
                return cls.soft_sphere(height, radius)
        except ValueError as e:
            raise ConfigurationError(f"Malformed potential '{text}': {e}") from e
        if name == "table":
            return cls.from_table(args)
        raise ConfigurationError(f"Unknown potential specification '{text}'")

    @classmethod
    def from_table(cls, path: str) -> "RadialPotential":
        """Load a two-column (radius, value) text table."""
        try:
            data = np.loadtxt(Path(path), comments="#", ndmin=2)
        except (OSError, ValueError) as e:
            raise ConfigurationError(f"Cannot read potential table {path}: {e}") from e
        if data.shape[1] != 2:
            raise ConfigurationError(f"Potential table {path} must have two columns")
        logger.debug(f"Loaded {len(data)} potential samples from {path}")
        return cls.tabulated(data.tolist())

    # Properties

    @property
    def is_hard_core(self) -> bool:
        return self.kind == PotentialKind.HARD_SPHERE

    @property
    def is_trivial(self) -> bool:
        """True if V vanishes identically."""
        if self.kind == PotentialKind.ZERO:
            return True
        if self.kind == PotentialKind.TABULATED:
            return all(v == 0 for _, v in self.samples)
        if self.kind == PotentialKind.SOFT_SPHERE:
            return self.height == 0 or self.radius == 0
        return self.radius == 0

    @property
    def support_radius(self) -> float:
        """Smallest R with V(r) = 0 for all r > R."""
        if self.kind in (PotentialKind.HARD_SPHERE, PotentialKind.SOFT_SPHERE):
            return 0.0 if self.is_trivial else self.radius
        if self.kind == PotentialKind.TABULATED:
            radii, values = self.table
            nonzero = np.nonzero(values)[0]
            if len(nonzero) == 0:
                return 0.0
            last = nonzero[-1]
            return float(radii[last + 1] if last + 1 < len(radii) else radii[last])
        return 0.0

    @property
    def table(self) -> Tuple[np.ndarray, np.ndarray]:
        radii = np.array([s[0] for s in self.samples], dtype=float)
        values = np.array([s[1] for s in self.samples], dtype=float)
        return radii, values

    @property
    def breakpoints(self) -> np.ndarray:
        """Radii where V is not smooth, inside the support."""
        if self.kind == PotentialKind.TABULATED:
            radii, _ = self.table
            return radii[(radii > 0) & (radii <= self.support_radius)]
        if self.support_radius > 0:
            return np.array([self.support_radius])
        return np.empty(0)

    @property
    def max_value(self) -> float:
        if self.kind == PotentialKind.HARD_SPHERE:
            return float("inf")
        if self.kind == PotentialKind.SOFT_SPHERE:
            return self.height
        if self.kind == PotentialKind.TABULATED:
            return float(self.table[1].max())
        return 0.0

    # Evaluation

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind == PotentialKind.HARD_SPHERE:
            return np.where(r < self.radius, np.inf, 0.0)
        if self.kind == PotentialKind.SOFT_SPHERE:
            return np.where(r <= self.radius, self.height, 0.0)
        if self.kind == PotentialKind.TABULATED:
            radii, values = self.table
            inside = np.interp(r, radii, values)
            return np.where(r > radii[-1], 0.0, inside)
        return np.zeros_like(r)

    def _segments(self) -> np.ndarray:
        """Rows (r0, r1, alpha, beta) with V = alpha + beta * r on [r0, r1]."""
        if self.kind == PotentialKind.SOFT_SPHERE:
            return np.array([[0.0, self.radius, self.height, 0.0]])
        if self.kind == PotentialKind.TABULATED:
            radii, values = self.table
            rows = []
            if radii[0] > 0:
                rows.append([0.0, radii[0], values[0], 0.0])
            for r0, r1, v0, v1 in zip(radii[:-1], radii[1:], values[:-1], values[1:]):
                slope = (v1 - v0) / (r1 - r0)
                rows.append([r0, r1, v0 - slope * r0, slope])
            return np.array(rows).reshape(-1, 4)
        return np.empty((0, 4))

    def fourier_transform(self, k) -> np.ndarray:
        """Closed-form V̂(k) = 4π ∫ r² V(r) sinc(kr) dr, vectorized over k."""
        if self.kind == PotentialKind.HARD_SPHERE:
            raise DomainError("non-integrable potential: hard-sphere interactions have no Fourier transform")
        k = np.abs(np.asarray(k, dtype=float))
        segments = self._segments()
        if len(segments) == 0:
            return np.zeros_like(k)
        r0, r1, alpha, beta = (segments[:, i] for i in range(4))
        kk = k.reshape(-1, 1)
        small = (kk[:, 0] * self.support_radius) < _SERIES_THRESHOLD

        # Power series of sinc for small k * r
        series = np.zeros((kk.shape[0], len(segments)))
        for j, c in enumerate(_SINC_SERIES):
            n = 3 + 2 * j
            term = (alpha * (r1 ** n - r0 ** n) / n
                    + beta * (r1 ** (n + 1) - r0 ** (n + 1)) / (n + 1))
            series += c * kk ** (2 * j) * term

        with np.errstate(divide="ignore", invalid="ignore"):
            ks = np.where(kk == 0, 1.0, kk)

            def first(r):
                return np.sin(ks * r) / ks ** 2 - r * np.cos(ks * r) / ks

            def second(r):
                return 2 * r * np.sin(ks * r) / ks ** 2 + (2 / ks ** 3 - r ** 2 / ks) * np.cos(ks * r)

            exact = (alpha * (first(r1) - first(r0)) + beta * (second(r1) - second(r0))) / ks

        per_segment = np.where(small[:, None], series, exact)
        result = 4.0 * np.pi * per_segment.sum(axis=1)
        return result.reshape(k.shape)

    def scaled(self, height_factor: float, length_factor: float) -> "RadialPotential":
        """Return r ↦ height_factor · V(length_factor · r)."""
        if self.kind == PotentialKind.HARD_SPHERE:
            return RadialPotential.hard_sphere(self.radius / length_factor)
        if self.kind == PotentialKind.SOFT_SPHERE:
            return RadialPotential.soft_sphere(self.height * height_factor, self.radius / length_factor)
        if self.kind == PotentialKind.TABULATED:
            return RadialPotential.tabulated([(r / length_factor, v * height_factor) for r, v in self.samples])
        return self

    # Serialization

    def describe(self) -> str:
        """Mini-language form of the potential."""
        if self.kind == PotentialKind.HARD_SPHERE:
            return f"hard:{self.radius!r}"
        if self.kind == PotentialKind.SOFT_SPHERE:
            return f"soft:{self.height!r},{self.radius!r}"
        if self.kind == PotentialKind.TABULATED:
            return f"table:<{len(self.samples)} samples>"
        return "zero"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "radius": self.radius,
            "height": self.height,
            "samples": [list(s) for s in self.samples],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RadialPotential":
        return cls(
            kind=PotentialKind(data["kind"]),
            radius=data.get("radius", 0.0),
            height=data.get("height", 0.0),
            samples=tuple(tuple(s) for s in data.get("samples", ())),
        )


def parse_potential(text: str) -> RadialPotential:
    """Parse the potential mini-language used by the CLI and run configs."""
    return RadialPotential.parse(text)


@dataclass(frozen=True)
class ScaledRegime:
    """Particle number N and scaling exponent β of the family N^{3β-1} V(N^β r)."""
    n_particles: int
    beta: float

    def __post_init__(self):
        if self.n_particles < 1:
            raise DomainError(f"N must be at least 1, got {self.n_particles}")
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError(f"beta must lie in [0, 1], got {self.beta}")

    @property
    def length_factor(self) -> float:
        """N^β, the factor by which lengths shrink."""
        return float(self.n_particles) ** self.beta

    @property
    def height_factor(self) -> float:
        """N^{3β-1}, the prefactor of the scaled pair interaction."""
        return float(self.n_particles) ** (3.0 * self.beta - 1.0)
