from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np


@dataclass(frozen=True)
class ScatteringSolution:
    """Zero-energy scattering solution f and its scattering length."""
    scattering_length: float
    radii: np.ndarray = field(repr=False)
    profile: np.ndarray = field(repr=False)
    fit_residual: float = 0.0
    converged: bool = True

    def f(self, r) -> np.ndarray:
        """Interpolated profile; beyond the sampled range uses 1 - a/r."""
        r = np.asarray(r, dtype=float)
        inside = np.interp(r, self.radii, self.profile)
        with np.errstate(divide="ignore"):
            outside = 1.0 - self.scattering_length / r
        return np.where(r > self.radii[-1], outside, inside)

    def to_rows(self) -> List[Tuple[float, float]]:
        return list(zip(self.radii.tolist(), self.profile.tolist()))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scattering_length": self.scattering_length,
            "fit_residual": self.fit_residual,
            "converged": self.converged,
        }
