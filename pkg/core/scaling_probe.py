"""ℓ-scaling of derivative expectations of the three-particle product Φ = ∏ [1 - c/(|x_i - x_j| + ℓ)].

Expectations ⟨Φ, (-Δ₁)Φ⟩, ⟨Φ, (-Δ₁)(-Δ₂)Φ⟩ and ⟨Φ, (-Δ₁)(-Δ₂)(-Δ₃)Φ⟩ on the
unit torus are written as integrals of squared mixed gradients and estimated
by importance-sampled Monte Carlo, with x₁ fixed by translation invariance.
"""
import itertools
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad, tplquad
from scipy.stats import norm

from config import config
from models.vmc_models import ScalingReport, minimum_image
from utils.exceptions import DomainError

logger = logging.getLogger(__name__)

PAIRS: Tuple[Tuple[int, int], ...] = ((0, 1), (0, 2), (1, 2))
QUANTITIES: Dict[str, Tuple[int, ...]] = {
    "laplace_1": (0,),
    "laplace_12": (0, 1),
    "laplace_123": (0, 1, 2),
}
# Sampling mixture: which pairs are drawn close, and component weights
_COMPONENTS: Tuple[Tuple[Tuple[int, int], ...], ...] = (
    ((0, 1), (0, 2)),
    ((0, 1), (1, 2)),
    ((0, 2), (2, 1)),
    ((0, 1),),
    (),
)
_WEIGHTS = np.array([0.25, 0.25, 0.25, 0.15, 0.10])
_BALL = 0.5
_BATCH = 50_000


class RadialSampler:
    """Radial law q(r) ∝ (r + ℓ)⁻⁴ on the ball |r| <= ½, sampled by inverse CDF."""

    def __init__(self, ell: float, points: int = 4096):
        self.ell = ell
        r = np.concatenate(([0.0], np.geomspace(ell * 1e-4, _BALL, points)))
        density = r * r / (r + ell) ** 4
        cdf = cumulative_trapezoid(density, r, initial=0.0)
        self.normalization = 4.0 * math.pi * cdf[-1]
        self._r = r
        self._cdf = cdf / cdf[-1]

    def density(self, r: np.ndarray) -> np.ndarray:
        """Density in ℝ³ (per unit volume) at distance r."""
        value = 1.0 / ((r + self.ell) ** 4 * self.normalization)
        return np.where(r <= _BALL, value, 0.0)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        radius = np.interp(rng.random(n), self._cdf, self._r)
        direction = rng.normal(size=(n, 3))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        return radius[:, None] * direction


def _pair_factors(delta: np.ndarray, c: float, ell: float):
    """F, G = ∇_i F and H = Hess F at displacement x_i - x_j."""
    r = np.maximum(np.linalg.norm(delta, axis=1), 1e-300)
    unit = delta / r[:, None]
    s = r + ell
    value = 1.0 - c / s
    first = c / s ** 2
    second = -2.0 * c / s ** 3
    grad = first[:, None] * unit
    outer = unit[:, :, None] * unit[:, None, :]
    hess = second[:, None, None] * outer + (first / r)[:, None, None] * (np.eye(3)[None] - outer)
    return value, grad, hess


def _factor_derivative(pair: Tuple[int, int], particles: Tuple[int, ...], factors):
    value, grad, hess = factors[pair]
    if not particles:
        return value
    if len(particles) == 1:
        return grad if particles[0] == pair[0] else -grad
    return -hess


def mixed_gradient_square(positions: np.ndarray, derivatives: Tuple[int, ...], c: float, ell: float,
                          pairs: Sequence[Tuple[int, int]] = PAIRS) -> np.ndarray:
    """|∇_{i₁}∇_{i₂}…Φ|² summed over all components, for Φ the product over ``pairs``.

    The product rule is expanded by assigning each differentiated particle to
    one of the factors that contains it; every assignment contributes an outer
    product assembled with einsum.
    """
    box = 1.0
    factors = {pair: _pair_factors(minimum_image(positions[:, pair[0]] - positions[:, pair[1]], box), c, ell)
               for pair in pairs}
    letters = "abc"
    output = "s" + letters[: len(derivatives)]
    choices = [[pair for pair in pairs if particle in pair] for particle in derivatives]
    tensor = 0.0
    for assignment in itertools.product(*choices):
        operands, subscripts = [], []
        for pair in pairs:
            mine = tuple(d for d, chosen in zip(derivatives, assignment) if chosen == pair)
            operands.append(_factor_derivative(pair, mine, factors))
            subscripts.append("s" + "".join(letters[derivatives.index(d)] for d in mine))
        tensor = tensor + np.einsum(",".join(subscripts) + "->" + output, *operands)
    return np.sum(np.reshape(tensor ** 2, (positions.shape[0], -1)), axis=1)


def _draw(rng: np.random.Generator, sampler: RadialSampler, n: int) -> np.ndarray:
    """Positions with x₁ = 0 drawn from the mixture of close-pair components."""
    component = rng.choice(len(_COMPONENTS), size=n, p=_WEIGHTS)
    x = np.zeros((n, 3, 3))
    x[:, 1] = rng.random((n, 3)) - 0.5
    x[:, 2] = rng.random((n, 3)) - 0.5
    for k, close in enumerate(_COMPONENTS):
        rows = np.flatnonzero(component == k)
        for anchor, moved in close:
            x[rows, moved] = x[rows, anchor] + sampler.sample(rng, len(rows))
    return x


def _mixture_density(x: np.ndarray, sampler: RadialSampler) -> np.ndarray:
    distances = {pair: np.linalg.norm(minimum_image(x[:, pair[0]] - x[:, pair[1]], 1.0), axis=1)
                 for pair in PAIRS}

    def q(a, b):
        return sampler.density(distances[(min(a, b), max(a, b))])

    density = np.zeros(x.shape[0])
    for weight, close in zip(_WEIGHTS, _COMPONENTS):
        term = np.full(x.shape[0], weight)
        for anchor, moved in close:
            term = term * q(anchor, moved)
        density += term
    return density


def probe_expectations(ell: float, n_for_proxy: int, quadrature_samples: int, seed: int = 0,
                       a: Optional[float] = None,
                       pairs: Sequence[Tuple[int, int]] = PAIRS,
                       quantities: Optional[Dict[str, Tuple[int, ...]]] = None) -> Dict[str, Tuple[float, float]]:
    """Monte Carlo value and standard error of each derivative expectation at one ℓ."""
    a = float(config.get("probe", "scattering_length") if a is None else a)
    quantities = QUANTITIES if quantities is None else quantities
    c = a / n_for_proxy
    if c == 0.0:
        return {name: (0.0, 0.0) for name in quantities}
    rng = np.random.default_rng(seed)
    sampler = RadialSampler(ell)
    sums = {name: 0.0 for name in quantities}
    squares = {name: 0.0 for name in quantities}
    remaining = int(quadrature_samples)
    while remaining > 0:
        n = min(_BATCH, remaining)
        x = _draw(rng, sampler, n)
        density = _mixture_density(x, sampler)
        for name, derivatives in quantities.items():
            values = mixed_gradient_square(x, derivatives, c, ell, pairs) / density
            sums[name] += float(np.sum(values))
            squares[name] += float(np.sum(values * values))
        remaining -= n
    total = int(quadrature_samples)
    result = {}
    for name in quantities:
        mean = sums[name] / total
        variance = max(squares[name] / total - mean * mean, 0.0)
        result[name] = (mean, math.sqrt(variance / total))
    return result


def pair_gradient_oracle(ell: float, c: float) -> float:
    """∫_{torus} |∇F(|r|)|² d³r for the single factor F = 1 - c/(r + ℓ).

    Radial quadrature over the ball |r| <= ½ plus a cubature of the eight
    corners of the unit cell outside it.
    """
    def grad_sq(r):
        return (c / (r + ell) ** 2) ** 2

    ball, _ = quad(lambda r: 4.0 * math.pi * r * r * grad_sq(r), 0.0, _BALL, points=[ell],
                   epsabs=0.0, epsrel=1e-12, limit=400)
    corner, _ = tplquad(lambda z, y, x: grad_sq(math.sqrt(x * x + y * y + z * z)),
                        0.0, _BALL, 0.0, _BALL,
                        lambda x, y: math.sqrt(max(0.0, _BALL ** 2 - x * x - y * y)), _BALL,
                        epsabs=0.0, epsrel=1e-10)
    return ball + 8.0 * corner


def scaling_probe(ell_grid: Sequence[float], n_for_proxy: Optional[int] = None,
                  quadrature_samples: Optional[int] = None, seed: int = 0,
                  a: Optional[float] = None) -> ScalingReport:
    """Fit log ⟨…⟩ against log ℓ for the three derivative expectations.

    Fit residuals above the configured threshold are reported as warnings.
    """
    settings = config.get("probe")
    n_for_proxy = int(settings["n_for_proxy"] if n_for_proxy is None else n_for_proxy)
    quadrature_samples = int(settings["quadrature_samples"] if quadrature_samples is None else quadrature_samples)
    a = float(settings["scattering_length"] if a is None else a)
    grid = sorted(float(ell) for ell in ell_grid)
    if len(grid) < 4:
        raise DomainError(f"The ℓ grid needs at least 4 points, got {len(grid)}")
    if grid[0] <= 0 or grid[-1] / grid[0] < 10.0 * (1.0 - 1e-12):
        raise DomainError(f"The ℓ grid must span at least one decade, got [{grid[0]:g}, {grid[-1]:g}]")
    if grid[-1] > 0.1:
        raise DomainError(f"ℓ must stay small against the unit torus, got {grid[-1]:g}")

    values: Dict[str, List[float]] = {name: [] for name in QUANTITIES}
    errors: Dict[str, List[float]] = {name: [] for name in QUANTITIES}
    for k, ell in enumerate(grid):
        result = probe_expectations(ell, n_for_proxy, quadrature_samples, seed + k, a)
        for name, (mean, err) in result.items():
            values[name].append(mean)
            errors[name].append(err)
        logger.info(f"Scaling probe at ell={ell:g}: " + ", ".join(f"{n}={v[0]:.4e}" for n, v in result.items()))

    report = ScalingReport(ell_grid=grid, values=values, errors=errors, exponents={}, half_widths={})
    if a == 0.0:
        for name in QUANTITIES:
            report.exponents[name] = 0.0
            report.half_widths[name] = 0.0
        report.warnings.append("zero scattering length: expectations vanish identically")
        return report

    z = float(norm.ppf(0.975))
    log_ell = np.log(grid)
    threshold = float(settings["max_fit_residual"])
    for name in QUANTITIES:
        v = np.array(values[name])
        e = np.array(errors[name])
        sigma = np.where(v > 0, e / v, 1.0)
        coefficients, covariance = np.polyfit(log_ell, np.log(v), 1, w=1.0 / np.maximum(sigma, 1e-12), cov="unscaled")
        residual = float(np.sqrt(np.mean((np.log(v) - np.polyval(coefficients, log_ell)) ** 2)))
        report.exponents[name] = float(coefficients[0])
        report.half_widths[name] = z * float(math.sqrt(covariance[0, 0]))
        report.prefactors[name] = float(math.exp(coefficients[1]))
        report.fit_residuals[name] = residual
        if residual > threshold:
            message = f"{name}: log-log fit residual {residual:.3f} exceeds {threshold:g}"
            report.warnings.append(message)
            logger.warning(message)
    logger.info(f"Scaling exponents: {report.exponents}")
    return report
