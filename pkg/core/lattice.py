"""Cube- and ball-truncated lattice sums: e_Λ, second-order brackets and the LHY integral."""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.signal import fftconvolve

from config import config
from models.lattice_result import BracketKind, BracketVariant, LatticeSumResult
from utils.exceptions import DomainError, SolverError
from utils.parallel import CHUNK_COUNT, map_chunks, reduce_chunks, split_range

logger = logging.getLogger(__name__)

LHY_COEFFICIENT = 128.0 / (15.0 * math.sqrt(math.pi))

# (frequency, power) pairs of the oscillatory remainder of cube-truncated cos|p|/p² sums,
# ordered by importance: faces, then edges, then corners.
TAIL_MODES: Tuple[Tuple[float, float], ...] = (
    (1.0, 1.0),
    (1.0, 2.0),
    (math.sqrt(2.0), 1.5),
    (math.sqrt(3.0), 2.0),
    (1.0, 3.0),
    (math.sqrt(2.0), 2.5),
    (math.sqrt(3.0), 3.0),
)
_EXTRAPOLANT_COUNT = 10


# Enumeration helpers

def octant_shell(M: int) -> Tuple[np.ndarray, np.ndarray]:
    """Squared norms and multiplicities of the cube shell max|p_i| = M.

    Representatives 0 <= a <= b <= c = M carry the number of signed
    permutations they stand for.
    """
    if M == 0:
        return np.zeros(1), np.ones(1)
    a, b = np.triu_indices(M + 1)
    c = np.full_like(a, M)
    perms = np.where((a == b) & (b == c), 1, np.where((a == b) | (b == c), 3, 6))
    signs = 2 ** ((a > 0).astype(int) + (b > 0).astype(int) + 1)
    return (a * a + b * b + c * c).astype(float), (perms * signs).astype(float)


def shell_counts(m_max: int) -> np.ndarray:
    """r3(m): number of n ∈ ℤ³ with |n|² = m, for m = 0..m_max."""
    r1 = np.zeros(m_max + 1)
    n = np.arange(0, int(math.isqrt(m_max)) + 1)
    r1[n * n] = 2.0
    r1[0] = 1.0
    r2 = np.rint(fftconvolve(r1, r1)[: m_max + 1])
    return np.rint(fftconvolve(r2, r1)[: m_max + 1])


def _cos_shell_sum(M: int) -> float:
    norms2, weights = octant_shell(M)
    return float(np.sum(weights * np.cos(np.sqrt(norms2)) / norms2))


# e_Λ

def _tail_design(m: np.ndarray, n_modes: int) -> np.ndarray:
    x = m + 0.5
    columns = [np.ones_like(x)]
    for omega, power in TAIL_MODES[:n_modes]:
        columns.append(np.cos(omega * x) * x ** -power)
        columns.append(np.sin(omega * x) * x ** -power)
    return np.column_stack(columns)


def _cesaro(values: np.ndarray, passes: int = 2) -> float:
    for _ in range(passes):
        values = np.cumsum(values) / np.arange(1, len(values) + 1)
    return float(values[-1])


def tail_extrapolant(sums: np.ndarray, M: int) -> Tuple[float, float]:
    """Limit estimate of the partial sums S_1..S_M.

    The oscillatory remainder is fitted over the window [M/3, M], removed, and
    the de-oscillated partials are averaged by two Cesàro passes.

    Returns:
        (extrapolant, weighted rms of the fit).
    """
    lo = max(2, M // 3)
    m = np.arange(lo, M + 1, dtype=float)
    values = sums[lo - 1:M]
    n_modes = min(len(TAIL_MODES), (len(m) - 1) // 4)
    if n_modes == 0:
        return _cesaro(values), float(np.std(values))
    design = _tail_design(m, n_modes)
    weight = (m + 0.5) ** 2
    coefficients, *_ = np.linalg.lstsq(design * weight[:, None], values * weight, rcond=None)
    oscillation = design[:, 1:] @ coefficients[1:]
    residual = values - design @ coefficients
    return _cesaro(values - oscillation), float(np.sqrt(np.mean((residual * weight / weight[-1]) ** 2)))


def e_lambda(M_max: Optional[int] = None, accelerate: Optional[bool] = None,
             threads: Optional[int] = None, deterministic: Optional[bool] = None) -> LatticeSumResult:
    """e_Λ = 2 - lim Σ_{0 < max|p_i| <= M} cos|p|/p² over ℤ³.

    Args:
        M_max: Largest cube half-width.
        accelerate: Fit and average the oscillatory tail.
        threads: Workers for the shell evaluation (0 = one per CPU).
        deterministic: Reduce shells in a fixed order.
    """
    settings = config.get("lattice")
    M_max = int(settings["mmax"] if M_max is None else M_max)
    accelerate = settings["accelerate"] if accelerate is None else accelerate
    threads = settings["threads"] if threads is None else threads
    deterministic = settings["deterministic"] if deterministic is None else deterministic
    if M_max < 2:
        raise DomainError(f"M_max must be at least 2, got {M_max}")

    chunks = split_range(1, M_max + 1, CHUNK_COUNT)
    pieces = map_chunks(lambda shells: [_cos_shell_sum(M) for M in shells], chunks, threads, True)
    shell_sums = np.array([value for piece in pieces for value in piece])
    sums = np.cumsum(shell_sums)
    partials = [(M, 2.0 - s) for M, s in zip(range(1, M_max + 1), sums)]

    if not accelerate:
        diagnostic = abs(sums[-1] - sums[-2])
        return LatticeSumResult(value=2.0 - float(sums[-1]), partials=partials, extrapolated=False,
                                diagnostic=float(diagnostic))

    first = max(2, M_max - _EXTRAPOLANT_COUNT + 1)
    extrapolants = []
    rms = 0.0
    for M in range(first, M_max + 1):
        estimate, rms = tail_extrapolant(sums, M)
        extrapolants.append((M, 2.0 - estimate))
    values = [value for _, value in extrapolants]
    step = abs(values[-1] - values[-2]) if len(values) > 1 else abs(sums[-1] - sums[-2])
    diagnostic = max(step, rms)
    steps = np.abs(np.diff(values))
    if len(steps) > 2 and steps[-1] > 10 * np.median(steps):
        logger.warning(f"e_Λ extrapolants do not settle: last step {steps[-1]:.3e}")
    logger.info(f"e_Λ extrapolant at M={M_max}: {values[-1]:.10f} ± {diagnostic:.2e}")
    return LatticeSumResult(value=values[-1], partials=partials, extrapolated=True,
                            diagnostic=float(diagnostic), extrapolants=extrapolants)


def brute_force_cos_sum(M: int) -> float:
    """Σ cos|p|/p² over the full cube 0 < max|p_i| <= M, without symmetry reduction."""
    axis = np.arange(-M, M + 1)
    p1, p2, p3 = np.meshgrid(axis, axis, axis, indexing="ij")
    norms2 = (p1 ** 2 + p2 ** 2 + p3 ** 2).astype(float).ravel()
    norms2 = norms2[norms2 > 0]
    return float(np.sum(np.cos(np.sqrt(norms2)) / norms2))


# Bracket sums

def _bracket_tail(kind: BracketKind, cutoff: float) -> Tuple[float, float]:
    """Integral replacement of -½Σ beyond the cutoff and the size of its first neglected term."""
    if kind.variant == BracketVariant.MEAN_FIELD:
        def integrand(p):
            return float(kind.evaluate(np.array([p]))[0]) * p * p

        value, error = quad(integrand, cutoff, np.inf, limit=500)
        tail = -value / (4.0 * math.pi ** 2)
        return tail, abs(error) / (4.0 * math.pi ** 2) + abs(tail) * 0.1
    alpha = kind.coupling
    leading = alpha ** 3 / (8.0 * math.pi ** 2 * cutoff)
    next_order = -5.0 * alpha ** 4 / (96.0 * math.pi ** 2 * cutoff ** 3)
    # first term of the expansion not included
    neglected = 7.0 * alpha ** 5 / (160.0 * math.pi ** 2 * cutoff ** 5)
    return leading + next_order, abs(neglected)


def bracket_sum(kind: BracketKind, cutoff: Optional[float] = None, tail_correction: Optional[bool] = None,
                threads: Optional[int] = None, deterministic: Optional[bool] = None) -> LatticeSumResult:
    """-½ Σ of the bracket over p ∈ 2πℤ³, 0 < |p| <= cutoff.

    Shells of equal |p| are summed once with their lattice multiplicity.
    """
    settings = config.get("lattice")
    cutoff = float(settings["cutoff"] if cutoff is None else cutoff)
    tail_correction = settings["tail"] if tail_correction is None else tail_correction
    threads = settings["threads"] if threads is None else threads
    deterministic = settings["deterministic"] if deterministic is None else deterministic
    if cutoff < 2.0 * math.pi:
        raise DomainError(f"cutoff must be at least 2π, got {cutoff:g}")

    m_max = int(math.floor((cutoff / (2.0 * math.pi)) ** 2 * (1.0 + 1e-14)))
    counts = shell_counts(m_max)

    def shell_values(ms: range) -> np.ndarray:
        m = np.arange(ms.start, ms.stop)
        m = m[counts[m] > 0]
        if len(m) == 0:
            return np.zeros(0)
        return -0.5 * counts[m] * kind.evaluate(2.0 * math.pi * np.sqrt(m))

    chunks = split_range(1, m_max + 1, CHUNK_COUNT)
    total = reduce_chunks(lambda ms: float(np.sum(shell_values(ms))), chunks, threads, deterministic)

    # Cumulative partials at |p| = 2πn, n = 1..floor(cutoff/2π)
    all_m = np.arange(1, m_max + 1)
    per_m = np.zeros(m_max)
    present = counts[1:] > 0
    per_m[present] = -0.5 * counts[1:][present] * kind.evaluate(2.0 * math.pi * np.sqrt(all_m[present]))
    running = np.cumsum(per_m)
    n_max = int(math.isqrt(m_max))
    partials = [(2.0 * math.pi * n, float(running[n * n - 1])) for n in range(1, n_max + 1)]

    radius = cutoff / (2.0 * math.pi)
    boundary = abs(float(kind.evaluate(np.array([cutoff]))[0])) * radius ** 2
    tail, neglected = _bracket_tail(kind, cutoff)
    if tail_correction:
        value = total + tail
        diagnostic = neglected + boundary
    else:
        value = total
        diagnostic = abs(tail) + boundary
    logger.info(f"Bracket sum ({kind.variant.value}) to |p| <= {cutoff:.6g}: {value:.12g} ± {diagnostic:.2e}")
    return LatticeSumResult(value=float(value), partials=partials, extrapolated=bool(tail_correction),
                            diagnostic=float(diagnostic),
                            details={"cutoff": cutoff, "lattice_sum": total, "tail": tail})


# Thermodynamic limit

@dataclass(frozen=True)
class LhyResult:
    """Second-order energy per particle from the continuum bracket integral."""
    a: float
    rho: float
    leading: float
    second_order: float
    reference: float
    ratio: Optional[float]

    @property
    def total(self) -> float:
        return self.leading + self.second_order

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a": self.a,
            "rho": self.rho,
            "leading": self.leading,
            "second_order": self.second_order,
            "reference": self.reference,
            "ratio": self.ratio,
            "total": self.total,
        }


def lee_yang_expansion(a: float, rho: float, order: int = 2) -> float:
    """Energy per particle 4πaρ[1 + (128/(15√π))(ρa³)^{1/2}] truncated at the given order."""
    if order not in (1, 2):
        raise DomainError(f"order must be 1 or 2, got {order}")
    leading = 4.0 * math.pi * a * rho
    if order == 1:
        return leading
    return leading * (1.0 + LHY_COEFFICIENT * math.sqrt(rho * a ** 3))


def lhy_integral(a: float, rho: float) -> LhyResult:
    """Continuum version of the GP bracket sum at density ρ, per particle.

    Integrates -1/(2ρ) ∫ d³p/(2π)³ [p² + α - √(p⁴ + 2αp²) - α²/(2p²)], α = 8πaρ,
    in the scaled variable t = p/√α.
    """
    if a < 0 or rho <= 0:
        raise DomainError(f"Need a >= 0 and rho > 0, got a={a:g}, rho={rho:g}")
    if rho * a ** 3 >= 1e-2:
        raise DomainError(f"rho·a³ = {rho * a ** 3:.3g} is not dilute (must be < 1e-2)")
    leading = 4.0 * math.pi * a * rho
    if a == 0:
        return LhyResult(a, rho, 0.0, 0.0, 0.0, None)

    unit = BracketKind.gp(1.0 / (8.0 * math.pi))  # α = 1

    def integrand(t):
        return t * t * float(unit.evaluate(np.array([t]))[0])

    inner, err_inner = quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)
    outer, err_outer = quad(integrand, 1.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    integral = inner + outer
    if abs(err_inner) + abs(err_outer) > 1e-8 * abs(integral):
        raise SolverError(f"LHY quadrature did not converge (error {err_inner + err_outer:.2e})")
    alpha = 8.0 * math.pi * a * rho
    second = -integral * alpha ** 2.5 / (4.0 * math.pi ** 2 * rho)
    reference = leading * LHY_COEFFICIENT * math.sqrt(rho * a ** 3)
    logger.info(f"LHY integral at a={a:g}, rho={rho:g}: ratio {second / reference:.10f}")
    return LhyResult(a, rho, leading, second, reference, second / reference)
