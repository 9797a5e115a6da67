"""Finite Born series for N times the scattering length of N^{3β-1} V(N^β x).

The order-m partial is

    V̂(0) + Σ_{k=1}^{m-1} (-1)^k (2N)^{-k} Σ_p V̂(p/N^β) φ_k(p) / p²,

with φ_1(p) = V̂(p/N^β) and φ_{k+1}(p) = Σ_{q≠0} V̂((p-q)/N^β) φ_k(q) / q².
"""
import logging
import math
from typing import List, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad, simpson
from scipy.signal import fftconvolve

from config import config
from core.lattice import shell_counts
from models.lattice_result import BornGeometry, BornSeriesResult, BornSeriesSpec
from utils.exceptions import AccuracyError, DomainError
from utils.parallel import CHUNK_COUNT, reduce_chunks, split_range

logger = logging.getLogger(__name__)


def default_cutoff(spec: BornSeriesSpec) -> float:
    """A multiple of the Fourier width 2πN^β/R of the scaled potential, in lattice momentum units."""
    factor = float(config.get("lattice", "born_cutoff_factor"))
    return factor * 2.0 * math.pi * spec.regime.length_factor / spec.potential.support_radius


def _envelope(vhat, k_lo: float, k_hi: float) -> float:
    k = np.linspace(k_lo, k_hi, 257)
    return float(np.max(np.abs(vhat(k))))


def _tail_estimate(vhat, cutoff: float) -> float:
    """∫_K^∞ V̂(k)² dk for an envelope decaying like k⁻²."""
    return _envelope(vhat, 0.5 * cutoff, cutoff) ** 2 * cutoff / 3.0


def _check_tail(tail: float, vhat0: float, cutoff: float, tolerance: float, what: str):
    allowed = tolerance * abs(vhat0)
    if tail > allowed and allowed > 0:
        required = cutoff * (tail / allowed) ** (1.0 / 3.0)
        raise AccuracyError(
            f"{what}: V̂ tail beyond cutoff {cutoff:.6g} contributes {tail:.3e} "
            f"(> {allowed:.3e}); need a cutoff of about {required:.6g}",
            required=required)


# Torus geometry

def _torus_second_order(vhat, scale: float, cutoff: float, threads, deterministic) -> float:
    """Σ_{0<|p|<=K} V̂(p/N^β)²/p² over p ∈ 2πℤ³, summed shell by shell."""
    m_max = int(math.floor((cutoff / (2.0 * math.pi)) ** 2 * (1.0 + 1e-14)))
    counts = shell_counts(m_max)

    def shells(ms: range) -> float:
        m = np.arange(ms.start, ms.stop)
        m = m[counts[m] > 0]
        if len(m) == 0:
            return 0.0
        p = 2.0 * math.pi * np.sqrt(m)
        return float(np.sum(counts[m] * vhat(p / scale) ** 2 / (p * p)))

    chunks = split_range(1, m_max + 1, CHUNK_COUNT)
    return reduce_chunks(shells, chunks, threads, deterministic)


def _torus_iterated(vhat, scale: float, order: int, grid: int, cutoff: float) -> List[float]:
    """Σ_p V̂ φ_k / p² for k = 2..order-1 by FFT convolution.

    Momenta are restricted to 0 < |p| <= cutoff inside the cube |n_i| <= grid;
    a cutoff beyond 2π·grid is therefore truncated to the cube.
    """
    inner = np.arange(-grid, grid + 1)
    outer = np.arange(-2 * grid, 2 * grid + 1)
    n1, n2, n3 = np.meshgrid(inner, inner, inner, indexing="ij")
    m = n1 ** 2 + n2 ** 2 + n3 ** 2
    p = 2.0 * math.pi * np.sqrt(m)
    k1, k2, k3 = np.meshgrid(outer, outer, outer, indexing="ij")
    kernel = vhat(2.0 * math.pi * np.sqrt(k1 ** 2 + k2 ** 2 + k3 ** 2) / scale)
    weight = np.zeros_like(p)
    kept = (m > 0) & (m <= (cutoff / (2.0 * math.pi)) ** 2 * (1.0 + 1e-14))
    weight[kept] = 1.0 / p[kept] ** 2

    base = vhat(p / scale)
    phi = base.copy()
    sums = []
    for _ in range(2, order):
        phi = fftconvolve(kernel, phi * weight, mode="valid")
        sums.append(float(np.sum(base * phi * weight)))
    return sums


def _torus_partials(spec: BornSeriesSpec, cutoff: float, settings, threads, deterministic):
    vhat = spec.potential.fourier_transform
    scale = spec.regime.length_factor
    n = float(spec.regime.n_particles)
    vhat0 = float(vhat(np.array([0.0]))[0])
    tolerance = float(settings["born_tolerance"])

    partials = [vhat0]
    # Per-k sums are over lattice momenta, so the continuum tail picks up the density of states N^β
    tail = scale * _tail_estimate(vhat, cutoff / scale) / (2.0 * math.pi ** 2) / (2.0 * n)
    if spec.order >= 2:
        _check_tail(tail, vhat0, cutoff, tolerance, "second Born term")
        second = _torus_second_order(vhat, scale, cutoff, threads, deterministic)
        partials.append(vhat0 - second / (2.0 * n))
    if spec.order >= 3:
        grid = int(settings["born_kernel_grid"])
        grid_cutoff = 2.0 * math.pi * grid
        grid_tail = scale * _tail_estimate(vhat, grid_cutoff / scale) / (2.0 * math.pi ** 2) / (2.0 * n)
        try:
            _check_tail(grid_tail, vhat0, grid_cutoff, tolerance, "iterated Born kernel")
        except AccuracyError as e:
            points = int(math.ceil(e.required / (2.0 * math.pi)))
            raise AccuracyError(f"{e} (born_kernel_grid of about {points})", required=points) from e
        for k, value in enumerate(_torus_iterated(vhat, scale, spec.order, grid, cutoff), start=2):
            partials.append(partials[-1] + (-1.0) ** k * value / (2.0 * n) ** k)
    return partials, tail


# Continuum geometry

def _continuum_partials(spec: BornSeriesSpec, cutoff: float, settings):
    """Born terms with the lattice sums replaced by (2π)⁻³∫d³p, in the variable u = p/N^β."""
    vhat = spec.potential.fourier_transform
    coupling = spec.regime.length_factor / (2.0 * spec.regime.n_particles)
    k_max = cutoff / spec.regime.length_factor
    vhat0 = float(vhat(np.array([0.0]))[0])
    tolerance = float(settings["born_tolerance"])

    partials = [vhat0]
    tail = coupling * _tail_estimate(vhat, k_max) / (2.0 * math.pi ** 2)
    if spec.order >= 2:
        _check_tail(tail, vhat0, cutoff, tolerance, "second Born term")
        edges = np.linspace(0.0, k_max, 1 + max(1, int(math.ceil(k_max * spec.potential.support_radius / math.pi))))
        integral = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            value, _ = quad(lambda u: float(vhat(np.array([u]))[0]) ** 2, lo, hi,
                            epsabs=0.0, epsrel=1e-12, limit=200)
            integral += value
        partials.append(vhat0 - coupling * integral / (2.0 * math.pi ** 2))
    if spec.order >= 3:
        n_points = int(settings["born_radial_points"]) | 1
        u = np.linspace(0.0, k_max, n_points)
        v_u = vhat(u)

        # P(s) = ∫₀ˢ t V̂(t) dt on [0, 2K] by a dense trapezoid rule
        s = np.linspace(0.0, 2.0 * k_max, 8 * n_points)
        primitive = cumulative_trapezoid(s * vhat(s), s, initial=0.0)
        uu, vv = np.meshgrid(u, u, indexing="ij")
        with np.errstate(divide="ignore", invalid="ignore"):
            kernel = (np.interp(uu + vv, s, primitive) - np.interp(np.abs(uu - vv), s, primitive)) / (uu * vv)
        # limits of the angular integral on the axes
        kernel[0, :] = 2.0 * v_u
        kernel[:, 0] = 2.0 * v_u
        psi = v_u
        for k in range(2, spec.order):
            psi = simpson(kernel * psi[None, :], x=u, axis=1) / (4.0 * math.pi ** 2)
            term = (-coupling) ** k * float(simpson(v_u * psi, x=u)) / (2.0 * math.pi ** 2)
            partials.append(partials[-1] + term)
    return partials, tail


def born_series(spec: BornSeriesSpec, threads: Optional[int] = None,
                deterministic: Optional[bool] = None) -> BornSeriesResult:
    """Cumulative order-by-order partials of 8π N 𝔞 for the scaled potential.

    Raises:
        AccuracyError: the V̂ tail beyond the cutoff exceeds the configured
            tolerance; ``required`` estimates a sufficient cutoff.
    """
    settings = config.get("lattice")
    threads = settings["threads"] if threads is None else threads
    deterministic = settings["deterministic"] if deterministic is None else deterministic
    if spec.potential.is_trivial:
        return BornSeriesResult(partials=[0.0] * spec.order, momentum_cutoff=0.0, geometry=spec.geometry)
    cutoff = spec.momentum_cutoff if spec.momentum_cutoff is not None else default_cutoff(spec)
    if cutoff <= 0:
        raise DomainError(f"Momentum cutoff must be positive, got {cutoff}")

    if spec.geometry == BornGeometry.TORUS:
        partials, tail = _torus_partials(spec, cutoff, settings, threads, deterministic)
    else:
        partials, tail = _continuum_partials(spec, cutoff, settings)

    steps = np.abs(np.diff(partials))
    if len(steps) >= 2 and steps[-1] > steps[-2]:
        logger.warning(f"Born series steps grow with order: {steps.tolist()}")
    logger.info(f"Born series ({spec.geometry.value}, order {spec.order}): {partials[-1]:.12g}")
    return BornSeriesResult(partials=[float(p) for p in partials], momentum_cutoff=float(cutoff),
                            geometry=spec.geometry, tail_estimate=float(tail))
