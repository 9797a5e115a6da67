"""Subcommand runners: turn a RunSpec into a RunResult by calling the numerical modules."""
from typing import Callable, Dict, Type, Union
import logging

import numpy as np

from config import config
from core.bogoliubov import ground_state_energy
from core.born_series import born_series
from core.lattice import bracket_sum, e_lambda, lhy_integral
from core.neumann import effective_scattering_length, neumann_ground_state, profile_norms, ratio_residual
from core.scaling_probe import scaling_probe
from core.scattering import fourier_coefficient, scattering_length
from core.spectrum import enumerate_excitations
from core.vmc import two_body_oracle
from models.energy import EnergyRegime
from models.lattice_result import BornGeometry, BornSeriesSpec, BracketKind
from models.potential import RadialPotential, ScaledRegime, parse_potential
from models.run_spec import RunResult, RunSpec
from models.vmc_models import CSV_COLUMNS, TorusGas
from utils.exceptions import ConfigurationError
from utils.export import append_csv
from .base_service import Service
from .chain_service import ChainService
from .service_registry import ServiceRegistry

logger = logging.getLogger(__name__)


def running_service(service_class: Type[Service], threads: int) -> Service:
    """Registered instance of ``service_class``, started on first use."""
    service = ServiceRegistry().register(service_class, threads=threads)
    if not service.is_running:
        service.start()
    return service


def _core(value: Union[float, str]) -> Union[float, RadialPotential]:
    """A number is a hard-core radius; text goes through the potential mini-language."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    try:
        return float(value)
    except ValueError:
        return parse_potential(str(value))


def _bracket_kind(spec: RunSpec, variant_key: str) -> BracketKind:
    variant = str(spec.get(variant_key)).lower()
    if variant == "gp":
        return BracketKind.gp(float(spec.require("a")))
    if variant == "mean_field":
        return BracketKind.mean_field(parse_potential(spec.require("potential")))
    if variant in ("beta", "beta_regime"):
        vhat0 = spec.get("vhat0")
        if vhat0 is None:
            vhat0 = fourier_coefficient(parse_potential(spec.require("potential")), 0.0)
        return BracketKind.beta_regime(float(vhat0))
    raise ConfigurationError(f"Unknown bracket variant '{variant}'")


def run_scattering(spec: RunSpec) -> RunResult:
    potential = parse_potential(spec.require("potential"))
    if spec.get("fourier") is not None:
        p_norm = float(spec.get("fourier"))
        value = fourier_coefficient(potential, p_norm)
        return RunResult(summary=f"V̂({p_norm:g}) = {value:.10g}",
                         payload={"potential": potential.describe(), "p_norm": p_norm,
                                  "fourier_coefficient": value})
    r_max = spec.get("r_max")
    tol = spec.get("tol")
    solution = scattering_length(potential, None if r_max is None else float(r_max),
                                 None if tol is None else float(tol))
    payload = {"potential": potential.describe()}
    payload.update(solution.to_dict())
    rows = [{"r": r, "f": f} for r, f in solution.to_rows()] if spec.get("profile") else []
    return RunResult(summary=f"scattering length a = {solution.scattering_length:.6f}",
                     payload=payload, rows=rows)


def run_neumann(spec: RunSpec) -> RunResult:
    core = _core(spec.require("core"))
    ell = float(spec.require("ell"))
    tol = spec.get("tol")
    tol = None if tol is None else float(tol)
    solution = neumann_ground_state(core, ell, tol)
    payload = solution.to_dict()
    payload["a_effective"] = effective_scattering_length(solution)
    if solution.hard_core and solution.core_radius > 0:
        payload["lambda_ratio"] = payload["a_effective"] / solution.core_radius
    if spec.get("r") is not None:
        r = float(spec.get("r"))
        norms = profile_norms(solution, r, include_gradient=r < 1.5)
        payload.update({f"norm_{key}": value for key, value in norms.to_dict().items()})
    if spec.get("ell0") is not None:
        outer = neumann_ground_state(core, float(spec.get("ell0")), tol)
        payload["ell0"] = outer.ell
        payload["eigenvalue0"] = outer.eigenvalue
        payload["ratio_residual"] = ratio_residual(solution, outer)
    rows = [{"r": r, "f": f} for r, f in solution.to_rows()]
    return RunResult(summary=f"lambda = {solution.eigenvalue:.10g} at ell = {ell:g}",
                     payload=payload, rows=rows)


def run_elambda(spec: RunSpec) -> RunResult:
    mmax = spec.get("mmax")
    accelerate = spec.get("accelerate")
    result = e_lambda(None if mmax is None else int(mmax), None if accelerate is None else bool(accelerate),
                      threads=spec.threads, deterministic=spec.deterministic)
    return RunResult(summary=f"e_Lambda = {result.value:.10f} (diagnostic {result.diagnostic:.2e})",
                     payload=result.to_dict(), rows=result.rows())


def run_bracket(spec: RunSpec) -> RunResult:
    kind = _bracket_kind(spec, "variant")
    cutoff = spec.get("cutoff")
    tail = spec.get("tail")
    result = bracket_sum(kind, None if cutoff is None else float(cutoff), None if tail is None else bool(tail),
                         threads=spec.threads, deterministic=spec.deterministic)
    payload = kind.to_dict()
    payload.update(result.to_dict())
    return RunResult(summary=f"bracket sum = {result.value:.10g}", payload=payload, rows=result.rows())


def run_born(spec: RunSpec) -> RunResult:
    potential = parse_potential(spec.require("potential"))
    regime = ScaledRegime(int(spec.require("n")), float(spec.require("beta")))
    order = int(spec.get("order", config.get("lattice", "born_order")))
    cutoff = spec.get("cutoff")
    try:
        geometry = BornGeometry(str(spec.get("geometry")).lower())
    except ValueError as e:
        raise ConfigurationError(f"Unknown Born geometry: {e}") from e
    born_spec = BornSeriesSpec(potential, regime, order, None if cutoff is None else float(cutoff), geometry)
    result = born_series(born_spec, threads=spec.threads, deterministic=spec.deterministic)
    rows = [{"order": k + 1, "partial": value} for k, value in enumerate(result.partials)]
    return RunResult(summary=f"8πNa = {result.partials[-1]:.10g} at order {order}",
                     payload=result.to_dict(), rows=rows)


def run_lhy(spec: RunSpec) -> RunResult:
    result = lhy_integral(float(spec.require("a")), float(spec.require("rho")))
    ratio = "n/a" if result.ratio is None else f"{result.ratio:.8f}"
    return RunResult(summary=f"second-order energy per particle {result.second_order:.6e} (ratio {ratio})",
                     payload=result.to_dict())


def run_energy(spec: RunSpec) -> RunResult:
    n = int(spec.require("n"))
    regime_name = str(spec.get("regime")).lower()
    if regime_name == "gp":
        regime = EnergyRegime.gp(n, float(spec.require("a")))
    elif regime_name == "mean_field":
        regime = EnergyRegime.mean_field(n, parse_potential(spec.require("potential")))
    elif regime_name == "beta":
        regime = EnergyRegime.scaled(n, float(spec.require("beta")), parse_potential(spec.require("potential")))
    else:
        raise ConfigurationError(f"Unknown regime '{regime_name}'")
    cutoff, mmax, order = spec.get("cutoff"), spec.get("mmax"), spec.get("order")
    summary = ground_state_energy(regime, None if cutoff is None else float(cutoff),
                                  None if mmax is None else int(mmax), None if order is None else int(order),
                                  threads=spec.threads, deterministic=spec.deterministic)
    return RunResult(summary=f"E = {summary.total:.10g} ({regime.label})", payload=summary.to_dict())


def run_spectrum(spec: RunSpec) -> RunResult:
    kind = _bracket_kind(spec, "kind")
    guard = spec.get("guard")
    spectrum = enumerate_excitations(kind, float(spec.require("zeta")), None if guard is None else int(guard),
                                     threads=spec.threads)
    return RunResult(summary=f"{len(spectrum)} excitation level(s) below {spectrum.threshold:g}",
                     payload=spectrum.to_dict(), rows=spectrum.rows(), columns=["energy", "modes"])


def run_vmc(spec: RunSpec) -> RunResult:
    gas = TorusGas(float(spec.get("L")), int(spec.require("N")), float(spec.require("core")),
                   float(spec.require("ell")))
    solution = neumann_ground_state(gas.core_radius, gas.ell)
    service = running_service(ChainService, spec.threads)
    step_size = spec.get("step_size")
    _, _, merged = service.run_chains(
        gas, solution, chains=spec.get("chains"), steps=spec.get("steps"), burn_in=spec.get("burn_in"),
        step_size=None if step_size is None else float(step_size), seed=int(spec.get("seed")))
    payload = gas.to_dict()
    payload.update(merged.to_dict())
    if gas.n_particles == 2:
        payload["oracle"] = two_body_oracle(gas, solution)
    row = merged.csv_row(gas)
    if spec.get("append") is not None:
        append_csv(spec.get("append"), row, CSV_COLUMNS, spec.deterministic)
    return RunResult(summary=f"E = {merged.total:.6g} ± {merged.std_error:.2e} "
                             f"(acceptance {merged.acceptance_rate:.3f})",
                     payload=payload, rows=[row], columns=list(CSV_COLUMNS))


def run_probe(spec: RunSpec) -> RunResult:
    grid = np.geomspace(float(spec.get("ell_min")), float(spec.get("ell_max")), int(spec.get("points")))
    n_for_proxy, samples, a = spec.get("n_for_proxy"), spec.get("samples"), spec.get("a")
    report = scaling_probe(grid, None if n_for_proxy is None else int(n_for_proxy),
                           None if samples is None else int(samples), int(spec.get("seed")),
                           None if a is None else float(a))
    exponents = ", ".join(f"{value:.3f}" for value in report.exponent_tuple())
    return RunResult(summary=f"ell-exponents ({exponents})", payload=report.to_dict(), rows=report.rows())


RUNNERS: Dict[str, Callable[[RunSpec], RunResult]] = {
    "scattering": run_scattering,
    "neumann": run_neumann,
    "elambda": run_elambda,
    "bracket": run_bracket,
    "born": run_born,
    "lhy": run_lhy,
    "energy": run_energy,
    "spectrum": run_spectrum,
    "vmc": run_vmc,
    "probe": run_probe,
}


def run(spec: RunSpec) -> RunResult:
    """Execute one run specification."""
    runner = RUNNERS.get(spec.subcommand)
    if runner is None:
        raise ConfigurationError(f"No runner for subcommand '{spec.subcommand}'")
    logger.info(f"Running {spec.subcommand} with {spec.canonical_parameters()}")
    return runner(spec)
