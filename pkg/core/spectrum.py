"""Enumeration of Bogoliubov excitation occupations below an energy threshold."""
import logging
import math
import threading
from typing import List, Optional, Tuple

import numpy as np

from config import config
from core.bogoliubov import dispersion
from models.energy import ExcitationSpectrum, Occupation, Triple, modes_within
from models.lattice_result import BracketKind
from utils.exceptions import DomainError, ResourceError
from utils.parallel import map_chunks

logger = logging.getLogger(__name__)


def excitation_modes(kind: BracketKind, threshold: float) -> Tuple[List[Triple], np.ndarray]:
    """Modes with ε(p) < threshold, sorted by (ε, n).

    Every law satisfies ε(p) >= p², so the ball |p| < √threshold holds them all.
    """
    modes = modes_within(math.sqrt(threshold))
    if not modes:
        return [], np.zeros(0)
    energies = dispersion(np.array([m.norm for m in modes]), kind)
    chosen = sorted((float(e), m.n) for e, m in zip(energies, modes) if e < threshold)
    return [t for _, t in chosen], np.array([e for e, _ in chosen])


def estimate_count(energies: np.ndarray, threshold: float, bins: int = 4096) -> int:
    """Upper estimate of the number of occupations below threshold.

    Counts multisets with energies rounded down to a grid of ``bins`` cells,
    which can only add entries.
    """
    width = threshold / bins
    cells = np.floor(energies / width).astype(int)
    counts = np.zeros(bins, dtype=float)
    counts[0] = 1.0
    for c in cells:
        c = max(int(c), 1)
        for e in range(c, bins):
            counts[e] += counts[e - c]
    return int(min(counts.sum(), 1e18))


def _sort_key(entry):
    occupation, energy = entry
    return (float(f"{energy:.12e}"), tuple(sorted(occupation.items())))


def _enumerate_from(first: int, triples: List[Triple], energies: np.ndarray, threshold: float,
                    guard: int, counter) -> List[Tuple[Occupation, float]]:
    """Occupations whose lowest-index occupied mode is ``first``.

    Modes are added with non-decreasing index, so each multiset appears once;
    energies are sorted, so a mode that does not fit ends the branch.
    """
    entries = []
    stack = [(first, energies[first], [first])]
    while stack:
        index, energy, chosen = stack.pop()
        occupation: Occupation = {}
        for i in chosen:
            occupation[triples[i]] = occupation.get(triples[i], 0) + 1
        entries.append((occupation, float(energy)))
        if counter.add(1) > guard:
            return entries
        for nxt in range(index, len(triples)):
            total = energy + energies[nxt]
            if total >= threshold:
                break
            stack.append((nxt, total, chosen + [nxt]))
    return entries


class _Counter:
    def __init__(self):
        self._value = 0
        self._lock = threading.Lock()

    def add(self, amount: int) -> int:
        with self._lock:
            self._value += amount
            return self._value


def enumerate_excitations(kind: BracketKind, threshold: float, guard: Optional[int] = None,
                          threads: Optional[int] = 1) -> ExcitationSpectrum:
    """All finite occupations {n_p} with Σ n_p ε(p) < threshold, ascending in energy.

    Ties are broken by the lexicographic order of the occupation items.

    Raises:
        ResourceError: more than ``guard`` entries; carries an estimate of the count.
    """
    if not (threshold > 0 and math.isfinite(threshold)):
        raise DomainError(f"threshold must be positive and finite, got {threshold}")
    guard = int(config.get("bogoliubov", "spectrum_guard") if guard is None else guard)
    triples, energies = excitation_modes(kind, threshold)
    counter = _Counter()
    counter.add(1)  # vacuum

    pieces = map_chunks(lambda first: _enumerate_from(first, triples, energies, threshold, guard, counter),
                        list(range(len(triples))), threads, deterministic=True)
    count = counter.add(0)
    if count > guard:
        estimate = max(estimate_count(energies, threshold), guard + 1)
        raise ResourceError(f"Spectrum below ζ={threshold:g} has more than {guard} entries "
                            f"(estimated {estimate})", estimate=estimate)

    entries = [({}, 0.0)] + [entry for piece in pieces for entry in piece]
    entries.sort(key=_sort_key)
    logger.info(f"Enumerated {len(entries)} excitation entries below {threshold:g} over {len(triples)} modes")
    return ExcitationSpectrum(entries, float(threshold), kind.variant.value)


def exhaustive_excitations(kind: BracketKind, threshold: float) -> List[Tuple[Occupation, float]]:
    """Occupation vectors below threshold by a mode-by-mode depth-first search.

    Independent of :func:`enumerate_excitations`: every mode gets an explicit
    count from 0 to its bound, in the |n|² order of the lattice enumeration.
    """
    modes = modes_within(math.sqrt(threshold))
    if not modes:
        return [({}, 0.0)]
    eps = dispersion(np.array([m.norm for m in modes]), kind)
    results = []

    def search(i: int, budget: float, counts: List[int]):
        if i == len(modes):
            occupation = {modes[j].n: c for j, c in enumerate(counts) if c > 0}
            energy = sum(c * float(eps[j]) for j, c in enumerate(counts))
            if energy < threshold:
                results.append((occupation, energy))
            return
        bound = int(budget // eps[i]) if eps[i] < threshold else 0
        for c in range(bound + 1):
            if c * eps[i] < budget or c == 0:
                search(i + 1, budget - c * eps[i], counts + [c])

    search(0, threshold, [])
    return results
