"""Blocking analysis of correlated Monte Carlo series."""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
from scipy.stats import chi2

from config import config
from utils.exceptions import AccuracyError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlockingResult:
    mean: float
    std_error: float
    level: int
    n_used: int
    plateau_found: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"mean": self.mean, "std_error": self.std_error, "level": self.level,
                "n_used": self.n_used, "plateau_found": self.plateau_found}


def blocking_error(series, minimum: Optional[int] = None) -> BlockingResult:
    """Standard error of the mean by successive pair-averaging.

    The series is truncated to its largest power-of-two prefix. The blocking
    level is chosen by the automated M_k test: the first level whose
    accumulated lag-one autocorrelation statistic falls below the 99 %
    chi-squared quantile.
    """
    x = np.asarray(series, dtype=float).ravel()
    minimum = int(config.get("vmc", "blocking_minimum") if minimum is None else minimum)
    if len(x) < max(minimum, 4):
        raise AccuracyError(f"Blocking needs at least {max(minimum, 4)} samples, got {len(x)}",
                            required=max(minimum, 4))

    d = int(np.floor(np.log2(len(x))))
    x = x[: 2 ** d]
    n_used = len(x)
    mu = float(np.mean(x))
    gamma = np.zeros(d)
    s = np.zeros(d)
    for i in range(d):
        n = len(x)
        gamma[i] = np.sum((x[:-1] - mu) * (x[1:] - mu)) / n
        s[i] = np.var(x)
        x = 0.5 * (x[0::2] + x[1::2])

    if np.all(s == 0):
        return BlockingResult(mu, 0.0, 0, n_used, True)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(s > 0, gamma / s, 0.0)
    statistic = np.cumsum((ratio ** 2 * 2.0 ** np.arange(1, d + 1)[::-1])[::-1])[::-1]
    quantiles = chi2.ppf(0.99, np.arange(1, d + 1))

    level = d - 1
    plateau = False
    for k in range(d):
        if statistic[k] < quantiles[k]:
            level = k
            plateau = True
            break
    if not plateau:
        logger.warning(f"Blocking found no plateau over {d} levels; more samples are needed")
    std_error = float(np.sqrt(s[level] / 2 ** (d - level)))
    logger.debug(f"Blocking: level {level} of {d}, std error {std_error:.3e}")
    return BlockingResult(mu, std_error, level, n_used, plateau)
